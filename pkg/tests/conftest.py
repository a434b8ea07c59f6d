"""Shared deterministic generators for systems and fiber elements."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from bisimgames import fiber
from bisimgames.fiber import Carrier, CarrierMap, FiberElement
from bisimgames.system import Dfa, KripkeFrame, MarkovChain, Nfa


@pytest.fixture
def rng():
    return random.Random(20250811)


def letters(n: int) -> tuple[str, ...]:
    return tuple(f"s{i}" for i in range(n))


def random_kripke(rng: random.Random, n: int, twin: bool = False) -> KripkeFrame:
    elems = list(letters(n))
    succ = {s: frozenset(t for t in elems if rng.random() < 0.4) for s in elems}
    if twin and n >= 2:
        # duplicate one state's behaviour so nontrivial bisimilar pairs exist
        src, dup = rng.sample(elems, 2)
        succ[dup] = succ[src]
    return KripkeFrame(Carrier(tuple(elems)), succ)


def random_chain(rng: random.Random, n: int, twin: bool = False) -> MarkovChain:
    elems = list(letters(n))
    kernel: dict[str, dict[str, Fraction]] = {}
    for s in elems:
        row: dict[str, Fraction] = {}
        budget = Fraction(1)
        for t in elems:
            if rng.random() < 0.45 and budget > 0:
                w = Fraction(rng.randint(1, 4), rng.choice((4, 5, 8)))
                w = min(w, budget)
                if w > 0:
                    row[t] = w
                    budget -= w
        kernel[s] = row
    if twin and n >= 2:
        src, dup = rng.sample(elems, 2)
        kernel[dup] = dict(kernel[src])
    return MarkovChain(Carrier(tuple(elems)), kernel)


def random_dfa(rng: random.Random, n: int, n_symbols: int = 2, twin: bool = False) -> Dfa:
    elems = list(letters(n))
    alphabet = tuple("ab"[:n_symbols])
    accept = frozenset(s for s in elems if rng.random() < 0.4)
    delta = {s: {a: rng.choice(elems) for a in alphabet} for s in elems}
    if twin and n >= 2:
        src, dup = rng.sample(elems, 2)
        delta[dup] = dict(delta[src])
        accept = (accept | {dup}) if src in accept else (accept - {dup})
    return Dfa(Carrier(tuple(elems)), alphabet, accept, delta)


def random_nfa(rng: random.Random, n: int, n_symbols: int = 2, twin: bool = False) -> Nfa:
    elems = list(letters(n))
    alphabet = tuple("ab"[:n_symbols])
    accept = frozenset(s for s in elems if rng.random() < 0.4)
    delta = {
        s: {a: frozenset(t for t in elems if rng.random() < 0.35) for a in alphabet}
        for s in elems
    }
    if twin and n >= 2:
        src, dup = rng.sample(elems, 2)
        delta[dup] = dict(delta[src])
        accept = (accept | {dup}) if src in accept else (accept - {dup})
    return Nfa(Carrier(tuple(elems)), alphabet, accept, delta)


def random_fiber_element(rng: random.Random, kind: str, carrier: Carrier) -> FiberElement:
    elems = carrier.elements
    n = len(elems)
    if kind == fiber.EQUIV_REL:
        pairs = [
            (rng.choice(elems), rng.choice(elems)) for _ in range(rng.randint(0, n))
        ]
        return FiberElement.equiv_from_pairs(carrier, pairs)
    if kind == fiber.ENDO_REL:
        pairs = [
            (x, y)
            for x in elems
            for y in elems
            if rng.random() < 0.3
        ]
        return FiberElement.endorel(carrier, pairs)
    if kind == fiber.PREORDER:
        pairs = [
            (rng.choice(elems), rng.choice(elems)) for _ in range(rng.randint(0, n))
        ]
        return FiberElement.preorder(carrier, pairs)
    if kind == fiber.PSEUDO_METRIC:
        entries = {}
        for i in range(n):
            for j in range(i + 1, n):
                entries[(elems[i], elems[j])] = Fraction(rng.randint(0, 8), 8)
        mat = [[Fraction(0)] * n for _ in range(n)]
        for (x, y), v in entries.items():
            mat[carrier.index(x)][carrier.index(y)] = v
            mat[carrier.index(y)][carrier.index(x)] = v
        closed = fiber._shortest_path_closure(mat)
        return FiberElement.metric_from_matrix(carrier, closed)
    if kind == fiber.TOPOLOGY:
        seeds = [
            tuple(e for e in elems if rng.random() < 0.5) for _ in range(rng.randint(0, 3))
        ]
        return FiberElement.topology(carrier, seeds)
    raise ValueError(kind)


def random_metric(rng: random.Random, carrier: Carrier, denominator: int = 8) -> FiberElement:
    elems = carrier.elements
    n = len(elems)
    mat = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            v = Fraction(rng.randint(0, denominator), denominator)
            mat[i][j] = v
            mat[j][i] = v
    return FiberElement.metric_from_matrix(carrier, fiber._shortest_path_closure(mat))


def random_subdistribution(rng: random.Random, carrier: Carrier) -> dict[str, Fraction]:
    row: dict[str, Fraction] = {}
    budget = Fraction(1)
    for s in carrier.elements:
        if rng.random() < 0.6 and budget > 0:
            w = min(Fraction(rng.randint(1, 5), 8), budget)
            row[s] = w
            budget -= w
    return row


def random_carrier_map(rng: random.Random, source: Carrier, target: Carrier) -> CarrierMap:
    return CarrierMap(source, target, tuple(rng.choice(target.elements) for _ in source.elements))

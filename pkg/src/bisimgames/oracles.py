"""Independent reference algorithms the game and fixed-point results are
checked against: partition refinement, greatest-simulation iteration,
probabilistic refinement, product-automaton reachability and labelled
refinement.  These never call the lifting machinery."""

from __future__ import annotations

import itertools
from fractions import Fraction

from .system import Dfa, KripkeFrame, MarkovChain, Nfa


def kripke_bisimilarity(frame: KripkeFrame) -> set[tuple[str, str]]:
    """Classic partition refinement: split blocks by the set of blocks their
    successors reach, until stable.  Returns the bisimilarity relation."""
    states = list(frame.carrier.elements)
    block_of = {s: 0 for s in states}
    while True:
        sigs = {
            s: (block_of[s], frozenset(block_of[t] for t in frame.successors(s)))
            for s in states
        }
        fresh: dict[tuple, int] = {}
        new_block_of = {}
        for s in states:
            new_block_of[s] = fresh.setdefault(sigs[s], len(fresh))
        if new_block_of == block_of:
            break
        block_of = new_block_of
    return {(x, y) for x, y in itertools.product(states, repeat=2) if block_of[x] == block_of[y]}


def greatest_simulation(frame: KripkeFrame, variant: str) -> set[tuple[str, str]]:
    """Greatest lower/upper/convex simulation preorder by iterated removal
    from the total relation.  Pairs read as 'left below right'."""
    states = list(frame.carrier.elements)
    rel = set(itertools.product(states, repeat=2))

    def lower_ok(x, y, current):
        return all(any((x2, y2) in current for y2 in frame.successors(y)) for x2 in frame.successors(x))

    def upper_ok(x, y, current):
        return all(any((x2, y2) in current for x2 in frame.successors(x)) for y2 in frame.successors(y))

    while True:
        if variant == "lower":
            keep = {(x, y) for x, y in rel if lower_ok(x, y, rel)}
        elif variant == "upper":
            keep = {(x, y) for x, y in rel if upper_ok(x, y, rel)}
        elif variant == "convex":
            keep = {(x, y) for x, y in rel if lower_ok(x, y, rel) and upper_ok(x, y, rel)}
        else:
            raise ValueError(f"unknown variant {variant!r}")
        if keep == rel:
            return rel
        rel = keep


def prob_bisimilarity(chain: MarkovChain) -> set[tuple[str, str]]:
    """Probabilistic bisimilarity by block-mass refinement: states split when
    some current block receives different mass from them."""
    states = list(chain.carrier.elements)
    block_of = {s: 0 for s in states}
    while True:
        blocks: dict[int, set[str]] = {}
        for s in states:
            blocks.setdefault(block_of[s], set()).add(s)
        sigs = {
            s: (
                block_of[s],
                tuple(chain.mass(s, blocks[b]) for b in sorted(blocks)),
            )
            for s in states
        }
        fresh: dict[tuple, int] = {}
        new_block_of = {s: fresh.setdefault(sigs[s], len(fresh)) for s in states}
        if new_block_of == block_of:
            break
        block_of = new_block_of
    return {(x, y) for x, y in itertools.product(states, repeat=2) if block_of[x] == block_of[y]}


def dfa_language_equivalence(dfa: Dfa) -> set[tuple[str, str]]:
    """Language equivalence via distinguishable-pair propagation on the
    product automaton (transpose of product-state reachability)."""
    states = list(dfa.carrier.elements)
    distinguishable = {
        (x, y)
        for x, y in itertools.product(states, repeat=2)
        if (x in dfa.accept) != (y in dfa.accept)
    }
    changed = True
    while changed:
        changed = False
        for x, y in itertools.product(states, repeat=2):
            if (x, y) in distinguishable:
                continue
            for a in dfa.alphabet:
                if (dfa.step(x, a), dfa.step(y, a)) in distinguishable:
                    distinguishable.add((x, y))
                    changed = True
                    break
    return {(x, y) for x, y in itertools.product(states, repeat=2) if (x, y) not in distinguishable}


def dfa_language_inclusion(dfa: Dfa) -> set[tuple[str, str]]:
    """Pairs (x, y) with the language of x included in the language of y,
    via bad-pair propagation on the product automaton."""
    states = list(dfa.carrier.elements)
    bad = {
        (x, y)
        for x, y in itertools.product(states, repeat=2)
        if x in dfa.accept and y not in dfa.accept
    }
    changed = True
    while changed:
        changed = False
        for x, y in itertools.product(states, repeat=2):
            if (x, y) in bad:
                continue
            for a in dfa.alphabet:
                if (dfa.step(x, a), dfa.step(y, a)) in bad:
                    bad.add((x, y))
                    changed = True
                    break
    return {(x, y) for x, y in itertools.product(states, repeat=2) if (x, y) not in bad}


def nfa_bisimilarity(nfa: Nfa) -> set[tuple[str, str]]:
    """Labelled partition refinement with acceptance as an extra observation."""
    states = list(nfa.carrier.elements)
    block_of = {s: (0 if s in nfa.accept else 1) for s in states}
    while True:
        sigs = {
            s: (
                block_of[s],
                tuple(frozenset(block_of[t] for t in nfa.step(s, a)) for a in nfa.alphabet),
            )
            for s in states
        }
        fresh: dict[tuple, int] = {}
        new_block_of = {s: fresh.setdefault(sigs[s], len(fresh)) for s in states}
        if new_block_of == block_of:
            break
        block_of = new_block_of
    return {(x, y) for x, y in itertools.product(states, repeat=2) if block_of[x] == block_of[y]}


def egli_milner_bisimilarity(frame: KripkeFrame) -> set[tuple[str, str]]:
    """Greatest fixed point of the standard relational lifting on plain
    endorelations: successor sets must cover each other through the relation."""
    states = list(frame.carrier.elements)
    rel = set(itertools.product(states, repeat=2))
    while True:
        keep = {
            (x, y)
            for x, y in rel
            if all(any((x2, y2) in rel for y2 in frame.successors(y)) for x2 in frame.successors(x))
            and all(any((x2, y2) in rel for x2 in frame.successors(x)) for y2 in frame.successors(y))
        }
        if keep == rel:
            return rel
        rel = keep


def metric_grid_lower_bound(
    d, mu: dict[str, Fraction], nu: dict[str, Fraction], steps: int = 8
) -> Fraction:
    """Brute-force lower bound for the lifted distance: the best expectation
    gap over witness functions on the uniform grid that satisfy the
    non-expansiveness constraints."""
    elems = d.carrier.elements
    grid = [Fraction(i, steps) for i in range(steps + 1)]
    best = Fraction(0)
    weights = [mu.get(x, Fraction(0)) - nu.get(x, Fraction(0)) for x in elems]
    n = len(elems)
    for values in itertools.product(grid, repeat=n):
        ok = True
        for i in range(n):
            for j in range(i + 1, n):
                if abs(values[i] - values[j]) > d.payload[i][j]:
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            continue
        gap = abs(sum(v * w for v, w in zip(values, weights)))
        if gap > best:
            best = gap
    return best

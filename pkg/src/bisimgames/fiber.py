"""Finite-carrier complete-lattice fibers of indistinguishability structures.

Five kinds of structure live over a finite carrier: equivalence relations,
plain endorelations, preorders, 1-bounded pseudometrics and topologies.
Each fiber is a complete lattice under the indistinguishability order
(larger = coarser = harder to distinguish states), with pullback along any
carrier map preserving all meets, and pushforward as its left adjoint.

All values are immutable and canonical; pseudometric entries are exact
rationals so the lattice laws can be tested with equality, never tolerance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

EQUIV_REL = "EquivRel"
ENDO_REL = "EndoRel"
PREORDER = "Preorder"
PSEUDO_METRIC = "PseudoMetric"
TOPOLOGY = "Topology"

KINDS = (EQUIV_REL, ENDO_REL, PREORDER, PSEUDO_METRIC, TOPOLOGY)

ZERO = Fraction(0)
ONE = Fraction(1)


class FiberError(ValueError):
    """Structural misuse: kind or carrier mismatch, malformed payload."""


@dataclass(frozen=True)
class Carrier:
    """Ordered finite list of distinct element identifiers."""

    elements: tuple[str, ...]

    def __post_init__(self):
        if not self.elements:
            raise FiberError("carrier must be nonempty")
        if len(set(self.elements)) != len(self.elements):
            raise FiberError("carrier elements must be unique")
        if any(not e for e in self.elements):
            raise FiberError("carrier elements must be nonempty strings")

    @property
    def size(self) -> int:
        return len(self.elements)

    def index(self, element: str) -> int:
        try:
            return self.elements.index(element)
        except ValueError:
            raise FiberError(f"{element!r} is not a carrier element") from None

    def __contains__(self, element: str) -> bool:
        return element in self.elements

    def __iter__(self):
        return iter(self.elements)


def carrier(*elements: str) -> Carrier:
    return Carrier(tuple(elements))


@dataclass(frozen=True)
class CarrierMap:
    """Total function between carriers, given as an element table."""

    source: Carrier
    target: Carrier
    mapping: tuple[str, ...]  # image of source.elements[i]

    def __post_init__(self):
        if len(self.mapping) != self.source.size:
            raise FiberError("mapping must cover every source element")
        for img in self.mapping:
            if img not in self.target:
                raise FiberError(f"image {img!r} not in target carrier")

    def __call__(self, element: str) -> str:
        return self.mapping[self.source.index(element)]

    @staticmethod
    def from_dict(source: Carrier, target: Carrier, table: dict[str, str]) -> "CarrierMap":
        return CarrierMap(source, target, tuple(table[e] for e in source))


def _sorted_pairs(carrier_: Carrier, pairs: Iterable[tuple[str, str]]) -> tuple[tuple[str, str], ...]:
    idx = {e: i for i, e in enumerate(carrier_.elements)}
    uniq = set(pairs)
    for x, y in uniq:
        if x not in idx or y not in idx:
            raise FiberError(f"pair ({x!r},{y!r}) off the carrier")
    return tuple(sorted(uniq, key=lambda p: (idx[p[0]], idx[p[1]])))


def _canonical_partition(carrier_: Carrier, blocks: Iterable[Iterable[str]]) -> tuple[tuple[str, ...], ...]:
    idx = {e: i for i, e in enumerate(carrier_.elements)}
    canon = []
    seen: set[str] = set()
    for block in blocks:
        b = tuple(sorted(set(block), key=lambda e: idx[e]))
        if not b:
            raise FiberError("empty partition block")
        for e in b:
            if e in seen:
                raise FiberError(f"element {e!r} in two blocks")
            if e not in idx:
                raise FiberError(f"element {e!r} off the carrier")
            seen.add(e)
        canon.append(b)
    if seen != set(carrier_.elements):
        missing = sorted(set(carrier_.elements) - seen)
        raise FiberError(f"partition misses elements {missing}")
    return tuple(sorted(canon, key=lambda b: idx[b[0]]))


def _canonical_opens(carrier_: Carrier, opens: Iterable[Iterable[str]]) -> tuple[tuple[str, ...], ...]:
    idx = {e: i for i, e in enumerate(carrier_.elements)}
    family = {frozenset(u) for u in opens}
    for u in family:
        for e in u:
            if e not in idx:
                raise FiberError(f"open set element {e!r} off the carrier")
    family.add(frozenset())
    family.add(frozenset(carrier_.elements))
    # close under binary union/intersection; finite carrier makes this the
    # full closure under arbitrary unions and intersections
    changed = True
    while changed:
        changed = False
        fresh = set()
        for u, v in itertools.combinations(family, 2):
            for w in (u | v, u & v):
                if w not in family and w not in fresh:
                    fresh.add(w)
        if fresh:
            family |= fresh
            changed = True
    as_tuples = [tuple(sorted(u, key=lambda e: idx[e])) for u in family]
    return tuple(sorted(as_tuples, key=lambda t: (len(t), tuple(idx[e] for e in t))))


def _check_metric(carrier_: Carrier, matrix: tuple[tuple[Fraction, ...], ...]) -> None:
    n = carrier_.size
    if len(matrix) != n or any(len(row) != n for row in matrix):
        raise FiberError("metric matrix shape mismatch")
    for i in range(n):
        if matrix[i][i] != 0:
            raise FiberError("metric diagonal must be zero")
        for j in range(n):
            v = matrix[i][j]
            if not (ZERO <= v <= ONE):
                raise FiberError("metric entries must lie in [0,1]")
            if v != matrix[j][i]:
                raise FiberError("metric must be symmetric")
    for i, j, k in itertools.product(range(n), repeat=3):
        if matrix[i][k] > matrix[i][j] + matrix[j][k]:
            raise FiberError("triangle inequality violated")


@dataclass(frozen=True)
class FiberElement:
    """One indistinguishability structure over a finite carrier.

    The payload is canonical per kind: a sorted block partition, a sorted
    pair relation (reflexive-transitive for preorders), a full symmetric
    matrix of Fractions, or the complete open-set family.
    """

    kind: str
    carrier: Carrier
    payload: tuple

    # --- constructors ---------------------------------------------------

    @staticmethod
    def equiv_from_blocks(carrier_: Carrier, blocks: Iterable[Iterable[str]]) -> "FiberElement":
        return FiberElement(EQUIV_REL, carrier_, _canonical_partition(carrier_, blocks))

    @staticmethod
    def equiv_from_pairs(carrier_: Carrier, pairs: Iterable[tuple[str, str]]) -> "FiberElement":
        """Least equivalence containing the given pairs."""
        parent = {e: e for e in carrier_}

        def find(e):
            while parent[e] != e:
                parent[e] = parent[parent[e]]
                e = parent[e]
            return e

        for x, y in pairs:
            if x not in carrier_ or y not in carrier_:
                raise FiberError(f"pair ({x!r},{y!r}) off the carrier")
            parent[find(x)] = find(y)
        groups: dict[str, list[str]] = {}
        for e in carrier_:
            groups.setdefault(find(e), []).append(e)
        return FiberElement.equiv_from_blocks(carrier_, groups.values())

    @staticmethod
    def endorel(carrier_: Carrier, pairs: Iterable[tuple[str, str]]) -> "FiberElement":
        return FiberElement(ENDO_REL, carrier_, _sorted_pairs(carrier_, pairs))

    @staticmethod
    def preorder(carrier_: Carrier, pairs: Iterable[tuple[str, str]]) -> "FiberElement":
        """Least preorder containing the given pairs."""
        rel = set(pairs) | {(e, e) for e in carrier_}
        changed = True
        while changed:
            changed = False
            for (a, b), (c, d) in itertools.product(tuple(rel), repeat=2):
                if b == c and (a, d) not in rel:
                    rel.add((a, d))
                    changed = True
        return FiberElement(PREORDER, carrier_, _sorted_pairs(carrier_, rel))

    @staticmethod
    def metric(carrier_: Carrier, entries: dict[tuple[str, str], Fraction | int | str]) -> "FiberElement":
        """Pseudometric from off-diagonal entries; missing pairs default to 1."""
        n = carrier_.size
        m = [[ONE] * n for _ in range(n)]
        for i in range(n):
            m[i][i] = ZERO
        for (x, y), v in entries.items():
            i, j = carrier_.index(x), carrier_.index(y)
            fv = Fraction(v)
            m[i][j] = fv
            m[j][i] = fv
        matrix = tuple(tuple(row) for row in m)
        _check_metric(carrier_, matrix)
        return FiberElement(PSEUDO_METRIC, carrier_, matrix)

    @staticmethod
    def metric_from_matrix(carrier_: Carrier, matrix: Iterable[Iterable[Fraction]]) -> "FiberElement":
        mat = tuple(tuple(Fraction(v) for v in row) for row in matrix)
        _check_metric(carrier_, mat)
        return FiberElement(PSEUDO_METRIC, carrier_, mat)

    @staticmethod
    def topology(carrier_: Carrier, opens: Iterable[Iterable[str]]) -> "FiberElement":
        """Topology generated by the given family (canonical closed form)."""
        return FiberElement(TOPOLOGY, carrier_, _canonical_opens(carrier_, opens))

    # --- accessors ------------------------------------------------------

    def pairs(self) -> frozenset[tuple[str, str]]:
        """The structure as a set of related pairs (relational kinds only)."""
        if self.kind == EQUIV_REL:
            out = set()
            for block in self.payload:
                out.update(itertools.product(block, repeat=2))
            return frozenset(out)
        if self.kind in (ENDO_REL, PREORDER):
            return frozenset(self.payload)
        raise FiberError(f"pairs() undefined for kind {self.kind}")

    def related(self, x: str, y: str) -> bool:
        return (x, y) in self.pairs()

    def blocks(self) -> tuple[tuple[str, ...], ...]:
        if self.kind != EQUIV_REL:
            raise FiberError("blocks() is for equivalence relations")
        return self.payload

    def dist(self, x: str, y: str) -> Fraction:
        if self.kind != PSEUDO_METRIC:
            raise FiberError("dist() is for pseudometrics")
        return self.payload[self.carrier.index(x)][self.carrier.index(y)]

    def opens(self) -> tuple[tuple[str, ...], ...]:
        if self.kind != TOPOLOGY:
            raise FiberError("opens() is for topologies")
        return self.payload

    def open_sets(self) -> frozenset[frozenset[str]]:
        return frozenset(frozenset(u) for u in self.opens())

    def is_open(self, subset: Iterable[str]) -> bool:
        return frozenset(subset) in self.open_sets()


def _require_same(p: FiberElement, q: FiberElement) -> None:
    if p.kind != q.kind:
        raise FiberError(f"kind mismatch: {p.kind} vs {q.kind}")
    if p.carrier != q.carrier:
        raise FiberError("carrier mismatch")


# --- order, meet, join ---------------------------------------------------


def leq(p: FiberElement, q: FiberElement) -> bool:
    """Indistinguishability order: p below q means p is more discriminating."""
    _require_same(p, q)
    if p.kind in (EQUIV_REL, ENDO_REL, PREORDER):
        return p.pairs() <= q.pairs()
    if p.kind == PSEUDO_METRIC:
        return all(
            p.payload[i][j] >= q.payload[i][j]
            for i in range(p.carrier.size)
            for j in range(p.carrier.size)
        )
    if p.kind == TOPOLOGY:
        return p.open_sets() >= q.open_sets()
    raise FiberError(f"unknown kind {p.kind}")


def meet(items: list[FiberElement]) -> FiberElement:
    """Greatest lower bound; use top(kind, carrier) instead of an empty meet."""
    if not items:
        raise FiberError("meet of empty list; use top(kind, carrier)")
    head = items[0]
    for other in items[1:]:
        _require_same(head, other)
    if head.kind == EQUIV_REL:
        common = frozenset.intersection(*(p.pairs() for p in items))
        return FiberElement.equiv_from_blocks(head.carrier, _pairs_to_blocks(head.carrier, common))
    if head.kind in (ENDO_REL, PREORDER):
        common = frozenset.intersection(*(p.pairs() for p in items))
        return FiberElement(head.kind, head.carrier, _sorted_pairs(head.carrier, common))
    if head.kind == PSEUDO_METRIC:
        n = head.carrier.size
        mat = tuple(
            tuple(max(p.payload[i][j] for p in items) for j in range(n))
            for i in range(n)
        )
        return FiberElement(PSEUDO_METRIC, head.carrier, mat)
    if head.kind == TOPOLOGY:
        union: set[frozenset[str]] = set()
        for p in items:
            union |= p.open_sets()
        return FiberElement.topology(head.carrier, union)
    raise FiberError(f"unknown kind {head.kind}")


def join(items: list[FiberElement]) -> FiberElement:
    """Least upper bound, via the kind-specific closure."""
    if not items:
        raise FiberError("join of empty list; use bottom(kind, carrier)")
    head = items[0]
    for other in items[1:]:
        _require_same(head, other)
    if head.kind == EQUIV_REL:
        all_pairs = frozenset.union(*(p.pairs() for p in items))
        return FiberElement.equiv_from_pairs(head.carrier, all_pairs)
    if head.kind == ENDO_REL:
        all_pairs = frozenset.union(*(p.pairs() for p in items))
        return FiberElement(ENDO_REL, head.carrier, _sorted_pairs(head.carrier, all_pairs))
    if head.kind == PREORDER:
        all_pairs = frozenset.union(*(p.pairs() for p in items))
        return FiberElement.preorder(head.carrier, all_pairs)
    if head.kind == PSEUDO_METRIC:
        n = head.carrier.size
        mat = [[min(p.payload[i][j] for p in items) for j in range(n)] for i in range(n)]
        return FiberElement(PSEUDO_METRIC, head.carrier, _shortest_path_closure(mat))
    if head.kind == TOPOLOGY:
        common = frozenset.intersection(*(p.open_sets() for p in items))
        return FiberElement.topology(head.carrier, common)
    raise FiberError(f"unknown kind {head.kind}")


def _pairs_to_blocks(carrier_: Carrier, pairs: frozenset[tuple[str, str]]) -> list[list[str]]:
    blocks = []
    seen: set[str] = set()
    for e in carrier_:
        if e in seen:
            continue
        block = [f for f in carrier_ if (e, f) in pairs]
        seen.update(block)
        blocks.append(block)
    return blocks


def _shortest_path_closure(mat: list[list[Fraction]]) -> tuple[tuple[Fraction, ...], ...]:
    """All-pairs-shortest-path repair of a symmetric cost matrix (Floyd-Warshall)."""
    n = len(mat)
    m = [row[:] for row in mat]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                via = m[i][k] + m[k][j]
                if via < m[i][j]:
                    m[i][j] = via
    return tuple(tuple(row) for row in m)


# --- extrema --------------------------------------------------------------


def top(kind: str, carrier_: Carrier) -> FiberElement:
    """Maximal indistinguishability: total relation, zero metric, indiscrete."""
    if kind == EQUIV_REL:
        return FiberElement.equiv_from_blocks(carrier_, [list(carrier_)])
    if kind in (ENDO_REL, PREORDER):
        full = itertools.product(carrier_, repeat=2)
        return FiberElement(kind, carrier_, _sorted_pairs(carrier_, full))
    if kind == PSEUDO_METRIC:
        n = carrier_.size
        return FiberElement(PSEUDO_METRIC, carrier_, tuple(tuple(ZERO for _ in range(n)) for _ in range(n)))
    if kind == TOPOLOGY:
        return FiberElement.topology(carrier_, [])
    raise FiberError(f"unknown kind {kind}")


def bottom(kind: str, carrier_: Carrier) -> FiberElement:
    """Most discriminating structure.

    For endorelations this is the empty relation (the true lattice minimum;
    the diagonal sits strictly above it and is the minimum only for the
    reflexive kinds).
    """
    if kind == EQUIV_REL:
        return FiberElement.equiv_from_blocks(carrier_, [[e] for e in carrier_])
    if kind == ENDO_REL:
        return FiberElement(ENDO_REL, carrier_, ())
    if kind == PREORDER:
        diag = [(e, e) for e in carrier_]
        return FiberElement(PREORDER, carrier_, _sorted_pairs(carrier_, diag))
    if kind == PSEUDO_METRIC:
        n = carrier_.size
        mat = tuple(tuple(ZERO if i == j else ONE for j in range(n)) for i in range(n))
        return FiberElement(PSEUDO_METRIC, carrier_, mat)
    if kind == TOPOLOGY:
        subsets = itertools.chain.from_iterable(
            itertools.combinations(carrier_.elements, r) for r in range(carrier_.size + 1)
        )
        return FiberElement.topology(carrier_, subsets)
    raise FiberError(f"unknown kind {kind}")


# --- pullback, pushforward, decency ---------------------------------------


def pullback(f: CarrierMap, q: FiberElement) -> FiberElement:
    """Inverse image of q along f; preserves all meets."""
    if q.carrier != f.target:
        raise FiberError("pullback: q must live over the map's target")
    src = f.source
    if q.kind in (EQUIV_REL, ENDO_REL, PREORDER):
        rel = q.pairs()
        pre = [(x, y) for x, y in itertools.product(src, repeat=2) if (f(x), f(y)) in rel]
        if q.kind == EQUIV_REL:
            return FiberElement.equiv_from_blocks(src, _pairs_to_blocks(src, frozenset(pre)))
        return FiberElement(q.kind, src, _sorted_pairs(src, pre))
    if q.kind == PSEUDO_METRIC:
        mat = tuple(
            tuple(q.dist(f(x), f(y)) for y in src)
            for x in src
        )
        return FiberElement(PSEUDO_METRIC, src, mat)
    if q.kind == TOPOLOGY:
        pre_opens = [[x for x in src if f(x) in u] for u in q.opens()]
        return FiberElement.topology(src, pre_opens)
    raise FiberError(f"unknown kind {q.kind}")


def pushforward(f: CarrierMap, p: FiberElement) -> FiberElement:
    """Least q over the target with p below pullback(f, q); adjoint to pullback."""
    if p.carrier != f.source:
        raise FiberError("pushforward: p must live over the map's source")
    tgt = f.target
    if p.kind in (EQUIV_REL, ENDO_REL, PREORDER):
        image = {(f(x), f(y)) for x, y in p.pairs()}
        if p.kind == EQUIV_REL:
            return FiberElement.equiv_from_pairs(tgt, image)
        if p.kind == PREORDER:
            return FiberElement.preorder(tgt, image)
        return FiberElement(ENDO_REL, tgt, _sorted_pairs(tgt, image))
    if p.kind == PSEUDO_METRIC:
        n = tgt.size
        mat = [[ONE] * n for _ in range(n)]
        for i in range(n):
            mat[i][i] = ZERO
        for x, y in itertools.product(p.carrier, repeat=2):
            i, j = tgt.index(f(x)), tgt.index(f(y))
            d = p.dist(x, y)
            if d < mat[i][j]:
                mat[i][j] = d
                mat[j][i] = d
        return FiberElement(PSEUDO_METRIC, tgt, _shortest_path_closure(mat))
    if p.kind == TOPOLOGY:
        p_opens = p.open_sets()
        opens = []
        for r in range(tgt.size + 1):
            for u in itertools.combinations(tgt.elements, r):
                us = set(u)
                preimage = frozenset(x for x in p.carrier if f(x) in us)
                if preimage in p_opens:
                    opens.append(u)
        return FiberElement.topology(tgt, opens)
    raise FiberError(f"unknown kind {p.kind}")


def is_decent(f: CarrierMap, p: FiberElement, q: FiberElement) -> bool:
    """Whether f respects the structures: relation-preserving, non-expansive
    or continuous depending on the kind."""
    if p.carrier != f.source or q.carrier != f.target:
        raise FiberError("is_decent: carrier mismatch")
    if p.kind != q.kind:
        raise FiberError("is_decent: kind mismatch")
    return leq(p, pullback(f, q))


def equivalence_closure(r: FiberElement) -> FiberElement:
    """Least equivalence relation containing an endorelation."""
    if r.kind != ENDO_REL:
        raise FiberError("equivalence_closure expects an endorelation")
    return FiberElement.equiv_from_pairs(r.carrier, r.pairs())


def as_endorel(p: FiberElement) -> FiberElement:
    """Forget equivalence/preorder structure down to a plain endorelation."""
    if p.kind == ENDO_REL:
        return p
    if p.kind in (EQUIV_REL, PREORDER):
        return FiberElement.endorel(p.carrier, p.pairs())
    raise FiberError("as_endorel expects a relational kind")

"""Concrete game and analysis builders: bisimilarity, similarity and
language-equivalence arenas, the probabilistic game in both published
shapes with strategy translations between them, the metric and topology
position oracles, the Hausdorff coincidence check and the relational
transfer check."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from . import fiber, oracles
from .fiber import Carrier, CarrierMap, FiberElement
from .game import (
    DUPLICATOR,
    SPOILER,
    Arena,
    GameError,
    OracleArena,
    Strategy,
    largest_invariant,
)
from .lifting import (
    OMEGA2,
    kantorovich_witness,
    params_bisim_metric,
    params_dfa_topology,
    simplex_max,
    two_le,
)
from .system import BOT, TOP, Dfa, KripkeFrame, MarkovChain, Nfa, SystemError, format_rational
from .fixpoint import FixpointReport

ZERO = Fraction(0)
ONE = Fraction(1)


def subsets(elements: tuple[str, ...]):
    """All subsets as tuples, in binary-mask order (first element = low bit)."""
    n = len(elements)
    for mask in range(2**n):
        yield tuple(elements[i] for i in range(n) if mask >> i & 1)


def _set_label(T) -> str:
    return "{" + ",".join(T) + "}"


def _pair_pos(x: str, y: str):
    return ("pair", x, y)


def _pair_label(x: str, y: str) -> str:
    return f"({x},{y})"


# --- generating sets ---------------------------------------------------------


@dataclass(frozen=True)
class GeneratingSet:
    """Finite description of a family of fiber elements whose joins reach the
    whole fiber; the Spoiler-position vocabulary of the trimmed games."""

    kind: str  # "pairs" | "preorder-pairs" | "metric" | "explicit"
    carrier: Carrier
    members: tuple[FiberElement, ...] = ()

    def pair_member(self, x: str, y: str) -> FiberElement:
        if self.kind == "pairs":
            return FiberElement.equiv_from_pairs(self.carrier, [(x, y)])
        if self.kind == "preorder-pairs":
            return FiberElement.preorder(self.carrier, [(x, y)])
        raise GameError(f"{self.kind} generators are not pair-indexed")

    def metric_member(self, x: str, y: str, r: Fraction) -> FiberElement:
        if self.kind != "metric":
            raise GameError(f"{self.kind} generators are not metric-indexed")
        return FiberElement.metric(self.carrier, {(x, y): r})


def generating_set_from_separator(kind: str, carrier_: Carrier) -> GeneratingSet:
    """Generators obtained by pushing the two-point fiber's generators forward
    along every map from the two-point separator into the carrier."""
    if kind == fiber.EQUIV_REL:
        return GeneratingSet("pairs", carrier_)
    if kind == fiber.PREORDER:
        return GeneratingSet("preorder-pairs", carrier_)
    if kind == fiber.PSEUDO_METRIC:
        return GeneratingSet("metric", carrier_)
    raise GameError(f"no known generating set for kind {kind}")


def pair_generator_via_pushforward(kind: str, carrier_: Carrier, x: str, y: str) -> FiberElement:
    """The pair generator rebuilt from first principles: push the two-point
    generator forward along the map hitting (x, y)."""
    f = CarrierMap(OMEGA2, carrier_, (x, y))
    if kind == fiber.EQUIV_REL:
        return fiber.pushforward(f, fiber.top(fiber.EQUIV_REL, OMEGA2))
    if kind == fiber.PREORDER:
        return fiber.pushforward(f, two_le())
    raise GameError(f"no pair generator for kind {kind}")


def metric_generator_via_pushforward(carrier_: Carrier, x: str, y: str, r: Fraction) -> FiberElement:
    f = CarrierMap(OMEGA2, carrier_, (x, y))
    seed = FiberElement.metric(OMEGA2, {(BOT, TOP): r})
    return fiber.pushforward(f, seed)


# --- Kripke bisimilarity game ------------------------------------------------


def build_kripke_game(frame: KripkeFrame) -> Arena:
    """Spoiler plays a two-valued observation whose one-step may-image
    separates the pair; Duplicator rebuts with a pair the observation
    already separates."""
    arena = Arena()
    elems = frame.carrier.elements
    diamond: dict[tuple, dict[str, bool]] = {}
    for T in subsets(elems):
        ts = set(T)
        diamond[T] = {s: bool(ts & frame.successors(s)) for s in elems}
    for x, y in itertools.product(elems, repeat=2):
        arena.add_sp(_pair_pos(x, y), _pair_label(x, y))
    used: list[tuple] = []
    for x, y in itertools.product(elems, repeat=2):
        for T in subsets(elems):
            if diamond[T][x] != diamond[T][y]:
                pos = ("k", T)
                if pos not in arena.moves:
                    arena.add_dup(pos, f"k{_set_label(T)}")
                    used.append(T)
                arena.add_move(_pair_pos(x, y), pos)
    for T in used:
        ts = set(T)
        for u, v in itertools.product(elems, repeat=2):
            if (u in ts) != (v in ts):
                arena.add_move(("k", T), _pair_pos(u, v))
    arena.validate()
    return arena


# --- similarity games --------------------------------------------------------


def build_similarity_game(frame: KripkeFrame, variant: str) -> Arena:
    """Trimmed similarity game on pair generators read as 'left below right'.
    The convex variant lets Spoiler choose the lower or upper reading."""
    if variant == "lower":
        entries = ("lower",)
    elif variant == "upper":
        entries = ("upper",)
    elif variant == "convex":
        entries = ("lower", "upper")
    else:
        raise SystemError(f"unknown similarity variant {variant!r}")
    arena = Arena()
    elems = frame.carrier.elements
    diamond: dict[tuple, dict[str, bool]] = {}
    for T in subsets(elems):
        ts = set(T)
        diamond[T] = {s: bool(ts & frame.successors(s)) for s in elems}
    for x, y in itertools.product(elems, repeat=2):
        arena.add_sp(_pair_pos(x, y), _pair_label(x, y))
    used: list[tuple] = []
    for x, y in itertools.product(elems, repeat=2):
        for entry in entries:
            for T in subsets(elems):
                gx, gy = diamond[T][x], diamond[T][y]
                # composite must break monotonicity (lower) or antitonicity
                # (upper) at the generator pair
                violates = (gx and not gy) if entry == "lower" else (gy and not gx)
                if violates:
                    pos = ("k", entry, T)
                    if pos not in arena.moves:
                        arena.add_dup(pos, f"{entry}/k{_set_label(T)}")
                        used.append((entry, T))
                    arena.add_move(_pair_pos(x, y), pos)
    for entry, T in used:
        ts = set(T)
        for u, v in itertools.product(elems, repeat=2):
            bad = (u in ts and v not in ts) if entry == "lower" else (u not in ts and v in ts)
            if bad:
                arena.add_move(("k", entry, T), _pair_pos(u, v))
    arena.validate()
    return arena


# --- probabilistic games -----------------------------------------------------


def build_prob_game(chain: MarkovChain) -> Arena:
    """One-subset probabilistic bisimilarity game: Spoiler exhibits a subset
    with different one-step mass, Duplicator a pair the subset splits."""
    arena = Arena()
    elems = chain.carrier.elements
    mass: dict[tuple, dict[str, Fraction]] = {}
    for T in subsets(elems):
        ts = set(T)
        mass[T] = {s: chain.mass(s, ts) for s in elems}
    for x, y in itertools.product(elems, repeat=2):
        arena.add_sp(_pair_pos(x, y), _pair_label(x, y))
    used: list[tuple] = []
    for x, y in itertools.product(elems, repeat=2):
        for T in subsets(elems):
            if mass[T][x] != mass[T][y]:
                pos = ("Z", T)
                if pos not in arena.moves:
                    arena.add_dup(pos, f"Z{_set_label(T)}")
                    used.append(T)
                arena.add_move(_pair_pos(x, y), pos)
    for T in used:
        ts = set(T)
        for u, v in itertools.product(elems, repeat=2):
            if (u in ts) != (v in ts):
                arena.add_move(("Z", T), _pair_pos(u, v))
    arena.validate()
    return arena


def build_desharnais_game(chain: MarkovChain) -> Arena:
    """Four-stage probabilistic bisimilarity game.  Spoiler orients the pair
    and challenges with a subset; Duplicator widens it keeping the mass
    inequality; Spoiler picks a new element from the widening; Duplicator
    matches it from the challenge subset.  Stages carry explicit tags."""
    arena = Arena()
    elems = chain.carrier.elements
    all_subsets = list(subsets(elems))
    mass = {T: {s: chain.mass(s, set(T)) for s in elems} for T in all_subsets}
    for x, y in itertools.product(elems, repeat=2):
        arena.add_sp(("d1", x, y), f"d1({x},{y})")
    # stage 2: Spoiler has oriented (s,t) and challenged with Z
    for x, y in itertools.product(elems, repeat=2):
        orientations = [(x, y), (y, x)] if x != y else [(x, y)]
        for s, t in orientations:
            for Z in all_subsets:
                pos2 = ("d2", s, t, Z)
                if pos2 not in arena.moves:
                    arena.add_dup(pos2, f"d2({s},{t},Z{_set_label(Z)})")
                arena.add_move(("d1", x, y), pos2)
    # stage 3: Duplicator answered a superset with at least as much mass
    for pos2 in list(arena.dup_positions):
        _, s, t, Z = pos2
        zset = set(Z)
        for Zp in all_subsets:
            if not zset <= set(Zp):
                continue
            if mass[Z][s] <= mass[Zp][t]:
                pos3 = ("d3", Z, Zp)
                if pos3 not in arena.moves:
                    arena.add_sp(pos3, f"d3(Z{_set_label(Z)},Z'{_set_label(Zp)})")
                arena.add_move(pos2, pos3)
    # stage 4: Spoiler names a fresh element of the widening
    for pos3 in [p for p in arena.sp_positions if p[0] == "d3"]:
        _, Z, Zp = pos3
        for yp in Zp:
            if yp in Z:
                continue
            pos4 = ("d4", Z, yp)
            if pos4 not in arena.moves:
                arena.add_dup(pos4, f"d4(Z{_set_label(Z)},{yp})")
            arena.add_move(pos3, pos4)
    # back to stage 1: Duplicator matches from the challenge subset
    for pos4 in [p for p in arena.dup_positions if p[0] == "d4"]:
        _, Z, yp = pos4
        for xp in Z:
            arena.add_move(pos4, ("d1", xp, yp))
    arena.validate()
    return arena


def desharnais_region_pairs(chain: MarkovChain, region=None) -> set[tuple[str, str]]:
    if region is None:
        region = largest_invariant(build_desharnais_game(chain))
    return {(p[1], p[2]) for p in region if p[0] == "d1"}


def prob_region_pairs(chain: MarkovChain, region=None) -> set[tuple[str, str]]:
    if region is None:
        region = largest_invariant(build_prob_game(chain))
    return {(p[1], p[2]) for p in region if p[0] == "pair"}


# --- strategy translations ---------------------------------------------------


class TranslationError(GameError):
    pass


@dataclass
class FkpResponder:
    """Duplicator for the one-subset game, driven by a winning strategy of the
    four-stage game: orient by the mass comparison, widen via the strategy,
    take a fresh element, and answer with the strategy's match."""

    chain: MarkovChain
    desharnais_strategy: Strategy
    trace: list[dict] | None = None

    def respond(self, pair: tuple[str, str], Z: tuple[str, ...]) -> tuple[str, str]:
        x, y = pair
        zset = set(Z)
        tx, ty = self.chain.mass(x, zset), self.chain.mass(y, zset)
        if tx == ty:
            raise TranslationError(f"subset {_set_label(Z)} is not a challenge at ({x},{y})")
        s, t = (x, y) if tx > ty else (y, x)
        branch = "greater" if tx > ty else "smaller"
        pos3 = self.desharnais_strategy(("d2", s, t, Z))
        if pos3 is None:
            raise TranslationError(f"strategy has no widening at d2({s},{t},Z{_set_label(Z)})")
        _, _, Zp = pos3
        fresh = [w for w in Zp if w not in zset]
        if not fresh:
            raise TranslationError("widening did not grow the challenge subset")
        yp = fresh[0]
        pos1 = self.desharnais_strategy(("d4", Z, yp))
        if pos1 is None:
            raise TranslationError(f"strategy has no match at d4(Z{_set_label(Z)},{yp})")
        _, xp, _ = pos1
        if self.trace is not None:
            self.trace.append(
                {"pair": list(pair), "Z": list(Z), "branch": branch, "answer": [xp, yp]}
            )
        return (xp, yp)


def translate_strategy_desharnais_to_fkp(
    chain: MarkovChain, dup_strategy: Strategy, start: tuple[str, str]
) -> FkpResponder:
    if start[0] not in chain.carrier or start[1] not in chain.carrier:
        raise TranslationError(f"start pair {start} off the carrier")
    return FkpResponder(chain, dup_strategy)


def zbar(chain: MarkovChain, region_pairs: set[tuple[str, str]], Z) -> tuple[str, ...]:
    """States reachable from the challenge subset through the winning region."""
    zset = set(Z)
    out = tuple(
        w for w in chain.carrier.elements if any((v, w) in region_pairs for v in zset)
    )
    if not zset <= set(out):
        raise TranslationError("winning region misses a diagonal pair")
    return out


def translate_strategy_fkp_to_desharnais(
    chain: MarkovChain, winning_region: set[tuple[str, str]], start: tuple[str, str]
) -> Strategy:
    """Positional four-stage Duplicator built from the whole one-subset
    winning region: widen every challenge to its region closure, and match a
    fresh element with a region witness."""
    if start not in winning_region:
        raise TranslationError(f"start {start} is not Duplicator-winning")
    elems = chain.carrier.elements
    choice = {}
    for x, y in itertools.product(elems, repeat=2):
        if (x, y) not in winning_region:
            continue
        orientations = [(x, y), (y, x)] if x != y else [(x, y)]
        for s, t in orientations:
            for Z in subsets(elems):
                zb = zbar(chain, winning_region, Z)
                if chain.mass(s, set(Z)) <= chain.mass(t, set(zb)):
                    choice[("d2", s, t, Z)] = ("d3", Z, zb)
    for Z in subsets(elems):
        for yp in elems:
            if yp in Z:
                continue
            witness = next((v for v in Z if (v, yp) in winning_region), None)
            if witness is not None:
                choice[("d4", Z, yp)] = ("d1", witness, yp)
    return Strategy(DUPLICATOR, choice)


# --- metric game -------------------------------------------------------------


@dataclass(frozen=True)
class MetricPosition:
    x: str
    y: str
    eps: Fraction

    def label(self) -> str:
        return f"({self.x},{self.y},{format_rational(self.eps)})"


def classify_metric_position(
    chain: MarkovChain, pos: MetricPosition, report: FixpointReport
) -> str:
    """'duplicator' when the computed distance is below the slack, 'spoiler'
    above it, 'uncertain' inside the iteration tolerance band (which is empty
    when the iteration hit an exact fixed point)."""
    if not (ZERO <= pos.eps <= ONE):
        raise SystemError("slack must lie in [0,1]")
    d = report.result.dist(pos.x, pos.y)
    if not report.exact and abs(d - pos.eps) <= report.eps:
        return "uncertain"
    return DUPLICATOR if d <= pos.eps else SPOILER


def metric_spoiler_move(
    chain: MarkovChain, pos: MetricPosition, report: FixpointReport
) -> dict[str, Fraction]:
    """The optimal witness function at a Spoiler-winning position; its
    expectation gap exceeds the position's slack."""
    verdict = classify_metric_position(chain, pos, report)
    if verdict != SPOILER:
        raise GameError(f"position {pos.label()} is not Spoiler-winning ({verdict})")
    value, f = kantorovich_witness(report.result, chain.kernel[pos.x], chain.kernel[pos.y])
    if value <= pos.eps:
        raise GameError("iteration tolerance too coarse to certify a Spoiler move")
    return f


def metric_duplicator_move(
    chain: MarkovChain, f: dict[str, Fraction], d: FiberElement
) -> MetricPosition | None:
    """Counter a witness function that is not non-expansive: the pair with the
    largest violation, with slack at the midpoint of the violated interval.
    None when the function is non-expansive (Duplicator is stuck)."""
    elems = d.carrier.elements
    best = None
    for i, u in enumerate(elems):
        for j, v in enumerate(elems):
            if j <= i:
                continue
            margin = abs(Fraction(f[u]) - Fraction(f[v])) - d.dist(u, v)
            if margin > 0 and (best is None or margin > best[0]):
                best = (margin, u, v)
    if best is None:
        return None
    _, u, v = best
    gap = abs(Fraction(f[u]) - Fraction(f[v]))
    eps_prime = (d.dist(u, v) + gap) / 2
    return MetricPosition(u, v, eps_prime)


def _max_unconstrained_gap(chain: MarkovChain, x: str, y: str) -> Fraction:
    w = {
        s: chain.weight(x, s) - chain.weight(y, s) for s in chain.carrier.elements
    }
    pos_part = sum((v for v in w.values() if v > 0), ZERO)
    neg_part = -sum((v for v in w.values() if v < 0), ZERO)
    return max(pos_part, neg_part)


def _best_unconstrained_f(chain: MarkovChain, x: str, y: str) -> dict[str, Fraction]:
    w = {s: chain.weight(x, s) - chain.weight(y, s) for s in chain.carrier.elements}
    pos_part = sum((v for v in w.values() if v > 0), ZERO)
    neg_part = -sum((v for v in w.values() if v < 0), ZERO)
    if pos_part >= neg_part:
        return {s: (ONE if w[s] > 0 else ZERO) for s in chain.carrier.elements}
    return {s: (ONE if w[s] < 0 else ZERO) for s in chain.carrier.elements}


def metric_oracle_arena(chain: MarkovChain, report: FixpointReport, cap: int | None = None) -> OracleArena:
    """Oracle-backed metric game: positions are (state, state, slack) triples
    and witness functions; move sets are never materialized."""
    d = report.result

    def owner_of(pos):
        return SPOILER if isinstance(pos, MetricPosition) else DUPLICATOR

    def classify(pos):
        return classify_metric_position(chain, pos, report)

    def moves_oracle(pos):
        if isinstance(pos, MetricPosition):
            if classify(pos) == SPOILER:
                return [("f", tuple(sorted(metric_spoiler_move(chain, pos, report).items())))]
            if _max_unconstrained_gap(chain, pos.x, pos.y) > pos.eps:
                # a legal but non-winning challenge exists; offer the widest one
                f = _best_unconstrained_f(chain, pos.x, pos.y)
                return [("f", tuple(sorted(f.items())))]
            return []
        _, fitems = pos
        f = dict(fitems)
        answer = metric_duplicator_move(chain, f, d)
        return [answer] if answer is not None else []

    def is_legal(src, dst):
        if isinstance(src, MetricPosition):
            if not (isinstance(dst, tuple) and len(dst) == 2 and dst[0] == "f"):
                return False
            f = dict(dst[1])
            if set(f) != set(chain.carrier.elements):
                return False
            if any(not (ZERO <= Fraction(v) <= ONE) for v in f.values()):
                return False
            gx = sum((Fraction(f[t]) * w for t, w in chain.kernel[src.x].items()), ZERO)
            gy = sum((Fraction(f[t]) * w for t, w in chain.kernel[src.y].items()), ZERO)
            return abs(gx - gy) > src.eps
        if isinstance(dst, MetricPosition):
            f = dict(src[1])
            return abs(Fraction(f[dst.x]) - Fraction(f[dst.y])) > dst.eps
        return False

    def label_of(pos):
        if isinstance(pos, MetricPosition):
            return pos.label()
        return "f{" + ",".join(f"{s}:{format_rational(Fraction(v))}" for s, v in pos[1]) + "}"

    return OracleArena(
        owner_of=owner_of,
        classify=classify,
        moves_oracle=moves_oracle,
        is_legal=is_legal,
        label_of=label_of,
        cap=cap if cap is not None else 10 * chain.carrier.size**2,
    )


# --- DFA / NFA games ---------------------------------------------------------


def build_dfa_game(dfa: Dfa) -> Arena:
    """Language-equivalence game.  Acceptance mismatch gives Spoiler an
    immediately winning challenge (a constant observation Duplicator cannot
    rebut); otherwise Spoiler plays a symbol and an observation separating
    the successors."""
    arena = Arena()
    elems = dfa.carrier.elements
    for x, y in itertools.product(elems, repeat=2):
        arena.add_sp(_pair_pos(x, y), _pair_label(x, y))
    used: list[tuple] = []

    def dup_pos(tag, T):
        pos = ("k", tag, T)
        if pos not in arena.moves:
            arena.add_dup(pos, f"{tag}/k{_set_label(T)}")
            used.append((tag, T))
        return pos

    for x, y in itertools.product(elems, repeat=2):
        if (x in dfa.accept) != (y in dfa.accept):
            arena.add_move(_pair_pos(x, y), dup_pos("eps", ()))
            continue
        for a in dfa.alphabet:
            for T in subsets(elems):
                ts = set(T)
                if (dfa.step(x, a) in ts) != (dfa.step(y, a) in ts):
                    arena.add_move(_pair_pos(x, y), dup_pos(a, T))
    for tag, T in used:
        ts = set(T)
        for u, v in itertools.product(elems, repeat=2):
            if (u in ts) != (v in ts):
                arena.add_move(("k", tag, T), _pair_pos(u, v))
    arena.validate()
    return arena


def build_nfa_game(nfa: Nfa) -> Arena:
    """Bisimilarity game for nondeterministic automata: like the Kripke game
    per symbol, with acceptance mismatch as an immediate Spoiler win."""
    arena = Arena()
    elems = nfa.carrier.elements
    for x, y in itertools.product(elems, repeat=2):
        arena.add_sp(_pair_pos(x, y), _pair_label(x, y))
    used: list[tuple] = []

    def dup_pos(tag, T):
        pos = ("k", tag, T)
        if pos not in arena.moves:
            arena.add_dup(pos, f"{tag}/k{_set_label(T)}")
            used.append((tag, T))
        return pos

    for x, y in itertools.product(elems, repeat=2):
        if (x in nfa.accept) != (y in nfa.accept):
            arena.add_move(_pair_pos(x, y), dup_pos("eps", ()))
            continue
        for a in nfa.alphabet:
            for T in subsets(elems):
                ts = set(T)
                hit_x = bool(ts & nfa.step(x, a))
                hit_y = bool(ts & nfa.step(y, a))
                if hit_x != hit_y:
                    arena.add_move(_pair_pos(x, y), dup_pos(a, T))
    for tag, T in used:
        ts = set(T)
        for u, v in itertools.product(elems, repeat=2):
            if (u in ts) != (v in ts):
                arena.add_move(("k", tag, T), _pair_pos(u, v))
    arena.validate()
    return arena


# --- bisimulation topology ---------------------------------------------------


def acceptance_subbasis(dfa: Dfa) -> dict[tuple[str, ...], tuple[str, ...]]:
    """Word-acceptance sets, keyed by word, found by breadth-first closure of
    the state-transformation monoid: a word stops being extended once its
    transformation repeats, which is sound because the acceptance set of any
    extension only depends on the transformation."""
    elems = dfa.carrier.elements
    identity = tuple(elems)
    seen_transforms = {identity}
    frontier: list[tuple[tuple[str, ...], tuple[str, ...]]] = [((), identity)]
    out: dict[tuple[str, ...], tuple[str, ...]] = {}
    while frontier:
        word, transform = frontier.pop(0)
        acc = tuple(s for i, s in enumerate(elems) if transform[i] in dfa.accept)
        out[word] = acc
        for a in dfa.alphabet:
            nxt = tuple(dfa.step(t, a) for t in transform)
            if nxt not in seen_transforms:
                seen_transforms.add(nxt)
                frontier.append((word + (a,), nxt))
    return out


def bisim_topology(dfa: Dfa, variant: str = "sierpinski") -> FiberElement:
    """The topology generated by word-acceptance sets; the discrete variant
    also observes rejection, adding all complements."""
    subbasis = list(acceptance_subbasis(dfa).values())
    if variant == "discrete":
        complements = [
            tuple(s for s in dfa.carrier.elements if s not in set(u)) for u in subbasis
        ]
        subbasis = subbasis + complements
    elif variant != "sierpinski":
        raise SystemError(f"unknown topology variant {variant!r}")
    return FiberElement.topology(dfa.carrier, subbasis)


def specialization_preorder(t: FiberElement) -> FiberElement:
    """x below y when every open containing x also contains y."""
    if t.kind != fiber.TOPOLOGY:
        raise SystemError("specialization preorder needs a topology")
    elems = t.carrier.elements
    open_sets = t.open_sets()
    pairs = [
        (x, y)
        for x, y in itertools.product(elems, repeat=2)
        if all(y in u for u in open_sets if x in u)
    ]
    return FiberElement.preorder(t.carrier, pairs)


def topology_position_check(dfa: Dfa, t: FiberElement, variant: str = "sierpinski"):
    """Verdict for a topology position of the automaton game, with a Spoiler
    witness (symbol tag, observation subset) found by exhaustive scan when
    Duplicator is not winning."""
    if t.kind != fiber.TOPOLOGY or t.carrier != dfa.carrier:
        raise SystemError("position must be a topology over the automaton's states")
    target = bisim_topology(dfa, variant)
    winning = fiber.leq(t, target)
    witness = _topology_witness(dfa, t, variant)
    if winning:
        return DUPLICATOR, None
    assert witness is not None, "non-winning topology must admit a witness"
    return SPOILER, witness


def _composite_open(dfa: Dfa, tag: str, T: tuple[str, ...]) -> frozenset[str]:
    if tag == "eps":
        return frozenset(dfa.accept)
    ts = set(T)
    return frozenset(s for s in dfa.carrier.elements if dfa.step(s, tag) in ts)


def _topology_witness(dfa: Dfa, t: FiberElement, variant: str):
    opens = t.open_sets()
    full = frozenset(dfa.carrier.elements)
    for tag in ("eps", *dfa.alphabet):
        for T in subsets(dfa.carrier.elements):
            g_top = _composite_open(dfa, tag, T)
            if variant == "sierpinski":
                bad = g_top not in opens
            else:
                bad = g_top not in opens or (full - g_top) not in opens
            if bad:
                return tag, T
    return None


def topology_oracle_arena(dfa: Dfa, variant: str = "sierpinski", cap: int | None = None) -> OracleArena:
    """Oracle-backed topology game; Duplicator positions never materialize the
    fiber, Spoiler guidance prefers observations that stay winning."""
    target = bisim_topology(dfa, variant)
    target_opens = target.open_sets()
    full = frozenset(dfa.carrier.elements)

    def owner_of(pos):
        return SPOILER if isinstance(pos, FiberElement) else DUPLICATOR

    def classify(pos):
        return DUPLICATOR if fiber.leq(pos, target) else SPOILER

    def spoiler_guidance(t: FiberElement):
        fallback = None
        for tag in ("eps", *dfa.alphabet):
            for T in subsets(dfa.carrier.elements):
                g_top = _composite_open(dfa, tag, T)
                if variant == "sierpinski":
                    bad = g_top not in t.open_sets()
                else:
                    bad = g_top not in t.open_sets() or (full - g_top) not in t.open_sets()
                if not bad:
                    continue
                if fallback is None:
                    fallback = ("obs", tag, T)
                if frozenset(T) in target_opens or tag == "eps":
                    return ("obs", tag, T)
        return fallback

    def moves_oracle(pos):
        if isinstance(pos, FiberElement):
            move = spoiler_guidance(pos)
            return [move] if move is not None else []
        # Duplicator: answer the bisimulation topology when the challenged
        # observation is not one of its opens (a winning reply); otherwise
        # fall back to the indiscrete topology if even that rebuts.
        for cand in (target, fiber.top(fiber.TOPOLOGY, dfa.carrier)):
            if is_legal(pos, cand):
                return [cand]
        return []

    def is_legal(src, dst):
        if isinstance(src, FiberElement):
            if not (isinstance(dst, tuple) and len(dst) == 3 and dst[0] == "obs"):
                return False
            _, tag, T = dst
            if tag != "eps" and tag not in dfa.alphabet:
                return False
            g_top = _composite_open(dfa, tag, tuple(T))
            if variant == "sierpinski":
                return g_top not in src.open_sets()
            return g_top not in src.open_sets() or (full - g_top) not in src.open_sets()
        if isinstance(dst, FiberElement):
            _, tag, T = src
            tset = frozenset(T)
            if variant == "sierpinski":
                return not dst.is_open(tset)
            return not (dst.is_open(tset) and dst.is_open(full - tset))
        return False

    def label_of(pos):
        if isinstance(pos, FiberElement):
            return "O{" + ";".join(_set_label(u) for u in pos.opens()) + "}"
        return f"{pos[1]}/k{_set_label(pos[2])}"

    return OracleArena(
        owner_of=owner_of,
        classify=classify,
        moves_oracle=moves_oracle,
        is_legal=is_legal,
        label_of=label_of,
        cap=cap if cap is not None else 10 * 2 ** dfa.carrier.size,
    )


# --- Hausdorff coincidence ---------------------------------------------------


def _require_nonempty_subsets(d: FiberElement, s, t):
    if d.kind != fiber.PSEUDO_METRIC:
        raise SystemError("hausdorff needs a pseudometric")
    s, t = tuple(s), tuple(t)
    if not s or not t:
        raise SystemError("hausdorff is undefined for empty subsets")
    for e in itertools.chain(s, t):
        if e not in d.carrier:
            raise SystemError(f"subset element {e!r} off the carrier")
    return s, t


def hausdorff_distance(d: FiberElement, s, t) -> Fraction:
    """Symmetrized farthest-nearest distance between two nonempty subsets."""
    s, t = _require_nonempty_subsets(d, s, t)
    one_way = max(min(d.dist(x, y) for y in t) for x in s)
    other = max(min(d.dist(x, y) for x in s) for y in t)
    return max(one_way, other)


def hausdorff_codensity(d: FiberElement, s, t) -> Fraction:
    """The observation-based side: best gap of min-over-subset values over
    non-expansive witnesses; distance functions from single points first,
    then an exact linear program over the full witness polytope."""
    s, t = _require_nonempty_subsets(d, s, t)
    best = ZERO
    for anchor in d.carrier.elements:
        # d(anchor, -) is non-expansive and 1-bounded already
        left = min(d.dist(anchor, x) for x in s)
        right = min(d.dist(anchor, y) for y in t)
        if abs(left - right) > best:
            best = abs(left - right)
    lp = _hausdorff_lp(d, s, t)
    return max(best, lp)


def _hausdorff_lp(d: FiberElement, s, t) -> Fraction:
    """Maximize min over one subset minus the anchored value on the other,
    over non-expansive witnesses, for every anchor and both orientations."""
    elems = d.carrier.elements
    n = len(elems)
    idx = {e: i for i, e in enumerate(elems)}
    best = ZERO

    def solve(min_side, anchor_side):
        nonlocal best
        for anchor in anchor_side:
            # variables: k(e) for each element, then m (the min-side value)
            rows, rhs = [], []
            for i in range(n):
                row = [ZERO] * (n + 1)
                row[i] = ONE
                rows.append(row)
                rhs.append(ONE)
            row = [ZERO] * (n + 1)
            row[n] = ONE
            rows.append(row)
            rhs.append(ONE)
            for i in range(n):
                for j in range(n):
                    if i == j:
                        continue
                    bound = d.payload[i][j]
                    if bound >= 1:
                        continue
                    row = [ZERO] * (n + 1)
                    row[i] = ONE
                    row[j] = -ONE
                    rows.append(row)
                    rhs.append(bound)
            for y in min_side:
                row = [ZERO] * (n + 1)
                row[n] = ONE
                row[idx[y]] = -ONE
                rows.append(row)
                rhs.append(ZERO)
            for x in anchor_side:
                row = [ZERO] * (n + 1)
                row[idx[anchor]] = ONE
                row[idx[x]] = -ONE
                rows.append(row)
                rhs.append(ZERO)
            c = [ZERO] * (n + 1)
            c[n] = ONE
            c[idx[anchor]] = c[idx[anchor]] - ONE
            value, _ = simplex_max(c, rows, rhs)
            if value > best:
                best = value

    solve(min_side=t, anchor_side=s)
    solve(min_side=s, anchor_side=t)
    return best


# --- relational transfer check ------------------------------------------------


def transfer_check(frame: KripkeFrame) -> dict:
    """Three routes to conventional bisimilarity: the concrete relational
    lifting, the equivalence-fiber fixed point, and the endorelation-fiber
    fixed point.  They must coincide, and the result must be an equivalence."""
    from . import lifting as _lifting
    from .fixpoint import gfp

    nu1 = oracles.egli_milner_bisimilarity(frame)
    nu2 = gfp(frame, _lifting.params_kripke_bisim(fiber.EQUIV_REL), fiber.EQUIV_REL).result
    nu3 = gfp(frame, _lifting.params_kripke_bisim(fiber.ENDO_REL), fiber.ENDO_REL).result
    nu2_pairs = nu2.pairs()
    nu3_pairs = nu3.pairs()
    agree = nu1 == set(nu2_pairs) == set(nu3_pairs)
    is_equivalence = _is_equivalence(frame.carrier, nu3_pairs)
    return {
        "agree": agree,
        "is_equivalence": is_equivalence,
        "relational": nu1,
        "equivalence_fiber": nu2,
        "endorelation_fiber": nu3,
    }


def _is_equivalence(carrier_: Carrier, pairs) -> bool:
    pairs = set(pairs)
    if any((e, e) not in pairs for e in carrier_):
        return False
    if any((y, x) not in pairs for x, y in pairs):
        return False
    return all(
        (x, w) in pairs for x, y in pairs for z, w in pairs if y == z
    )

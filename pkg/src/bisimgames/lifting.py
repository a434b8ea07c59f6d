"""Codensity predicate transformers over the fibers.

The transformer pulls the observation-domain structure back along every
decent observation composite (modality after one transition step) and meets
the results.  Finite observation domains are handled by enumeration; the
unit-interval domain with the expectation modality has the Kantorovich
closed form, solved by an exact rational simplex; the threshold family is
collapsed symbolically to mass-equality tests, never enumerating thresholds.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from . import fiber
from .fiber import Carrier, CarrierMap, FiberElement
from .system import (
    BOT,
    TOP,
    Dfa,
    FiniteSystem,
    KripkeFrame,
    MarkovChain,
    Nfa,
    SystemError,
    step_observation,
)

OMEGA2 = Carrier((BOT, TOP))

UNIT_INTERVAL = "unit-interval"

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class ParamEntry:
    """One (observation domain, modality) parameter of the lifting."""

    name: str
    omega: FiberElement | str  # a finite fiber element, or UNIT_INTERVAL
    modality: str


@dataclass(frozen=True)
class ObservationParams:
    entries: tuple[ParamEntry, ...]
    kind: str  # fiber kind the parameters act on


def eq2(kind: str) -> FiberElement:
    """The two-point observation domain carrying the discrete structure."""
    if kind == fiber.EQUIV_REL:
        return FiberElement.equiv_from_blocks(OMEGA2, [[BOT], [TOP]])
    if kind == fiber.ENDO_REL:
        return FiberElement.endorel(OMEGA2, [(BOT, BOT), (TOP, TOP)])
    raise SystemError(f"eq2 undefined for kind {kind}")


def two_le() -> FiberElement:
    return FiberElement.preorder(OMEGA2, [(BOT, TOP)])


def two_ge() -> FiberElement:
    return FiberElement.preorder(OMEGA2, [(TOP, BOT)])


def sierpinski() -> FiberElement:
    return FiberElement.topology(OMEGA2, [[TOP]])


def two_discrete_topology() -> FiberElement:
    return FiberElement.topology(OMEGA2, [[TOP], [BOT]])


# --- standard parameter choices --------------------------------------------


def params_kripke_bisim(kind: str = fiber.EQUIV_REL) -> ObservationParams:
    return ObservationParams((ParamEntry("diamond", eq2(kind), "diamond"),), kind)


def params_kripke_sim(variant: str) -> ObservationParams:
    if variant == "lower":
        entries = (ParamEntry("lower", two_le(), "diamond"),)
    elif variant == "upper":
        entries = (ParamEntry("upper", two_ge(), "diamond"),)
    elif variant == "convex":
        entries = (
            ParamEntry("lower", two_le(), "diamond"),
            ParamEntry("upper", two_ge(), "diamond"),
        )
    else:
        raise SystemError(f"unknown similarity variant {variant!r}")
    return ObservationParams(entries, fiber.PREORDER)


def params_prob_bisim() -> ObservationParams:
    return ObservationParams(
        (ParamEntry("threshold", eq2(fiber.EQUIV_REL), "threshold"),), fiber.EQUIV_REL
    )


def params_bisim_metric() -> ObservationParams:
    return ObservationParams(
        (ParamEntry("expectation", UNIT_INTERVAL, "expectation"),), fiber.PSEUDO_METRIC
    )


def params_automaton(system: Dfa | Nfa, kind: str = fiber.EQUIV_REL) -> ObservationParams:
    omega = eq2(kind)
    entries = [ParamEntry("eps", omega, "accept")]
    entries += [ParamEntry(a, omega, f"symbol:{a}") for a in system.alphabet]
    return ObservationParams(tuple(entries), kind)


def params_dfa_topology(system: Dfa, variant: str) -> ObservationParams:
    if variant == "sierpinski":
        omega = sierpinski()
    elif variant == "discrete":
        omega = two_discrete_topology()
    else:
        raise SystemError(f"unknown topology variant {variant!r}")
    entries = [ParamEntry("eps", omega, "accept")]
    entries += [ParamEntry(a, omega, f"symbol:{a}") for a in system.alphabet]
    return ObservationParams(tuple(entries), fiber.TOPOLOGY)


def params_for_instance(system: FiniteSystem, instance: str) -> ObservationParams:
    """Observation parameters for a CLI instance-selection string."""
    if instance == "kripke-bisim":
        return params_kripke_bisim()
    if instance.startswith("kripke-sim:"):
        return params_kripke_sim(instance.split(":", 1)[1])
    if instance in ("prob-bisim", "prob-bisim-desharnais"):
        return params_prob_bisim()
    if instance == "bisim-metric":
        return params_bisim_metric()
    if instance in ("dfa-lang", "nfa-bisim"):
        return params_automaton(system)
    if instance.startswith("dfa-topology:"):
        return params_dfa_topology(system, instance.split(":", 1)[1])
    raise SystemError(f"unknown instance {instance!r}")


# --- decent observation maps ------------------------------------------------


def decent_maps(p: FiberElement, omega: FiberElement) -> list[CarrierMap]:
    """All maps from p's carrier into the finite observation domain that
    respect both structures, in lexicographic order over the state list."""
    if isinstance(omega, str):
        raise SystemError("decent_maps needs a finite observation domain")
    source = p.carrier
    out = []
    for values in itertools.product(omega.carrier.elements, repeat=source.size):
        k = CarrierMap(source, omega.carrier, values)
        if fiber.is_decent(k, p, omega):
            out.append(k)
    return out


def _composite_map(system: FiniteSystem, k: CarrierMap, modality: str) -> CarrierMap:
    k_table = {s: k(s) for s in k.source}
    values = tuple(step_observation(system, k_table, modality, s) for s in system.carrier)
    return CarrierMap(system.carrier, k.target, values)


def _check_compat(system: FiniteSystem, params: ObservationParams, p: FiberElement) -> None:
    if p.kind != params.kind:
        raise SystemError(f"parameters act on {params.kind}, got {p.kind}")
    if p.carrier != system.carrier:
        raise SystemError("fiber element lives over a different carrier")
    for entry in params.entries:
        if entry.modality == "diamond" and not isinstance(system, KripkeFrame):
            raise SystemError("diamond modality needs a Kripke frame")
        if entry.modality in ("threshold", "expectation") and not isinstance(system, MarkovChain):
            raise SystemError(f"{entry.modality} modality needs a Markov chain")
        if (entry.modality == "accept" or entry.modality.startswith("symbol:")) and not isinstance(
            system, (Dfa, Nfa)
        ):
            raise SystemError("automaton modalities need a DFA or NFA")
        if entry.omega == UNIT_INTERVAL and entry.modality != "expectation":
            raise SystemError("the unit-interval domain only pairs with expectation")


def transform(system: FiniteSystem, params: ObservationParams, p: FiberElement) -> FiberElement:
    """One application of the codensity predicate transformer."""
    _check_compat(system, params, p)
    parts: list[FiberElement] = []
    for entry in params.entries:
        if entry.omega == UNIT_INTERVAL:
            parts.append(_kantorovich_step(system, p))
        elif entry.modality == "threshold":
            parts.append(_threshold_step(system, p, entry.omega))
        else:
            for k in decent_maps(p, entry.omega):
                g = _composite_map(system, k, entry.modality)
                parts.append(fiber.pullback(g, entry.omega))
    if not parts:
        return fiber.top(p.kind, p.carrier)
    return fiber.meet(parts)


def transform_naive(
    system: FiniteSystem, params: ObservationParams, p: FiberElement
) -> FiberElement:
    """Reference path: enumerate every decent map and pull back, with the
    threshold family expanded over the finitely many masses that occur.
    Must agree with transform() on finite observation domains."""
    _check_compat(system, params, p)
    parts: list[FiberElement] = []
    for entry in params.entries:
        if entry.omega == UNIT_INTERVAL:
            raise SystemError("no naive path for the unit-interval domain")
        if entry.modality == "threshold":
            omega = entry.omega
            for k in decent_maps(p, omega):
                k_table = {s: k(s) for s in k.source}
                masses = {
                    step_observation(system, k_table, "threshold", s) for s in system.carrier
                }
                for r in sorted(masses):
                    values = tuple(
                        TOP
                        if step_observation(system, k_table, "threshold", s) >= r
                        else BOT
                        for s in system.carrier
                    )
                    g = CarrierMap(system.carrier, OMEGA2, values)
                    parts.append(fiber.pullback(g, omega))
        else:
            for k in decent_maps(p, entry.omega):
                g = _composite_map(system, k, entry.modality)
                parts.append(fiber.pullback(g, entry.omega))
    if not parts:
        return fiber.top(p.kind, p.carrier)
    return fiber.meet(parts)


def _threshold_step(system: MarkovChain, p: FiberElement, omega: FiberElement) -> FiberElement:
    """Threshold family collapsed: states are related when every decent
    indicator map sees equal one-step mass.  No threshold is enumerated."""
    true_sets = [
        {x for x in system.carrier if k(x) == TOP} for k in decent_maps(p, omega)
    ]
    sigs = {
        s: tuple(system.mass(s, ts) for ts in true_sets) for s in system.carrier
    }
    pairs = [
        (x, y)
        for x, y in itertools.product(system.carrier, repeat=2)
        if sigs[x] == sigs[y]
    ]
    return FiberElement.equiv_from_pairs(system.carrier, pairs)


def _kantorovich_step(system: MarkovChain, d: FiberElement) -> FiberElement:
    n = system.carrier.size
    mat = [[ZERO] * n for _ in range(n)]
    for i, x in enumerate(system.carrier.elements):
        for j, y in enumerate(system.carrier.elements):
            if j <= i:
                continue
            if system.kernel[x] == system.kernel[y]:
                continue  # identical rows are at distance zero
            value = kantorovich(d, system.kernel[x], system.kernel[y])
            mat[i][j] = value
            mat[j][i] = value
    return FiberElement.metric_from_matrix(system.carrier, mat)


# --- exact Kantorovich linear program ---------------------------------------


def simplex_max(c: list[Fraction], rows: list[list[Fraction]], rhs: list[Fraction]):
    """Maximize c.x subject to rows.x <= rhs and x >= 0, exactly over
    rationals.  Requires rhs >= 0 (the origin is feasible).  Bland's rule,
    so no cycling.  Returns (optimum, x)."""
    m, n = len(rows), len(c)
    if any(b < 0 for b in rhs):
        raise ValueError("simplex_max needs nonnegative right-hand sides")
    # tableau: m constraint rows [A | I | b], then the objective row [-c | 0 | 0]
    tab = [rows[i][:] + [ONE if j == i else ZERO for j in range(m)] + [rhs[i]] for i in range(m)]
    obj = [-v for v in c] + [ZERO] * m + [ZERO]
    basis = [n + i for i in range(m)]
    while True:
        enter = next((j for j in range(n + m) if obj[j] < 0), None)  # Bland: least index
        if enter is None:
            break
        best = None
        for i in range(m):
            a = tab[i][enter]
            if a > 0:
                ratio = tab[i][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            raise ValueError("unbounded linear program")
        _, pivot_row = best
        piv = tab[pivot_row][enter]
        tab[pivot_row] = [v / piv for v in tab[pivot_row]]
        for i in range(m):
            if i != pivot_row and tab[i][enter] != 0:
                factor = tab[i][enter]
                tab[i] = [v - factor * w for v, w in zip(tab[i], tab[pivot_row])]
        if obj[enter] != 0:
            factor = obj[enter]
            obj = [v - factor * w for v, w in zip(obj, tab[pivot_row])]
        basis[pivot_row] = enter
    x = [ZERO] * n
    for i, var in enumerate(basis):
        if var < n:
            x[var] = tab[i][-1]
    return obj[-1], x


def _kantorovich_lp(
    d: FiberElement, weights: list[Fraction]
) -> tuple[Fraction, list[Fraction]]:
    """Maximize sum_x f(x) * weights[x] over 0 <= f <= 1 with f non-expansive
    for d (the dual witness form of the lifted distance)."""
    elems = d.carrier.elements
    n = len(elems)
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for i in range(n):
        row = [ZERO] * n
        row[i] = ONE
        rows.append(row)
        rhs.append(ONE)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            bound = d.payload[i][j]
            if bound >= 1:
                continue  # slack constraint; |f(i)-f(j)| <= 1 already holds
            row = [ZERO] * n
            row[i] = ONE
            row[j] = -ONE
            rows.append(row)
            rhs.append(bound)
    return simplex_max(list(weights), rows, rhs)


def kantorovich_witness(d: FiberElement, mu: dict[str, Fraction], nu: dict[str, Fraction]):
    """Lifted distance between two subdistributions together with an optimal
    witness function, exact over rationals."""
    if d.kind != fiber.PSEUDO_METRIC:
        raise SystemError("kantorovich needs a pseudometric")
    for t in itertools.chain(mu, nu):
        if t not in d.carrier:
            raise SystemError(f"distribution mentions {t!r} off the carrier")
    weights = [mu.get(x, ZERO) - nu.get(x, ZERO) for x in d.carrier.elements]
    best_val, best_f = _kantorovich_lp(d, weights)
    val2, f2 = _kantorovich_lp(d, [-w for w in weights])
    if val2 > best_val:
        best_val, best_f = val2, f2
    return best_val, {x: best_f[i] for i, x in enumerate(d.carrier.elements)}


def kantorovich(d: FiberElement, mu: dict[str, Fraction], nu: dict[str, Fraction]) -> Fraction:
    return kantorovich_witness(d, mu, nu)[0]


# --- spoiler witnesses -------------------------------------------------------


def spoiler_witness(system: FiniteSystem, params: ObservationParams, p: FiberElement):
    """A decent observation whose one-step composite breaks decency from p,
    or None exactly when p is a codensity bisimulation."""
    _check_compat(system, params, p)
    for entry in params.entries:
        if entry.omega == UNIT_INTERVAL:
            for x, y in itertools.combinations(system.carrier.elements, 2):
                value, f = kantorovich_witness(p, system.kernel[x], system.kernel[y])
                if value > p.dist(x, y):
                    return entry.name, f
            continue
        if entry.modality == "threshold":
            omega = entry.omega
            for k in decent_maps(p, omega):
                k_table = {s: k(s) for s in k.source}
                masses = {s: step_observation(system, k_table, "threshold", s) for s in system.carrier}
                for x, y in itertools.combinations(system.carrier.elements, 2):
                    if p.related(x, y) and masses[x] != masses[y]:
                        # any threshold strictly between the two masses violates
                        return entry.name, k
            continue
        for k in decent_maps(p, entry.omega):
            g = _composite_map(system, k, entry.modality)
            if not fiber.is_decent(g, p, entry.omega):
                return entry.name, k
    return None

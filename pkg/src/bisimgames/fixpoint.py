"""Greatest-fixed-point engine for the codensity transformers.

Iteration starts at the fiber top and descends.  The four finite-lattice
kinds stop at exact stabilization; the pseudometric fiber stops when no
entry moves by more than the requested tolerance, and the report records
the residual honestly (zero residual means the iterate is an exact fixed
point even in tolerance mode).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import fiber
from .fiber import FiberElement
from .lifting import ObservationParams, transform
from .system import FiniteSystem, SystemError

DEFAULT_EPS = Fraction(1, 10**6)
MAX_METRIC_ITERATIONS = 10_000

# tolerance-mode iterates are floored to this dyadic grid to keep rational
# bit-size bounded across iterations; far below any practical tolerance
GRID_BITS = 40

FINITE_KINDS = (fiber.EQUIV_REL, fiber.ENDO_REL, fiber.PREORDER, fiber.TOPOLOGY)


@dataclass(frozen=True)
class FixpointReport:
    result: FiberElement
    iterations: int
    mode: str  # "exact" or "tolerance"
    eps: Fraction | None
    converged: bool
    residual: Fraction | None  # max entry change of the last step (metric only)

    @property
    def exact(self) -> bool:
        return self.mode == "exact" or (self.residual is not None and self.residual == 0)


def _metric_residual(p: FiberElement, q: FiberElement) -> Fraction:
    n = p.carrier.size
    return max(
        abs(p.payload[i][j] - q.payload[i][j]) for i in range(n) for j in range(n)
    )


def _height_bound(kind: str, n: int) -> int:
    if kind == fiber.EQUIV_REL:
        return n + 1
    if kind in (fiber.ENDO_REL, fiber.PREORDER):
        return n * n + 1
    if kind == fiber.TOPOLOGY:
        return 2**n + 1
    raise SystemError(f"no height bound for kind {kind}")


def gfp(
    system: FiniteSystem,
    params: ObservationParams,
    kind: str,
    mode: str = "exact",
    eps: Fraction = DEFAULT_EPS,
) -> FixpointReport:
    """Kleene iteration of the transformer from the top of the fiber."""
    if kind != params.kind:
        raise SystemError(f"parameters act on {params.kind}, not {kind}")
    if kind in FINITE_KINDS:
        if mode != "exact":
            raise SystemError(f"{kind} is a finite lattice; only exact mode applies")
        current = fiber.top(kind, system.carrier)
        bound = _height_bound(kind, system.carrier.size)
        iterations = 0
        while True:
            nxt = transform(system, params, current)
            iterations += 1
            assert fiber.leq(nxt, current), "iteration must descend"
            if nxt == current:
                return FixpointReport(current, iterations, "exact", None, True, None)
            assert iterations <= bound, "finite-lattice iteration exceeded height bound"
            current = nxt
    if kind == fiber.PSEUDO_METRIC:
        if mode not in ("tolerance", "exact"):
            raise SystemError(f"unknown mode {mode!r}")
        # exact mode on the metric fiber succeeds only if iteration stabilizes
        current = fiber.top(kind, system.carrier)
        iterations = 0
        residual = None
        while iterations < MAX_METRIC_ITERATIONS:
            nxt = transform(system, params, current)
            iterations += 1
            assert fiber.leq(nxt, current), "iteration must descend"
            residual = _metric_residual(nxt, current)
            if residual == 0:
                return FixpointReport(
                    nxt, iterations, "exact" if mode == "exact" else "tolerance",
                    None if mode == "exact" else eps, True, residual,
                )
            if mode == "tolerance" and residual <= eps:
                # applying the transformer once more moves no entry above eps
                return FixpointReport(current, iterations, "tolerance", eps, True, residual)
            current = _grid_floor(nxt, current) if mode == "tolerance" else nxt
        if mode == "exact":
            raise SystemError("metric iteration did not stabilize exactly; use tolerance mode")
        return FixpointReport(current, iterations, "tolerance", eps, False, residual)
    raise SystemError(f"unknown kind {kind}")


def _grid_floor(nxt: FiberElement, prev: FiberElement) -> FiberElement:
    """Floor the iterate to the dyadic grid, repair the triangle inequality by
    shortest paths, and clamp from below by the previous iterate.  The result
    stays sandwiched between the previous iterate and the exact step, so the
    iteration remains a monotone under-approximation of the fixed point."""
    scale = 1 << GRID_BITS
    n = nxt.carrier.size
    floored = [
        [Fraction(int(nxt.payload[i][j] * scale), scale) for j in range(n)]
        for i in range(n)
    ]
    repaired = fiber._shortest_path_closure(floored)
    clamped = tuple(
        tuple(max(repaired[i][j], prev.payload[i][j]) for j in range(n)) for i in range(n)
    )
    return FiberElement(fiber.PSEUDO_METRIC, nxt.carrier, clamped)


def is_bisimulation(system: FiniteSystem, params: ObservationParams, p: FiberElement) -> bool:
    """Post-fixed-point test: p is below its own transform."""
    return fiber.leq(p, transform(system, params, p))

"""Solve-report rendering: tab-delimited text, JSON, and matplotlib figures
written alongside the textual output."""

from __future__ import annotations

from fractions import Fraction

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from . import fiber
from .game import arena_to_json
from .solver import SolveResult
from .system import format_rational, serialize_system


def fmt_value(value: Fraction, fmt: str) -> str:
    if fmt == "decimal":
        return f"{float(value):.6g}"
    return format_rational(value)


def render_text(result: SolveResult, fmt: str = "rational") -> str:
    lines: list[str] = []
    sys_ = result.system
    lines.append(f"instance\t{result.instance}")
    lines.append(f"system\t{sys_.type}\tstates\t{','.join(sys_.carrier.elements)}")
    if result.report is not None:
        rep = result.report
        lines.append(
            f"fixpoint\tmode={rep.mode}\titerations={rep.iterations}\tconverged={rep.converged}"
            + (f"\teps={fmt_value(rep.eps, fmt)}" if rep.eps is not None else "")
            + (f"\tresidual={fmt_value(rep.residual, fmt)}" if rep.residual is not None else "")
        )
        lines.extend(_render_fiber(rep.result, fmt))
    if result.topology is not None:
        lines.append("subbasis\t" + "\t".join("{" + ",".join(u) + "}" for u in result.topology.opens()))
        lines.append(
            "specialization\t"
            + "\t".join(f"{x}<={y}" for x, y in sorted(result.specialization.pairs()) if x != y)
        )
    if result.region_pairs is not None:
        elems = sys_.carrier.elements
        won = sorted(result.region_pairs, key=lambda p: (elems.index(p[0]), elems.index(p[1])))
        lines.append("winning-region\t" + "\t".join(f"({x},{y})" for x, y in won))
        lines.append(f"region-size\t{len(result.region_pairs)}\tof\t{len(elems) ** 2}")
    if result.transfer is not None:
        rel = sorted(result.transfer["relational"])
        lines.append("transfer-relation\t" + "\t".join(f"({x},{y})" for x, y in rel))
    for name, value in result.cross_check.items():
        lines.append(f"cross-check\t{name}\t{'ok' if value else 'FAILED'}")
    lines.append(f"consistent\t{'ok' if result.consistent else 'FAILED'}")
    return "\n".join(lines) + "\n"


def _render_fiber(p: fiber.FiberElement, fmt: str) -> list[str]:
    lines = []
    if p.kind == fiber.EQUIV_REL:
        lines.append("partition\t" + "\t".join("{" + ",".join(b) + "}" for b in p.blocks()))
    elif p.kind in (fiber.ENDO_REL, fiber.PREORDER):
        lines.append(
            "relation\t" + "\t".join(f"({x},{y})" for x, y in sorted(p.pairs()))
        )
    elif p.kind == fiber.PSEUDO_METRIC:
        elems = p.carrier.elements
        lines.append("metric\t" + "\t".join(elems))
        for x in elems:
            lines.append(x + "\t" + "\t".join(fmt_value(p.dist(x, y), fmt) for y in elems))
    elif p.kind == fiber.TOPOLOGY:
        lines.append("opens\t" + "\t".join("{" + ",".join(u) + "}" for u in p.opens()))
    return lines


def render_json(result: SolveResult, fmt: str = "rational") -> dict:
    out: dict = {
        "instance": result.instance,
        "system": serialize_system(result.system),
        "crossCheck": dict(result.cross_check),
        "consistent": result.consistent,
    }
    if result.report is not None:
        rep = result.report
        out["fixpoint"] = {
            "mode": rep.mode,
            "iterations": rep.iterations,
            "converged": rep.converged,
            "eps": fmt_value(rep.eps, fmt) if rep.eps is not None else None,
            "residual": fmt_value(rep.residual, fmt) if rep.residual is not None else None,
            "result": fiber_to_json(rep.result, fmt),
        }
    if result.topology is not None:
        out["topology"] = fiber_to_json(result.topology, fmt)
        out["specialization"] = fiber_to_json(result.specialization, fmt)
    if result.region_pairs is not None:
        out["winningRegion"] = sorted(list(p) for p in result.region_pairs)
    if result.arena is not None:
        out["arena"] = arena_to_json(result.arena, result.region)
    if result.transfer is not None:
        out["transfer"] = {
            "agree": result.transfer["agree"],
            "isEquivalence": result.transfer["is_equivalence"],
            "relation": sorted(list(p) for p in result.transfer["relational"]),
        }
    return out


def fiber_to_json(p: fiber.FiberElement, fmt: str = "rational") -> dict:
    if p.kind == fiber.EQUIV_REL:
        return {"kind": p.kind, "blocks": [list(b) for b in p.blocks()]}
    if p.kind in (fiber.ENDO_REL, fiber.PREORDER):
        return {"kind": p.kind, "pairs": sorted(list(q) for q in p.pairs())}
    if p.kind == fiber.PSEUDO_METRIC:
        elems = p.carrier.elements
        return {
            "kind": p.kind,
            "states": list(elems),
            "matrix": [[fmt_value(p.dist(x, y), fmt) for y in elems] for x in elems],
        }
    if p.kind == fiber.TOPOLOGY:
        return {"kind": p.kind, "opens": [list(u) for u in p.opens()]}
    raise ValueError(f"unknown kind {p.kind}")


# --- figures -----------------------------------------------------------------


def render_figure(result: SolveResult, path: str) -> None:
    """One figure per solve: a metric heatmap, a winning-region matrix, or an
    open-set membership chart, depending on the instance."""
    if result.report is not None and result.report.result.kind == fiber.PSEUDO_METRIC:
        _metric_figure(result, path)
    elif result.topology is not None:
        _topology_figure(result, path)
    elif result.region_pairs is not None:
        _region_figure(result, path)
    elif result.transfer is not None:
        _relation_figure(result, path)
    else:
        raise ValueError("nothing to plot for this instance")


def _metric_figure(result: SolveResult, path: str) -> None:
    d = result.report.result
    elems = d.carrier.elements
    n = len(elems)
    values = [[float(d.dist(x, y)) for y in elems] for x in elems]
    fig, ax = plt.subplots(figsize=(1.2 * n + 2, 1.2 * n + 1.5))
    im = ax.imshow(values, cmap="viridis", vmin=0.0, vmax=1.0)
    ax.set_xticks(range(n), labels=elems)
    ax.set_yticks(range(n), labels=elems)
    for i, x in enumerate(elems):
        for j, y in enumerate(elems):
            ax.text(j, i, format_rational(d.dist(x, y)), ha="center", va="center",
                    color="white" if values[i][j] < 0.6 else "black", fontsize=9)
    ax.set_title(f"{result.instance}: distance table")
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _region_figure(result: SolveResult, path: str) -> None:
    elems = result.system.carrier.elements
    n = len(elems)
    values = [[1.0 if (x, y) in result.region_pairs else 0.0 for y in elems] for x in elems]
    fig, ax = plt.subplots(figsize=(1.0 * n + 2, 1.0 * n + 1.5))
    ax.imshow(values, cmap="Greens", vmin=0.0, vmax=1.3)
    ax.set_xticks(range(n), labels=elems)
    ax.set_yticks(range(n), labels=elems)
    for i in range(n):
        for j in range(n):
            ax.text(j, i, "D" if values[i][j] else "S", ha="center", va="center", fontsize=10)
    ax.set_title(f"{result.instance}: Duplicator-winning pairs")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _relation_figure(result: SolveResult, path: str) -> None:
    elems = result.system.carrier.elements
    rel = result.transfer["relational"]
    n = len(elems)
    values = [[1.0 if (x, y) in rel else 0.0 for y in elems] for x in elems]
    fig, ax = plt.subplots(figsize=(1.0 * n + 2, 1.0 * n + 1.5))
    ax.imshow(values, cmap="Blues", vmin=0.0, vmax=1.3)
    ax.set_xticks(range(n), labels=elems)
    ax.set_yticks(range(n), labels=elems)
    ax.set_title("transfer-check: shared bisimilarity relation")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _topology_figure(result: SolveResult, path: str) -> None:
    t = result.topology
    elems = t.carrier.elements
    opens = t.opens()
    values = [[1.0 if s in set(u) else 0.0 for s in elems] for u in opens]
    fig, ax = plt.subplots(figsize=(1.0 * len(elems) + 2, 0.5 * len(opens) + 1.5))
    ax.imshow(values, cmap="Purples", vmin=0.0, vmax=1.3, aspect="auto")
    ax.set_xticks(range(len(elems)), labels=elems)
    ax.set_yticks(range(len(opens)), labels=["{" + ",".join(u) + "}" for u in opens])
    ax.set_title(f"{result.instance}: open sets")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)

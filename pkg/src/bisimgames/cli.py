"""Command-line entry points: solve, play, translate, check and serve.

Exit codes: 2 for parse errors, 3 for an incompatible instance, 4 when a
translation start is not Duplicator-winning, 1 for a failed check or a
soundness-cross-check mismatch.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import fiber, instances, oracles
from .fixpoint import DEFAULT_EPS
from .fixtures import FIXTURE_DOCS, SPACE_DOCS, fixture_names
from .game import (
    DUPLICATOR,
    SPOILER,
    IllegalMove,
    arena_to_dot,
    arena_to_json,
    extract_strategies,
    largest_invariant,
    random_player,
    simulate,
)
from .lifting import params_for_instance
from .fixpoint import is_bisimulation
from .solver import (
    GameSession,
    IncompatibleInstance,
    INSTANCES,
    decode_move,
    encode_position,
    parse_start,
    solve,
)
from .system import FiniteSystem, SystemError, parse_rational, parse_system

EXIT_PARSE = 2
EXIT_INCOMPATIBLE = 3
EXIT_NOT_WINNING = 4


def load_document(ref: str) -> dict:
    if ref in FIXTURE_DOCS:
        return FIXTURE_DOCS[ref]
    if ref in SPACE_DOCS:
        return SPACE_DOCS[ref]
    path = Path(ref)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise SystemError(f"cannot read {ref!r}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SystemError(f"{ref}: invalid JSON: {exc}") from None


def load_system(ref: str) -> FiniteSystem:
    return parse_system(load_document(ref))


def parse_space(doc: dict):
    """Metric-space document: {"type": "metric-space", "points": [...],
    "dist": {"a|b": "p/q"}, optional "S"/"T" subsets}."""
    if doc.get("type") != "metric-space":
        raise SystemError("type: expected 'metric-space'")
    points = doc.get("points")
    if not isinstance(points, list) or not points:
        raise SystemError("points: expected a nonempty list")
    car = fiber.Carrier(tuple(points))
    entries = {}
    for key, value in doc.get("dist", {}).items():
        parts = key.split("|")
        if len(parts) != 2:
            raise SystemError(f"dist.{key}: keys look like 'a|b'")
        entries[(parts[0], parts[1])] = parse_rational(value, f"dist.{key}")
    return fiber.FiberElement.metric(car, entries), doc


def parse_fiber_element(doc: dict, carrier: fiber.Carrier) -> fiber.FiberElement:
    kind = doc.get("kind")
    if kind == fiber.EQUIV_REL:
        return fiber.FiberElement.equiv_from_blocks(carrier, doc["blocks"])
    if kind == fiber.ENDO_REL:
        return fiber.FiberElement.endorel(carrier, [tuple(p) for p in doc["pairs"]])
    if kind == fiber.PREORDER:
        return fiber.FiberElement.preorder(carrier, [tuple(p) for p in doc["pairs"]])
    if kind == fiber.PSEUDO_METRIC:
        entries = {}
        for key, value in doc.get("entries", {}).items():
            parts = key.split("|")
            entries[(parts[0], parts[1])] = parse_rational(value, f"entries.{key}")
        return fiber.FiberElement.metric(carrier, entries)
    if kind == fiber.TOPOLOGY:
        return fiber.FiberElement.topology(carrier, [tuple(u) for u in doc["opens"]])
    raise SystemError(f"unknown fiber kind {kind!r}")


def _parse_eps(text: str) -> Fraction:
    if "e" in text or "E" in text or "." in text:
        return Fraction(text).limit_denominator(10**12)
    return parse_rational(text, "--eps")


# --- solve ---------------------------------------------------------------------


def cmd_solve(args) -> int:
    from . import report as report_mod

    if args.instance == "hausdorff":
        return _solve_hausdorff(args)
    system = load_system(args.file)
    result = solve(system, args.instance, eps=_parse_eps(args.eps))
    out = report_mod.render_text(result, args.format)
    sys.stdout.write(out)
    if args.emit_json:
        Path(args.emit_json).write_text(
            json.dumps(report_mod.render_json(result, args.format), indent=2) + "\n",
            encoding="utf-8",
        )
    if args.emit_dot:
        if result.arena is None:
            print("no explicit arena for this instance; skipping DOT export", file=sys.stderr)
        else:
            Path(args.emit_dot).write_text(arena_to_dot(result.arena, result.region), encoding="utf-8")
    if args.emit_plot:
        report_mod.render_figure(result, args.emit_plot)
    if not result.consistent:
        print("SOUNDNESS CROSS-CHECK FAILED", file=sys.stderr)
        return 1
    return 0


def _solve_hausdorff(args) -> int:
    from .system import format_rational as fr

    d, doc = parse_space(load_document(args.file))
    s, t = doc.get("S"), doc.get("T")
    if not s or not t:
        raise SystemError("metric-space document needs nonempty 'S' and 'T' subsets")
    direct = instances.hausdorff_distance(d, s, t)
    codensity = instances.hausdorff_codensity(d, s, t)
    print(f"instance\thausdorff")
    print(f"hausdorff-direct\t{fr(direct)}")
    print(f"hausdorff-codensity\t{fr(codensity)}")
    print(f"cross-check\tvalues_coincide\t{'ok' if direct == codensity else 'FAILED'}")
    print(f"consistent\t{'ok' if direct == codensity else 'FAILED'}")
    if args.emit_json:
        Path(args.emit_json).write_text(
            json.dumps(
                {
                    "instance": "hausdorff",
                    "direct": fr(direct),
                    "codensity": fr(codensity),
                    "coincide": direct == codensity,
                },
                indent=2,
            )
            + "\n",
            encoding="utf-8",
        )
    return 0 if direct == codensity else 1


# --- play ----------------------------------------------------------------------


def _print_transcript(transcript, start_index: int, out) -> int:
    for entry in transcript[start_index:]:
        if entry["event"] == "position":
            print(f"POS {entry['label']}", file=out)
        elif entry["event"] == "move":
            print(f"MOVE {entry['side']} {entry['label']}", file=out)
        else:
            winner = entry["winner"] or "undetermined"
            print(f"WIN {winner} {entry['reason']}", file=out)
    return len(transcript)


def cmd_play(args, stdin=None, stdout=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    system = load_system(args.file)
    start = parse_start(system, args.instance, args.start)
    session = GameSession(
        system, args.instance, start, args.side,
        eps=_parse_eps(args.eps), cap=args.cap,
    )
    print(f"# {args.instance} on {args.file}; you play {args.side}", file=stdout)
    shown = _print_transcript(session.transcript, 0, stdout)
    while not session.state.finished:
        legal = session.legal_moves()
        if session.arena is not None:
            for i, move in enumerate(legal):
                print(f"LEGAL {i}: {session.label(move)}", file=stdout)
        else:
            for move in legal:
                print(f"HINT {session.label(move)}", file=stdout)
        print("> ", end="", file=stdout, flush=True)
        line = stdin.readline()
        if not line:
            print("# input closed; leaving the session", file=stdout)
            return 0
        line = line.strip()
        if line in ("q", "quit", "exit"):
            return 0
        try:
            if line.startswith("{"):
                move = decode_move(json.loads(line), session)
            else:
                index = int(line)
                if not 0 <= index < len(legal):
                    raise IllegalMove("index out of range", legal=legal)
                move = legal[index]
            session.human_move(move)
        except (IllegalMove, ValueError) as exc:
            legal_list = getattr(exc, "legal", []) or legal
            print(f"ILLEGAL {exc}", file=stdout)
            for i, m in enumerate(legal_list):
                print(f"LEGAL {i}: {session.label(m)}", file=stdout)
            continue
        shown = _print_transcript(session.transcript, shown, stdout)
    return 0


# --- translate -------------------------------------------------------------------


def cmd_translate(args) -> int:
    system = load_system(args.file)
    if not hasattr(system, "kernel"):
        raise IncompatibleInstance("translate works on Markov chains")
    x, y = [p.strip() for p in args.start.split(",")]
    rng = random.Random(args.seed)
    plays = args.plays
    fkp_arena = instances.build_prob_game(system)
    fkp_region = largest_invariant(fkp_arena)
    fkp_pairs = instances.prob_region_pairs(system, fkp_region)
    desh_arena = instances.build_desharnais_game(system)
    desh_region = largest_invariant(desh_arena)

    if args.direction == "desharnais-to-fkp":
        if ("d1", x, y) not in desh_region:
            print(f"start ({x},{y}) is not Duplicator-winning", file=sys.stderr)
            return EXIT_NOT_WINNING
        desh_dup, _ = extract_strategies(desh_arena)
        responder = instances.translate_strategy_desharnais_to_fkp(system, desh_dup, (x, y))
        table: dict[str, list[str]] = {}

        def dup_move(state):
            pair_pos = state.history[-2]
            answer = responder.respond((pair_pos[1], pair_pos[2]), state.current[1])
            key = f"({pair_pos[1]},{pair_pos[2]})|Z{{{','.join(state.current[1])}}}"
            table[key] = list(answer)
            return ("pair",) + answer

        won = 0
        for _ in range(plays):
            final = simulate(
                fkp_arena, ("pair", x, y), dup_move, random_player(rng, fkp_arena),
                winning_region=fkp_region,
            )
            if final.winner == DUPLICATOR:
                won += 1
        artifact = {
            "direction": args.direction,
            "start": [x, y],
            "strategy": table,
            "verification": {"plays": plays, "won": won},
        }
    else:
        if (x, y) not in fkp_pairs:
            print(f"start ({x},{y}) is not Duplicator-winning", file=sys.stderr)
            return EXIT_NOT_WINNING
        strategy = instances.translate_strategy_fkp_to_desharnais(system, fkp_pairs, (x, y))
        zbar_table = {
            "{" + ",".join(Z) + "}": list(instances.zbar(system, fkp_pairs, Z))
            for Z in instances.subsets(system.carrier.elements)
        }
        won = 0
        for _ in range(plays):
            final = simulate(
                desh_arena, ("d1", x, y),
                lambda st: strategy(st.current),
                random_player(rng, desh_arena),
                winning_region=desh_region,
            )
            if final.winner == DUPLICATOR:
                won += 1
        artifact = {
            "direction": args.direction,
            "start": [x, y],
            "zbar": zbar_table,
            "strategy": {
                str(k): list(v) for k, v in strategy.choice.items()
            },
            "verification": {"plays": plays, "won": won},
        }
    if won != plays:
        print(f"verification failed: won {won}/{plays}", file=sys.stderr)
        return 1
    text = json.dumps(artifact, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    print(f"verified: {won}/{plays} adversarial plays won", file=sys.stderr)
    return 0


# --- check -----------------------------------------------------------------------


def cmd_check(args) -> int:
    if args.what == "hausdorff":
        d, doc = parse_space(load_document(args.file))
        s = args.s.split(",") if args.s else doc.get("S")
        t = args.t.split(",") if args.t else doc.get("T")
        if not s or not t:
            raise SystemError("hausdorff needs --s and --t subsets")
        direct = instances.hausdorff_distance(d, s, t)
        codensity = instances.hausdorff_codensity(d, s, t)
        from .system import format_rational as fr

        print(f"hausdorff-direct\t{fr(direct)}")
        print(f"hausdorff-codensity\t{fr(codensity)}")
        print(f"coincide\t{'ok' if direct == codensity else 'FAILED'}")
        return 0 if direct == codensity else 1
    if args.what == "transfer-check":
        system = load_system(args.file)
        result = instances.transfer_check(system)
        print(f"agree\t{'ok' if result['agree'] else 'FAILED'}")
        print(f"equivalence\t{'ok' if result['is_equivalence'] else 'FAILED'}")
        return 0 if result["agree"] and result["is_equivalence"] else 1
    system = load_system(args.file)
    if args.what == "is-bisimulation":
        params = params_for_instance(system, args.instance)
        candidate = parse_fiber_element(load_document(args.candidate), system.carrier)
        ok = is_bisimulation(system, params, candidate)
        print(f"is-bisimulation\t{'yes' if ok else 'no'}")
        return 0
    if args.what == "verify-invariant":
        from .solver import PAIR_GAMES

        if args.instance not in PAIR_GAMES:
            raise IncompatibleInstance(f"verify-invariant needs a finite-arena instance")
        arena = PAIR_GAMES[args.instance].build(system)
        wanted = set(map(tuple, load_document(args.candidate)["positions"]))
        candidate = {q for q in arena.sp_positions if (arena.label(q) in wanted or tuple(q[1:]) in wanted)}
        from .game import verify_invariant

        ok = verify_invariant(arena, candidate)
        print(f"verify-invariant\t{'yes' if ok else 'no'}")
        return 0
    raise SystemError(f"unknown check {args.what!r}")


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


# --- argument parsing ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bisimgames",
        description="codensity bisimilarity fixed points and safety games on finite systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--eps", default=str(DEFAULT_EPS), help="metric iteration tolerance (rational or decimal)")
    common.add_argument("--cap", type=int, default=None, help="step cap for plays (default 10x arena size)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized adversaries")
    common.add_argument("--format", choices=("rational", "decimal"), default="rational")

    p_solve = sub.add_parser("solve", parents=[common], help="fixed point + winning region + cross-check")
    p_solve.add_argument("file", help=f"system file or fixture name ({', '.join(fixture_names())})")
    p_solve.add_argument("--instance", required=True, choices=[*INSTANCES, "hausdorff"])
    p_solve.add_argument("--emit-dot", default=None, help="write the arena in DOT format")
    p_solve.add_argument("--emit-json", default=None, help="write the full report as JSON")
    p_solve.add_argument("--emit-plot", default=None, help="write a matplotlib figure (PNG)")
    p_solve.set_defaults(func=cmd_solve)

    p_play = sub.add_parser("play", parents=[common], help="interactive play against the engine")
    p_play.add_argument("file")
    p_play.add_argument("--instance", required=True, choices=[i for i in INSTANCES if i != "transfer-check"])
    p_play.add_argument("--start", required=True, help="'x,y' | 'x,y,eps' | discrete|indiscrete|bisim")
    p_play.add_argument("--side", choices=(DUPLICATOR, SPOILER), default=DUPLICATOR)
    p_play.set_defaults(func=cmd_play)

    p_tr = sub.add_parser("translate", parents=[common], help="translate probabilistic-game strategies")
    p_tr.add_argument("file")
    p_tr.add_argument("--direction", required=True, choices=("desharnais-to-fkp", "fkp-to-desharnais"))
    p_tr.add_argument("--start", required=True, help="'x,y'")
    p_tr.add_argument("--plays", type=int, default=500)
    p_tr.add_argument("--out", default=None, help="strategy artifact path (default stdout)")
    p_tr.set_defaults(func=cmd_translate)

    p_check = sub.add_parser("check", parents=[common], help="one-off checks")
    p_check.add_argument("what", choices=("is-bisimulation", "verify-invariant", "hausdorff", "transfer-check"))
    p_check.add_argument("file")
    p_check.add_argument("--instance", default=None)
    p_check.add_argument("--candidate", default=None, help="candidate fiber element / position set (JSON)")
    p_check.add_argument("--s", default=None, help="hausdorff: first subset, comma separated")
    p_check.add_argument("--t", default=None, help="hausdorff: second subset, comma separated")
    p_check.set_defaults(func=cmd_check)

    p_serve = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8077)
    p_serve.add_argument("--static", default=None, help="directory with the web client bundle")
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except IncompatibleInstance as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCOMPATIBLE
    except SystemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except fiber.FiberError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())

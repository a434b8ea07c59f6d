"""Instance registry and the shared solve/play engine behind the CLI and the
HTTP service.  An instance string selects the fiber kind, the observation
parameters, the trimmed arena builder and the independent oracle used for
the embedded soundness cross-check."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import fiber, instances, lifting, oracles
from .fixpoint import DEFAULT_EPS, FixpointReport, gfp
from .game import (
    DUPLICATOR,
    SPOILER,
    Arena,
    IllegalMove,
    OracleArena,
    PlayState,
    default_cap,
    extract_strategies,
    largest_invariant,
    oracle_play_step,
    oracle_settle,
    play_step,
    start_play,
    strategy_player,
)
from .instances import MetricPosition
from .lifting import spoiler_witness
from .system import (
    Dfa,
    FiniteSystem,
    KripkeFrame,
    MarkovChain,
    Nfa,
    SystemError,
    format_rational,
    parse_rational,
)

INSTANCES = (
    "kripke-bisim",
    "kripke-sim:lower",
    "kripke-sim:upper",
    "kripke-sim:convex",
    "prob-bisim",
    "prob-bisim-desharnais",
    "bisim-metric",
    "dfa-lang",
    "nfa-bisim",
    "dfa-topology:sierpinski",
    "dfa-topology:discrete",
    "transfer-check",
)


class IncompatibleInstance(SystemError):
    pass


@dataclass
class PairGameSpec:
    instance: str
    system_type: type
    kind: str
    build: Callable[[FiniteSystem], Arena]
    oracle: Callable[[FiniteSystem], set]


def _sim_oracle(variant):
    return lambda frame: oracles.greatest_simulation(frame, variant)


PAIR_GAMES: dict[str, PairGameSpec] = {
    "kripke-bisim": PairGameSpec(
        "kripke-bisim", KripkeFrame, fiber.EQUIV_REL,
        instances.build_kripke_game, oracles.kripke_bisimilarity,
    ),
    "kripke-sim:lower": PairGameSpec(
        "kripke-sim:lower", KripkeFrame, fiber.PREORDER,
        lambda f: instances.build_similarity_game(f, "lower"), _sim_oracle("lower"),
    ),
    "kripke-sim:upper": PairGameSpec(
        "kripke-sim:upper", KripkeFrame, fiber.PREORDER,
        lambda f: instances.build_similarity_game(f, "upper"), _sim_oracle("upper"),
    ),
    "kripke-sim:convex": PairGameSpec(
        "kripke-sim:convex", KripkeFrame, fiber.PREORDER,
        lambda f: instances.build_similarity_game(f, "convex"), _sim_oracle("convex"),
    ),
    "prob-bisim": PairGameSpec(
        "prob-bisim", MarkovChain, fiber.EQUIV_REL,
        instances.build_prob_game, oracles.prob_bisimilarity,
    ),
    "prob-bisim-desharnais": PairGameSpec(
        "prob-bisim-desharnais", MarkovChain, fiber.EQUIV_REL,
        instances.build_desharnais_game, oracles.prob_bisimilarity,
    ),
    "dfa-lang": PairGameSpec(
        "dfa-lang", Dfa, fiber.EQUIV_REL,
        instances.build_dfa_game, oracles.dfa_language_equivalence,
    ),
    "nfa-bisim": PairGameSpec(
        "nfa-bisim", Nfa, fiber.EQUIV_REL,
        instances.build_nfa_game, oracles.nfa_bisimilarity,
    ),
}


def _pair_of(pos) -> tuple[str, str] | None:
    if isinstance(pos, tuple) and pos and pos[0] in ("pair", "d1"):
        return (pos[1], pos[2])
    return None


def _check_instance(system: FiniteSystem, instance: str) -> None:
    if instance in PAIR_GAMES:
        spec = PAIR_GAMES[instance]
        if not isinstance(system, spec.system_type):
            raise IncompatibleInstance(
                f"instance {instance!r} needs a {spec.system_type.__name__}, got {system.type}"
            )
        return
    if instance == "bisim-metric":
        if not isinstance(system, MarkovChain):
            raise IncompatibleInstance("bisim-metric needs a Markov chain")
        return
    if instance.startswith("dfa-topology:"):
        if not isinstance(system, Dfa):
            raise IncompatibleInstance("dfa-topology needs a DFA")
        if instance.split(":", 1)[1] not in ("sierpinski", "discrete"):
            raise IncompatibleInstance(f"unknown topology variant in {instance!r}")
        return
    if instance == "transfer-check":
        if not isinstance(system, KripkeFrame):
            raise IncompatibleInstance("transfer-check needs a Kripke frame")
        return
    raise IncompatibleInstance(f"unknown instance {instance!r}")


# --- solve -------------------------------------------------------------------


@dataclass
class SolveResult:
    instance: str
    system: FiniteSystem
    report: FixpointReport | None = None
    arena: Arena | None = None
    region: set | None = None
    region_pairs: set | None = None
    topology: fiber.FiberElement | None = None
    specialization: fiber.FiberElement | None = None
    transfer: dict | None = None
    cross_check: dict = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        return all(v for k, v in self.cross_check.items() if isinstance(v, bool))


def solve(system: FiniteSystem, instance: str, eps: Fraction = DEFAULT_EPS) -> SolveResult:
    """Compute the fixed point and (where finite) the game winning region,
    with the soundness cross-check embedded in the result."""
    _check_instance(system, instance)
    result = SolveResult(instance, system)
    if instance in PAIR_GAMES:
        spec = PAIR_GAMES[instance]
        params = lifting.params_for_instance(system, instance)
        result.report = gfp(system, params, spec.kind)
        result.arena = spec.build(system)
        result.region = largest_invariant(result.arena)
        result.region_pairs = {
            p for p in (_pair_of(q) for q in result.region) if p is not None
        }
        nu_pairs = set(result.report.result.pairs())
        oracle_pairs = spec.oracle(system)
        # trimmed-game correspondence: a pair generator is winning exactly
        # when it sits below the greatest fixed point
        downset_ok = all(
            ((x, y) in result.region_pairs) == ((x, y) in nu_pairs)
            for x, y in itertools.product(system.carrier.elements, repeat=2)
        )
        result.cross_check = {
            "region_equals_fixpoint_downset": downset_ok,
            "region_equals_oracle": result.region_pairs == oracle_pairs,
            "fixpoint_is_post_fixed": spoiler_witness(system, params, result.report.result) is None,
        }
        return result
    if instance == "bisim-metric":
        params = lifting.params_bisim_metric()
        result.report = gfp(system, params, fiber.PSEUDO_METRIC, "tolerance", eps)
        checks = {"iteration_converged": result.report.converged}
        if result.report.exact:
            checks["fixpoint_is_post_fixed"] = (
                spoiler_witness(system, params, result.report.result) is None
            )
        result.cross_check = checks
        return result
    if instance.startswith("dfa-topology:"):
        variant = instance.split(":", 1)[1]
        result.topology = instances.bisim_topology(system, variant)
        result.specialization = instances.specialization_preorder(result.topology)
        params = lifting.params_dfa_topology(system, variant)
        result.report = gfp(system, params, fiber.TOPOLOGY)
        verdict, witness = instances.topology_position_check(system, result.topology, variant)
        if variant == "sierpinski":
            oracle_rel = oracles.dfa_language_inclusion(system)
        else:
            oracle_rel = oracles.dfa_language_equivalence(system)
        result.cross_check = {
            "word_closure_equals_fixpoint": result.topology == result.report.result,
            "topology_is_winning_position": verdict == DUPLICATOR and witness is None,
            "specialization_matches_language_oracle": set(result.specialization.pairs()) == oracle_rel,
        }
        return result
    if instance == "transfer-check":
        result.transfer = instances.transfer_check(system)
        result.cross_check = {
            "three_fixpoints_agree": result.transfer["agree"],
            "result_is_equivalence": result.transfer["is_equivalence"],
        }
        return result
    raise IncompatibleInstance(f"unknown instance {instance!r}")


# --- positions and moves over the wire ----------------------------------------


def encode_position(pos) -> dict:
    if isinstance(pos, MetricPosition):
        return {"kind": "metric-position", "x": pos.x, "y": pos.y, "eps": format_rational(pos.eps)}
    if isinstance(pos, fiber.FiberElement) and pos.kind == fiber.TOPOLOGY:
        return {"kind": "topology", "opens": [list(u) for u in pos.opens()]}
    if isinstance(pos, tuple):
        tag = pos[0]
        if tag in ("pair", "d1"):
            return {"kind": "pair", "pair": [pos[1], pos[2]]}
        if tag == "k" and len(pos) == 2:
            return {"kind": "observation", "top": list(pos[1])}
        if tag in ("k", "obs") and len(pos) == 3:
            return {"kind": "observation", "entry": pos[1], "top": list(pos[2])}
        if tag == "Z":
            return {"kind": "subset", "Z": list(pos[1])}
        if tag == "d2":
            return {"kind": "orient-challenge", "s": pos[1], "t": pos[2], "Z": list(pos[3])}
        if tag == "d3":
            return {"kind": "widened", "Z": list(pos[1]), "Zp": list(pos[2])}
        if tag == "d4":
            return {"kind": "fresh", "Z": list(pos[1]), "y": pos[2]}
        if tag == "f":
            return {
                "kind": "function",
                "f": {s: format_rational(Fraction(v)) for s, v in pos[1]},
            }
    raise SystemError(f"cannot encode position {pos!r}")


def _state_subset(doc, key: str, carrier_) -> tuple[str, ...]:
    raw = doc[key]
    if not isinstance(raw, list) or not all(isinstance(s, str) for s in raw):
        raise IllegalMove(f"move field {key!r} must be a list of states")
    chosen = set(raw)
    return tuple(s for s in carrier_.elements if s in chosen)


def decode_move(doc: dict, session: "GameSession"):
    if not isinstance(doc, dict) or "kind" not in doc:
        raise IllegalMove("move must be an object with a 'kind'")
    kind = doc["kind"]
    carrier_ = session.system.carrier
    try:
        if kind == "pair":
            x, y = doc["pair"]
            tag = "d1" if session.instance == "prob-bisim-desharnais" else "pair"
            return (tag, x, y)
        if kind == "observation":
            top = _state_subset(doc, "top", carrier_)
            if session.instance.startswith("dfa-topology:"):
                return ("obs", doc["entry"], top)
            if "entry" in doc:
                return ("k", doc["entry"], top)
            return ("k", top)
        if kind == "subset":
            return ("Z", _state_subset(doc, "Z", carrier_))
        if kind == "orient-challenge":
            return ("d2", doc["s"], doc["t"], _state_subset(doc, "Z", carrier_))
        if kind == "widened":
            return ("d3", _state_subset(doc, "Z", carrier_), _state_subset(doc, "Zp", carrier_))
        if kind == "fresh":
            return ("d4", _state_subset(doc, "Z", carrier_), doc["y"])
        if kind == "function":
            if not isinstance(doc["f"], dict):
                raise IllegalMove("function move needs an object of state values")
            f = {s: parse_rational(v, f"f.{s}") for s, v in doc["f"].items()}
            for s in carrier_.elements:
                if s not in f:
                    raise IllegalMove(f"function move must cover state {s!r}")
            return ("f", tuple(sorted(f.items())))
        if kind == "metric-position":
            x, y = doc["x"], doc["y"]
            if x not in carrier_ or y not in carrier_:
                raise IllegalMove("metric position mentions states off the carrier")
            eps = parse_rational(doc["eps"], "eps")
            if not (0 <= eps <= 1):
                raise IllegalMove("slack must lie in [0,1]")
            return MetricPosition(x, y, eps)
        if kind == "topology":
            opens = doc["opens"]
            if not isinstance(opens, list) or not all(
                isinstance(u, list) and all(isinstance(s, str) for s in u) for u in opens
            ):
                raise IllegalMove("topology move needs a list of open sets")
            return fiber.FiberElement.topology(carrier_, [tuple(u) for u in opens])
    except (KeyError, TypeError, ValueError) as exc:
        raise IllegalMove(f"malformed move: {exc}") from None
    raise IllegalMove(f"unknown move kind {kind!r}")


# --- interactive sessions ------------------------------------------------------


class GameSession:
    """One interactive play: a human side, an engine side answering with the
    extracted strategy or the instance oracle, and a transcript."""

    def __init__(
        self,
        system: FiniteSystem,
        instance: str,
        start,
        human_side: str,
        eps: Fraction = DEFAULT_EPS,
        cap: int | None = None,
    ):
        if human_side not in (DUPLICATOR, SPOILER):
            raise SystemError(f"human side must be duplicator or spoiler, got {human_side!r}")
        _check_instance(system, instance)
        if instance == "transfer-check":
            raise IncompatibleInstance("transfer-check is not playable")
        self.system = system
        self.instance = instance
        self.human_side = human_side
        self.engine_side = SPOILER if human_side == DUPLICATOR else DUPLICATOR
        self.transcript: list[dict] = []
        self.oracle_arena: OracleArena | None = None
        self.arena: Arena | None = None
        self.region = None
        self.cap = cap
        if instance in PAIR_GAMES:
            spec = PAIR_GAMES[instance]
            self.arena = spec.build(system)
            self.region = largest_invariant(self.arena)
            dup_strategy, sp_strategy = extract_strategies(self.arena)
            self._engine_pick = strategy_player(
                dup_strategy if self.engine_side == DUPLICATOR else sp_strategy, self.arena
            )
            if self.cap is None:
                self.cap = default_cap(self.arena)
            if start not in self.arena.moves or self.arena.owner(start) != SPOILER:
                raise SystemError(f"start position must be a Spoiler position, got {start!r}")
            self.state = start_play(self.arena, start, self.region)
        elif instance == "bisim-metric":
            if not isinstance(start, MetricPosition):
                raise SystemError("metric plays start at (x, y, eps) positions")
            self.fixreport = gfp(system, lifting.params_bisim_metric(), fiber.PSEUDO_METRIC, "tolerance", eps)
            self.oracle_arena = instances.metric_oracle_arena(system, self.fixreport, cap)
            self.cap = self.oracle_arena.cap
            self.state = oracle_settle(PlayState(start, (start,)), self.oracle_arena)
        else:  # dfa-topology
            variant = instance.split(":", 1)[1]
            if not (isinstance(start, fiber.FiberElement) and start.kind == fiber.TOPOLOGY):
                raise SystemError("topology plays start at a topology position")
            self.oracle_arena = instances.topology_oracle_arena(system, variant, cap)
            self.cap = self.oracle_arena.cap
            self.state = oracle_settle(PlayState(start, (start,)), self.oracle_arena)
        self._note_position()
        self._engine_turns()

    # -- mechanics --

    def _owner(self, pos) -> str:
        return self.arena.owner(pos) if self.arena is not None else self.oracle_arena.owner(pos)

    def label(self, pos) -> str:
        return self.arena.label(pos) if self.arena is not None else self.oracle_arena.label(pos)

    def _note_position(self):
        self.transcript.append({"event": "position", "label": self.label(self.state.current)})

    def _apply(self, move, mover: str):
        if self.arena is not None:
            self.state = play_step(self.state, self.arena, move, self.region, self.cap)
        else:
            self.state = oracle_play_step(self.state, self.oracle_arena, move)
        self.transcript.append({"event": "move", "side": mover, "label": self.label(move)})
        self._note_position()
        if self.state.finished:
            self.transcript.append(
                {"event": "finished", "winner": self.state.winner, "reason": self.state.reason}
            )

    def _engine_turns(self):
        while not self.state.finished and self._owner(self.state.current) == self.engine_side:
            if self.arena is not None:
                move = self._engine_pick(self.state)
            else:
                suggestions = list(self.oracle_arena.moves_oracle(self.state.current))
                if not suggestions:
                    self.state = oracle_settle(self.state, self.oracle_arena)
                    break
                move = suggestions[0]
            self._apply(move, self.engine_side)

    def human_move(self, move):
        if self.state.finished:
            raise IllegalMove("play already finished")
        if self._owner(self.state.current) != self.human_side:
            raise IllegalMove("not the human side's turn")
        self._apply(move, self.human_side)
        self._engine_turns()

    def legal_moves(self):
        if self.state.finished:
            return []
        if self.arena is not None:
            return self.arena.legal_moves(self.state.current)
        return list(self.oracle_arena.moves_oracle(self.state.current))

    def snapshot(self) -> dict:
        current = self.state.current
        snap = {
            "instance": self.instance,
            "humanSide": self.human_side,
            "position": encode_position(current),
            "positionLabel": self.label(current),
            "history": [self.label(p) for p in self.state.history],
            "finished": self.state.finished,
            "winner": self.state.winner,
            "reason": self.state.reason,
            "turn": None if self.state.finished else self._owner(current),
            "step": self.state.steps,
            "cap": self.cap,
            "transcript": list(self.transcript),
        }
        if self.state.finished:
            snap["legalMoves"] = []
        elif self.arena is not None:
            snap["legalMoves"] = [encode_position(m) for m in self.legal_moves()]
        else:
            snap["oracleHint"] = [encode_position(m) for m in self.legal_moves()]
        return snap


def parse_start(system: FiniteSystem, instance: str, text: str):
    """Parse a --start argument: 'x,y' for pair games, 'x,y,eps' for the
    metric game, and 'discrete' | 'indiscrete' | 'bisim' for topology games."""
    if instance.startswith("dfa-topology:"):
        variant = instance.split(":", 1)[1]
        if text == "discrete":
            return fiber.bottom(fiber.TOPOLOGY, system.carrier)
        if text == "indiscrete":
            return fiber.top(fiber.TOPOLOGY, system.carrier)
        if text == "bisim":
            return instances.bisim_topology(system, variant)
        raise SystemError("topology start must be discrete, indiscrete or bisim")
    parts = [p.strip() for p in text.split(",")]
    if instance == "bisim-metric":
        if len(parts) != 3:
            raise SystemError("metric start must be 'x,y,eps'")
        x, y, eps_text = parts
        for s in (x, y):
            if s not in system.carrier:
                raise SystemError(f"state {s!r} off the carrier")
        return MetricPosition(x, y, parse_rational(eps_text, "eps"))
    if len(parts) != 2:
        raise SystemError("start must be a pair 'x,y'")
    x, y = parts
    for s in (x, y):
        if s not in system.carrier:
            raise SystemError(f"state {s!r} off the carrier")
    return ("d1", x, y) if instance == "prob-bisim-desharnais" else ("pair", x, y)

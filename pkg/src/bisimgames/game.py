"""Generic safety-game engine: explicit arenas, invariants, winning regions,
positional strategies and play simulation.

Positions are opaque hashable tokens tagged with an owner.  Duplicator wins
every infinite play; finite plays are lost by the player who is stuck.
Infinite plays are operationalized by a step cap: a capped play counts for
Duplicator only when the final position is inside the computed winning
region, otherwise the play is reported undetermined.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Hashable, Iterable

Position = Hashable

DUPLICATOR = "duplicator"
SPOILER = "spoiler"


class GameError(ValueError):
    pass


class IllegalMove(GameError):
    def __init__(self, message: str, legal: list | None = None):
        super().__init__(message)
        self.legal = legal or []


@dataclass
class Arena:
    """Explicit bipartite arena. Move lists keep insertion order, which fixes
    strategy extraction and play enumeration deterministically."""

    sp_positions: list[Position] = field(default_factory=list)
    dup_positions: list[Position] = field(default_factory=list)
    moves: dict[Position, list[Position]] = field(default_factory=dict)
    labels: dict[Position, str] = field(default_factory=dict)

    _sp_set: set = field(default_factory=set, repr=False)
    _dup_set: set = field(default_factory=set, repr=False)

    def add_sp(self, pos: Position, label: str | None = None) -> Position:
        if pos in self._dup_set:
            raise GameError(f"position {pos!r} already owned by Duplicator")
        if pos not in self._sp_set:
            self._sp_set.add(pos)
            self.sp_positions.append(pos)
            self.moves.setdefault(pos, [])
        if label is not None:
            self.labels[pos] = label
        return pos

    def add_dup(self, pos: Position, label: str | None = None) -> Position:
        if pos in self._sp_set:
            raise GameError(f"position {pos!r} already owned by Spoiler")
        if pos not in self._dup_set:
            self._dup_set.add(pos)
            self.dup_positions.append(pos)
            self.moves.setdefault(pos, [])
        if label is not None:
            self.labels[pos] = label
        return pos

    def add_move(self, src: Position, dst: Position) -> None:
        if src in self._sp_set and dst not in self._dup_set:
            raise GameError("moves from Spoiler positions must reach Duplicator positions")
        if src in self._dup_set and dst not in self._sp_set:
            raise GameError("moves from Duplicator positions must reach Spoiler positions")
        if src not in self.moves:
            raise GameError(f"unknown source position {src!r}")
        self.moves[src].append(dst)

    def owner(self, pos: Position) -> str:
        if pos in self._sp_set:
            return SPOILER
        if pos in self._dup_set:
            return DUPLICATOR
        raise GameError(f"unknown position {pos!r}")

    def legal_moves(self, pos: Position) -> list[Position]:
        return list(self.moves[pos])

    def label(self, pos: Position) -> str:
        return self.labels.get(pos, str(pos))

    def size(self) -> int:
        return len(self.sp_positions) + len(self.dup_positions)

    def validate(self) -> None:
        if not self.sp_positions and not self.dup_positions:
            raise GameError("arena must have at least one position")
        for src, dsts in self.moves.items():
            for dst in dsts:
                if dst not in self._sp_set and dst not in self._dup_set:
                    raise GameError(f"dangling move target {dst!r}")


@dataclass(frozen=True)
class Strategy:
    owner: str
    choice: dict[Position, Position]

    def __call__(self, pos: Position) -> Position | None:
        return self.choice.get(pos)


def largest_invariant(arena: Arena) -> set[Position]:
    """Greatest self-sustaining set of Spoiler positions; equals Duplicator's
    winning region.  Computed by iterated removal in deterministic order."""
    invariant = set(arena.sp_positions)
    changed = True
    while changed:
        changed = False
        for q in arena.sp_positions:
            if q not in invariant:
                continue
            for q_dup in arena.moves[q]:
                if not any(q2 in invariant for q2 in arena.moves[q_dup]):
                    invariant.discard(q)
                    changed = True
                    break
    return invariant


def verify_invariant(arena: Arena, candidate: set[Position]) -> bool:
    """Literal check: every Spoiler move from the candidate can be answered
    back into the candidate."""
    for q in candidate:
        if arena.owner(q) != SPOILER:
            raise GameError("candidate must contain Spoiler positions only")
        for q_dup in arena.moves[q]:
            if not any(q2 in candidate for q2 in arena.moves[q_dup]):
                return False
    return True


def _spoiler_ranks(arena: Arena, invariant: set[Position]) -> dict[Position, int]:
    """Attractor ranks on Spoiler-winning S-positions: the maximal number of
    rounds Spoiler needs to force a Duplicator dead-end, used to extract a
    rank-decreasing Spoiler strategy."""
    losing = [q for q in arena.sp_positions if q not in invariant]
    rank: dict[Position, int] = {}
    changed = True
    while changed:
        changed = False
        for q in losing:
            best = None
            for q_dup in arena.moves[q]:
                replies = arena.moves[q_dup]
                if not replies:
                    cand = 1
                elif all(r in rank for r in replies):
                    cand = 1 + max(rank[r] for r in replies)
                else:
                    continue
                if best is None or cand < best:
                    best = cand
            if best is not None and rank.get(q) != best:
                if q not in rank or best < rank[q]:
                    rank[q] = best
                    changed = True
    return rank


def extract_strategies(arena: Arena) -> tuple[Strategy, Strategy]:
    """Positional strategies: Duplicator answers back into the invariant,
    Spoiler decreases attractor rank outside it."""
    invariant = largest_invariant(arena)
    dup_choice: dict[Position, Position] = {}
    for q_dup in arena.dup_positions:
        for q2 in arena.moves[q_dup]:
            if q2 in invariant:
                dup_choice[q_dup] = q2
                break
    rank = _spoiler_ranks(arena, invariant)
    sp_choice: dict[Position, Position] = {}
    for q in arena.sp_positions:
        if q in invariant:
            continue
        best = None
        for q_dup in arena.moves[q]:
            replies = arena.moves[q_dup]
            if not replies:
                cand = (1, q_dup)
            elif all(r in rank for r in replies):
                cand = (1 + max(rank[r] for r in replies), q_dup)
            else:
                continue
            if best is None or cand[0] < best[0]:
                best = cand
        if best is not None:
            sp_choice[q] = best[1]
    return Strategy(DUPLICATOR, dup_choice), Strategy(SPOILER, sp_choice)


# --- plays -------------------------------------------------------------------


@dataclass(frozen=True)
class PlayState:
    current: Position
    history: tuple[Position, ...]
    finished: bool = False
    winner: str | None = None
    reason: str | None = None  # "stuck" | "cap-in-winning-region" | "undetermined-at-cap"

    @property
    def steps(self) -> int:
        return len(self.history) - 1


def start_play(arena: Arena, start: Position, winning_region: set[Position] | None = None) -> PlayState:
    if arena.owner(start) != SPOILER:
        raise GameError("plays start at Spoiler positions")
    state = PlayState(start, (start,))
    return _settle(state, arena, winning_region, cap=None)


def _settle(
    state: PlayState,
    arena: Arena,
    winning_region: set[Position] | None,
    cap: int | None,
) -> PlayState:
    if state.finished:
        return state
    # the cap only fires at Spoiler positions, where the winning region lives
    if cap is not None and state.steps >= cap and arena.owner(state.current) == SPOILER:
        if winning_region is not None and state.current in winning_region:
            return replace(state, finished=True, winner=DUPLICATOR, reason="cap-in-winning-region")
        return replace(state, finished=True, winner=None, reason="undetermined-at-cap")
    if not arena.moves[state.current]:
        owner = arena.owner(state.current)
        winner = SPOILER if owner == DUPLICATOR else DUPLICATOR
        return replace(state, finished=True, winner=winner, reason="stuck")
    return state


def play_step(
    state: PlayState,
    arena: Arena,
    move: Position,
    winning_region: set[Position] | None = None,
    cap: int | None = None,
) -> PlayState:
    """Apply one move; the result carries winner and reason when the play ends
    (opponent stuck, or the step cap rule)."""
    if state.finished:
        raise IllegalMove("play already finished")
    legal = arena.moves[state.current]
    if move not in legal:
        raise IllegalMove(
            f"illegal move from {arena.label(state.current)}",
            legal=list(legal),
        )
    nxt = PlayState(move, state.history + (move,))
    return _settle(nxt, arena, winning_region, cap)


def default_cap(arena: Arena) -> int:
    return 10 * arena.size()


def simulate(
    arena: Arena,
    start: Position,
    dup_move: Callable[[PlayState], Position],
    sp_move: Callable[[PlayState], Position],
    winning_region: set[Position] | None = None,
    cap: int | None = None,
) -> PlayState:
    """Drive a play with two move callbacks until it finishes."""
    if cap is None:
        cap = default_cap(arena)
    state = start_play(arena, start, winning_region)
    state = _settle(state, arena, winning_region, cap)
    while not state.finished:
        mover = sp_move if arena.owner(state.current) == SPOILER else dup_move
        state = play_step(state, arena, mover(state), winning_region, cap)
    return state


def strategy_player(strategy: Strategy, arena: Arena) -> Callable[[PlayState], Position]:
    def pick(state: PlayState) -> Position:
        choice = strategy(state.current)
        if choice is None:
            legal = arena.moves[state.current]
            if not legal:
                raise IllegalMove("no legal moves")
            return legal[0]
        return choice

    return pick


def random_player(rng, arena: Arena) -> Callable[[PlayState], Position]:
    def pick(state: PlayState) -> Position:
        legal = arena.moves[state.current]
        if not legal:
            raise IllegalMove("no legal moves")
        return rng.choice(legal)

    return pick


# --- oracle-backed arenas ----------------------------------------------------


@dataclass
class OracleArena:
    """Arena whose move sets are produced by instance oracles rather than
    materialized; used by the metric and topology games where Spoiler's or
    Duplicator's vocabulary is uncountable."""

    owner_of: Callable[[Position], str]
    classify: Callable[[Position], str]  # verdict at Spoiler positions
    moves_oracle: Callable[[Position], Iterable[Position]]  # engine suggestions
    is_legal: Callable[[Position, Position], bool]
    label_of: Callable[[Position], str] = staticmethod(lambda p: str(p))
    cap: int = 100

    def owner(self, pos: Position) -> str:
        return self.owner_of(pos)

    def label(self, pos: Position) -> str:
        return self.label_of(pos)


def oracle_play_step(state: PlayState, arena: OracleArena, move: Position) -> PlayState:
    if state.finished:
        raise IllegalMove("play already finished")
    if not arena.is_legal(state.current, move):
        raise IllegalMove(
            f"illegal move from {arena.label(state.current)}",
            legal=list(arena.moves_oracle(state.current)),
        )
    nxt = PlayState(move, state.history + (move,))
    return oracle_settle(nxt, arena)


def oracle_settle(state: PlayState, arena: OracleArena) -> PlayState:
    if state.finished:
        return state
    if state.steps >= arena.cap and arena.owner(state.current) == SPOILER:
        if arena.classify(state.current) == DUPLICATOR:
            return replace(state, finished=True, winner=DUPLICATOR, reason="cap-in-winning-region")
        return replace(state, finished=True, winner=None, reason="undetermined-at-cap")
    suggestions = list(arena.moves_oracle(state.current))
    if not suggestions:
        owner = arena.owner(state.current)
        winner = SPOILER if owner == DUPLICATOR else DUPLICATOR
        return replace(state, finished=True, winner=winner, reason="stuck")
    return state


# --- export ------------------------------------------------------------------


def arena_to_json(arena: Arena, invariant: set[Position] | None = None) -> dict:
    if invariant is None:
        invariant = largest_invariant(arena)
    return {
        "spositions": [arena.label(q) for q in arena.sp_positions],
        "dpositions": [arena.label(q) for q in arena.dup_positions],
        "moves": [
            [arena.label(src), arena.label(dst)]
            for src in arena.sp_positions + arena.dup_positions
            for dst in arena.moves[src]
        ],
        "invariant": [arena.label(q) for q in arena.sp_positions if q in invariant],
    }


def arena_to_dot(arena: Arena, invariant: set[Position] | None = None) -> str:
    if invariant is None:
        invariant = largest_invariant(arena)
    ids = {q: f"n{i}" for i, q in enumerate(arena.sp_positions + arena.dup_positions)}
    lines = ["digraph arena {"]
    for q in arena.sp_positions:
        style = ', style=filled, fillcolor="palegreen"' if q in invariant else ""
        lines.append(f'  {ids[q]} [label="{arena.label(q)}", shape=box{style}];')
    for q in arena.dup_positions:
        lines.append(f'  {ids[q]} [label="{arena.label(q)}", shape=ellipse];')
    for src in arena.sp_positions + arena.dup_positions:
        for dst in arena.moves[src]:
            lines.append(f"  {ids[src]} -> {ids[dst]};")
    lines.append("}")
    return "\n".join(lines) + "\n"

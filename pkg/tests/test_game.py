"""Safety-game engine: invariants, winning regions, strategies and plays."""

import itertools
import random

import pytest

from bisimgames.game import (
    DUPLICATOR,
    SPOILER,
    Arena,
    GameError,
    IllegalMove,
    arena_to_dot,
    arena_to_json,
    default_cap,
    extract_strategies,
    largest_invariant,
    play_step,
    random_player,
    simulate,
    start_play,
    strategy_player,
    verify_invariant,
)
from bisimgames.fixtures import fixture
from bisimgames.instances import build_kripke_game, build_prob_game

from conftest import random_kripke


def toy_arena():
    """s0 -> d0 -> s0 (safe loop); s1 -> d1 with no replies (Spoiler wins);
    s2 has no Spoiler moves (Duplicator wins immediately)."""
    a = Arena()
    a.add_sp("s0"), a.add_sp("s1"), a.add_sp("s2")
    a.add_dup("d0"), a.add_dup("d1")
    a.add_move("s0", "d0")
    a.add_move("d0", "s0")
    a.add_move("s1", "d1")
    a.validate()
    return a


def test_invariant_dead_end_rules():
    a = toy_arena()
    inv = largest_invariant(a)
    assert "s2" in inv  # Spoiler stuck: Duplicator wins
    assert "s1" not in inv  # Spoiler reaches a Duplicator dead-end
    assert "s0" in inv  # safe loop


def test_verify_invariant_examples():
    a = toy_arena()
    assert verify_invariant(a, set())  # vacuous
    inv = largest_invariant(a)
    assert verify_invariant(a, inv)
    assert not verify_invariant(a, {"s0", "s1", "s2"})


def test_verify_invariant_full_region_on_k_dead():
    arena = build_kripke_game(fixture("K_DEAD"))
    assert not verify_invariant(arena, set(arena.sp_positions))


def test_largest_invariant_is_union_of_all_invariants():
    rng = random.Random(101)
    for _ in range(12):
        arena = _random_arena(rng, n_sp=rng.randint(1, 6), n_dup=rng.randint(1, 4))
        best = largest_invariant(arena)
        union = set()
        positions = list(arena.sp_positions)
        for r in range(len(positions) + 1):
            for combo in itertools.combinations(positions, r):
                if verify_invariant(arena, set(combo)):
                    union |= set(combo)
        assert best == union


def _random_arena(rng, n_sp, n_dup):
    a = Arena()
    sps = [f"s{i}" for i in range(n_sp)]
    dps = [f"d{i}" for i in range(n_dup)]
    for s in sps:
        a.add_sp(s)
    for d in dps:
        a.add_dup(d)
    for s in sps:
        for d in dps:
            if rng.random() < 0.5:
                a.add_move(s, d)
    for d in dps:
        for s in sps:
            if rng.random() < 0.4:
                a.add_move(d, s)
    a.validate()
    return a


def test_strategies_on_empty_move_arena():
    a = Arena()
    a.add_sp("s0")
    a.add_dup("d0")
    a.validate()
    dup, sp = extract_strategies(a)
    assert dup.choice == {} and sp.choice == {}
    assert largest_invariant(a) == {"s0"}


def test_dup_strategy_never_leaves_invariant():
    rng = random.Random(102)
    fixtures = [fixture("K_ONE"), fixture("K_DEAD")] + [
        random_kripke(rng, rng.randint(2, 4), twin=True) for _ in range(3)
    ]
    for frame in fixtures:
        arena = build_kripke_game(frame)
        inv = largest_invariant(arena)
        dup, _ = extract_strategies(arena)
        for start in inv:
            for _ in range(50):
                state = simulate(
                    arena,
                    start,
                    strategy_player(dup, arena),
                    random_player(rng, arena),
                    winning_region=inv,
                )
                assert state.winner == DUPLICATOR
                assert all(
                    pos in inv for pos in state.history if arena.owner(pos) == SPOILER
                )


def test_sp_strategy_wins_quickly_outside_invariant():
    rng = random.Random(103)
    fixtures = [fixture("K_DEAD")] + [random_kripke(rng, rng.randint(2, 4)) for _ in range(3)]
    for frame in fixtures:
        arena = build_kripke_game(frame)
        inv = largest_invariant(arena)
        _, sp = extract_strategies(arena)
        for start in arena.sp_positions:
            if start in inv:
                continue
            for _ in range(50):
                state = simulate(
                    arena,
                    start,
                    random_player(rng, arena),
                    strategy_player(sp, arena),
                    winning_region=inv,
                )
                assert state.winner == SPOILER
                assert state.steps <= arena.size()


def test_determinacy_at_desk_scale():
    """Every Spoiler position is either inside the invariant (the extracted
    Duplicator strategy survives 1000 random Spoilers) or outside it (the
    extracted Spoiler strategy forces a dead end within the arena size)."""
    from bisimgames.instances import build_dfa_game

    rng = random.Random(104)
    arenas = [
        build_kripke_game(fixture("K_DEAD")),
        build_kripke_game(fixture("K_ONE")),
        build_prob_game(fixture("M_SPLIT")),
        build_dfa_game(fixture("D_LINE")),
    ]
    for arena in arenas:
        inv = largest_invariant(arena)
        dup, sp = extract_strategies(arena)
        plays_per_position = max(1, 1000 // max(1, len(arena.sp_positions)))
        for start in arena.sp_positions:
            if start in inv:
                for _ in range(plays_per_position):
                    state = simulate(arena, start, strategy_player(dup, arena),
                                     random_player(rng, arena), winning_region=inv, cap=30)
                    assert state.winner == DUPLICATOR
            else:
                for _ in range(plays_per_position):
                    state = simulate(arena, start, random_player(rng, arena),
                                     strategy_player(sp, arena), winning_region=inv)
                    assert state.winner == SPOILER and state.steps <= arena.size()


def test_largest_invariant_verifies_on_constructed_arenas():
    from bisimgames.instances import build_desharnais_game, build_dfa_game

    arenas = [
        build_kripke_game(fixture("K_ONE")),
        build_kripke_game(fixture("K_DEAD")),
        build_prob_game(fixture("M_SPLIT")),
        build_prob_game(fixture("M_TWIN")),
        build_desharnais_game(fixture("M_SPLIT")),
        build_dfa_game(fixture("D_LINE")),
    ]
    for arena in arenas:
        assert verify_invariant(arena, largest_invariant(arena))


def test_extracted_strategies_on_random_arenas():
    """Strategy extraction is determinate on arbitrary bipartite arenas, not
    just the instance-shaped ones."""
    rng = random.Random(105)
    for _ in range(200):
        arena = _random_arena(rng, n_sp=rng.randint(1, 5), n_dup=rng.randint(1, 4))
        inv = largest_invariant(arena)
        assert verify_invariant(arena, inv)
        dup, sp = extract_strategies(arena)
        for start in arena.sp_positions:
            if start in inv:
                state = simulate(arena, start, strategy_player(dup, arena),
                                 random_player(rng, arena), winning_region=inv, cap=20)
                assert state.winner == DUPLICATOR
            else:
                state = simulate(arena, start, random_player(rng, arena),
                                 strategy_player(sp, arena), winning_region=inv)
                assert state.winner == SPOILER and state.steps <= arena.size()


def test_play_step_rules():
    a = toy_arena()
    state = start_play(a, "s2")
    assert state.finished and state.winner == DUPLICATOR and state.reason == "stuck"

    state = start_play(a, "s1")
    with pytest.raises(IllegalMove) as err:
        play_step(state, a, "d0")
    assert err.value.legal == ["d1"]
    state = play_step(state, a, "d1")
    assert state.finished and state.winner == SPOILER and state.reason == "stuck"


def test_play_starts_at_spoiler_positions_only():
    a = toy_arena()
    with pytest.raises(GameError):
        start_play(a, "d0")


def test_step_cap_rule():
    a = toy_arena()
    inv = largest_invariant(a)
    state = start_play(a, "s0", inv)
    cap = 6
    while not state.finished:
        move = a.legal_moves(state.current)[0]
        state = play_step(state, a, move, winning_region=inv, cap=cap)
    assert state.winner == DUPLICATOR and state.reason == "cap-in-winning-region"

    # outside the region the cap yields an undetermined verdict
    b = Arena()
    b.add_sp("s"), b.add_dup("d")
    b.add_move("s", "d"), b.add_move("d", "s")
    # make s losing by a second Spoiler move to a dead end
    b.add_dup("dead")
    b.add_move("s", "dead")
    inv_b = largest_invariant(b)
    assert "s" not in inv_b
    state = start_play(b, "s", inv_b)
    while not state.finished:
        state = play_step(state, b, b.legal_moves(state.current)[0], winning_region=inv_b, cap=4)
    assert state.winner is None and state.reason == "undetermined-at-cap"


def test_default_cap_scales_with_arena():
    a = toy_arena()
    assert default_cap(a) == 10 * a.size()


def test_bipartite_encoding_enforced():
    a = Arena()
    a.add_sp("s")
    a.add_sp("s2")
    with pytest.raises(GameError):
        a.add_move("s", "s2")


def test_exports():
    arena = build_prob_game(fixture("M_SPLIT"))
    blob = arena_to_json(arena)
    assert set(blob) == {"spositions", "dpositions", "moves", "invariant"}
    assert "(x,x)" in blob["invariant"] and "(x,y)" not in blob["invariant"]
    dot = arena_to_dot(arena)
    assert dot.startswith("digraph") and "palegreen" in dot

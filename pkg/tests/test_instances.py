"""Instance builders and analyses: generating sets, the concrete games on
their fixtures, strategy translations, metric and topology position oracles,
the Hausdorff coincidence and the relational transfer check."""

import itertools
import random
from fractions import Fraction

import pytest

from bisimgames import fiber, instances, lifting, oracles
from bisimgames.fiber import Carrier, FiberElement
from bisimgames.fixpoint import gfp
from bisimgames.fixtures import fixture, h_pair
from bisimgames.game import (
    DUPLICATOR,
    SPOILER,
    GameError,
    PlayState,
    extract_strategies,
    largest_invariant,
    oracle_play_step,
    oracle_settle,
    random_player,
    simulate,
    strategy_player,
)
from bisimgames.instances import (
    FkpResponder,
    MetricPosition,
    TranslationError,
    bisim_topology,
    build_desharnais_game,
    build_dfa_game,
    build_kripke_game,
    build_nfa_game,
    build_prob_game,
    build_similarity_game,
    classify_metric_position,
    generating_set_from_separator,
    hausdorff_codensity,
    hausdorff_distance,
    metric_duplicator_move,
    metric_generator_via_pushforward,
    metric_oracle_arena,
    metric_spoiler_move,
    pair_generator_via_pushforward,
    specialization_preorder,
    topology_oracle_arena,
    topology_position_check,
    transfer_check,
    translate_strategy_desharnais_to_fkp,
    translate_strategy_fkp_to_desharnais,
    zbar,
)
from bisimgames.system import SystemError, parse_system

from conftest import random_chain, random_dfa, random_kripke, random_metric

ABC = Carrier(("a", "b", "c"))


def region_pairs(arena):
    return {(q[1], q[2]) for q in largest_invariant(arena) if q[0] in ("pair", "d1")}


# --- generating sets -----------------------------------------------------------


def test_pair_generators_on_three_points():
    gens = generating_set_from_separator(fiber.EQUIV_REL, ABC)
    members = {
        frozenset(p)
        for p in itertools.combinations(ABC.elements, 2)
    }
    assert gens.kind == "pairs"
    for x, y in itertools.combinations(ABC.elements, 2):
        member = gens.pair_member(x, y)
        assert member == pair_generator_via_pushforward(fiber.EQUIV_REL, ABC, x, y)
        blocks = {frozenset(b) for b in member.blocks()}
        assert frozenset({x, y}) in blocks
    assert len(members) == 3


def test_metric_generators_via_pushforward():
    gens = generating_set_from_separator(fiber.PSEUDO_METRIC, ABC)
    for r in (Fraction(0), Fraction(1, 3), Fraction(1)):
        member = gens.metric_member("a", "b", r)
        assert member == metric_generator_via_pushforward(ABC, "a", "b", r)
        assert member.dist("a", "b") == r
        assert member.dist("a", "c") == 1


def test_preorder_generators_via_pushforward():
    gens = generating_set_from_separator(fiber.PREORDER, ABC)
    member = gens.pair_member("a", "c")
    assert member == pair_generator_via_pushforward(fiber.PREORDER, ABC, "a", "c")
    assert member.related("a", "c") and not member.related("c", "a")


def test_generators_reach_every_partition():
    gens = generating_set_from_separator(fiber.EQUIV_REL, ABC)
    partition = FiberElement.equiv_from_blocks(ABC, [["a", "b"], ["c"]])
    inside = [
        gens.pair_member(x, y)
        for block in partition.blocks()
        for x, y in itertools.combinations(block, 2)
    ]
    rebuilt = fiber.join(inside) if inside else fiber.bottom(fiber.EQUIV_REL, ABC)
    assert rebuilt == partition


def test_generators_unsupported_for_topology():
    with pytest.raises(GameError, match="no known generating set"):
        generating_set_from_separator(fiber.TOPOLOGY, ABC)


# --- Kripke game ------------------------------------------------------------------


def test_kripke_game_k_one_all_winning():
    arena = build_kripke_game(fixture("K_ONE"))
    assert len(largest_invariant(arena)) == 9


def test_kripke_game_k_dead():
    frame = fixture("K_DEAD")
    arena = build_kripke_game(frame)
    region = region_pairs(arena)
    assert region == {("p", "p"), ("q", "q")}
    # the hand play: the constant-true observation beats (p,q)
    killer = ("k", ("p", "q"))
    assert killer in arena.moves[("pair", "p", "q")]
    assert arena.moves[killer] == []


def test_kripke_game_diagonal_always_winning():
    rng = random.Random(201)
    for _ in range(5):
        frame = random_kripke(rng, rng.randint(2, 4))
        region = region_pairs(build_kripke_game(frame))
        assert all((s, s) in region for s in frame.carrier)


# --- similarity games ---------------------------------------------------------------


def test_similarity_k_dead_deadlock_below_everything():
    frame = fixture("K_DEAD")
    region = region_pairs(build_similarity_game(frame, "lower"))
    assert ("q", "p") in region and ("p", "q") not in region


def test_similarity_matches_iteration_oracle():
    rng = random.Random(202)
    for variant in ("lower", "upper", "convex"):
        for _ in range(6):
            frame = random_kripke(rng, rng.randint(2, 4), twin=True)
            region = region_pairs(build_similarity_game(frame, variant))
            assert region == oracles.greatest_simulation(frame, variant)


def test_convex_region_is_inside_lower_and_upper():
    rng = random.Random(203)
    for _ in range(8):
        frame = random_kripke(rng, rng.randint(2, 4))
        convex = region_pairs(build_similarity_game(frame, "convex"))
        lower = region_pairs(build_similarity_game(frame, "lower"))
        upper = region_pairs(build_similarity_game(frame, "upper"))
        assert convex <= (lower & upper)


def test_convex_region_can_be_strictly_smaller_than_intersection():
    """Deadlock reachable on one side only: mutual lower- and upper-similar
    pairs need not be convex-similar, so the intersection overshoots."""
    frame = parse_system(
        {
            "type": "kripke",
            "states": ["x", "y", "a", "b"],
            "succ": {"x": ["a"], "y": ["a", "b"], "a": ["a"], "b": []},
        }
    )
    convex = region_pairs(build_similarity_game(frame, "convex"))
    lower = region_pairs(build_similarity_game(frame, "lower"))
    upper = region_pairs(build_similarity_game(frame, "upper"))
    assert ("x", "y") in lower and ("x", "y") in upper
    assert ("x", "y") not in convex
    assert convex == oracles.greatest_simulation(frame, "convex")


# --- probabilistic games --------------------------------------------------------------


def test_prob_game_fixtures():
    assert region_pairs(build_prob_game(fixture("M_TWIN"))) == set(
        itertools.product(("s1", "s2", "t"), repeat=2)
    )
    split = region_pairs(build_prob_game(fixture("M_SPLIT")))
    assert split == {("x", "x"), ("y", "y"), ("z", "z")}


def test_prob_game_spoiler_kill_move():
    chain = fixture("M_SPLIT")
    arena = build_prob_game(chain)
    z_move = ("Z", ("z",))
    assert z_move in arena.moves[("pair", "x", "y")]


def test_desharnais_equals_fkp_on_fixtures_and_random():
    rng = random.Random(204)
    systems = [fixture("M_SPLIT"), fixture("M_TWIN")] + [
        random_chain(rng, rng.randint(2, 4), twin=True) for _ in range(6)
    ]
    for chain in systems:
        fkp = region_pairs(build_prob_game(chain))
        desh = region_pairs(build_desharnais_game(chain))
        ls = oracles.prob_bisimilarity(chain)
        assert fkp == desh == ls


def test_desharnais_layers_are_tagged():
    arena = build_desharnais_game(fixture("M_SPLIT"))
    tags = {p[0] for p in arena.sp_positions} | {p[0] for p in arena.dup_positions}
    assert tags == {"d1", "d2", "d3", "d4"}


# --- strategy translations ---------------------------------------------------------------


MIRROR = {
    "type": "markov",
    "states": ["x", "y", "a", "b"],
    "kernel": {"x": {"a": "1"}, "y": {"b": "1"}, "a": {}, "b": {}},
}


def _translated_dup_player(responder):
    def dup_move(state):
        pair_pos = state.history[-2]
        return ("pair",) + responder.respond((pair_pos[1], pair_pos[2]), state.current[1])

    return dup_move


def test_translation_desharnais_to_fkp_wins():
    rng = random.Random(205)
    systems = [fixture("M_TWIN"), parse_system(MIRROR)] + [
        random_chain(rng, rng.randint(2, 4), twin=True) for _ in range(5)
    ]
    for chain in systems:
        desh_arena = build_desharnais_game(chain)
        dup_strategy, _ = extract_strategies(desh_arena)
        fkp_arena = build_prob_game(chain)
        fkp_region = largest_invariant(fkp_arena)
        for x, y in sorted(region_pairs(fkp_arena)):
            responder = translate_strategy_desharnais_to_fkp(chain, dup_strategy, (x, y))
            for _ in range(20):
                final = simulate(
                    fkp_arena, ("pair", x, y),
                    _translated_dup_player(responder),
                    random_player(rng, fkp_arena),
                    winning_region=fkp_region,
                )
                assert final.winner == DUPLICATOR


def test_translation_exercises_both_case_split_branches():
    chain = parse_system(MIRROR)
    dup_strategy, _ = extract_strategies(build_desharnais_game(chain))
    responder = FkpResponder(chain, dup_strategy, trace=[])
    answer1 = responder.respond(("x", "y"), ("a",))  # mass 1 vs 0: greater branch
    answer2 = responder.respond(("x", "y"), ("b",))  # mass 0 vs 1: smaller branch
    assert {t["branch"] for t in responder.trace} == {"greater", "smaller"}
    for answer, Z in ((answer1, {"a"}), (answer2, {"b"})):
        assert (answer[0] in Z) != (answer[1] in Z)


def test_translation_diagonal_is_total_and_winning():
    chain = fixture("M_SPLIT")
    rng = random.Random(206)
    dup_strategy, _ = extract_strategies(build_desharnais_game(chain))
    fkp_arena = build_prob_game(chain)
    fkp_region = largest_invariant(fkp_arena)
    responder = translate_strategy_desharnais_to_fkp(chain, dup_strategy, ("x", "x"))
    for _ in range(20):
        final = simulate(
            fkp_arena, ("pair", "x", "x"),
            _translated_dup_player(responder),
            random_player(rng, fkp_arena),
            winning_region=fkp_region,
        )
        assert final.winner == DUPLICATOR


def test_zbar_contains_challenge_subset():
    rng = random.Random(207)
    for _ in range(10):
        chain = random_chain(rng, rng.randint(2, 4), twin=True)
        region = oracles.prob_bisimilarity(chain)
        for Z in instances.subsets(chain.carrier.elements):
            zb = zbar(chain, region, Z)
            assert set(Z) <= set(zb)


def test_translation_fkp_to_desharnais_wins():
    rng = random.Random(208)
    systems = [fixture("M_TWIN"), parse_system(MIRROR)] + [
        random_chain(rng, rng.randint(2, 4), twin=True) for _ in range(5)
    ]
    for chain in systems:
        fkp_pairs = region_pairs(build_prob_game(chain))
        desh_arena = build_desharnais_game(chain)
        desh_region = largest_invariant(desh_arena)
        for x, y in sorted(fkp_pairs):
            strategy = translate_strategy_fkp_to_desharnais(chain, fkp_pairs, (x, y))
            for _ in range(20):
                final = simulate(
                    desh_arena, ("d1", x, y),
                    strategy_player(strategy, desh_arena),
                    random_player(rng, desh_arena),
                    winning_region=desh_region,
                )
                assert final.winner == DUPLICATOR


def test_translation_rejects_losing_start():
    chain = fixture("M_SPLIT")
    fkp_pairs = region_pairs(build_prob_game(chain))
    with pytest.raises(TranslationError):
        translate_strategy_fkp_to_desharnais(chain, fkp_pairs, ("x", "y"))


# --- metric game ------------------------------------------------------------------------


def test_classify_metric_positions_on_split():
    chain = fixture("M_SPLIT")
    report = gfp(chain, lifting.params_bisim_metric(), fiber.PSEUDO_METRIC, "tolerance")
    assert classify_metric_position(chain, MetricPosition("x", "y", Fraction(1, 2)), report) == DUPLICATOR
    assert classify_metric_position(chain, MetricPosition("x", "y", Fraction(49, 100)), report) == SPOILER
    assert classify_metric_position(chain, MetricPosition("x", "x", Fraction(0)), report) == DUPLICATOR


def test_metric_spoiler_move_on_split():
    chain = fixture("M_SPLIT")
    report = gfp(chain, lifting.params_bisim_metric(), fiber.PSEUDO_METRIC, "tolerance")
    f = metric_spoiler_move(chain, MetricPosition("x", "y", Fraction(1, 4)), report)
    assert f["z"] == 1
    f2 = metric_spoiler_move(chain, MetricPosition("x", "z", Fraction(1, 2)), report)
    gap = abs(
        sum((f2[t] * w for t, w in chain.kernel["x"].items()), Fraction(0))
        - sum((f2[t] * w for t, w in chain.kernel["z"].items()), Fraction(0))
    )
    assert gap == 1
    with pytest.raises(GameError):
        metric_spoiler_move(chain, MetricPosition("x", "x", Fraction(0)), report)


def test_metric_duplicator_move_midpoint():
    d = FiberElement.metric(Carrier(("a", "b")), {("a", "b"): Fraction(2, 5)})
    chain = parse_system(
        {"type": "markov", "states": ["a", "b"], "kernel": {"a": {}, "b": {}}}
    )
    pos = metric_duplicator_move(chain, {"a": Fraction(1), "b": Fraction(0)}, d)
    assert (pos.x, pos.y, pos.eps) == ("a", "b", Fraction(7, 10))
    stuck = metric_duplicator_move(chain, {"a": Fraction(1, 5), "b": Fraction(0)}, d)
    assert stuck is None


def _drive_oracle(arena, start):
    state = oracle_settle(PlayState(start, (start,)), arena)
    while not state.finished:
        moves = list(arena.moves_oracle(state.current))
        state = oracle_play_step(state, arena, moves[0])
    return state


def test_metric_play_spoiler_wins_below_distance():
    chain = fixture("M_SPLIT")
    report = gfp(chain, lifting.params_bisim_metric(), fiber.PSEUDO_METRIC, "tolerance")
    arena = metric_oracle_arena(chain, report)
    final = _drive_oracle(arena, MetricPosition("x", "y", Fraction(1, 4)))
    assert final.winner == SPOILER


def test_metric_play_duplicator_safe_above_distance():
    chain = fixture("M_SPLIT")
    report = gfp(chain, lifting.params_bisim_metric(), fiber.PSEUDO_METRIC, "tolerance")
    arena = metric_oracle_arena(chain, report)
    final = _drive_oracle(arena, MetricPosition("x", "y", Fraction(3, 4)))
    assert final.winner == DUPLICATOR


def test_metric_play_runs_to_cap_at_winning_position():
    """Self-loop twins: Spoiler always has a legal (losing) challenge, so the
    play survives to the cap inside the winning region."""
    chain = parse_system(
        {"type": "markov", "states": ["a", "b"], "kernel": {"a": {"a": "1"}, "b": {"b": "1"}}}
    )
    report = gfp(chain, lifting.params_bisim_metric(), fiber.PSEUDO_METRIC, "tolerance")
    assert report.result.dist("a", "b") == 0
    arena = metric_oracle_arena(chain, report, cap=9)
    final = _drive_oracle(arena, MetricPosition("a", "b", Fraction(1, 2)))
    assert final.winner == DUPLICATOR and final.reason == "cap-in-winning-region"
    assert final.steps >= 9


# --- DFA / NFA games ---------------------------------------------------------------------


def test_dfa_game_d_line_all_off_diagonal_lost():
    dfa = fixture("D_LINE")
    region = region_pairs(build_dfa_game(dfa))
    assert region == {(s, s) for s in dfa.carrier}
    assert region == oracles.dfa_language_equivalence(dfa)


def test_dfa_game_duplicate_state_wins():
    doc = {
        "type": "dfa",
        "states": ["q0", "q1", "q2", "q0x"],
        "alphabet": ["a"],
        "accept": ["q1"],
        "delta": {
            "q0": {"a": "q1"},
            "q1": {"a": "q2"},
            "q2": {"a": "q2"},
            "q0x": {"a": "q1"},
        },
    }
    dfa = parse_system(doc)
    region = region_pairs(build_dfa_game(dfa))
    assert ("q0", "q0x") in region and ("q0x", "q0") in region
    assert region == oracles.dfa_language_equivalence(dfa)


def test_nfa_game_matches_dfa_game_on_deterministic_input():
    rng = random.Random(209)
    for _ in range(6):
        dfa = random_dfa(rng, rng.randint(2, 4), twin=True)
        nfa = parse_system(
            {
                "type": "nfa",
                "states": list(dfa.carrier.elements),
                "alphabet": list(dfa.alphabet),
                "accept": sorted(dfa.accept, key=dfa.carrier.index),
                "delta": {
                    s: {a: [dfa.delta[s][a]] for a in dfa.alphabet}
                    for s in dfa.carrier.elements
                },
            }
        )
        nfa_region = region_pairs(build_nfa_game(nfa))
        assert nfa_region == oracles.nfa_bisimilarity(nfa)
        # deterministic bisimilarity refines language equivalence
        assert nfa_region <= oracles.dfa_language_equivalence(dfa)


def test_nfa_game_matches_refinement_oracle():
    rng = random.Random(210)
    from conftest import random_nfa

    for _ in range(6):
        nfa = random_nfa(rng, rng.randint(2, 4), twin=True)
        assert region_pairs(build_nfa_game(nfa)) == oracles.nfa_bisimilarity(nfa)


# --- bisimulation topology -----------------------------------------------------------------


def test_d_line_sierpinski_subbasis():
    dfa = fixture("D_LINE")
    sub = instances.acceptance_subbasis(dfa)
    assert sub[()] == ("q1",)
    assert sub[("a",)] == ("q0",)
    assert sub[("a", "a")] == ()
    assert len(sub) == 3  # transformations close after two symbols


def test_specialization_matches_language_orders():
    dfa = fixture("D_LINE")
    sierpinski = specialization_preorder(bisim_topology(dfa, "sierpinski"))
    assert set(sierpinski.pairs()) == oracles.dfa_language_inclusion(dfa)
    discrete = specialization_preorder(bisim_topology(dfa, "discrete"))
    rel = set(discrete.pairs())
    assert rel == oracles.dfa_language_equivalence(dfa)
    assert all((y, x) in rel for x, y in rel)  # symmetric: R0 separation


def test_specialization_extremes():
    assert specialization_preorder(fiber.bottom(fiber.TOPOLOGY, ABC)) == fiber.bottom(
        fiber.PREORDER, ABC
    )
    assert specialization_preorder(fiber.top(fiber.TOPOLOGY, ABC)) == fiber.top(
        fiber.PREORDER, ABC
    )


def test_topology_position_checks():
    dfa = fixture("D_LINE")
    target = bisim_topology(dfa, "sierpinski")
    # the bisimulation topology itself is winning, with no witness
    assert topology_position_check(dfa, target) == (DUPLICATOR, None)
    # the discrete topology is the fiber bottom, hence always winning
    verdict, witness = topology_position_check(dfa, fiber.bottom(fiber.TOPOLOGY, dfa.carrier))
    assert verdict == DUPLICATOR and witness is None
    # the indiscrete topology is the top: it loses as soon as the
    # bisimulation topology is nontrivial, here with the acceptance witness
    verdict, witness = topology_position_check(dfa, fiber.top(fiber.TOPOLOGY, dfa.carrier))
    assert verdict == SPOILER and witness is not None
    tag, _ = witness
    assert tag == "eps"


def test_topology_play_spoiler_forces_win_from_indiscrete():
    dfa = fixture("D_LINE")
    arena = topology_oracle_arena(dfa, "sierpinski")
    final = _drive_oracle(arena, fiber.top(fiber.TOPOLOGY, dfa.carrier))
    assert final.winner == SPOILER


def test_topology_play_duplicator_wins_from_bisim_topology():
    dfa = fixture("D_LINE")
    arena = topology_oracle_arena(dfa, "sierpinski", cap=12)
    final = _drive_oracle(arena, bisim_topology(dfa, "sierpinski"))
    assert final.winner == DUPLICATOR


def test_topology_position_check_random_sweep():
    """Verdicts match the order against the bisimulation topology, and every
    losing position yields a witness, for random positions of both variants."""
    rng = random.Random(214)
    from conftest import random_fiber_element

    for _ in range(8):
        dfa = random_dfa(rng, rng.randint(2, 4), n_symbols=rng.choice((1, 2)))
        for variant in ("sierpinski", "discrete"):
            target = bisim_topology(dfa, variant)
            positions = [
                fiber.bottom(fiber.TOPOLOGY, dfa.carrier),
                fiber.top(fiber.TOPOLOGY, dfa.carrier),
                target,
            ] + [random_fiber_element(rng, fiber.TOPOLOGY, dfa.carrier) for _ in range(4)]
            for t in positions:
                verdict, witness = topology_position_check(dfa, t, variant)
                assert (verdict == DUPLICATOR) == fiber.leq(t, target)
                if verdict == SPOILER:
                    assert witness is not None


def test_random_dfas_topology_agreement():
    rng = random.Random(211)
    for _ in range(6):
        dfa = random_dfa(rng, rng.randint(2, 4), n_symbols=rng.choice((1, 2)), twin=True)
        sier = specialization_preorder(bisim_topology(dfa, "sierpinski"))
        assert set(sier.pairs()) == oracles.dfa_language_inclusion(dfa)
        disc = specialization_preorder(bisim_topology(dfa, "discrete"))
        assert set(disc.pairs()) == oracles.dfa_language_equivalence(dfa)


# --- Hausdorff --------------------------------------------------------------------------


def test_hausdorff_fixture_values():
    d = h_pair()
    assert hausdorff_distance(d, ("a",), ("b", "c")) == 1
    assert hausdorff_codensity(d, ("a",), ("b", "c")) == 1


def test_hausdorff_equal_subsets_zero():
    d = h_pair()
    assert hausdorff_distance(d, ("a", "b"), ("a", "b")) == 0
    assert hausdorff_codensity(d, ("a", "b"), ("a", "b")) == 0


def test_hausdorff_rejects_empty_subset():
    d = h_pair()
    with pytest.raises(SystemError):
        hausdorff_distance(d, (), ("a",))
    with pytest.raises(SystemError):
        hausdorff_codensity(d, ("a",), ())


def test_hausdorff_coincidence_random():
    rng = random.Random(212)
    for _ in range(40):
        n = rng.randint(1, 5)
        car = Carrier(tuple(f"p{i}" for i in range(n)))
        d = random_metric(rng, car, denominator=rng.choice((5, 8, 12)))
        s = tuple(e for e in car.elements if rng.random() < 0.5) or (car.elements[0],)
        t = tuple(e for e in car.elements if rng.random() < 0.5) or (car.elements[-1],)
        assert hausdorff_distance(d, s, t) == hausdorff_codensity(d, s, t)


# --- transfer ----------------------------------------------------------------------------


def test_transfer_fixtures():
    one = transfer_check(fixture("K_ONE"))
    assert one["agree"] and one["is_equivalence"]
    assert one["relational"] == set(itertools.product(("a", "b", "c"), repeat=2))
    dead = transfer_check(fixture("K_DEAD"))
    assert dead["agree"] and dead["is_equivalence"]
    assert dead["relational"] == {("p", "p"), ("q", "q")}


def test_transfer_random_frames():
    rng = random.Random(213)
    for _ in range(10):
        frame = random_kripke(rng, rng.randint(2, 5), twin=True)
        result = transfer_check(frame)
        assert result["agree"] and result["is_equivalence"]

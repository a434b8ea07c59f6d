"""Parsing, validation, canonical serialization and one-step observations."""

import json
import random
from fractions import Fraction

import pytest

from bisimgames.fixtures import FIXTURE_DOCS, fixture
from bisimgames.system import (
    BOT,
    TOP,
    SystemError,
    parse_system,
    serialize_system,
    step_observation,
)

from conftest import random_chain, random_dfa, random_kripke, random_nfa


def test_fixture_k_one_parses():
    frame = fixture("K_ONE")
    assert frame.successors("a") == frozenset({"b"})
    assert frame.successors("c") == frozenset({"c"})


def test_mass_exceeds_one():
    doc = {"type": "markov", "states": ["x", "z"], "kernel": {"x": {"z": "3/2"}}}
    with pytest.raises(SystemError, match="mass exceeds 1"):
        parse_system(doc)


def test_dfa_delta_not_total():
    doc = {
        "type": "dfa",
        "states": ["q1", "q2"],
        "alphabet": ["a"],
        "accept": [],
        "delta": {"q1": {"a": "q2"}, "q2": {}},
    }
    with pytest.raises(SystemError, match="delta.q2.a: delta not total"):
        parse_system(doc)


def test_dangling_reference_is_path_qualified():
    doc = {"type": "kripke", "states": ["a"], "succ": {"a": ["ghost"]}}
    with pytest.raises(SystemError, match="succ.a: dangling"):
        parse_system(doc)


def test_unknown_keys_rejected():
    doc = dict(FIXTURE_DOCS["K_ONE"], extra=1)
    with pytest.raises(SystemError, match="unknown keys"):
        parse_system(doc)


def test_negative_weight_rejected():
    doc = {"type": "markov", "states": ["x"], "kernel": {"x": {"x": "-1/2"}}}
    with pytest.raises(SystemError, match="negative"):
        parse_system(doc)


def test_bad_rational_rejected():
    doc = {"type": "markov", "states": ["x"], "kernel": {"x": {"x": "0.5"}}}
    with pytest.raises(SystemError, match="rational"):
        parse_system(doc)


def test_parse_accepts_json_text():
    frame = parse_system(json.dumps(FIXTURE_DOCS["K_DEAD"]))
    assert frame.successors("q") == frozenset()


def test_round_trip_200_random_systems():
    rng = random.Random(424242)
    makers = [random_kripke, random_chain, random_dfa, random_nfa]
    for i in range(200):
        make = makers[i % 4]
        system = make(rng, rng.randint(1, 5))
        doc = serialize_system(system)
        again = parse_system(json.loads(json.dumps(doc)))
        assert again == system
        assert serialize_system(again) == doc


def test_round_trip_fixtures():
    for name, doc in FIXTURE_DOCS.items():
        system = parse_system(doc)
        assert parse_system(serialize_system(system)) == system


# --- one-step observations -----------------------------------------------------


def test_diamond_on_deadlock():
    frame = fixture("K_DEAD")
    k = {"p": TOP, "q": TOP}
    assert step_observation(frame, k, "diamond", "p") == TOP
    assert step_observation(frame, k, "diamond", "q") == BOT


def test_expectation_on_split():
    chain = fixture("M_SPLIT")
    k = {"x": Fraction(0), "y": Fraction(0), "z": Fraction(1)}
    assert step_observation(chain, k, "expectation", "x") == 1
    assert step_observation(chain, k, "expectation", "y") == Fraction(1, 2)
    assert step_observation(chain, k, "expectation", "z") == 0


def test_acceptance_observation_on_line():
    dfa = fixture("D_LINE")
    k = {s: BOT for s in dfa.carrier}
    assert step_observation(dfa, k, "accept", "q1") == TOP
    assert step_observation(dfa, k, "accept", "q0") == BOT
    assert step_observation(dfa, k, "accept", "q2") == BOT


def test_symbol_observation_on_line():
    dfa = fixture("D_LINE")
    k = {"q0": BOT, "q1": TOP, "q2": BOT}
    assert step_observation(dfa, k, "symbol:a", "q0") == TOP
    assert step_observation(dfa, k, "symbol:a", "q1") == BOT


def test_threshold_observation_returns_mass():
    chain = fixture("M_SPLIT")
    k = {"x": BOT, "y": BOT, "z": TOP}
    assert step_observation(chain, k, "threshold", "x") == 1
    assert step_observation(chain, k, "threshold", "y") == Fraction(1, 2)


def test_constant_observation_sanity():
    """Expectation of a constant equals the constant times the total mass."""
    rng = random.Random(99)
    for _ in range(30):
        chain = random_chain(rng, rng.randint(1, 4))
        v = Fraction(rng.randint(0, 4), 4)
        k = {s: v for s in chain.carrier}
        for s in chain.carrier:
            assert step_observation(chain, k, "expectation", s) == v * chain.mass(s)


def test_constant_diamond_sanity():
    rng = random.Random(98)
    for _ in range(30):
        frame = random_kripke(rng, rng.randint(1, 4))
        k = {s: TOP for s in frame.carrier}
        for s in frame.carrier:
            expected = TOP if frame.successors(s) else BOT
            assert step_observation(frame, k, "diamond", s) == expected


def test_incompatible_modality_rejected():
    with pytest.raises(SystemError):
        step_observation(fixture("K_ONE"), {}, "expectation", "a")
    with pytest.raises(SystemError):
        step_observation(fixture("M_SPLIT"), {}, "diamond", "x")

"""Named systems and spaces used across the test suite and the CLI examples.

K_ONE    Kripke chain a->b->c->c; every state simulates every other.
K_DEAD   p loops, q deadlocks; p and q are not bisimilar.
M_SPLIT  Markov: x sends mass 1 to z, y sends 1/2, z is stuck.
M_TWIN   Markov: s1, s2 and t all move to t with mass 1; all bisimilar.
D_LINE   DFA over {a}: q0->q1->q2->q2, accepting {q1}; languages {a},{eps},{}.
H_PAIR   three-point pseudometric space d(a,b)=2/5, d(a,c)=d(b,c)=1.
"""

from __future__ import annotations

from fractions import Fraction

from .fiber import Carrier, FiberElement
from .system import parse_system

FIXTURE_DOCS: dict[str, dict] = {
    "K_ONE": {
        "type": "kripke",
        "states": ["a", "b", "c"],
        "succ": {"a": ["b"], "b": ["c"], "c": ["c"]},
    },
    "K_DEAD": {
        "type": "kripke",
        "states": ["p", "q"],
        "succ": {"p": ["p"], "q": []},
    },
    "M_SPLIT": {
        "type": "markov",
        "states": ["x", "y", "z"],
        "kernel": {"x": {"z": "1"}, "y": {"z": "1/2"}, "z": {}},
    },
    "M_TWIN": {
        "type": "markov",
        "states": ["s1", "s2", "t"],
        "kernel": {"s1": {"t": "1"}, "s2": {"t": "1"}, "t": {"t": "1"}},
    },
    "D_LINE": {
        "type": "dfa",
        "states": ["q0", "q1", "q2"],
        "alphabet": ["a"],
        "accept": ["q1"],
        "delta": {"q0": {"a": "q1"}, "q1": {"a": "q2"}, "q2": {"a": "q2"}},
    },
}


SPACE_DOCS: dict[str, dict] = {
    "H_PAIR": {
        "type": "metric-space",
        "points": ["a", "b", "c"],
        "dist": {"a|b": "2/5"},
        "S": ["a"],
        "T": ["b", "c"],
    },
}


def fixture(name: str):
    return parse_system(FIXTURE_DOCS[name])


def fixture_names() -> list[str]:
    return sorted(FIXTURE_DOCS) + sorted(SPACE_DOCS)


def h_pair() -> FiberElement:
    car = Carrier(("a", "b", "c"))
    return FiberElement.metric(car, {("a", "b"): Fraction(2, 5)})

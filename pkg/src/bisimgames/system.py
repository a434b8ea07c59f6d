"""Finite coalgebras: Kripke frames, Markov chains, DFAs and NFAs.

Systems are parsed from a small JSON schema with exact "p/q" rational
weights, validated eagerly with path-qualified errors, and serialized back
to a canonical form (parse of serialize is the identity).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction

from .fiber import Carrier, FiberError

TOP = "⊤"
BOT = "⊥"

_RATIONAL_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


class SystemError(ValueError):
    """Schema violation or invariant failure, with a path-qualified message."""


def parse_rational(text, path: str = "value") -> Fraction:
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str) or not _RATIONAL_RE.match(text):
        raise SystemError(f"{path}: expected a rational 'p/q' string, got {text!r}")
    return Fraction(text)


def format_rational(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}" if value.denominator != 1 else str(value.numerator)


@dataclass(frozen=True)
class KripkeFrame:
    carrier: Carrier
    succ: dict[str, frozenset[str]]

    @property
    def type(self) -> str:
        return "kripke"

    def successors(self, state: str) -> frozenset[str]:
        return self.succ[state]


@dataclass(frozen=True)
class MarkovChain:
    carrier: Carrier
    kernel: dict[str, dict[str, Fraction]]

    @property
    def type(self) -> str:
        return "markov"

    def weight(self, state: str, target: str) -> Fraction:
        return self.kernel[state].get(target, Fraction(0))

    def mass(self, state: str, subset=None) -> Fraction:
        row = self.kernel[state]
        if subset is None:
            return sum(row.values(), Fraction(0))
        return sum((w for t, w in row.items() if t in subset), Fraction(0))


@dataclass(frozen=True)
class Dfa:
    carrier: Carrier
    alphabet: tuple[str, ...]
    accept: frozenset[str]
    delta: dict[str, dict[str, str]]

    @property
    def type(self) -> str:
        return "dfa"

    def step(self, state: str, symbol: str) -> str:
        return self.delta[state][symbol]

    def run(self, state: str, word: str | tuple[str, ...]) -> str:
        for symbol in word:
            state = self.delta[state][symbol]
        return state

    def accepts(self, state: str, word) -> bool:
        return self.run(state, word) in self.accept


@dataclass(frozen=True)
class Nfa:
    carrier: Carrier
    alphabet: tuple[str, ...]
    accept: frozenset[str]
    delta: dict[str, dict[str, frozenset[str]]]

    @property
    def type(self) -> str:
        return "nfa"

    def step(self, state: str, symbol: str) -> frozenset[str]:
        return self.delta[state].get(symbol, frozenset())


FiniteSystem = KripkeFrame | MarkovChain | Dfa | Nfa


# --- parsing ---------------------------------------------------------------


def _carrier_from(doc: dict) -> Carrier:
    states = doc.get("states")
    if not isinstance(states, list) or not states or not all(isinstance(s, str) for s in states):
        raise SystemError("states: expected a nonempty list of strings")
    if len(set(states)) != len(states):
        raise SystemError("states: duplicates are not allowed")
    try:
        return Carrier(tuple(states))
    except FiberError as exc:
        raise SystemError(f"states: {exc}") from None


def _reject_unknown(doc: dict, allowed: set[str]) -> None:
    unknown = set(doc) - allowed
    if unknown:
        raise SystemError(f"unknown keys rejected: {sorted(unknown)}")


def _parse_kripke(doc: dict) -> KripkeFrame:
    _reject_unknown(doc, {"type", "states", "succ"})
    car = _carrier_from(doc)
    raw = doc.get("succ", {})
    if not isinstance(raw, dict):
        raise SystemError("succ: expected an object")
    succ: dict[str, frozenset[str]] = {s: frozenset() for s in car}
    for state, targets in raw.items():
        if state not in car:
            raise SystemError(f"succ.{state}: dangling state reference")
        if not isinstance(targets, list):
            raise SystemError(f"succ.{state}: expected a list of states")
        for t in targets:
            if t not in car:
                raise SystemError(f"succ.{state}: dangling state reference {t!r}")
        succ[state] = frozenset(targets)
    return KripkeFrame(car, succ)


def _parse_markov(doc: dict) -> MarkovChain:
    _reject_unknown(doc, {"type", "states", "kernel"})
    car = _carrier_from(doc)
    raw = doc.get("kernel", {})
    if not isinstance(raw, dict):
        raise SystemError("kernel: expected an object")
    kernel: dict[str, dict[str, Fraction]] = {s: {} for s in car}
    for state, row in raw.items():
        if state not in car:
            raise SystemError(f"kernel.{state}: dangling state reference")
        if not isinstance(row, dict):
            raise SystemError(f"kernel.{state}: expected an object")
        parsed: dict[str, Fraction] = {}
        for target, weight in row.items():
            if target not in car:
                raise SystemError(f"kernel.{state}.{target}: dangling state reference")
            w = parse_rational(weight, f"kernel.{state}.{target}")
            if w < 0:
                raise SystemError(f"kernel.{state}.{target}: negative weight")
            if w > 0:
                parsed[target] = w
        total = sum(parsed.values(), Fraction(0))
        if total > 1:
            raise SystemError(f"kernel.{state}: mass exceeds 1 (total {format_rational(total)})")
        kernel[state] = parsed
    return MarkovChain(car, kernel)


def _parse_alphabet_accept(doc: dict, car: Carrier) -> tuple[tuple[str, ...], frozenset[str]]:
    alphabet = doc.get("alphabet")
    if not isinstance(alphabet, list) or not alphabet or not all(isinstance(a, str) and a for a in alphabet):
        raise SystemError("alphabet: expected a nonempty list of symbols")
    if len(set(alphabet)) != len(alphabet):
        raise SystemError("alphabet: duplicates are not allowed")
    accept = doc.get("accept", [])
    if not isinstance(accept, list):
        raise SystemError("accept: expected a list of states")
    for s in accept:
        if s not in car:
            raise SystemError(f"accept: dangling state reference {s!r}")
    return tuple(alphabet), frozenset(accept)


def _parse_dfa(doc: dict) -> Dfa:
    _reject_unknown(doc, {"type", "states", "alphabet", "accept", "delta"})
    car = _carrier_from(doc)
    alphabet, accept = _parse_alphabet_accept(doc, car)
    raw = doc.get("delta", {})
    if not isinstance(raw, dict):
        raise SystemError("delta: expected an object")
    delta: dict[str, dict[str, str]] = {}
    for state in car:
        row = raw.get(state)
        if row is None:
            raise SystemError(f"delta.{state}: delta not total (missing state row)")
        if not isinstance(row, dict):
            raise SystemError(f"delta.{state}: expected an object")
        out: dict[str, str] = {}
        for symbol in alphabet:
            target = row.get(symbol)
            if target is None:
                raise SystemError(f"delta.{state}.{symbol}: delta not total")
            if not isinstance(target, str) or target not in car:
                raise SystemError(f"delta.{state}.{symbol}: dangling state reference {target!r}")
            out[symbol] = target
        extra = set(row) - set(alphabet)
        if extra:
            raise SystemError(f"delta.{state}: unknown symbols {sorted(extra)}")
        out_of_carrier = set(raw) - set(car.elements)
        if out_of_carrier:
            raise SystemError(f"delta: dangling state reference {sorted(out_of_carrier)}")
        delta[state] = out
    return Dfa(car, alphabet, accept, delta)


def _parse_nfa(doc: dict) -> Nfa:
    _reject_unknown(doc, {"type", "states", "alphabet", "accept", "delta"})
    car = _carrier_from(doc)
    alphabet, accept = _parse_alphabet_accept(doc, car)
    raw = doc.get("delta", {})
    if not isinstance(raw, dict):
        raise SystemError("delta: expected an object")
    delta: dict[str, dict[str, frozenset[str]]] = {s: {} for s in car}
    for state, row in raw.items():
        if state not in car:
            raise SystemError(f"delta.{state}: dangling state reference")
        if not isinstance(row, dict):
            raise SystemError(f"delta.{state}: expected an object")
        out: dict[str, frozenset[str]] = {}
        for symbol, targets in row.items():
            if symbol not in alphabet:
                raise SystemError(f"delta.{state}: unknown symbols ['{symbol}']")
            if not isinstance(targets, list):
                raise SystemError(f"delta.{state}.{symbol}: expected a list of states")
            for t in targets:
                if t not in car:
                    raise SystemError(f"delta.{state}.{symbol}: dangling state reference {t!r}")
            out[symbol] = frozenset(targets)
        delta[state] = out
    return Nfa(car, alphabet, accept, delta)


_PARSERS = {
    "kripke": _parse_kripke,
    "markov": _parse_markov,
    "dfa": _parse_dfa,
    "nfa": _parse_nfa,
}


def parse_system(document: str | dict) -> FiniteSystem:
    """Parse and validate a system document (JSON text or decoded object)."""
    if isinstance(document, str):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SystemError(f"invalid JSON: {exc}") from None
    else:
        doc = document
    if not isinstance(doc, dict):
        raise SystemError("top level: expected an object")
    kind = doc.get("type")
    parser = _PARSERS.get(kind)
    if parser is None:
        raise SystemError(f"type: expected one of {sorted(_PARSERS)}, got {kind!r}")
    return parser(doc)


def serialize_system(system: FiniteSystem) -> dict:
    """Canonical JSON-ready form; inverse of parse_system on its image."""
    states = list(system.carrier.elements)
    if isinstance(system, KripkeFrame):
        return {
            "type": "kripke",
            "states": states,
            "succ": {s: sorted(system.succ[s], key=system.carrier.index) for s in states},
        }
    if isinstance(system, MarkovChain):
        return {
            "type": "markov",
            "states": states,
            "kernel": {
                s: {
                    t: format_rational(w)
                    for t, w in sorted(system.kernel[s].items(), key=lambda kv: system.carrier.index(kv[0]))
                }
                for s in states
            },
        }
    if isinstance(system, Dfa):
        return {
            "type": "dfa",
            "states": states,
            "alphabet": list(system.alphabet),
            "accept": sorted(system.accept, key=system.carrier.index),
            "delta": {s: {a: system.delta[s][a] for a in system.alphabet} for s in states},
        }
    if isinstance(system, Nfa):
        return {
            "type": "nfa",
            "states": states,
            "alphabet": list(system.alphabet),
            "accept": sorted(system.accept, key=system.carrier.index),
            "delta": {
                s: {
                    a: sorted(system.delta[s].get(a, frozenset()), key=system.carrier.index)
                    for a in system.alphabet
                    if a in system.delta[s]
                }
                for s in states
            },
        }
    raise SystemError(f"cannot serialize {type(system).__name__}")


# --- one-step observation --------------------------------------------------


def step_observation(system: FiniteSystem, k, modality: str, state: str):
    """Value of one observation step at a state: apply the modality to the
    k-image of the state's one-step behaviour.

    k maps states to {⊥,⊤} for boolean modalities and to Fractions for the
    expectation modality.  Threshold observations are taken symbolically:
    "threshold" returns the mass of k's true-set rather than one ⊤/⊥ bit.
    """
    if modality == "diamond":
        if not isinstance(system, KripkeFrame):
            raise SystemError("diamond modality needs a Kripke frame")
        return TOP if any(k[t] == TOP for t in system.successors(state)) else BOT
    if modality == "expectation":
        if not isinstance(system, MarkovChain):
            raise SystemError("expectation modality needs a Markov chain")
        return sum((Fraction(k[t]) * w for t, w in system.kernel[state].items()), Fraction(0))
    if modality == "threshold":
        if not isinstance(system, MarkovChain):
            raise SystemError("threshold modality needs a Markov chain")
        true_set = {s for s in system.carrier if k[s] == TOP}
        return system.mass(state, true_set)
    if modality == "accept":
        if not isinstance(system, (Dfa, Nfa)):
            raise SystemError("acceptance modality needs an automaton")
        return TOP if state in system.accept else BOT
    if modality.startswith("symbol:"):
        symbol = modality.split(":", 1)[1]
        if isinstance(system, Dfa):
            if symbol not in system.alphabet:
                raise SystemError(f"symbol {symbol!r} not in alphabet")
            return k[system.step(state, symbol)]
        if isinstance(system, Nfa):
            if symbol not in system.alphabet:
                raise SystemError(f"symbol {symbol!r} not in alphabet")
            return TOP if any(k[t] == TOP for t in system.step(state, symbol)) else BOT
        raise SystemError("symbol modality needs an automaton")
    raise SystemError(f"unknown modality {modality!r}")

"""Automata models: DFA, 1PFA, MO-1QFA, MM-1QFA, 1QFACL and 1QCFA.

Every model is an immutable dataclass.  Quantum data are ``complex128``
numpy arrays; classical states, input symbols and measurement outcome
labels are strings.  ``validate`` checks all structural invariants and
returns the violations as data instead of raising.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import ClassVar, Iterable, Mapping, Sequence, Union

import numpy as np

from .linalg import (
    TOL,
    DimensionError,
    MeasurementFamily,
    identity,
    is_finite,
    max_abs,
    measurement_problems,
    validate_projector,
    validate_state,
    validate_unitary,
)

LEFT_END = "¢"
RIGHT_END = "$"
END_MARKERS = (LEFT_END, RIGHT_END)


class SymbolError(ValueError):
    """A word contains a symbol outside the machine's input alphabet."""


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[str, ...]

    def __init__(self, symbols: Iterable[str]):
        syms = tuple(str(s) for s in symbols)
        if len(set(syms)) != len(syms):
            raise ValueError(f"duplicate symbols in alphabet {syms}")
        for s in syms:
            if s in END_MARKERS:
                raise ValueError(f"end-marker {s!r} is reserved")
            if not s:
                raise ValueError("empty symbol")
        object.__setattr__(self, "symbols", syms)

    @property
    def tape(self) -> tuple[str, ...]:
        return (LEFT_END,) + self.symbols + (RIGHT_END,)

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, s) -> bool:
        return s in self.symbols

    def parse(self, word) -> tuple[str, ...]:
        """Split ``word`` into symbols and check membership.

        Strings containing blanks are split on whitespace, other strings
        character by character; any other sequence is taken as given.
        """
        if isinstance(word, str):
            syms = tuple(word.split()) if " " in word else tuple(word)
        else:
            syms = tuple(str(s) for s in word)
        for s in syms:
            if s not in self.symbols:
                raise SymbolError(f"symbol {s!r} not in alphabet {list(self.symbols)}")
        return syms

    def tape_word(self, word) -> tuple[str, ...]:
        return (LEFT_END,) + self.parse(word) + (RIGHT_END,)


def _frozen_map(m: Mapping) -> dict:
    return dict(m)


@dataclass(frozen=True)
class Dfa:
    kind: ClassVar[str] = "dfa"

    states: tuple[str, ...]
    alphabet: Alphabet
    transitions: dict  # (state, symbol) -> state
    initial: str
    accepting: frozenset

    def __init__(self, states, alphabet, transitions, initial, accepting):
        object.__setattr__(self, "states", tuple(states))
        object.__setattr__(self, "alphabet", alphabet if isinstance(alphabet, Alphabet) else Alphabet(alphabet))
        object.__setattr__(self, "transitions", _flatten_table(transitions))
        object.__setattr__(self, "initial", initial)
        object.__setattr__(self, "accepting", frozenset(accepting))

    def step(self, state: str, symbol: str) -> str:
        return self.transitions[(state, symbol)]

    def run(self, word, start: str | None = None) -> str:
        s = self.initial if start is None else start
        for sym in self.alphabet.parse(word):
            s = self.transitions[(s, sym)]
        return s

    def accepts(self, word) -> bool:
        return self.run(word) in self.accepting

    def __hash__(self):
        return hash((self.states, self.alphabet, self.initial, self.accepting))


def _flatten_table(table: Mapping) -> dict:
    """Accept either ``{(s, a): v}`` or nested ``{s: {a: v}}``."""
    out = {}
    for k, v in table.items():
        if isinstance(k, tuple):
            out[k] = v
        else:
            for sym, target in v.items():
                out[(k, sym)] = target
    return out


@dataclass(frozen=True)
class Pfa:
    """One-way probabilistic automaton; weights are exact fractions.

    With ``strict`` set (the default) every weight must be 0, 1/2 or 1, i.e.
    each step either moves deterministically or tosses one fair coin.
    """

    kind: ClassVar[str] = "pfa"

    states: tuple[str, ...]
    alphabet: Alphabet
    transitions: dict  # (state, tape symbol) -> {target: Fraction}
    accepting: frozenset
    strict: bool = True

    def __init__(self, states, alphabet, transitions, accepting, strict: bool = True):
        object.__setattr__(self, "states", tuple(states))
        object.__setattr__(self, "alphabet", alphabet if isinstance(alphabet, Alphabet) else Alphabet(alphabet))
        rows = {}
        for key, row in _flatten_table(transitions).items():
            rows[key] = {t: Fraction(w) if not isinstance(w, float) else Fraction(w).limit_denominator(10**12)
                         for t, w in row.items()}
        object.__setattr__(self, "transitions", rows)
        object.__setattr__(self, "accepting", frozenset(accepting))
        object.__setattr__(self, "strict", bool(strict))

    @property
    def initial(self) -> str:
        return self.states[0]

    def matrix(self, symbol: str) -> np.ndarray:
        """Column-stochastic matrix with ``A[i, j] = δ(s_j, σ, s_i)``."""
        idx = {s: i for i, s in enumerate(self.states)}
        n = len(self.states)
        a = np.zeros((n, n))
        for j, s in enumerate(self.states):
            for t, w in self.transitions.get((s, symbol), {}).items():
                a[idx[t], j] += float(w)
        return a

    def __hash__(self):
        return hash((self.states, self.alphabet, self.accepting))


@dataclass(frozen=True, eq=False)
class Mo1qfa:
    kind: ClassVar[str] = "mo1qfa"

    dim: int
    alphabet: Alphabet
    unitaries: dict  # tape symbol -> matrix
    initial: np.ndarray
    accepting: np.ndarray  # projector P_a

    def __post_init__(self):
        _normalize_quantum(self)


@dataclass(frozen=True, eq=False)
class Mm1qfa:
    kind: ClassVar[str] = "mm1qfa"

    dim: int
    alphabet: Alphabet
    unitaries: dict
    initial: np.ndarray
    accepting: np.ndarray
    rejecting: np.ndarray

    def __post_init__(self):
        _normalize_quantum(self)
        object.__setattr__(self, "rejecting", np.asarray(self.rejecting, dtype=np.complex128))

    @property
    def non_halting(self) -> np.ndarray:
        return identity(self.dim) - self.accepting - self.rejecting

    @property
    def measurement(self) -> MeasurementFamily:
        return MeasurementFamily([("ca", self.accepting), ("cr", self.rejecting), ("cn", self.non_halting)])


@dataclass(frozen=True, eq=False)
class Qfacl:
    """Quantum automaton with control language; ``control`` reads outcome labels."""

    kind: ClassVar[str] = "qfacl"

    dim: int
    alphabet: Alphabet
    unitaries: dict
    initial: np.ndarray
    observable: MeasurementFamily
    control: Dfa

    def __post_init__(self):
        _normalize_quantum(self, projector_field=None)


def _normalize_quantum(obj, projector_field: str | None = "accepting") -> None:
    if not isinstance(obj.alphabet, Alphabet):
        object.__setattr__(obj, "alphabet", Alphabet(obj.alphabet))
    object.__setattr__(obj, "unitaries", {k: np.asarray(v, dtype=np.complex128) for k, v in obj.unitaries.items()})
    object.__setattr__(obj, "initial", np.asarray(obj.initial, dtype=np.complex128))
    if projector_field:
        object.__setattr__(obj, projector_field, np.asarray(getattr(obj, projector_field), dtype=np.complex128))


@dataclass(frozen=True, eq=False)
class Qcfa:
    """One-way finite automaton with quantum and classical states.

    ``unitaries``, ``measurements`` and ``transitions`` are keyed by
    ``(classical state, tape symbol)``; ``transitions[(s, σ)]`` maps each
    outcome label of ``measurements[(s, σ)]`` to the next classical state.
    """

    kind: ClassVar[str] = "qcfa"

    dim: int
    states: tuple[str, ...]
    alphabet: Alphabet
    unitaries: dict
    measurements: dict
    transitions: dict
    initial_vector: np.ndarray
    initial_state: str
    accepting: tuple[str, ...]
    rejecting: tuple[str, ...]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.alphabet, Alphabet):
            object.__setattr__(self, "alphabet", Alphabet(self.alphabet))
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "unitaries",
                           {k: np.asarray(v, dtype=np.complex128) for k, v in self.unitaries.items()})
        object.__setattr__(self, "transitions", {k: dict(v) for k, v in self.transitions.items()})
        object.__setattr__(self, "initial_vector", np.asarray(self.initial_vector, dtype=np.complex128))
        order = {s: i for i, s in enumerate(self.states)}
        object.__setattr__(self, "accepting", tuple(sorted(set(self.accepting), key=lambda s: order.get(s, -1))))
        object.__setattr__(self, "rejecting", tuple(sorted(set(self.rejecting), key=lambda s: order.get(s, -1))))

    @property
    def quantum_states(self) -> int:
        return self.dim

    @property
    def classical_states(self) -> int:
        return len(self.states)


MachineDescription = Union[Dfa, Pfa, Mo1qfa, Mm1qfa, Qfacl, Qcfa]
MODEL_KINDS = {cls.kind: cls for cls in (Dfa, Pfa, Mo1qfa, Mm1qfa, Qfacl, Qcfa)}


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    kind: str
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind} at {self.path}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def add(self, kind: str, path: str, message: str) -> None:
        self.violations.append(Violation(kind, path, message))

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "\n".join(str(v) for v in self.violations)


def validate(machine: MachineDescription, tol: float = TOL) -> ValidationReport:
    report = ValidationReport()
    check = {
        "dfa": _check_dfa,
        "pfa": _check_pfa,
        "mo1qfa": _check_mo,
        "mm1qfa": _check_mm,
        "qfacl": _check_qfacl,
        "qcfa": _check_qcfa,
    }.get(getattr(machine, "kind", None))
    if check is None:
        report.add("unknown model", "machine", f"unsupported object {type(machine).__name__}")
        return report
    check(machine, report, tol)
    return report


def _check_dfa(d: Dfa, report: ValidationReport, tol: float, prefix: str = "") -> None:
    states = set(d.states)
    if len(states) != len(d.states):
        report.add("duplicate states", f"{prefix}states", "state names repeat")
    if d.initial not in states:
        report.add("unknown state", f"{prefix}initial", f"initial state {d.initial!r} not declared")
    for s in sorted(d.accepting - states):
        report.add("unknown state", f"{prefix}accepting", f"accepting state {s!r} not declared")
    for s in d.states:
        for a in d.alphabet:
            t = d.transitions.get((s, a))
            if t is None:
                report.add("partial transition", f"{prefix}transitions[{s}, {a}]", "missing transition")
            elif t not in states:
                report.add("unknown state", f"{prefix}transitions[{s}, {a}]", f"target {t!r} not declared")
    for (s, a) in d.transitions:
        if s not in states or a not in d.alphabet:
            report.add("stray transition", f"{prefix}transitions[{s}, {a}]", "key outside states x alphabet")


_STRICT_WEIGHTS = {Fraction(0), Fraction(1, 2), Fraction(1)}


def _check_pfa(p: Pfa, report: ValidationReport, tol: float) -> None:
    states = set(p.states)
    if not p.states:
        report.add("empty", "states", "a 1PFA needs at least one state")
    for s in sorted(p.accepting - states):
        report.add("unknown state", "accepting", f"accepting state {s!r} not declared")
    for s in p.states:
        for a in p.alphabet.tape:
            row = p.transitions.get((s, a))
            path = f"transitions[{s}, {a}]"
            if row is None:
                report.add("partial transition", path, "missing distribution")
                continue
            for t, w in row.items():
                if t not in states:
                    report.add("unknown state", path, f"target {t!r} not declared")
                if not 0 <= w <= 1:
                    report.add("weight range", path, f"weight {w} outside [0, 1]")
                elif p.strict and w not in _STRICT_WEIGHTS:
                    report.add("coin-tossing weights", path, f"weight {w} not in {{0, 1/2, 1}}")
            total = sum(row.values(), Fraction(0))
            if total != 1:
                report.add("row stochasticity", path, f"weights sum to {total}, expected 1")


def _check_unitaries(unitaries: Mapping, alphabet: Alphabet, dim: int, report: ValidationReport, tol: float,
                     prefix: str = "unitaries") -> None:
    for a in alphabet.tape:
        u = unitaries.get(a)
        path = f"{prefix}[{a}]"
        if u is None:
            report.add("partial transition", path, "missing unitary")
        elif u.shape != (dim, dim):
            report.add("dimension", path, f"shape {u.shape}, expected {(dim, dim)}")
        elif not validate_unitary(u, tol):
            report.add("non-unitary", path, "U^dagger U differs from I")


def _check_initial(v: np.ndarray, dim: int, report: ValidationReport, tol: float, path: str = "initial") -> None:
    if v.shape != (dim,):
        report.add("dimension", path, f"shape {v.shape}, expected {(dim,)}")
    elif not validate_state(v, tol):
        report.add("not normalized", path, "initial state must have unit norm")


def _check_projector(p: np.ndarray, dim: int, report: ValidationReport, tol: float, path: str) -> None:
    if p.shape != (dim, dim):
        report.add("dimension", path, f"shape {p.shape}, expected {(dim, dim)}")
    elif not validate_projector(p, tol):
        report.add("invalid projector", path, "not an orthogonal projector")


def _check_mo(m: Mo1qfa, report: ValidationReport, tol: float) -> None:
    _check_unitaries(m.unitaries, m.alphabet, m.dim, report, tol)
    _check_initial(m.initial, m.dim, report, tol)
    _check_projector(m.accepting, m.dim, report, tol, "accepting")


def _check_mm(m: Mm1qfa, report: ValidationReport, tol: float) -> None:
    _check_unitaries(m.unitaries, m.alphabet, m.dim, report, tol)
    _check_initial(m.initial, m.dim, report, tol)
    _check_projector(m.accepting, m.dim, report, tol, "accepting")
    _check_projector(m.rejecting, m.dim, report, tol, "rejecting")
    if report.ok:
        for problem in measurement_problems(m.measurement, tol):
            report.add("invalid measurement", "{P_a, P_r, P_n}", problem)


def _check_measurement(meas: MeasurementFamily, dim: int, report: ValidationReport, tol: float, path: str) -> None:
    if any(p.shape != (dim, dim) for _, p in meas):
        report.add("dimension", path, f"projectors must be {dim}x{dim}")
        return
    try:
        problems = measurement_problems(meas, tol)
    except DimensionError as exc:
        problems = [str(exc)]
    for problem in problems:
        report.add("invalid measurement", path, problem)


def _check_qfacl(q: Qfacl, report: ValidationReport, tol: float) -> None:
    _check_unitaries(q.unitaries, q.alphabet, q.dim, report, tol)
    _check_initial(q.initial, q.dim, report, tol)
    _check_measurement(q.observable, q.dim, report, tol, "observable")
    if set(q.control.alphabet.symbols) != set(q.observable.labels):
        report.add("control alphabet", "control.alphabet",
                   f"control alphabet {list(q.control.alphabet)} differs from outcome labels {list(q.observable.labels)}")
    _check_dfa(q.control, report, tol, prefix="control.")


def _check_qcfa(a: Qcfa, report: ValidationReport, tol: float) -> None:
    states = set(a.states)
    if len(states) != len(a.states):
        report.add("duplicate states", "states", "state names repeat")
    if a.initial_state not in states:
        report.add("unknown state", "initial_state", f"{a.initial_state!r} not declared")
    for s in set(a.accepting) | set(a.rejecting):
        if s not in states:
            report.add("unknown state", "accepting/rejecting", f"{s!r} not declared")
    overlap = set(a.accepting) & set(a.rejecting)
    if overlap:
        report.add("overlapping halting sets", "accepting/rejecting", f"states {sorted(overlap)} in both")
    _check_initial(a.initial_vector, a.dim, report, tol, "initial_vector")
    for s in a.states:
        for sym in a.alphabet.tape:
            key = (s, sym)
            u = a.unitaries.get(key)
            if u is None:
                report.add("partial transition", f"unitaries[{s}, {sym}]", "missing unitary")
            elif u.shape != (a.dim, a.dim):
                report.add("dimension", f"unitaries[{s}, {sym}]", f"shape {u.shape}")
            elif not validate_unitary(u, tol):
                report.add("non-unitary", f"unitaries[{s}, {sym}]", "U^dagger U differs from I")
            meas = a.measurements.get(key)
            if meas is None:
                report.add("partial transition", f"measurements[{s}, {sym}]", "missing measurement")
                continue
            _check_measurement(meas, a.dim, report, tol, f"measurements[{s}, {sym}]")
            delta = a.transitions.get(key)
            if delta is None:
                report.add("partial transition", f"transitions[{s}, {sym}]", "missing classical transition")
                continue
            for label in meas.labels:
                if label not in delta:
                    report.add("partial transition", f"transitions[{s}, {sym}]", f"no successor for outcome {label!r}")
                elif delta[label] not in states:
                    report.add("unknown state", f"transitions[{s}, {sym}]", f"target {delta[label]!r} not declared")
            for label in delta:
                if label not in meas.labels:
                    report.add("stray transition", f"transitions[{s}, {sym}]", f"unknown outcome {label!r}")
    if report.ok:
        for s in halting_violations(a, tol):
            report.add("non-halting", f"states[{s}]",
                       f"classical state {s!r} is reachable after $ but neither accepting nor rejecting")


def halting_violations(a: Qcfa, tol: float = TOL) -> list[str]:
    """Classical states reachable right after ``$`` that are outside ``S_acc ∪ S_rej``.

    Reachability follows every outcome whose projector is non-zero, over
    ``¢`` then any number of input symbols, then ``$``.
    """

    def successors(s: str, sym: str) -> set[str]:
        meas = a.measurements[(s, sym)]
        delta = a.transitions[(s, sym)]
        return {delta[label] for label, p in meas if max_abs(p) > tol}

    reach = successors(a.initial_state, LEFT_END)
    frontier = list(reach)
    while frontier:
        s = frontier.pop()
        for sym in a.alphabet:
            for t in successors(s, sym):
                if t not in reach:
                    reach.add(t)
                    frontier.append(t)
    final = set()
    for s in reach:
        final |= successors(s, RIGHT_END)
    halting = set(a.accepting) | set(a.rejecting)
    order = {s: i for i, s in enumerate(a.states)}
    return sorted(final - halting, key=lambda s: order.get(s, -1))


# ---------------------------------------------------------------------------
# example DFAs for the succinctness witness


def lm_member(word, m: int) -> bool:
    """Ground truth for L_m: ``a^i b^j`` with ``i + j`` a positive multiple of ``m``."""
    w = "".join(word)
    return len(w) > 0 and len(w) % m == 0 and is_astar_bstar(w)


def is_astar_bstar(word) -> bool:
    w = "".join(word)
    return set(w) <= {"a", "b"} and "ba" not in w


def build_figure1_dfa(m: int) -> Dfa:
    """The ``2m + 2``-state DFA for L_m.

    ``p_i`` counts leading a's (cycling ``p_m -> p_1``), ``q_j`` tracks the
    total length modulo ``m`` once b's start, and ``r`` is the dead state.
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    p = [f"p{i}" for i in range(m + 1)]
    q = [f"q{j}" for j in range(1, m + 1)]  # q[j-1] is q_j
    delta = {}
    for i in range(m + 1):
        delta[(p[i], "a")] = p[i + 1] if i < m else p[1]
        # after p_i the word has length i (mod m); one more b gives length i+1
        delta[(p[i], "b")] = q[i % m]
    for j in range(1, m + 1):
        delta[(q[j - 1], "b")] = q[j % m]
        delta[(q[j - 1], "a")] = "r"
    delta[("r", "a")] = "r"
    delta[("r", "b")] = "r"
    return Dfa(p + q + ["r"], ("a", "b"), delta, "p0", {p[m], q[m - 1]})


def build_figure2_dfa() -> Dfa:
    """Three-state DFA for ``a*b*``."""
    delta = {
        ("p0", "a"): "p0",
        ("p0", "b"): "p1",
        ("p1", "a"): "r",
        ("p1", "b"): "p1",
        ("r", "a"): "r",
        ("r", "b"): "r",
    }
    return Dfa(("p0", "p1", "r"), ("a", "b"), delta, "p0", {"p0", "p1"})

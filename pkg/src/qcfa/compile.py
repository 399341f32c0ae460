"""Compile DFA, 1PFA, MO-1QFA, MM-1QFA and 1QFACL into equivalent 1QCFA.

Each compiler reproduces the textbook construction with its exact state
counts:

=========  ================  ==================
source     quantum states    classical states
=========  ================  ==================
dfa        1                 n + 1
pfa        2                 n + 1
mo1qfa     n                 3
mm1qfa     n                 3
qfacl      n                 m + 1 (control DFA)
=========  ================  ==================
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .linalg import EPS_LABEL, MeasurementFamily, identity
from .models import RIGHT_END, Dfa, Mm1qfa, Mo1qfa, Pfa, Qcfa, Qfacl

#: Fair-coin operator; with the computational-basis measurement it yields 0/1 with probability 1/2.
COIN = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / np.sqrt(2.0)
COIN_MEASUREMENT = MeasurementFamily.computational(2, [[0], [1]], ["0", "1"])


class CompileError(ValueError):
    pass


def fresh_name(base: str, taken) -> str:
    taken = set(taken)
    name = base
    while name in taken:
        name += "'"
    return name


def compile_dfa(d: Dfa) -> Qcfa:
    """One quantum state; the DFA runs on the classical side plus a rejecting sink."""
    sink = fresh_name("s_r", d.states)
    states = tuple(d.states) + (sink,)
    eye = identity(1)
    triv = MeasurementFamily.trivial(1)
    unitaries, measurements, transitions = {}, {}, {}
    for s in states:
        for sym in d.alphabet.tape:
            unitaries[(s, sym)] = eye
            measurements[(s, sym)] = triv
            if s == sink:
                nxt = sink
            elif sym == RIGHT_END:
                nxt = s if s in d.accepting else sink
            elif sym in d.alphabet:
                nxt = d.transitions[(s, sym)]
            else:  # left end-marker
                nxt = s
            transitions[(s, sym)] = {EPS_LABEL: nxt}
    return Qcfa(
        dim=1,
        states=states,
        alphabet=d.alphabet,
        unitaries=unitaries,
        measurements=measurements,
        transitions=transitions,
        initial_vector=np.ones(1, dtype=np.complex128),
        initial_state=d.initial,
        accepting=tuple(s for s in d.states if s in d.accepting),
        rejecting=(sink,),
    )


def _coin_row(p: Pfa, s: str, sym: str) -> list[str]:
    """Targets of the row ``δ(s, sym, ·)``: one (deterministic) or two (fair coin)."""
    row = {t: w for t, w in p.transitions[(s, sym)].items() if w}
    if list(row.values()) == [Fraction(1)]:
        return list(row)
    if len(row) == 2 and all(w == Fraction(1, 2) for w in row.values()):
        return [t for t in p.states if t in row]
    raise CompileError(
        f"row ({s}, {sym}) is not a coin-tossing distribution; only weights 0, 1/2, 1 can be compiled "
        "(general stochastic 1PFA are not supported)"
    )


def compile_pfa(p: Pfa) -> Qcfa:
    """Two quantum states used as a fair coin; classical states are the 1PFA's plus a sink."""
    if not p.strict:
        raise CompileError("only strict (coin-tossing) 1PFA can be compiled; set strict=True")
    sink = fresh_name("s_r", p.states)
    states = tuple(p.states) + (sink,)
    eye = identity(2)
    triv = MeasurementFamily.trivial(2)

    def settle(target: str, sym: str) -> str:
        if sym == RIGHT_END and target not in p.accepting:
            return sink
        return target

    unitaries, measurements, transitions = {}, {}, {}
    for s in states:
        for sym in p.alphabet.tape:
            key = (s, sym)
            if s == sink:
                unitaries[key], measurements[key], transitions[key] = eye, triv, {EPS_LABEL: sink}
                continue
            targets = _coin_row(p, s, sym)
            if len(targets) == 1:
                unitaries[key], measurements[key] = eye, triv
                transitions[key] = {EPS_LABEL: settle(targets[0], sym)}
            else:
                t1, t2 = targets
                unitaries[key], measurements[key] = COIN, COIN_MEASUREMENT
                transitions[key] = {"0": settle(t1, sym), "1": settle(t2, sym)}
    return Qcfa(
        dim=2,
        states=states,
        alphabet=p.alphabet,
        unitaries=unitaries,
        measurements=measurements,
        transitions=transitions,
        initial_vector=np.array([1.0, 0.0], dtype=np.complex128),
        initial_state=p.initial,
        accepting=tuple(s for s in p.states if s in p.accepting),
        rejecting=(sink,),
    )


def compile_mo1qfa(m: Mo1qfa) -> Qcfa:
    """Unitaries copied verbatim; a single accept/reject measurement on ``$``."""
    states = ("s0", "s_a", "s_r")
    triv = MeasurementFamily.trivial(m.dim)
    final = MeasurementFamily([("ca", m.accepting), ("cr", identity(m.dim) - m.accepting)])
    unitaries, measurements, transitions = {}, {}, {}
    for s in states:
        for sym in m.alphabet.tape:
            key = (s, sym)
            unitaries[key] = m.unitaries[sym]
            if sym == RIGHT_END:
                measurements[key] = final
                transitions[key] = {"ca": "s_a", "cr": "s_r"}
            else:
                measurements[key] = triv
                transitions[key] = {EPS_LABEL: s}
    return Qcfa(
        dim=m.dim,
        states=states,
        alphabet=m.alphabet,
        unitaries=unitaries,
        measurements=measurements,
        transitions=transitions,
        initial_vector=m.initial,
        initial_state="s0",
        accepting=("s_a",),
        rejecting=("s_r",),
    )


def compile_mm1qfa(m: Mm1qfa) -> Qcfa:
    """Measure ``{P_a, P_r, P_n}`` after every symbol; mass still unhalted at ``$`` is rejected.

    The halting states ``s_a``/``s_r`` are absorbing with identity unitary
    and trivial measurement.
    """
    states = ("s0", "s_a", "s_r")
    meas = m.measurement
    eye = identity(m.dim)
    triv = MeasurementFamily.trivial(m.dim)
    unitaries, measurements, transitions = {}, {}, {}
    for sym in m.alphabet.tape:
        unitaries[("s0", sym)] = m.unitaries[sym]
        measurements[("s0", sym)] = meas
        transitions[("s0", sym)] = {"ca": "s_a", "cr": "s_r", "cn": "s_r" if sym == RIGHT_END else "s0"}
        for halt in ("s_a", "s_r"):
            unitaries[(halt, sym)] = eye
            measurements[(halt, sym)] = triv
            transitions[(halt, sym)] = {EPS_LABEL: halt}
    return Qcfa(
        dim=m.dim,
        states=states,
        alphabet=m.alphabet,
        unitaries=unitaries,
        measurements=measurements,
        transitions=transitions,
        initial_vector=m.initial,
        initial_state="s0",
        accepting=("s_a",),
        rejecting=("s_r",),
    )


def compile_qfacl(q: Qfacl, control: Dfa | None = None) -> Qcfa:
    """Classical states run the control DFA on the observed outcome letters.

    ``control`` defaults to ``q.control``; a different DFA may be supplied
    (e.g. a minimized one) and must accept the same control language.
    """
    from .analysis import dfa_equivalent

    if control is None:
        control = q.control
    if set(control.alphabet.symbols) != set(q.observable.labels):
        raise CompileError(
            f"control alphabet {list(control.alphabet)} differs from outcome labels {list(q.observable.labels)}"
        )
    if control is not q.control and not dfa_equivalent(control, q.control):
        raise CompileError("supplied control DFA does not recognize the machine's control language")
    sink = fresh_name("s_r", control.states)
    states = tuple(control.states) + (sink,)
    eye = identity(q.dim)
    triv = MeasurementFamily.trivial(q.dim)
    unitaries, measurements, transitions = {}, {}, {}
    for s in states:
        for sym in q.alphabet.tape:
            key = (s, sym)
            if s == sink:
                unitaries[key], measurements[key], transitions[key] = eye, triv, {EPS_LABEL: sink}
                continue
            unitaries[key] = q.unitaries[sym]
            measurements[key] = q.observable
            row = {}
            for c in q.observable.labels:
                t = control.transitions[(s, c)]
                row[c] = sink if sym == RIGHT_END and t not in control.accepting else t
            transitions[key] = row
    return Qcfa(
        dim=q.dim,
        states=states,
        alphabet=q.alphabet,
        unitaries=unitaries,
        measurements=measurements,
        transitions=transitions,
        initial_vector=q.initial,
        initial_state=control.initial,
        accepting=tuple(s for s in control.states if s in control.accepting),
        rejecting=(sink,),
    )


def compile_machine(machine) -> Qcfa:
    kind = getattr(machine, "kind", None)
    if kind == "qcfa":
        raise CompileError("already a 1QCFA")
    compilers = {
        "dfa": compile_dfa,
        "pfa": compile_pfa,
        "mo1qfa": compile_mo1qfa,
        "mm1qfa": compile_mm1qfa,
        "qfacl": compile_qfacl,
    }
    if kind not in compilers:
        raise CompileError(f"cannot compile model {kind!r}")
    return compilers[kind](machine)


def expected_counts(machine) -> tuple[int, int]:
    """(quantum states, classical states) promised for the compiled form of ``machine``."""
    kind = machine.kind
    if kind == "dfa":
        return 1, len(machine.states) + 1
    if kind == "pfa":
        return 2, len(machine.states) + 1
    if kind in ("mo1qfa", "mm1qfa"):
        return machine.dim, 3
    if kind == "qfacl":
        return machine.dim, len(machine.control.states) + 1
    raise CompileError(f"cannot compile model {kind!r}")

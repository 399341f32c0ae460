"""Intersection, union and complement of 1QCFA, plus error-budget bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass

from .compile import fresh_name
from .linalg import EPS_LABEL, MeasurementFamily, identity, tensor, tensor_measurement
from .models import Alphabet, Qcfa

INTERSECT_ALPHABETS = "intersect"
UNION_ALPHABETS = "union"


class AlphabetError(ValueError):
    pass


@dataclass(frozen=True)
class ErrorBudget:
    epsilon: float

    def __post_init__(self):
        if not 0 <= self.epsilon < 0.5:
            raise ValueError(f"error bound {self.epsilon} outside [0, 1/2)")


def combine_error(e1: ErrorBudget | float, e2: ErrorBudget | float) -> ErrorBudget:
    """Error of a product machine: ``ε1 + ε2 - ε1·ε2`` (i.e. ``1 - (1-ε1)(1-ε2)``)."""
    a = e1.epsilon if isinstance(e1, ErrorBudget) else float(e1)
    b = e2.epsilon if isinstance(e2, ErrorBudget) else float(e2)
    return ErrorBudget(a + b - a * b)


def pair_name(s1: str, s2: str) -> str:
    return f"<{s1},{s2}>"


def extend_alphabet(a: Qcfa, target: Alphabet) -> Qcfa:
    """Add a rejecting sink that absorbs every symbol outside ``a``'s alphabet."""
    target = target if isinstance(target, Alphabet) else Alphabet(target)
    missing = [s for s in a.alphabet if s not in target]
    if missing:
        raise AlphabetError(f"target alphabet lacks symbols {missing}")
    sink = fresh_name("s_r", a.states)
    states = tuple(a.states) + (sink,)
    eye = identity(a.dim)
    triv = MeasurementFamily.trivial(a.dim)
    unitaries, measurements, transitions = {}, {}, {}
    for s in states:
        for sym in target.tape:
            key = (s, sym)
            if s != sink and (sym in a.alphabet or sym not in target.symbols):
                unitaries[key] = a.unitaries[key]
                measurements[key] = a.measurements[key]
                transitions[key] = dict(a.transitions[key])
            else:
                unitaries[key], measurements[key], transitions[key] = eye, triv, {EPS_LABEL: sink}
    return Qcfa(
        dim=a.dim,
        states=states,
        alphabet=target,
        unitaries=unitaries,
        measurements=measurements,
        transitions=transitions,
        initial_vector=a.initial_vector,
        initial_state=a.initial_state,
        accepting=a.accepting,
        rejecting=tuple(a.rejecting) + (sink,),
    )


def _product(a: Qcfa, b: Qcfa, accepting, rejecting, alphabet_mode: str) -> Qcfa:
    if alphabet_mode == UNION_ALPHABETS:
        joint = Alphabet(list(a.alphabet) + [s for s in b.alphabet if s not in a.alphabet])
        if tuple(a.alphabet) != joint.symbols:
            a = extend_alphabet(a, joint)
        if tuple(b.alphabet) != joint.symbols:
            b = extend_alphabet(b, joint)
        sigma = joint
    elif alphabet_mode == INTERSECT_ALPHABETS:
        common = [s for s in a.alphabet if s in b.alphabet]
        if not common:
            raise AlphabetError("alphabets have no symbol in common")
        sigma = Alphabet(common)
    else:
        raise ValueError(f"unknown alphabet mode {alphabet_mode!r}")

    states = tuple(pair_name(s1, s2) for s1 in a.states for s2 in b.states)
    unitaries, measurements, transitions = {}, {}, {}
    for s1 in a.states:
        for s2 in b.states:
            s = pair_name(s1, s2)
            for sym in sigma.tape:
                k1, k2 = (s1, sym), (s2, sym)
                unitaries[(s, sym)] = tensor(a.unitaries[k1], b.unitaries[k2])
                m1, m2 = a.measurements[k1], b.measurements[k2]
                measurements[(s, sym)] = tensor_measurement(m1, m2)
                d1, d2 = a.transitions[k1], b.transitions[k2]
                transitions[(s, sym)] = {
                    f"{c1}|{c2}": pair_name(d1[c1], d2[c2]) for c1 in m1.labels for c2 in m2.labels
                }
    return Qcfa(
        dim=a.dim * b.dim,
        states=states,
        alphabet=sigma,
        unitaries=unitaries,
        measurements=measurements,
        transitions=transitions,
        initial_vector=tensor(a.initial_vector, b.initial_vector),
        initial_state=pair_name(a.initial_state, b.initial_state),
        accepting=[pair_name(x, y) for x, y in accepting(a, b)],
        rejecting=[pair_name(x, y) for x, y in rejecting(a, b)],
    )


def _pairs(xs, ys):
    return [(x, y) for x in xs for y in ys]


def intersect(a: Qcfa, b: Qcfa, alphabet_mode: str = INTERSECT_ALPHABETS) -> Qcfa:
    """Product machine accepting iff both components accept."""
    return _product(
        a, b,
        lambda a, b: _pairs(a.accepting, b.accepting),
        lambda a, b: (_pairs(a.accepting, b.rejecting) + _pairs(a.rejecting, b.accepting)
                      + _pairs(a.rejecting, b.rejecting)),
        alphabet_mode,
    )


def union(a: Qcfa, b: Qcfa, alphabet_mode: str = INTERSECT_ALPHABETS) -> Qcfa:
    """Product machine rejecting iff both components reject."""
    return _product(
        a, b,
        lambda a, b: (_pairs(a.accepting, b.rejecting) + _pairs(a.rejecting, b.accepting)
                      + _pairs(a.accepting, b.accepting)),
        lambda a, b: _pairs(a.rejecting, b.rejecting),
        alphabet_mode,
    )


def complement(a: Qcfa) -> Qcfa:
    """Swap the accepting and rejecting classical states."""
    return Qcfa(
        dim=a.dim,
        states=a.states,
        alphabet=a.alphabet,
        unitaries=a.unitaries,
        measurements=a.measurements,
        transitions=a.transitions,
        initial_vector=a.initial_vector,
        initial_state=a.initial_state,
        accepting=a.rejecting,
        rejecting=a.accepting,
    )

"""Seeded random machines for property tests, sweeps and benchmarks."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .linalg import EPS_LABEL, MeasurementFamily, basis, identity, random_measurement, random_state, random_unitary
from .models import RIGHT_END, Alphabet, Dfa, Mm1qfa, Mo1qfa, Pfa, Qcfa, Qfacl

AB = Alphabet(("a", "b"))


def random_dfa(rng: np.random.Generator, n_states: int, alphabet=AB, prefix: str = "d") -> Dfa:
    alphabet = alphabet if isinstance(alphabet, Alphabet) else Alphabet(alphabet)
    states = [f"{prefix}{i}" for i in range(n_states)]
    delta = {(s, a): states[int(rng.integers(n_states))] for s in states for a in alphabet}
    accepting = {s for s in states if rng.random() < 0.5}
    return Dfa(states, alphabet, delta, states[0], accepting)


def random_pfa(rng: np.random.Generator, n_states: int, alphabet=AB, coin_rate: float = 0.5) -> Pfa:
    """Strict 1PFA: every row is deterministic or a fair coin between two states."""
    states = [f"s{i}" for i in range(n_states)]
    rows = {}
    for s in states:
        for sym in alphabet.tape:
            if n_states > 1 and rng.random() < coin_rate:
                t1, t2 = rng.choice(n_states, size=2, replace=False)
                rows[(s, sym)] = {states[t1]: Fraction(1, 2), states[t2]: Fraction(1, 2)}
            else:
                rows[(s, sym)] = {states[int(rng.integers(n_states))]: Fraction(1)}
    accepting = {s for s in states if rng.random() < 0.5}
    return Pfa(states, alphabet, rows, accepting)


def _basis_projector(dim: int, idx) -> np.ndarray:
    p = np.zeros((dim, dim), dtype=np.complex128)
    for i in idx:
        p[i, i] = 1.0
    return p


def _unitaries(rng, dim: int, alphabet: Alphabet) -> dict:
    return {sym: random_unitary(dim, rng) for sym in alphabet.tape}


def random_mo1qfa(rng: np.random.Generator, dim: int, alphabet=AB) -> Mo1qfa:
    acc = [i for i in range(dim) if rng.random() < 0.5]
    return Mo1qfa(dim=dim, alphabet=alphabet, unitaries=_unitaries(rng, dim, alphabet), initial=basis(dim, 0),
                  accepting=_basis_projector(dim, acc))


def random_mm1qfa(rng: np.random.Generator, dim: int, alphabet=AB) -> Mm1qfa:
    """Accepting/rejecting/non-halting basis states drawn at random (each class may be empty)."""
    role = rng.integers(0, 3, size=dim)
    return Mm1qfa(dim=dim, alphabet=alphabet, unitaries=_unitaries(rng, dim, alphabet), initial=basis(dim, 0),
                  accepting=_basis_projector(dim, np.flatnonzero(role == 0)),
                  rejecting=_basis_projector(dim, np.flatnonzero(role == 1)))


def random_qfacl(rng: np.random.Generator, dim: int, n_outcomes: int, n_control: int, alphabet=AB) -> Qfacl:
    labels = [f"c{i}" for i in range(n_outcomes)]
    observable = random_measurement(dim, n_outcomes, rng, labels)
    control = random_dfa(rng, n_control, Alphabet(labels), prefix="k")
    return Qfacl(dim=dim, alphabet=alphabet, unitaries=_unitaries(rng, dim, alphabet),
                 initial=random_state(dim, rng), observable=observable, control=control)


def random_qcfa(rng: np.random.Generator, dim: int, n_states: int, alphabet=AB, max_outcomes: int = 3) -> Qcfa:
    """Random halting-complete 1QCFA.

    At least one state is halting; ``$`` only leads to halting states, so
    every run ends accepted or rejected.
    """
    states = [f"s{i}" for i in range(n_states)]
    n_halt = int(rng.integers(1, n_states + 1))
    halting = [states[i] for i in rng.choice(n_states, size=n_halt, replace=False)]
    accepting = [s for s in halting if rng.random() < 0.5]
    rejecting = [s for s in halting if s not in accepting]
    unitaries, measurements, transitions = {}, {}, {}
    for s in states:
        for sym in alphabet.tape:
            key = (s, sym)
            unitaries[key] = identity(dim) if rng.random() < 0.2 else random_unitary(dim, rng)
            k = int(rng.integers(1, min(dim, max_outcomes) + 1))
            if k == 1:
                meas = MeasurementFamily.trivial(dim)
            else:
                meas = random_measurement(dim, k, rng, rotate=bool(rng.random() < 0.5))
            measurements[key] = meas
            pool = halting if sym == RIGHT_END else states
            transitions[key] = {label: pool[int(rng.integers(len(pool)))] for label in meas.labels}
    return Qcfa(dim=dim, states=states, alphabet=alphabet, unitaries=unitaries, measurements=measurements,
                transitions=transitions, initial_vector=random_state(dim, rng), initial_state=states[0],
                accepting=accepting, rejecting=rejecting)


def words_upto(alphabet, max_len: int):
    """All words over ``alphabet`` of length ``0..max_len`` as tuples, shortlex order."""
    import itertools

    syms = list(alphabet)
    for n in range(max_len + 1):
        yield from itertools.product(syms, repeat=n)


__all__ = ["random_dfa", "random_pfa", "random_mo1qfa", "random_mm1qfa", "random_qfacl", "random_qcfa",
           "words_upto", "EPS_LABEL"]

import sys

import numpy as np
import pytest

from qcfa.compile import COIN, COIN_MEASUREMENT
from qcfa.linalg import MeasurementFamily, basis, identity
from qcfa.models import Alphabet, Dfa, Mo1qfa, Qcfa

AB = Alphabet("ab")


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def rotation_mo(theta=2 * np.pi / 3):
    """One-letter MO-1QFA rotating a qubit by ``theta`` per symbol."""
    alpha = Alphabet("a")
    return Mo1qfa(dim=2, alphabet=alpha, unitaries={"¢": identity(2), "a": rotation(theta), "$": identity(2)},
                  initial=basis(2, 0), accepting=np.diag([1.0, 0.0]))


def coin_tree_qcfa(depth):
    """1QCFA over {a} flipping the coin on each ``a`` and recording the outcomes in its state name.

    States are ``x`` plus one per outcome string up to ``depth``; only
    ``x0...0`` accepts.  Words longer than ``depth`` stay put.
    """
    names = ["x"]
    for n in range(1, depth + 1):
        names += ["x" + format(i, f"0{n}b") for i in range(2 ** n)]
    alpha = Alphabet("a")
    trivial = MeasurementFamily.trivial(2)
    uni, meas, delta = {}, {}, {}
    for s in names:
        for sym in alpha.tape:
            if sym == "a" and len(s) <= depth:
                uni[(s, sym)] = COIN
                meas[(s, sym)] = COIN_MEASUREMENT
                delta[(s, sym)] = {"0": s + "0", "1": s + "1"}
            else:
                uni[(s, sym)] = identity(2)
                meas[(s, sym)] = trivial
                delta[(s, sym)] = {"eps": s}
    acc = ["x" + "0" * depth]
    return Qcfa(dim=2, states=names, alphabet=alpha, unitaries=uni, measurements=meas, transitions=delta,
                initial_vector=basis(2, 0), initial_state="x", accepting=acc,
                rejecting=[s for s in names if s not in acc])


def all_accepting_dfa(alphabet=AB):
    return Dfa(["s"], alphabet, {("s", a): "s" for a in alphabet}, "s", {"s"})


def all_rejecting_dfa(alphabet=AB):
    return Dfa(["s"], alphabet, {("s", a): "s" for a in alphabet}, "s", set())


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])

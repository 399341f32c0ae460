from fractions import Fraction

import numpy as np
import pytest

from qcfa.compile import compile_dfa
from qcfa.generators import random_dfa, random_mm1qfa, random_pfa, random_qcfa, random_qfacl, words_upto
from qcfa.linalg import MeasurementFamily, basis, identity
from qcfa.models import Alphabet, Mm1qfa, Mo1qfa, Pfa, Qfacl, build_figure1_dfa, build_figure2_dfa
from qcfa.semantics import (
    BranchCapExceeded,
    NonHaltingError,
    dfa_accepts,
    mm1qfa_run,
    mm1qfa_run_formula,
    mo1qfa_accept_prob,
    ordered_product,
    pfa_accept_prob,
    pfa_accept_prob_paths,
    pfa_monte_carlo,
    qcfa_branches,
    qcfa_configuration,
    qcfa_run,
    qcfa_run_branching_oracle,
    qfacl_accept_prob,
    qfacl_accept_prob_enumerate,
    recognizes_with_error,
)

from conftest import AB, all_accepting_dfa, all_rejecting_dfa, coin_tree_qcfa, rotation_mo

WORDS4 = list(words_upto("ab", 4))


def fair_coin_pfa():
    """Two states, a fair coin on every tape symbol; ``s1`` accepts."""
    half = Fraction(1, 2)
    rows = {(s, sym): {"s0": half, "s1": half} for s in ("s0", "s1") for sym in AB.tape}
    return Pfa(["s0", "s1"], AB, rows, {"s1"})


def end_coin_pfa():
    """Coins on ``(s0, ¢)`` and ``(s0, $)``; ``$`` sends s1 back to s0."""
    half = Fraction(1, 2)
    rows = {(s, sym): {s: Fraction(1)} for s in ("s0", "s1") for sym in AB.tape}
    rows[("s0", "¢")] = {"s0": half, "s1": half}
    rows[("s1", "$")] = {"s0": Fraction(1)}
    rows[("s0", "$")] = {"s0": half, "s1": half}
    return Pfa(["s0", "s1"], AB, rows, {"s1"})


class TestDfa:
    @pytest.mark.parametrize("d, word, expected", [
        (build_figure1_dfa(3), "aaa", True),
        (build_figure2_dfa(), "", True),
        (build_figure1_dfa(3), "ab", False),
    ])
    def test_examples(self, d, word, expected):
        assert dfa_accepts(d, word) is expected


class TestPfa:
    def test_fair_coin_one_symbol(self):
        assert pfa_accept_prob(fair_coin_pfa(), "a") == pytest.approx(0.5, abs=1e-12)
        assert pfa_accept_prob_paths(fair_coin_pfa(), "a") == Fraction(1, 2)

    def test_end_markers_only(self):
        p = end_coin_pfa()
        # ¢: s0 -> {s0, s1} each 1/2; $: s0 -> s1 w.p. 1/2, s1 -> s0. Pr = 1/2 * 1/2
        assert pfa_accept_prob_paths(p, "") == Fraction(1, 4)
        assert pfa_accept_prob(p, "") == pytest.approx(0.25, abs=1e-12)
        mc = pfa_monte_carlo(p, "", 200_000, np.random.default_rng(7))
        assert abs(mc - 0.25) <= 1e-2

    def test_monte_carlo_fair_coin(self):
        mc = pfa_monte_carlo(fair_coin_pfa(), "ab", 200_000, np.random.default_rng(3))
        assert abs(mc - 0.5) <= 1e-2

    def test_deterministic_pfa_matches_dfa(self, rng):
        for _ in range(20):
            d = random_dfa(rng, int(rng.integers(1, 6)))
            rows = {}
            for s in d.states:
                for sym in AB.tape:
                    t = d.transitions[(s, sym)] if sym in ("a", "b") else s
                    rows[(s, sym)] = {t: Fraction(1)}
            states = list(d.states)
            states.remove(d.initial)
            p = Pfa([d.initial] + states, AB, rows, d.accepting)
            for w in words_upto("ab", 6):
                assert pfa_accept_prob(p, w) == (1.0 if d.accepts(w) else 0.0)

    def test_matrix_engine_equals_path_sum(self, rng):
        for _ in range(50):
            p = random_pfa(rng, int(rng.integers(1, 6)))
            for w in WORDS4:
                assert abs(pfa_accept_prob(p, w) - float(pfa_accept_prob_paths(p, w))) <= 1e-12


class TestMo:
    def test_stationary(self):
        uni = {sym: identity(2) for sym in AB.tape}
        m = Mo1qfa(dim=2, alphabet=AB, unitaries=uni, initial=basis(2, 0), accepting=np.diag([1.0, 0.0]))
        assert all(mo1qfa_accept_prob(m, w) == pytest.approx(1.0) for w in WORDS4)

    @pytest.mark.parametrize("word, expected", [("", 1.0), ("a", 0.25), ("aa", 0.25), ("aaa", 1.0)])
    def test_rotation(self, word, expected):
        assert mo1qfa_accept_prob(rotation_mo(), word) == pytest.approx(expected, abs=1e-12)


class TestMm:
    def test_immediate_accept(self):
        uni = {sym: identity(2) for sym in AB.tape}
        m = Mm1qfa(dim=2, alphabet=AB, unitaries=uni, initial=basis(2, 0),
                   accepting=np.diag([1.0, 0.0]), rejecting=np.diag([0.0, 1.0]))
        out = mm1qfa_run(m, "ab")
        assert out.accept == pytest.approx(1.0) and out.reject == pytest.approx(0.0)

    def test_no_halting_projectors(self):
        uni = {sym: identity(2) for sym in AB.tape}
        z = np.zeros((2, 2))
        m = Mm1qfa(dim=2, alphabet=AB, unitaries=uni, initial=basis(2, 0), accepting=z, rejecting=z)
        out = mm1qfa_run(m, "ba")
        assert (out.accept, out.reject) == (0.0, 0.0)
        assert out.residual == pytest.approx(1.0)

    def test_ordered_product_applies_rightmost_first(self):
        a = np.array([[0, 1], [1, 0]])
        b = np.diag([1, 2])
        # factors listed A_1, A_2; the product is A_2 A_1
        assert np.array_equal(ordered_product([a, b], 2), b @ a)
        assert np.array_equal(ordered_product([], 2), identity(2))

    def test_ordering_lock(self):
        # accept = sum_k |P_a U_k (P_n U_{k-1}) ... (P_n U_0) psi|^2, written out step by step
        m = random_mm1qfa(np.random.default_rng(11), 3)
        tape = AB.tape_word("ab")
        amp, expected = m.initial, 0.0
        for sym in tape:
            phi = m.unitaries[sym] @ amp
            expected += np.linalg.norm(m.accepting @ phi) ** 2
            amp = m.non_halting @ phi
        assert mm1qfa_run(m, "ab").accept == pytest.approx(expected, abs=1e-12)
        assert mm1qfa_run_formula(m, "ab").accept == pytest.approx(expected, abs=1e-12)
        # the opposite product order reads the tape backwards and gives a different number
        backwards, amp = 0.0, m.initial
        for sym in reversed(tape):
            phi = m.unitaries[sym] @ amp
            backwards += np.linalg.norm(m.accepting @ phi) ** 2
            amp = m.non_halting @ phi
        assert abs(backwards - expected) > 1e-3

    def test_mass_conservation_and_oracle(self, rng):
        for _ in range(200):
            m = random_mm1qfa(rng, int(rng.integers(1, 5)))
            for w in WORDS4:
                x, y = mm1qfa_run(m, w), mm1qfa_run_formula(m, w)
                assert abs(x.total - 1.0) <= 1e-9
                assert abs(x.accept - y.accept) <= 1e-9
                assert abs(x.reject - y.reject) <= 1e-9
                assert abs(x.residual - y.residual) <= 1e-9


class TestQfacl:
    def test_trivial_observable_all_accepting(self):
        uni = {sym: identity(2) for sym in AB.tape}
        q = Qfacl(dim=2, alphabet=AB, unitaries=uni, initial=basis(2, 0),
                  observable=MeasurementFamily.trivial(2, "c"), control=all_accepting_dfa(Alphabet(["c"])))
        assert all(qfacl_accept_prob(q, w) == pytest.approx(1.0) for w in WORDS4)

    def test_empty_control_language(self, rng):
        q = random_qfacl(rng, 2, 2, 1)
        q = Qfacl(dim=2, alphabet=AB, unitaries=q.unitaries, initial=q.initial, observable=q.observable,
                  control=all_rejecting_dfa(Alphabet(["c0", "c1"])))
        assert all(qfacl_accept_prob(q, w) == 0.0 for w in WORDS4)

    def test_dp_equals_enumeration(self, rng):
        for _ in range(200):
            dim = int(rng.integers(1, 5))
            q = random_qfacl(rng, dim, int(rng.integers(1, min(dim, 3) + 1)), int(rng.integers(1, 6)))
            for w in WORDS4:
                assert abs(qfacl_accept_prob(q, w) - qfacl_accept_prob_enumerate(q, w)) <= 1e-9


class TestQcfa:
    @pytest.mark.parametrize("m", [2, 3])
    def test_compiled_dfa_is_deterministic(self, m):
        d = build_figure1_dfa(m)
        a = compile_dfa(d)
        for w in words_upto("ab", 5):
            out = qcfa_run(a, w)
            assert out.accept == (1.0 if d.accepts(w) else 0.0)

    def test_coin_gadget(self):
        a = coin_tree_qcfa(1)
        assert qcfa_run(a, "a").accept == pytest.approx(0.5, abs=1e-12)
        assert qcfa_run_branching_oracle(a, "a").accept == pytest.approx(0.5, abs=1e-12)

    def test_coin_twice_gives_four_quarter_branches(self):
        leaves = qcfa_branches(coin_tree_qcfa(2), "aa")
        assert sorted(b.state for b in leaves) == ["x00", "x01", "x10", "x11"]
        assert all(b.weight == pytest.approx(0.25, abs=1e-12) for b in leaves)
        conf = qcfa_configuration(coin_tree_qcfa(2), "aa")
        assert {s: round(float(np.trace(r).real), 12) for s, r in conf.items()} == {
            "x00": 0.25, "x01": 0.25, "x10": 0.25, "x11": 0.25}

    def test_deterministic_machine_single_branch(self):
        a = compile_dfa(build_figure2_dfa())
        leaves = qcfa_branches(a, "aabba")
        assert len(leaves) == 1 and leaves[0].weight == 1.0
        assert qcfa_run(a, "aabba").reject == qcfa_run_branching_oracle(a, "aabba").reject == 1.0

    def test_density_equals_branching(self, rng):
        for _ in range(200):
            a = random_qcfa(rng, int(rng.integers(1, 5)), int(rng.integers(1, 6)))
            for w in WORDS4:
                x, y = qcfa_run(a, w), qcfa_run_branching_oracle(a, w)
                assert abs(x.accept - y.accept) <= 1e-9 and abs(x.reject - y.reject) <= 1e-9

    def test_trace_conserved_every_step(self, rng):
        for _ in range(50):
            a = random_qcfa(rng, int(rng.integers(1, 5)), int(rng.integers(1, 6)))
            for w in WORDS4:
                traces = qcfa_run(a, w, trace=True).traces
                assert len(traces) == len(w) + 2
                assert max(abs(t - 1.0) for t in traces) <= 1e-9

    def test_branch_cap(self):
        with pytest.raises(BranchCapExceeded):
            qcfa_run_branching_oracle(coin_tree_qcfa(4), "aaaa", cap=10)

    def test_branch_cap_from_env(self, monkeypatch):
        monkeypatch.setenv("QCFA_BRANCH_CAP", "3")
        with pytest.raises(BranchCapExceeded):
            qcfa_run_branching_oracle(coin_tree_qcfa(2), "aa")

    def test_non_halting_mass_raises(self):
        a = coin_tree_qcfa(1)
        a = type(a)(**{**{f: getattr(a, f) for f in ("dim", "states", "alphabet", "unitaries", "measurements",
                                                     "transitions", "initial_vector", "initial_state")},
                       "accepting": ["x0"], "rejecting": []})
        with pytest.raises(NonHaltingError):
            qcfa_run(a, "a")
        out = qcfa_run(a, "a", strict=False)
        assert out.residual == pytest.approx(0.5)


class TestRecognition:
    def test_compiled_dfa_exact(self):
        d = build_figure2_dfa()
        res = recognizes_with_error(compile_dfa(d), d.accepts, list(words_upto("ab", 6)), 0.0)
        assert res.ok

    def test_coin_fails_below_half(self):
        a = coin_tree_qcfa(1)
        res = recognizes_with_error(a, lambda w: len(w) > 0, ["", "a"], 0.25)
        assert not res.ok
        assert res.worst_word == ("a",)
        assert res.worst_margin == pytest.approx(-0.25)

    def test_epsilon_range(self):
        with pytest.raises(ValueError):
            recognizes_with_error(coin_tree_qcfa(1), lambda w: True, ["a"], 0.5)

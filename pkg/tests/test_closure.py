import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcfa import machine_file
from qcfa.closure import (
    AlphabetError,
    ErrorBudget,
    combine_error,
    complement,
    extend_alphabet,
    intersect,
    union,
)
from qcfa.compile import compile_dfa, compile_mo1qfa
from qcfa.generators import random_dfa, random_qcfa, words_upto
from qcfa.linalg import tensor
from qcfa.models import Alphabet, Dfa, build_figure2_dfa, validate
from qcfa.semantics import qcfa_configuration, qcfa_run
from qcfa.succinct import build_l2_mo1qfa, search_divisibility_params

from conftest import AB, all_accepting_dfa, all_rejecting_dfa

WORDS = list(words_upto("ab", 4))


def accept(a, w):
    return qcfa_run(a, w).accept


class TestProduct:
    def test_counts(self, rng):
        a, b = random_qcfa(rng, 2, 3), random_qcfa(rng, 3, 4)
        for op in (intersect, union):
            p = op(a, b)
            assert (p.dim, len(p.states)) == (6, 12)
            assert validate(p).ok

    def test_lm_components_give_twelve_states(self):
        l1 = compile_dfa(build_figure2_dfa())
        l2 = compile_mo1qfa(build_l2_mo1qfa(search_divisibility_params(3, 0.1)))
        p = intersect(l1, l2)
        assert len(l1.states) == 4 and len(l2.states) == 3
        assert len(p.states) == 12
        assert p.dim == l2.dim

    def test_neutral_elements(self, rng):
        top, bottom = compile_dfa(all_accepting_dfa()), compile_dfa(all_rejecting_dfa())
        for _ in range(10):
            x = random_qcfa(rng, 2, 3)
            for w in WORDS:
                assert abs(accept(intersect(x, top), w) - accept(x, w)) <= 1e-9
                assert abs(accept(union(x, bottom), w) - accept(x, w)) <= 1e-9

    def test_compiled_dfas_match_dfa_product(self, rng):
        for _ in range(20):
            d1, d2 = random_dfa(rng, 3), random_dfa(rng, 4, prefix="e")
            a1, a2 = compile_dfa(d1), compile_dfa(d2)
            meet, join = intersect(a1, a2), union(a1, a2)
            for w in words_upto("ab", 5):
                x, y = d1.accepts(w), d2.accepts(w)
                assert accept(meet, w) == float(x and y)
                assert accept(join, w) == float(x or y)

    def test_product_probabilities_multiply(self, rng):
        for _ in range(20):
            a, b = random_qcfa(rng, 2, 3), random_qcfa(rng, 2, 3)
            for w in WORDS:
                pa, pb = accept(a, w), accept(b, w)
                assert abs(accept(intersect(a, b), w) - pa * pb) <= 1e-9
                assert abs(accept(union(a, b), w) - (1 - (1 - pa) * (1 - pb))) <= 1e-9

    def test_configuration_factorizes(self, rng):
        a, b = random_qcfa(rng, 2, 3), random_qcfa(rng, 2, 2)
        p = intersect(a, b)
        for w in WORDS:
            ca, cb, cp = qcfa_configuration(a, w), qcfa_configuration(b, w), qcfa_configuration(p, w)
            for s1, r1 in ca.items():
                for s2, r2 in cb.items():
                    assert np.allclose(cp[f"<{s1},{s2}>"], tensor(r1, r2), atol=1e-10)

    def test_joint_labels(self, rng):
        a, b = random_qcfa(rng, 2, 2), random_qcfa(rng, 2, 2)
        p = intersect(a, b)
        key = ("<s0,s0>", "a")
        expected = {f"{c1}|{c2}" for c1 in a.measurements[("s0", "a")].labels
                    for c2 in b.measurements[("s0", "a")].labels}
        assert set(p.measurements[key].labels) == expected

    def test_de_morgan(self, rng):
        for _ in range(20):
            a, b = random_qcfa(rng, 2, 3), random_qcfa(rng, 2, 3)
            lhs = complement(intersect(complement(a), complement(b)))
            rhs = union(a, b)
            for w in WORDS:
                assert abs(accept(lhs, w) - accept(rhs, w)) <= 1e-9


class TestComplement:
    def test_swap(self, rng):
        for _ in range(20):
            a = random_qcfa(rng, 3, 4)
            c = complement(a)
            for w in WORDS:
                x, y = qcfa_run(a, w), qcfa_run(c, w)
                assert (y.accept, y.reject) == (x.reject, x.accept)
                assert abs(x.accept + y.accept - 1.0) <= 1e-9

    def test_involution_is_byte_identical(self, rng):
        a = random_qcfa(rng, 2, 3)
        assert machine_file.dumps(complement(complement(a))) == machine_file.dumps(a)

    def test_figure2(self):
        c = complement(compile_dfa(build_figure2_dfa()))
        for w in words_upto("ab", 6):
            assert accept(c, w) == float("ba" in "".join(w))


class TestAlphabets:
    def test_extend_same_alphabet(self):
        a = compile_dfa(build_figure2_dfa())
        e = extend_alphabet(a, AB)
        assert len(e.states) == len(a.states) + 1
        assert all(accept(e, w) == accept(a, w) for w in words_upto("ab", 5))

    def test_extend_rejects_new_symbols(self):
        alpha = Alphabet("a")
        a = compile_dfa(Dfa(["s"], alpha, {("s", "a"): "s"}, "s", {"s"}))
        e = extend_alphabet(a, AB)
        assert validate(e).ok
        for w in words_upto("ab", 4):
            out = qcfa_run(e, w)
            assert out.reject == (1.0 if "b" in w else 0.0)

    def test_extend_to_smaller_alphabet_fails(self):
        with pytest.raises(AlphabetError):
            extend_alphabet(compile_dfa(build_figure2_dfa()), Alphabet("a"))

    def test_union_mode(self):
        only_a = compile_dfa(Dfa(["s"], Alphabet("a"), {("s", "a"): "s"}, "s", {"s"}))
        only_b = compile_dfa(Dfa(["t"], Alphabet("b"), {("t", "b"): "t"}, "t", {"t"}))
        joint = union(only_a, only_b, alphabet_mode="union")
        assert tuple(joint.alphabet) == ("a", "b")
        assert validate(joint).ok
        assert (joint.dim, len(joint.states)) == (1, 9)
        for w in words_upto("ab", 4):
            expected = set(w) <= {"a"} or set(w) <= {"b"}
            assert accept(joint, w) == float(expected)

    def test_intersect_mode_restricts(self):
        a = compile_dfa(Dfa(["s"], Alphabet("ab"), {("s", x): "s" for x in "ab"}, "s", {"s"}))
        b = compile_dfa(Dfa(["t"], Alphabet("bc"), {("t", x): "t" for x in "bc"}, "t", {"t"}))
        assert tuple(intersect(a, b).alphabet) == ("b",)
        with pytest.raises(AlphabetError):
            intersect(a, compile_dfa(Dfa(["u"], Alphabet("c"), {("u", "c"): "u"}, "u", {"u"})))

    def test_unknown_mode(self):
        a = compile_dfa(build_figure2_dfa())
        with pytest.raises(ValueError):
            intersect(a, a, alphabet_mode="both")


class TestErrorBudget:
    @pytest.mark.parametrize("e1, e2, expected", [(0.0, 0.25, 0.25), (0.1, 0.1, 0.19), (0.0, 0.1, 0.1)])
    def test_examples(self, e1, e2, expected):
        assert combine_error(e1, e2).epsilon == expected

    def test_formula_is_exact(self):
        assert combine_error(ErrorBudget(0.1), ErrorBudget(0.1)).epsilon == 0.1 + 0.1 - 0.1 * 0.1

    @pytest.mark.parametrize("bad", [-0.1, 0.5, 1.0])
    def test_range(self, bad):
        with pytest.raises(ValueError):
            ErrorBudget(bad)

    @settings(max_examples=100)
    @given(st.floats(0, 0.29), st.floats(0, 0.29))
    def test_matches_complement_product(self, e1, e2):
        assert abs(combine_error(e1, e2).epsilon - (1 - (1 - e1) * (1 - e2))) <= 1e-15

import csv
import json
import re
import subprocess
import sys

import numpy as np
import pytest

from qcfa import machine_file
from qcfa.cli import main
from qcfa.compile import compile_dfa
from qcfa.generators import random_mm1qfa, random_qcfa
from qcfa.models import build_figure1_dfa, build_figure2_dfa


@pytest.fixture
def files(tmp_path):
    def write(name, machine):
        path = tmp_path / name
        machine_file.save(machine, path)
        return str(path)

    return write


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


class TestValidate:
    def test_valid(self, files, capsys):
        code, out, _ = run(["validate", files("f1.json", build_figure1_dfa(3))], capsys)
        assert code == 0 and out.startswith("valid dfa")

    def test_non_unitary(self, files, capsys, rng):
        a = random_qcfa(rng, 2, 2)
        a.unitaries[("s1", "a")] = np.diag([1.0, 2.0])
        code, out, _ = run(["validate", files("bad.json", a)], capsys)
        assert code == 1
        assert "non-unitary" in out and "unitaries[s1, a]" in out

    def test_malformed_number(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        obj = machine_file.to_dict(random_mm1qfa(np.random.default_rng(0), 2))
        obj["initial"][0] = ["one", 0]
        path.write_text(json.dumps(obj))
        code, _, err = run(["validate", path], capsys)
        assert code == 2 and "error" in err

    def test_missing_file(self, tmp_path, capsys):
        assert run(["validate", tmp_path / "none.json"], capsys)[0] == 2


class TestRun:
    def test_compiled_figure2(self, files, capsys):
        path = files("f2.json", compile_dfa(build_figure2_dfa()))
        code, out, _ = run(["run", path, "aabb"], capsys)
        assert code == 0
        assert "accept 1.000000000000" in out.splitlines()

    def test_twelve_decimals(self, files, capsys, rng):
        code, out, _ = run(["run", files("q.json", random_qcfa(rng, 2, 3)), "ab"], capsys)
        assert re.fullmatch(r"accept \d\.\d{12}", out.splitlines()[0])

    def test_lm_machine(self, tmp_path, capsys):
        path = tmp_path / "lm3.json"
        assert run(["build", "lm", "--m", 3, "-o", path], capsys)[0] == 0
        code, out, _ = run(["run", path, "ab"], capsys)
        assert float(out.split()[1]) <= 0.1

    @pytest.mark.parametrize("engine", ["density", "branch"])
    def test_oracle_check(self, files, capsys, rng, engine):
        path = files("q.json", random_qcfa(rng, 3, 4))
        code, out, _ = run(["run", path, "abba", "--engine", engine, "--oracle-check"], capsys)
        assert code == 0
        gap = float(out.splitlines()[-1].split()[-1])
        assert gap <= 1e-9

    def test_mm_reports_residual(self, files, capsys, rng):
        code, out, _ = run(["run", files("mm.json", random_mm1qfa(rng, 3)), "ab", "--oracle-check"], capsys)
        assert code == 0 and "residual" in out

    def test_bad_symbol(self, files, capsys):
        code, _, err = run(["run", files("f2.json", build_figure2_dfa()), "abc"], capsys)
        assert code == 1 and "error" in err

    def test_empty_word(self, files, capsys):
        code, out, _ = run(["run", files("f2.json", build_figure2_dfa()), ""], capsys)
        assert code == 0 and "accept 1.000000000000" in out


class TestCompile:
    def test_dfa(self, files, tmp_path, capsys):
        out_path = tmp_path / "c.json"
        code, out, _ = run(["compile", files("f1.json", build_figure1_dfa(3)), "-o", out_path], capsys)
        assert code == 0
        assert "1 quantum state, 9 classical states" in out
        assert machine_file.load(out_path).kind == "qcfa"

    def test_mm(self, files, tmp_path, capsys, rng):
        code, out, _ = run(["compile", files("mm.json", random_mm1qfa(rng, 4)), "-o", tmp_path / "c.json"], capsys)
        assert code == 0 and "4 quantum states, 3 classical states" in out

    def test_qcfa_input(self, files, tmp_path, capsys):
        path = files("q.json", compile_dfa(build_figure2_dfa()))
        code, _, err = run(["compile", path, "-o", tmp_path / "c.json"], capsys)
        assert code == 1 and "already a 1QCFA" in err


class TestProduct:
    def test_lm_components(self, tmp_path, files, capsys):
        l1 = files("l1.json", compile_dfa(build_figure2_dfa()))
        l2_src = tmp_path / "l2.json"
        run(["build", "l2", "--m", 3, "-o", l2_src], capsys)
        l2 = tmp_path / "l2q.json"
        run(["compile", l2_src, "-o", l2], capsys)
        code, out, _ = run(["product", "intersect", l1, l2, "-o", tmp_path / "p.json"], capsys)
        assert code == 0
        assert "CS = 4*3 = 12" in out

    def test_union_alphabet_mode(self, tmp_path, files, capsys):
        from qcfa.models import Alphabet, Dfa

        a = files("a.json", compile_dfa(Dfa(["s"], Alphabet("a"), {("s", "a"): "s"}, "s", {"s"})))
        b = files("b.json", compile_dfa(Dfa(["t"], Alphabet("b"), {("t", "b"): "t"}, "t", {"t"})))
        out_path = tmp_path / "u.json"
        code, out, _ = run(["product", "union", a, b, "--alphabet", "union", "-o", out_path], capsys)
        assert code == 0 and "alphabet: a b" in out
        assert run(["validate", out_path], capsys)[0] == 0

    def test_disjoint_alphabets_fail(self, files, tmp_path, capsys):
        from qcfa.models import Alphabet, Dfa

        a = files("a.json", compile_dfa(Dfa(["s"], Alphabet("a"), {("s", "a"): "s"}, "s", {"s"})))
        b = files("b.json", compile_dfa(Dfa(["t"], Alphabet("b"), {("t", "b"): "t"}, "t", {"t"})))
        assert run(["product", "intersect", a, b, "-o", tmp_path / "x.json"], capsys)[0] == 1

    def test_requires_qcfa(self, files, tmp_path, capsys):
        d = files("d.json", build_figure2_dfa())
        assert run(["product", "union", d, d, "-o", tmp_path / "x.json"], capsys)[0] == 1

    def test_complement_twice_byte_identical(self, files, tmp_path, capsys, rng):
        src = files("q.json", random_qcfa(rng, 2, 3))
        once, twice = tmp_path / "c1.json", tmp_path / "c2.json"
        assert run(["complement", src, "-o", once], capsys)[0] == 0
        assert run(["complement", once, "-o", twice], capsys)[0] == 0
        assert twice.read_bytes() == open(src, "rb").read()


class TestAnalyze:
    def test_figure1(self, files, capsys):
        code, out, _ = run(["analyze", files("f1.json", build_figure1_dfa(3))], capsys)
        assert code == 0
        assert "minimal: yes (8 states)" in out
        assert "forbidden construction: s=p0 t=p3 x=aaa" in out

    def test_not_minimal(self, files, capsys):
        from qcfa.models import Alphabet, Dfa

        d = Dfa(["x", "y"], Alphabet("a"), {("x", "a"): "y", ("y", "a"): "x"}, "x", {"x", "y"})
        code, out, _ = run(["analyze", files("d.json", d), "--minimize"], capsys)
        assert code == 0 and "minimal: no (2 states; minimal DFA has 1)" in out
        assert "forbidden" not in out

    def test_requires_dfa(self, files, capsys, rng):
        assert run(["analyze", files("q.json", random_qcfa(rng, 2, 2))], capsys)[0] == 1


class TestExperiment:
    def test_m5(self, tmp_path, capsys):
        prefix = tmp_path / "lm5"
        code, out, _ = run(["experiment-lm", "--m", 5, "--epsilon", 0.1, "--random-words", 40,
                            "--report", prefix], capsys)
        assert code == 0
        rows = list(csv.DictReader(open(f"{prefix}.csv")))
        assert rows and all(r["violation"] == "0" for r in rows)
        summary = json.load(open(f"{prefix}.json"))
        assert summary["violations"] == 0 and summary["classical_states"] == 12

    def test_non_prime(self, tmp_path, capsys):
        code, _, err = run(["experiment-lm", "--m", 4, "--report", tmp_path / "x"], capsys)
        assert code == 1 and "m must be prime" in err


def test_module_entry_point(tmp_path):
    path = tmp_path / "f2.json"
    machine_file.save(build_figure2_dfa(), path)
    proc = subprocess.run([sys.executable, "-m", "qcfa", "validate", str(path)], capture_output=True, text=True)
    assert proc.returncode == 0 and "valid dfa" in proc.stdout

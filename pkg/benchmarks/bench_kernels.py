"""Numba vs numpy timings for the two hot kernels.

    python3 benchmarks/bench_kernels.py [--m 7] [--repeat 3]

* ``evolve``: the hybrid density-matrix update, timed over the ``a*b*``
  sweep of the L_m recognizer (lengths ``1..4m``).
* ``residues``: the residue-bound search kernel over a block of random
  candidate track sets.

Both backends are called directly, so the ``QCFA_DISABLE_NUMBA`` flag is not
needed here.  The first numba call (JIT compilation or cache load) is
excluded from the timings and reported separately.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from qcfa import _kernels
from qcfa.semantics import qcfa_run
from qcfa.succinct import astar_bstar_words, build_lm_qcfa


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_evolve(m: int, repeat: int) -> dict:
    machine = build_lm_qcfa(m, 0.1)
    words = list(astar_bstar_words(4 * m))

    def sweep(kernel):
        return [qcfa_run(machine, w, kernel=kernel).accept for w in words]

    out = {"label": f"evolve: L_{m} sweep, dim {machine.dim}, {len(machine.states)} states, {len(words)} words"}
    ref = sweep(_kernels._evolve_numpy)
    if _kernels.HAVE_NUMBA:
        t0 = time.perf_counter()
        _kernels._evolve_numba(*_warmup_args(machine))
        out["jit"] = time.perf_counter() - t0
        got = sweep(_kernels._evolve_numba)
        out["max_diff"] = float(np.max(np.abs(np.array(got) - np.array(ref))))
        out["numba"] = best_of(lambda: sweep(_kernels._evolve_numba), repeat)
    out["numpy"] = best_of(lambda: sweep(_kernels._evolve_numpy), repeat)
    return out


def _warmup_args(machine):
    from qcfa.semantics import _arrays

    arr = _arrays(machine)
    rho = np.zeros((len(machine.states), machine.dim, machine.dim), dtype=np.complex128)
    word = np.zeros(1, dtype=np.int64)
    return (arr.unitaries, arr.unitaries_h, arr.projectors, arr.projectors_h, arr.theta_idx,
            arr.out_start, arr.out_count, arr.out_proj, arr.out_next, rho, word, np.zeros(1))


def bench_residues(m: int, repeat: int, n_candidates: int = 20000, d: int = 8) -> dict:
    rng = np.random.default_rng(0)
    cands = np.sort(rng.integers(1, m, size=(n_candidates, d)), axis=1)
    cos_table = np.cos(2 * np.pi * np.arange(m) / m)
    residues = np.arange(1, m, dtype=np.int64)
    out = {"label": f"residues: m={m}, {n_candidates} candidate sets of {d} tracks"}
    ref = _kernels._residue_bounds_numpy(cands, cos_table, residues)
    if _kernels.HAVE_NUMBA:
        t0 = time.perf_counter()
        got = _kernels._residue_bounds_numba(cands[:1], cos_table, residues)
        out["jit"] = time.perf_counter() - t0
        got = _kernels._residue_bounds_numba(cands, cos_table, residues)
        out["max_diff"] = float(np.max(np.abs(got - ref)))
        out["numba"] = best_of(lambda: _kernels._residue_bounds_numba(cands, cos_table, residues), repeat)
    out["numpy"] = best_of(lambda: _kernels._residue_bounds_numpy(cands, cos_table, residues), repeat)
    return out


def report(row: dict) -> None:
    print(row["label"])
    print(f"  numpy  {row['numpy'] * 1e3:10.1f} ms")
    if "numba" in row:
        print(f"  numba  {row['numba'] * 1e3:10.1f} ms   (first call {row['jit'] * 1e3:.0f} ms, "
              f"speedup x{row['numpy'] / row['numba']:.1f}, max |diff| {row['max_diff']:.1e})")
    else:
        print("  numba  not installed")


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=7, help="prime for the L_m sweep")
    ap.add_argument("--residue-m", type=int, default=101, help="prime for the residue kernel")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    print(f"default backend: {_kernels.BACKEND}")
    report(bench_evolve(args.m, args.repeat))
    report(bench_residues(args.residue_m, args.repeat))


if __name__ == "__main__":
    main()

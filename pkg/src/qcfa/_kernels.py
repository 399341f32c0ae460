"""Hot loops with a numba path and a pure-numpy fallback.

Set ``QCFA_DISABLE_NUMBA=1`` to force the numpy implementations (also used
automatically when numba is not importable).  Both paths take the same flat
array encoding and return bitwise-comparable results up to BLAS rounding.

Array encoding of a 1QCFA with ``S`` classical states and ``T`` tape symbols:

* ``theta_idx[s, t]`` indexes ``unitaries``/``unitaries_h``; ``-1`` is identity.
* outcomes of ``Δ(s, t)`` occupy ``out_start[s, t] : out_start[s, t] + out_count[s, t]``
  in ``out_proj`` (index into ``projectors``; ``-1`` is identity) and
  ``out_next`` (successor classical state).
"""

from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap(args[0]) if args and callable(args[0]) else wrap


def _disabled() -> bool:
    return os.environ.get("QCFA_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


USE_NUMBA = HAVE_NUMBA and not _disabled()
BACKEND = "numba" if USE_NUMBA else "numpy"


def _evolve_numpy(unitaries, unitaries_h, projectors, projectors_h, theta_idx, out_start, out_count,
                  out_proj, out_next, rho, word, traces):
    n_states = rho.shape[0]
    for step in range(word.shape[0]):
        t = word[step]
        new = np.zeros_like(rho)
        for s in range(n_states):
            r = rho[s]
            if not r.any():
                continue
            u = theta_idx[s, t]
            if u >= 0:
                r = unitaries[u] @ r @ unitaries_h[u]
            start = out_start[s, t]
            for k in range(start, start + out_count[s, t]):
                p = out_proj[k]
                if p < 0:
                    new[out_next[k]] += r
                else:
                    new[out_next[k]] += projectors[p] @ r @ projectors_h[p]
        rho = new
        tr = 0.0
        for s in range(n_states):
            tr += np.trace(rho[s]).real
        traces[step] = tr
    return rho


@njit(cache=True)
def _evolve_numba(unitaries, unitaries_h, projectors, projectors_h, theta_idx, out_start, out_count,
                  out_proj, out_next, rho, word, traces):  # pragma: no cover - compiled
    n_states = rho.shape[0]
    dim = rho.shape[1]
    for step in range(word.shape[0]):
        t = word[step]
        new = np.zeros_like(rho)
        for s in range(n_states):
            r = rho[s]
            nonzero = False
            for i in range(dim):
                for j in range(dim):
                    if r[i, j] != 0:
                        nonzero = True
                        break
                if nonzero:
                    break
            if not nonzero:
                continue
            u = theta_idx[s, t]
            if u >= 0:
                r = np.dot(np.dot(unitaries[u], r), unitaries_h[u])
            start = out_start[s, t]
            for k in range(start, start + out_count[s, t]):
                p = out_proj[k]
                if p < 0:
                    new[out_next[k]] += r
                else:
                    new[out_next[k]] += np.dot(np.dot(projectors[p], r), projectors_h[p])
        rho = new
        tr = 0.0
        for s in range(n_states):
            for i in range(dim):
                tr += rho[s, i, i].real
        traces[step] = tr
    return rho


def _residue_bounds_numpy(candidates, cos_table, residues):
    den = cos_table.shape[0]
    d = candidates.shape[1]
    idx = (candidates[:, :, None] * residues[None, None, :]) % den
    vals = cos_table[idx]
    acc = np.zeros((candidates.shape[0], residues.shape[0]))
    for j in range(d):  # fixed summation order keeps both backends identical
        acc += vals[:, j, :]
    amp = acc / d
    return (amp * amp).max(axis=1)


@njit(cache=True)
def _residue_bounds_numba(candidates, cos_table, residues):  # pragma: no cover - compiled
    den = cos_table.shape[0]
    n, d = candidates.shape
    out = np.empty(n)
    for c in range(n):
        best = 0.0
        for ri in range(residues.shape[0]):
            r = residues[ri]
            acc = 0.0
            for j in range(d):
                acc += cos_table[(candidates[c, j] * r) % den]
            amp = acc / d
            v = amp * amp
            if v > best:
                best = v
        out[c] = best
    return out


if USE_NUMBA:
    evolve_hybrid = _evolve_numba
    residue_bounds = _residue_bounds_numba
else:
    evolve_hybrid = _evolve_numpy
    residue_bounds = _residue_bounds_numpy

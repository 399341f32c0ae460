"""The L_m succinctness witness: 12 classical states, O(log m) quantum states.

``L_m`` is ``a*b*`` restricted to lengths that are positive multiples of a
prime ``m``.  The recognizer is the product of

* the compiled 3-state DFA for ``a*b*`` (1 quantum, 4 classical states, exact), and
* a compiled track-rotation MO-1QFA for "length divisible by m"
  (``(2d)^t`` quantum, 3 classical states, one-sided error).

The rotation automaton runs ``d`` planar rotations by ``2πk_j/m`` in
uniform superposition; a length-``i`` word is accepted with probability
``((1/d) Σ_j cos(2π k_j i / m))^(2t)`` where ``t`` is the number of
tensor copies.  The track multipliers ``K`` are chosen by a seeded search
whose bound is verified exhaustively over all residues.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .analysis import find_forbidden_construction, minimize_dfa
from .closure import combine_error, intersect
from .compile import compile_dfa, compile_mo1qfa
from .linalg import householder_map_to_basis, identity, tensor_power
from .models import LEFT_END, RIGHT_END, Alphabet, Mo1qfa, Qcfa, build_figure1_dfa, build_figure2_dfa, lm_member
from .semantics import qcfa_run

MAX_COPIES = 3
MARGIN_TOL = 1e-12


class SearchExhausted(RuntimeError):
    def __init__(self, message: str, best: "DivisibilityParams | None" = None):
        super().__init__(message)
        self.best = best


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % p for p in range(2, math.isqrt(n) + 1))


@dataclass(frozen=True)
class DivisibilityParams:
    """Track multipliers ``K``, copy count ``t`` and the verified residue bound.

    Track ``j`` rotates by ``2π k_j / period``.  ``period`` is ``m`` except
    for ``m = 2``, where every multiplier of ``2π/2`` gives ``cos = ±1``; there
    the half-angle family (period ``2m``, odd multipliers) is used so that
    members still score exactly 1 and non-members score 0.
    """

    m: int
    tracks: tuple[int, ...]
    copies: int
    epsilon: float
    seed: int
    period: int
    single_bound: float

    @property
    def d(self) -> int:
        return len(self.tracks)

    @property
    def bound(self) -> float:
        return self.single_bound ** self.copies

    @property
    def dim(self) -> int:
        return (2 * self.d) ** self.copies


def _residues(m: int, period: int) -> list[int]:
    return [i for i in range(1, period) if i % m]


def residue_bound(tracks, m: int, period: int | None = None) -> float:
    """Exhaustive ``max_i ((1/d) Σ_j cos(2π k_j i / period))^2`` over non-multiples ``i`` of ``m``.

    Plain-Python evaluation, independent of the vectorized search kernel.
    """
    period = m if period is None else period
    d = len(tracks)
    worst = 0.0
    for i in _residues(m, period):
        amp = sum(math.cos(2 * math.pi * k * i / period) for k in tracks) / d
        worst = max(worst, amp * amp)
    return worst


def closed_form_accept(p: DivisibilityParams, length: int) -> float:
    amp = sum(math.cos(2 * math.pi * k * length / p.period) for k in p.tracks) / p.d
    return (amp * amp) ** p.copies


def _candidate_sets(pool: list[int], d: int, budget: int, rng: np.random.Generator) -> np.ndarray:
    total = math.comb(len(pool) + d - 1, d)
    if total <= budget:
        return np.array(list(itertools.combinations_with_replacement(pool, d)), dtype=np.int64)
    draws = np.sort(rng.choice(np.asarray(pool, dtype=np.int64), size=(budget, d)), axis=1)
    return np.unique(draws, axis=0)


def search_divisibility_params(m: int, epsilon: float, seed: int = 0, budget: int = 20000,
                               max_extra_tracks: int = 32) -> DivisibilityParams:
    """Seeded search for track multipliers reaching error ``epsilon`` with at most 3 copies.

    Starts at ``d = ceil(2 ln m)`` tracks and grows ``d`` until some
    candidate set has residue bound ``v`` with ``v^t <= epsilon`` for a
    ``t <= 3``.  Small search spaces are enumerated exhaustively, larger ones
    sampled (``budget`` sets per ``d``).  The returned bound is re-verified
    by ``residue_bound``.
    """
    if not is_prime(m):
        raise ValueError(f"m must be prime, got {m}")
    if not 0 < epsilon < 0.5:
        raise ValueError("epsilon must lie in (0, 1/2)")
    rng = np.random.default_rng(seed)
    period = m if m > 2 else 2 * m
    pool = list(range(1, m)) if m > 2 else [k for k in range(1, period) if k % 2]
    residues = np.asarray(_residues(m, period), dtype=np.int64)
    cos_table = np.cos(2 * np.pi * np.arange(period) / period)
    d0 = max(1, math.ceil(2 * math.log(m)))
    best = None
    for d in range(d0, d0 + max_extra_tracks + 1):
        cands = _candidate_sets(pool, d, budget, rng)
        values = _kernels.residue_bounds(cands, cos_table, residues)
        i = int(np.flatnonzero(values <= values.min() + 1e-12)[0])
        v = float(values[i])
        for t in range(1, MAX_COPIES + 1):
            if v ** t <= epsilon:
                tracks = tuple(int(k) for k in cands[i])
                verified = residue_bound(tracks, m, period)
                if verified ** t > epsilon:  # pragma: no cover - kernels disagree with the oracle
                    raise AssertionError("residue bound failed independent verification")
                return DivisibilityParams(m, tracks, t, epsilon, seed, period, verified)
        if best is None or v < best.single_bound:
            best = DivisibilityParams(m, tuple(int(k) for k in cands[i]), MAX_COPIES, epsilon, seed, period, v)
    raise SearchExhausted(f"no track set reached error {epsilon} for m={m}", best)


def _rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def build_l2_mo1qfa(p: DivisibilityParams) -> Mo1qfa:
    """Track-rotation MO-1QFA for lengths divisible by ``m`` (both letters act alike)."""
    d = p.d
    step = np.zeros((2 * d, 2 * d), dtype=np.complex128)
    for j, k in enumerate(p.tracks):
        step[2 * j:2 * j + 2, 2 * j:2 * j + 2] = _rotation(2 * math.pi * k / p.period)
    psi0 = np.zeros(2 * d, dtype=np.complex128)
    psi0[0::2] = 1.0 / math.sqrt(d)
    finish = householder_map_to_basis(psi0, 0)
    t = p.copies
    step_t = tensor_power(step, t)
    dim = (2 * d) ** t
    accept = np.zeros((dim, dim), dtype=np.complex128)
    accept[0, 0] = 1.0
    alphabet = Alphabet(("a", "b"))
    return Mo1qfa(
        dim=dim,
        alphabet=alphabet,
        unitaries={LEFT_END: identity(dim), "a": step_t, "b": step_t, RIGHT_END: tensor_power(finish, t)},
        initial=tensor_power(psi0, t),
        accepting=accept,
    )


def build_lm_qcfa(m: int, epsilon: float, seed: int = 0, params: DivisibilityParams | None = None) -> Qcfa:
    """Intersection of the exact ``a*b*`` 1QCFA with the compiled divisibility automaton."""
    if params is None:
        params = search_divisibility_params(m, epsilon, seed)
    shape = compile_dfa(build_figure2_dfa())
    length = compile_mo1qfa(build_l2_mo1qfa(params))
    return intersect(shape, length)


# ---------------------------------------------------------------------------
# experiment


@dataclass
class WordResult:
    word: str
    member: bool
    accept: float
    reject: float
    epsilon: float

    @property
    def length(self) -> int:
        return len(self.word)

    @property
    def margin(self) -> float:
        good = self.accept if self.member else self.reject
        return good - (1.0 - self.epsilon)

    @property
    def violation(self) -> bool:
        return self.margin < -MARGIN_TOL


CONTEXT = (
    "The 1PFA lower bound (at least m states) and the MM-1QFA impossibility below error 7/9+eps "
    "are lower-bound statements reported as context only; the forbidden-construction witness on the "
    "minimal DFA is the checkable certificate."
)


@dataclass
class ExperimentReport:
    m: int
    epsilon: float
    seed: int
    params: DivisibilityParams
    quantum_dim: int
    classical_states: int
    rows: list[WordResult]
    empty_word_accept: float
    dfa_states: int
    dfa_minimal_states: int
    witness: object
    combined_error: float
    notes: list[str] = field(default_factory=list)

    @property
    def violations(self) -> list[WordResult]:
        return [r for r in self.rows if r.violation]

    def worst(self, member: bool) -> WordResult | None:
        rows = [r for r in self.rows if r.member == member]
        return min(rows, key=lambda r: r.margin) if rows else None

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["word", "length", "member", "accept_prob", "margin", "violation"])
        for r in self.rows:
            writer.writerow([r.word, r.length, int(r.member), f"{r.accept:.12f}", f"{r.margin:.12f}", int(r.violation)])
        return buf.getvalue()

    def summary(self) -> dict:
        def word_info(r):
            return None if r is None else {"word": r.word, "accept_prob": r.accept, "margin": r.margin}

        w = self.witness
        members = [r for r in self.rows if r.member]
        return {
            "m": self.m,
            "epsilon": self.epsilon,
            "seed": self.seed,
            "d": self.params.d,
            "t": self.params.copies,
            "K": list(self.params.tracks),
            "period": self.params.period,
            "single_copy_bound": self.params.single_bound,
            "error_bound": self.params.bound,
            "combined_error": self.combined_error,
            "quantum_dim": self.quantum_dim,
            "classical_states": self.classical_states,
            "words_checked": len(self.rows),
            "members": len(members),
            "non_members": len(self.rows) - len(members),
            "violations": len(self.violations),
            "min_member_accept": min((r.accept for r in members), default=None),
            "max_non_member_accept": max((r.accept for r in self.rows if not r.member), default=None),
            "worst_member": word_info(self.worst(True)),
            "worst_non_member": word_info(self.worst(False)),
            "empty_word": {"member": False, "accept_prob": self.empty_word_accept,
                           "flagged": self.empty_word_accept > self.epsilon},
            "figure1_dfa": {
                "states": self.dfa_states,
                "minimal_states": self.dfa_minimal_states,
                "minimal": self.dfa_states == self.dfa_minimal_states,
                "forbidden_construction": None if w is None else {"s": w.s, "t": w.t, "x": "".join(w.word)},
            },
            "notes": self.notes,
        }

    def write(self, prefix) -> tuple[Path, Path]:
        """Write ``<prefix>.csv`` and ``<prefix>.json``."""
        prefix = Path(prefix)
        csv_path = prefix.with_name(prefix.name + ".csv")
        json_path = prefix.with_name(prefix.name + ".json")
        csv_path.write_text(self.csv_text())
        json_path.write_text(json.dumps(self.summary(), indent=2) + "\n")
        return csv_path, json_path


def astar_bstar_words(max_len: int, min_len: int = 1):
    for n in range(min_len, max_len + 1):
        for i in range(n, -1, -1):
            yield "a" * i + "b" * (n - i)


def random_non_members(count: int, max_len: int, rng: np.random.Generator) -> list[str]:
    """Distinct random words over {a, b} that contain ``ba`` (hence lie outside ``a*b*``)."""
    available = sum(2 ** n - (n + 1) for n in range(2, max_len + 1))
    count = min(count, available)
    out: list[str] = []
    seen: set[str] = set()
    while len(out) < count:
        n = int(rng.integers(2, max_len + 1))
        w = "".join(rng.choice(["a", "b"], size=n))
        if "ba" in w and w not in seen:
            seen.add(w)
            out.append(w)
    return out


def run_lm_experiment(m: int, epsilon: float, max_len: int | None = None, seed: int = 0,
                      n_random: int = 200) -> ExperimentReport:
    """Sweep all ``a*b*`` words of length ``1..max_len`` plus random non-``a*b*`` words."""
    if not is_prime(m):
        raise ValueError(f"m must be prime, got {m}")
    max_len = 4 * m if max_len is None else max_len
    params = search_divisibility_params(m, epsilon, seed)
    machine = build_lm_qcfa(m, epsilon, seed, params)
    rng = np.random.default_rng(seed)
    words = list(astar_bstar_words(max_len)) + random_non_members(n_random, max_len, rng)
    rows = []
    for w in words:
        out = qcfa_run(machine, w)
        rows.append(WordResult(w, lm_member(w, m), out.accept, out.reject, epsilon))
    fig1 = build_figure1_dfa(m)
    minimal, _ = minimize_dfa(fig1)
    empty = qcfa_run(machine, "").accept
    notes = [CONTEXT]
    if empty > epsilon:
        notes.append(
            f"The empty word is not in L_m but the product construction accepts it with probability {empty:.12f}; "
            "the sweep starts at length 1."
        )
    return ExperimentReport(
        m=m,
        epsilon=epsilon,
        seed=seed,
        params=params,
        quantum_dim=machine.dim,
        classical_states=len(machine.states),
        rows=rows,
        empty_word_accept=empty,
        dfa_states=len(fig1.states),
        dfa_minimal_states=len(minimal.states),
        witness=find_forbidden_construction(fig1),
        combined_error=combine_error(0.0, params.bound).epsilon,
        notes=notes,
    )

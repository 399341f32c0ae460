"""Exact acceptance probabilities for every model, each paired with an oracle.

All engines read the tape ``¢ w $`` left to right.  The 1QCFA engine keeps
one unnormalized density matrix per classical state (a hybrid
configuration); ``qcfa_run_branching_oracle`` instead enumerates every
measurement-outcome sequence with pure-state collapse and exists only to
cross-check it.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _kernels
from .linalg import TOL, dagger, identity, max_abs
from .models import LEFT_END, RIGHT_END, Dfa, Mm1qfa, Mo1qfa, Pfa, Qcfa, Qfacl

DEFAULT_BRANCH_CAP = 1_000_000
PRUNE = 1e-15


class NonHaltingError(RuntimeError):
    """Probability mass ended outside ``S_acc ∪ S_rej`` after the right end-marker."""


class BranchCapExceeded(RuntimeError):
    pass


def branch_cap() -> int:
    raw = os.environ.get("QCFA_BRANCH_CAP")
    return int(raw) if raw else DEFAULT_BRANCH_CAP


@dataclass
class RunOutcome:
    accept: float
    reject: float
    residual: float = 0.0
    traces: list[float] | None = field(default=None, repr=False)

    @property
    def total(self) -> float:
        return self.accept + self.reject + self.residual


# ---------------------------------------------------------------------------
# classical models


def dfa_accepts(d: Dfa, w) -> bool:
    return d.accepts(w)


def pfa_accept_prob(p: Pfa, w) -> float:
    """``Σ_{s ∈ S_acc} (A_$ A_{σ_l} ... A_{σ_1} A_¢ v_0)_s``."""
    v = np.zeros(len(p.states))
    v[0] = 1.0
    for sym in p.alphabet.tape_word(w):
        v = p.matrix(sym) @ v
    return float(sum(v[i] for i, s in enumerate(p.states) if s in p.accepting))


def pfa_accept_prob_paths(p: Pfa, w) -> Fraction:
    """Exact oracle: sum of path weights over all state sequences, in rationals."""
    dist = {p.initial: Fraction(1)}
    for sym in p.alphabet.tape_word(w):
        nxt: dict[str, Fraction] = {}
        for s, weight in dist.items():
            for t, x in p.transitions[(s, sym)].items():
                if x:
                    nxt[t] = nxt.get(t, Fraction(0)) + weight * x
        dist = nxt
    return sum((x for s, x in dist.items() if s in p.accepting), Fraction(0))


def pfa_monte_carlo(p: Pfa, w, samples: int, rng: np.random.Generator) -> float:
    """Sampling estimate of the acceptance probability (vectorized over runs)."""
    states = np.zeros(samples, dtype=np.int64)
    for sym in p.alphabet.tape_word(w):
        cdf = np.cumsum(p.matrix(sym), axis=0)  # column j: cumulative over targets
        u = rng.random(samples)
        states = np.minimum((u[:, None] > cdf[:, states].T).sum(axis=1), len(p.states) - 1)
    acc = np.array([s in p.accepting for s in p.states])
    return float(acc[states].mean())


# ---------------------------------------------------------------------------
# quantum automata without classical control


def mo1qfa_accept_prob(m: Mo1qfa, w) -> float:
    psi = m.initial
    for sym in m.alphabet.tape_word(w):
        psi = m.unitaries[sym] @ psi
    v = m.accepting @ psi
    return float(np.vdot(v, v).real)


def mm1qfa_run(m: Mm1qfa, w) -> RunOutcome:
    """Measure-many semantics; the unhalted mass at the end is ``residual``."""
    p_a, p_r, p_n = m.accepting, m.rejecting, m.non_halting
    psi = m.initial
    acc = rej = 0.0
    for sym in m.alphabet.tape_word(w):
        psi = m.unitaries[sym] @ psi
        va, vr = p_a @ psi, p_r @ psi
        acc += float(np.vdot(va, va).real)
        rej += float(np.vdot(vr, vr).real)
        psi = p_n @ psi
    return RunOutcome(acc, rej, float(np.vdot(psi, psi).real))


def ordered_product(factors: Sequence[np.ndarray], dim: int) -> np.ndarray:
    """``∏_{i=1}^n A_i = A_n A_{n-1} ... A_1`` (rightmost factor acts first)."""
    out = identity(dim)
    for a in factors:
        out = a @ out
    return out


def mm1qfa_run_formula(m: Mm1qfa, w) -> RunOutcome:
    """Oracle: evaluate the accept/reject sums term by term from explicit products."""
    tape = m.alphabet.tape_word(w)
    p_a, p_r, p_n = m.accepting, m.rejecting, m.non_halting
    acc = rej = 0.0
    for k in range(len(tape)):
        prefix = ordered_product([p_n @ m.unitaries[tape[i]] for i in range(k)], m.dim)
        v = m.unitaries[tape[k]] @ prefix @ m.initial
        acc += float(np.linalg.norm(p_a @ v) ** 2)
        rej += float(np.linalg.norm(p_r @ v) ** 2)
    tail = ordered_product([p_n @ m.unitaries[s] for s in tape], m.dim) @ m.initial
    return RunOutcome(acc, rej, float(np.linalg.norm(tail) ** 2))


def qfacl_accept_prob(q: Qfacl, w) -> float:
    """Dynamic programming over (control state, density matrix) pairs."""
    control = q.control
    rho = {control.initial: np.outer(q.initial, np.conj(q.initial))}
    for sym in q.alphabet.tape_word(w):
        u = q.unitaries[sym]
        nxt: dict[str, np.ndarray] = {}
        for c, r in rho.items():
            r = u @ r @ dagger(u)
            for label, p in q.observable:
                t = control.transitions[(c, label)]
                term = p @ r @ dagger(p)
                nxt[t] = nxt[t] + term if t in nxt else term
        rho = nxt
    return float(sum(np.trace(r).real for c, r in rho.items() if c in control.accepting))


def qfacl_accept_prob_enumerate(q: Qfacl, w) -> float:
    """Oracle: explicit sum over every outcome string accepted by the control DFA."""
    tape = q.alphabet.tape_word(w)
    labels = q.observable.labels
    total = 0.0
    for y in itertools.product(labels, repeat=len(tape)):
        if not q.control.accepts(y):
            continue
        v = q.initial
        for sym, label in zip(tape, y):
            v = q.observable.projector(label) @ (q.unitaries[sym] @ v)
        total += float(np.vdot(v, v).real)
    return total


# ---------------------------------------------------------------------------
# 1QCFA


@dataclass
class _QcfaArrays:
    index: dict
    tape: dict
    unitaries: np.ndarray
    unitaries_h: np.ndarray
    projectors: np.ndarray
    projectors_h: np.ndarray
    theta_idx: np.ndarray
    out_start: np.ndarray
    out_count: np.ndarray
    out_proj: np.ndarray
    out_next: np.ndarray


def _arrays(a: Qcfa) -> _QcfaArrays:
    cached = a._cache.get("arrays")
    if cached is not None:
        return cached
    index = {s: i for i, s in enumerate(a.states)}
    tape = {sym: i for i, sym in enumerate(a.alphabet.tape)}
    eye = identity(a.dim)
    n_s, n_t = len(a.states), len(tape)
    theta_idx = np.full((n_s, n_t), -1, dtype=np.int64)
    out_start = np.zeros((n_s, n_t), dtype=np.int64)
    out_count = np.zeros((n_s, n_t), dtype=np.int64)
    us, ps, out_proj, out_next = [], [], [], []
    for s in a.states:
        for sym, t in tape.items():
            key = (s, sym)
            try:
                u, meas, delta = a.unitaries[key], a.measurements[key], a.transitions[key]
            except KeyError as exc:
                raise ValueError(f"1QCFA has no transition for {key}") from exc
            if max_abs(u - eye) != 0.0:
                theta_idx[index[s], t] = len(us)
                us.append(u)
            out_start[index[s], t] = len(out_proj)
            out_count[index[s], t] = len(meas)
            for label, p in meas:
                if max_abs(p - eye) == 0.0:
                    out_proj.append(-1)
                else:
                    out_proj.append(len(ps))
                    ps.append(p)
                out_next.append(index[delta[label]])

    def stack(ms):
        if not ms:
            return np.zeros((0, a.dim, a.dim), dtype=np.complex128)
        return np.ascontiguousarray(np.stack(ms))

    u_stack, p_stack = stack(us), stack(ps)
    arrays = _QcfaArrays(
        index=index,
        tape=tape,
        unitaries=u_stack,
        unitaries_h=np.ascontiguousarray(np.conj(np.transpose(u_stack, (0, 2, 1)))),
        projectors=p_stack,
        projectors_h=np.ascontiguousarray(np.conj(np.transpose(p_stack, (0, 2, 1)))),
        theta_idx=theta_idx,
        out_start=out_start,
        out_count=out_count,
        out_proj=np.asarray(out_proj, dtype=np.int64),
        out_next=np.asarray(out_next, dtype=np.int64),
    )
    a._cache["arrays"] = arrays
    return arrays


def _evolve(a: Qcfa, w, kernel=None) -> tuple[np.ndarray, np.ndarray]:
    arr = _arrays(a)
    word = np.array([arr.tape[s] for s in a.alphabet.tape_word(w)], dtype=np.int64)
    rho = np.zeros((len(a.states), a.dim, a.dim), dtype=np.complex128)
    rho[arr.index[a.initial_state]] = np.outer(a.initial_vector, np.conj(a.initial_vector))
    traces = np.zeros(word.shape[0])
    kernel = kernel or _kernels.evolve_hybrid
    rho = kernel(arr.unitaries, arr.unitaries_h, arr.projectors, arr.projectors_h, arr.theta_idx,
                 arr.out_start, arr.out_count, arr.out_proj, arr.out_next, rho, word, traces)
    return rho, traces


def qcfa_configuration(a: Qcfa, w) -> dict[str, np.ndarray]:
    """Hybrid configuration after reading ``¢ w $``: classical state -> unnormalized ρ."""
    rho, _ = _evolve(a, w)
    return {s: rho[i] for i, s in enumerate(a.states) if rho[i].any()}


def _outcome_from_masses(a: Qcfa, mass: dict[str, float], traces=None, strict: bool = True) -> RunOutcome:
    acc = sum(mass.get(s, 0.0) for s in a.accepting)
    rej = sum(mass.get(s, 0.0) for s in a.rejecting)
    halting = set(a.accepting) | set(a.rejecting)
    rest = sum(v for s, v in mass.items() if s not in halting)
    if strict and rest > TOL:
        raise NonHaltingError(f"{rest:.3g} of the probability mass is in non-halting classical states after $")
    return RunOutcome(acc, rej, rest, traces)


def qcfa_run(a: Qcfa, w, trace: bool = False, strict: bool = True, kernel=None) -> RunOutcome:
    rho, traces = _evolve(a, w, kernel)
    mass = {s: float(np.trace(rho[i]).real) for i, s in enumerate(a.states)}
    return _outcome_from_masses(a, mass, traces.tolist() if trace else None, strict)


@dataclass(frozen=True)
class Branch:
    """A leaf of the outcome tree: outcome labels, final classical state, probability."""

    outcomes: tuple[str, ...]
    state: str
    weight: float


def qcfa_branches(a: Qcfa, w, cap: int | None = None) -> list[Branch]:
    """Enumerate measurement-outcome sequences with pure-state collapse.

    Outcomes of probability below ``1e-15`` are pruned.  Raises
    ``BranchCapExceeded`` when more than ``cap`` tree edges are explored.
    """
    cap = branch_cap() if cap is None else cap
    tape = a.alphabet.tape_word(w)
    leaves = []
    explored = 0
    stack = [((), a.initial_state, a.initial_vector, 1.0)]
    while stack:
        labels, s, psi, weight = stack.pop()
        pos = len(labels)
        if pos == len(tape):
            leaves.append(Branch(labels, s, weight))
            continue
        sym = tape[pos]
        phi = a.unitaries[(s, sym)] @ psi
        for label, p in a.measurements[(s, sym)]:
            v = p @ phi
            prob = float(np.vdot(v, v).real)
            if prob < PRUNE:
                continue
            explored += 1
            if explored > cap:
                raise BranchCapExceeded(f"more than {cap} branches")
            stack.append((labels + (label,), a.transitions[(s, sym)][label], v / np.sqrt(prob), weight * prob))
    leaves.reverse()
    return leaves


def qcfa_run_branching_oracle(a: Qcfa, w, cap: int | None = None, strict: bool = True) -> RunOutcome:
    """Independent route to ``qcfa_run``: sum the leaf weights of the outcome tree."""
    mass: dict[str, float] = {}
    for leaf in qcfa_branches(a, w, cap):
        mass[leaf.state] = mass.get(leaf.state, 0.0) + leaf.weight
    return _outcome_from_masses(a, mass, None, strict)


def accept_probability(machine, w) -> float:
    """Acceptance probability of any supported model."""
    kind = machine.kind
    if kind == "dfa":
        return 1.0 if machine.accepts(w) else 0.0
    if kind == "pfa":
        return pfa_accept_prob(machine, w)
    if kind == "mo1qfa":
        return mo1qfa_accept_prob(machine, w)
    if kind == "mm1qfa":
        return mm1qfa_run(machine, w).accept
    if kind == "qfacl":
        return qfacl_accept_prob(machine, w)
    if kind == "qcfa":
        return qcfa_run(machine, w).accept
    raise TypeError(f"unsupported model {kind!r}")


@dataclass
class RecognitionResult:
    ok: bool
    worst_word: tuple[str, ...] | None
    worst_margin: float

    def __bool__(self) -> bool:
        return self.ok


def recognizes_with_error(a: Qcfa, membership: Callable[[tuple[str, ...]], bool], words: Iterable,
                          epsilon: float) -> RecognitionResult:
    """Bounded-error check over a finite word list.

    The margin of a member is ``Pr[accept] - (1 - ε)``, of a non-member
    ``Pr[reject] - (1 - ε)``; recognition holds iff no margin is negative.
    """
    if not 0 <= epsilon < 0.5:
        raise ValueError("epsilon must lie in [0, 1/2)")
    worst_word, worst = None, float("inf")
    for w in words:
        word = a.alphabet.parse(w)
        out = qcfa_run(a, word)
        good = out.accept if membership(word) else out.reject
        margin = good - (1.0 - epsilon)
        if margin < worst:
            worst_word, worst = word, margin
    return RecognitionResult(worst >= -1e-12 if worst_word is not None else True, worst_word, worst)

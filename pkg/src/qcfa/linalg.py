"""Dense complex linear algebra for the small Hilbert spaces used by the automata.

Matrices and vectors are plain ``numpy`` arrays of dtype ``complex128``.
Kronecker products use the left-factor-major index convention, so joint
basis state ``(i, j)`` of ``a ⊗ b`` lives at index ``i * dim(b) + j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

TOL = 1e-9

#: Outcome label used for a trivial (identity) measurement.
EPS_LABEL = "eps"


class DimensionError(ValueError):
    pass


def as_matrix(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def as_vector(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.complex128)
    if a.ndim != 1:
        raise DimensionError(f"expected a 1-d vector, got shape {a.shape}")
    return a


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=np.complex128)


def basis(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return v


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def mat_mul(a, b) -> np.ndarray:
    a, b = np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128)
    if a.ndim != 2 or b.ndim not in (1, 2) or a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def tensor(a, b) -> np.ndarray:
    """Kronecker product of two matrices (or two vectors), left factor major."""
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def tensor_power(a, times: int) -> np.ndarray:
    """``a`` tensored with itself ``times`` times; the empty power is the scalar 1 of matching rank."""
    a = np.asarray(a, dtype=np.complex128)
    out = np.ones((1,) * a.ndim, dtype=np.complex128)
    for _ in range(times):
        out = tensor(out, a)
    return out


def max_abs(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def is_finite(a: np.ndarray) -> bool:
    return bool(np.all(np.isfinite(a)))


def _require_square(a: np.ndarray) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")


def validate_unitary(u, tol: float = TOL) -> bool:
    u = np.asarray(u, dtype=np.complex128)
    _require_square(u)
    if not is_finite(u):
        return False
    return max_abs(dagger(u) @ u - identity(u.shape[0])) <= tol


def validate_projector(p, tol: float = TOL) -> bool:
    p = np.asarray(p, dtype=np.complex128)
    _require_square(p)
    if not is_finite(p):
        return False
    return max_abs(p @ p - p) <= tol and max_abs(dagger(p) - p) <= tol


def validate_state(v, tol: float = TOL) -> bool:
    v = np.asarray(v, dtype=np.complex128)
    return v.ndim == 1 and is_finite(v) and abs(float(np.vdot(v, v).real) - 1.0) <= tol


@dataclass(frozen=True, eq=False)
class MeasurementFamily:
    """Labeled projective measurement ``{label: projector}``.

    Labels are kept in insertion order; that order is also the order in
    which outcomes are enumerated by the simulators.
    """

    outcomes: tuple[tuple[str, np.ndarray], ...]

    def __init__(self, outcomes: Iterable[tuple[str, object]] | dict):
        if isinstance(outcomes, dict):
            outcomes = outcomes.items()
        items = tuple((str(label), as_matrix(p)) for label, p in outcomes)
        object.__setattr__(self, "outcomes", items)

    @classmethod
    def trivial(cls, dim: int, label: str = EPS_LABEL) -> "MeasurementFamily":
        return cls([(label, identity(dim))])

    @classmethod
    def computational(cls, dim: int, groups: Sequence[Sequence[int]], labels: Sequence[str]) -> "MeasurementFamily":
        """Projectors onto spans of computational basis states."""
        out = []
        for label, idx in zip(labels, groups):
            p = np.zeros((dim, dim), dtype=np.complex128)
            for i in idx:
                p[i, i] = 1.0
            out.append((label, p))
        return cls(out)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.outcomes)

    @property
    def dim(self) -> int:
        return self.outcomes[0][1].shape[0]

    def projector(self, label: str) -> np.ndarray:
        for lab, p in self.outcomes:
            if lab == label:
                return p
        raise KeyError(label)

    def is_trivial(self, tol: float = 0.0) -> bool:
        return len(self.outcomes) == 1 and max_abs(self.outcomes[0][1] - identity(self.dim)) <= tol

    def __len__(self) -> int:
        return len(self.outcomes)

    def __iter__(self):
        return iter(self.outcomes)

    def __repr__(self) -> str:
        return f"MeasurementFamily(labels={list(self.labels)}, dim={self.dim})"


def measurement_problems(m: MeasurementFamily, tol: float = TOL) -> list[str]:
    """Return human-readable reasons why ``m`` is not a valid projective measurement."""
    if len(m) == 0:
        return ["empty measurement"]
    dims = {p.shape for _, p in m}
    if len(dims) != 1:
        raise DimensionError(f"projectors of differing shapes {sorted(dims)}")
    (shape,) = dims
    if shape[0] != shape[1]:
        raise DimensionError(f"non-square projector of shape {shape}")
    problems = []
    labels = m.labels
    if len(set(labels)) != len(labels):
        problems.append("duplicate outcome labels")
    for label, p in m:
        if not validate_projector(p, tol):
            problems.append(f"outcome {label!r} is not an orthogonal projector")
    for i, (li, pi) in enumerate(m.outcomes):
        for lj, pj in m.outcomes[i + 1:]:
            if max_abs(pi @ pj) > tol:
                problems.append(f"outcomes {li!r} and {lj!r} are not orthogonal")
    total = sum(p for _, p in m)
    if max_abs(total - identity(shape[0])) > tol:
        problems.append("projectors do not sum to identity")
    return problems


def validate_measurement(m: MeasurementFamily, tol: float = TOL) -> bool:
    return not measurement_problems(m, tol)


def tensor_measurement(m1: MeasurementFamily, m2: MeasurementFamily, sep: str = "|") -> MeasurementFamily:
    """Joint measurement with pair labels ``"c1|c2"`` and tensor-product projectors."""
    return MeasurementFamily(
        [(f"{l1}{sep}{l2}", tensor(p1, p2)) for l1, p1 in m1 for l2, p2 in m2]
    )


def householder_map_to_basis(src, target_index: int) -> np.ndarray:
    """Unitary ``V`` with ``V @ (src / |src|) == e_target``.

    A Householder reflection onto ``phase * e_target`` followed by the
    global phase correction.  ``V`` is real-orthogonal whenever ``src`` is
    real, and Hermitian when additionally ``src[target] >= 0``.
    """
    v = as_vector(src)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ValueError("cannot map the zero vector to a basis state")
    v = v / norm
    dim = v.shape[0]
    pivot = v[target_index]
    phase = pivot / abs(pivot) if abs(pivot) > 0 else 1.0
    u = v - phase * basis(dim, target_index)
    unorm2 = float(np.vdot(u, u).real)
    if unorm2 <= 1e-30:
        out = identity(dim)
    else:
        out = identity(dim) - 2.0 * np.outer(u, np.conj(u)) / unorm2
    out = np.conj(phase) * out
    if np.isrealobj(src) or not np.any(np.asarray(src).imag):
        out = out.real.astype(np.complex128)
    return out


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_measurement(dim: int, n_outcomes: int, rng: np.random.Generator, labels: Sequence[str] | None = None,
                       rotate: bool = True) -> MeasurementFamily:
    """Random projective measurement: a random orthonormal basis split into groups.

    Every group is non-empty, so ``n_outcomes`` must not exceed ``dim``.
    """
    if not 1 <= n_outcomes <= dim:
        raise ValueError("need 1 <= n_outcomes <= dim")
    labels = list(labels) if labels is not None else [f"c{i}" for i in range(n_outcomes)]
    frame = random_unitary(dim, rng) if rotate else identity(dim)
    order = rng.permutation(dim)
    cuts = np.sort(rng.choice(np.arange(1, dim), size=n_outcomes - 1, replace=False)) if n_outcomes > 1 else []
    groups = np.split(order, cuts)
    out = []
    for label, g in zip(labels, groups):
        cols = frame[:, g]
        out.append((label, cols @ dagger(cols)))
    return MeasurementFamily(out)

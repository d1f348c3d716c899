"""Dense operator algebra on small complex Hilbert spaces.

Operators are plain ``numpy.ndarray`` objects of dtype ``complex128``.
Composite spaces use the Kronecker index convention ``(i1, i2) -> i1*d2 + i2``.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

ATOL = 1e-10
EIG_CLAMP = 1e-10
CLUSTER_TOL = 1e-8


class DimensionError(ValueError):
    """Operands act on spaces of incompatible dimension."""


def as_op(x) -> np.ndarray:
    a = np.asarray(x, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("operator has non-finite entries")
    return a


def dag(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def norm(a) -> float:
    """Operator (spectral) norm."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def is_hermitian(a, tol: float = ATOL) -> bool:
    a = np.asarray(a)
    return norm(a - dag(a)) <= tol


def is_unitary(u, tol: float = ATOL) -> bool:
    u = np.asarray(u)
    return norm(dag(u) @ u - np.eye(u.shape[1])) <= tol


def commutator(a, b) -> np.ndarray:
    return a @ b - b @ a


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def tensor_product(a, b, *more) -> np.ndarray:
    """Kronecker product ``a ⊗ b ⊗ ...``."""
    out = np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
    for c in more:
        out = np.kron(out, np.asarray(c, dtype=complex))
    return out


def partial_trace(x, dims: Sequence[int], keep: int = 0) -> np.ndarray:
    """Trace out one factor of a bipartite operator.

    Parameters
    ----------
    x : array_like
        Operator on ``H ⊗ K``.
    dims : (int, int)
        ``(dim_H, dim_K)``.
    keep : {0, 1}
        Which factor survives: 0 keeps ``H`` (traces ``K``), 1 keeps ``K``.
    """
    x = as_op(x)
    dh, dk = (int(d) for d in dims)
    if x.shape[0] != dh * dk:
        raise DimensionError(f"operator of dim {x.shape[0]} is not {dh}x{dk}")
    t = x.reshape(dh, dk, dh, dk)
    if keep == 0:
        return np.einsum("ajbj->ab", t)
    if keep == 1:
        return np.einsum("iaib->ab", t)
    raise ValueError("keep must be 0 or 1")


def _hermitian_eig(p, tol: float) -> tuple[np.ndarray, np.ndarray]:
    p = as_op(p)
    if not is_hermitian(p, tol):
        raise ValueError("operator is not Hermitian")
    return np.linalg.eigh((p + dag(p)) / 2)


def psd_sqrt(p, tol: float = EIG_CLAMP) -> np.ndarray:
    """Principal square root of a positive semidefinite operator.

    Eigenvalues in ``[-tol, 0)`` are clamped to zero; anything more negative
    raises ``ValueError``.
    """
    w, v = _hermitian_eig(p, max(tol, ATOL))
    if w.size and w.min() < -tol:
        raise ValueError(f"operator is not positive semidefinite (eigenvalue {w.min():.3e})")
    w = np.sqrt(np.clip(w, 0.0, None))
    s = (v * w) @ dag(v)
    return (s + dag(s)) / 2


def inv_sqrt_psd(p, cutoff: float = 1e-12) -> np.ndarray:
    """Pseudo-inverse square root, ignoring eigenvalues below ``cutoff``."""
    w, v = _hermitian_eig(p, ATOL)
    inv = np.zeros_like(w)
    mask = w > cutoff
    inv[mask] = 1.0 / np.sqrt(w[mask])
    return (v * inv) @ dag(v)


def _orthonormalize_against(basis: list[np.ndarray], cand: np.ndarray) -> np.ndarray | None:
    # modified Gram-Schmidt, applied twice for full working precision
    for _ in range(2):
        for b in basis:
            cand = cand - np.vdot(b, cand) * b
    n = np.linalg.norm(cand)
    if n < 1e-8:
        return None
    return cand / n


def complete_isometry(v, seed: int = 0, columns: Sequence[int] | None = None,
                      tol: float = ATOL) -> np.ndarray:
    """Extend an isometry to a unitary on its output space.

    The columns of ``v`` are placed at positions ``columns`` of the result
    (default: the first ``in_dim`` columns); the remaining columns are seeded
    random vectors orthonormalized against everything placed so far.
    """
    v = np.asarray(v, dtype=complex)
    if v.ndim != 2 or v.shape[0] < v.shape[1]:
        raise DimensionError(f"isometry must be out_dim x in_dim with out_dim >= in_dim, got {v.shape}")
    out_dim, in_dim = v.shape
    if norm(dag(v) @ v - np.eye(in_dim)) > tol:
        raise ValueError("input is not an isometry")
    if columns is None:
        columns = list(range(in_dim))
    columns = [int(c) for c in columns]
    if len(columns) != in_dim or len(set(columns)) != in_dim or min(columns) < 0 or max(columns) >= out_dim:
        raise ValueError("columns must be distinct valid positions, one per input dimension")

    rng = np.random.default_rng(seed)
    basis = [v[:, j] for j in range(in_dim)]
    extra: list[np.ndarray] = []
    while len(basis) < out_dim:
        cand = rng.standard_normal(out_dim) + 1j * rng.standard_normal(out_dim)
        cand = _orthonormalize_against(basis, cand)
        if cand is not None:
            basis.append(cand)
            extra.append(cand)

    u = np.empty((out_dim, out_dim), dtype=complex)
    free = [c for c in range(out_dim) if c not in set(columns)]
    for j, c in enumerate(columns):
        u[:, c] = v[:, j]
    for c, vec in zip(free, extra):
        u[:, c] = vec
    return u


def cluster_eigenvalues(w: np.ndarray, cluster_tol: float) -> list[list[int]]:
    """Group indices of sorted eigenvalues whose consecutive gaps are within tolerance."""
    groups: list[list[int]] = []
    for i in range(len(w)):
        if groups and w[i] - w[groups[-1][-1]] <= cluster_tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def spectral_pvm(h, cluster_tol: float = CLUSTER_TOL):
    """Spectral decomposition of a Hermitian operator as an ``Observable``."""
    from .model import Observable

    w, v = _hermitian_eig(h, ATOL)
    labels, projs = [], []
    for group in cluster_eigenvalues(w, cluster_tol):
        vecs = v[:, group]
        labels.append(float(np.mean(w[group])))
        projs.append(vecs @ dag(vecs))
    return Observable(labels, projs)


def commutator_trace(x, y, rho) -> complex:
    """``Tr[[x, y] rho]`` evaluated through ``sqrt(rho)``.

    Computes ``Tr[(x s)^† y s - (y s)^† x s]`` with ``s = sqrt(rho)``; for
    Hermitian ``x`` and ``y`` the result is purely imaginary.
    """
    x, y = as_op(x), as_op(y)
    r = getattr(rho, "op", rho)
    s = psd_sqrt(as_op(r))
    if not (x.shape == y.shape == s.shape):
        raise DimensionError("commutator_trace operands have mismatched dimensions")
    xs, ys = x @ s, y @ s
    return complex(np.trace(dag(xs) @ ys - dag(ys) @ xs))

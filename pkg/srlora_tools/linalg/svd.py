# srlora_tools/linalg/svd.py
"""
Thin SVD by one-sided (Hestenes) Jacobi rotations.

The input is reduced to its tall orientation, columns are rotated pairwise
until every pair is orthogonal to ``tolerance`` relative to the column norms,
and the column norms become the singular values. Sign convention: each
singular pair is flipped so that the largest-magnitude entry of the left
vector is positive.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..config import get_config
from ..errors import ConvergenceError, ValidationError
from .matrix import Matrix, ensure_finite, frobenius


@dataclass(frozen=True)
class SvdFactors:
    """``w == u @ diag(s) @ v.T`` with ``d = min(m, n)`` factors."""
    u: Matrix  # m x d
    s: np.ndarray  # d, non-increasing, >= 0
    v: Matrix  # n x d

    @property
    def rank_bound(self) -> int:
        return int(self.s.shape[0])

    def reconstruct(self) -> Matrix:
        return (self.u * self.s) @ self.v.T


def _jacobi_tall(g: Matrix, max_sweeps: int, tolerance: float) -> Tuple[Matrix, Matrix]:
    """Orthogonalize the columns of tall ``g`` in place; return ``(g, v)``."""
    n = g.shape[1]
    v = np.eye(n, dtype=np.float64)
    # Columns at rounding level of the whole matrix are treated as exact zeros.
    negligible = (np.finfo(np.float64).eps * max(frobenius(g), np.finfo(np.float64).tiny)) ** 2

    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                gp = g[:, p]
                gq = g[:, q]
                alpha = float(gp @ gp)
                beta = float(gq @ gq)
                gamma = float(gp @ gq)
                if alpha <= negligible or beta <= negligible:
                    continue
                if abs(gamma) <= tolerance * np.sqrt(alpha * beta):
                    continue
                zeta = (beta - alpha) / (2.0 * gamma)
                t = np.copysign(1.0, zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                new_p = c * gp - s * gq
                new_q = s * gp + c * gq
                g[:, p] = new_p
                g[:, q] = new_q
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
                rotated = True
        if not rotated:
            return g, v

    raise ConvergenceError(
        f"Jacobi SVD did not converge in {max_sweeps} sweeps",
        residual=_off_diagonal_norm(g),
    )


def _off_diagonal_norm(g: Matrix) -> float:
    gram = g.T @ g
    return float(np.linalg.norm(gram - np.diag(np.diag(gram))))


def _complete_basis(basis: Matrix, keep: np.ndarray) -> Matrix:
    """Replace columns of ``basis`` not flagged in ``keep`` with an orthonormal completion."""
    m, d = basis.shape
    missing = int(np.count_nonzero(~keep))
    if missing == 0:
        return basis
    kept = basis[:, keep]
    # QR of [kept | I] spans R^m with the kept columns first.
    q, _ = np.linalg.qr(np.hstack([kept, np.eye(m)]))
    extra = q[:, kept.shape[1]:kept.shape[1] + missing]
    out = basis.copy()
    out[:, ~keep] = extra
    return out


def svd(w: Matrix, max_sweeps: Optional[int] = None, tolerance: Optional[float] = None) -> SvdFactors:
    """Thin SVD of ``w`` by one-sided Jacobi."""
    if w.ndim != 2 or min(w.shape) < 1:
        raise ValidationError(f"svd: expected a non-empty 2-D matrix, got shape {w.shape}")
    ensure_finite(w, "svd input")
    svd_config = get_config().get_svd_config()
    max_sweeps = svd_config["max_sweeps"] if max_sweeps is None else max_sweeps
    tolerance = svd_config["tolerance"] if tolerance is None else tolerance

    transposed = w.shape[0] < w.shape[1]
    tall = np.array(w.T if transposed else w, dtype=np.float64, order="F", copy=True)

    g, right = _jacobi_tall(tall, max_sweeps, tolerance)
    norms = np.linalg.norm(g, axis=0)
    order = np.argsort(-norms, kind="stable")
    norms = norms[order]
    g = g[:, order]
    right = right[:, order]

    negligible = np.finfo(np.float64).eps * max(float(norms[0]) if norms.size else 0.0, 0.0) * max(tall.shape)
    keep = norms > negligible
    left = np.zeros_like(g)
    left[:, keep] = g[:, keep] / norms[keep]
    left = _complete_basis(left, keep)
    s = np.where(keep, norms, 0.0)

    # Sign convention on the left vector of the original orientation.
    u, v = (right, left) if transposed else (left, right)
    pivots = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[pivots, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    u = np.ascontiguousarray(u * signs)
    v = np.ascontiguousarray(v * signs)
    return SvdFactors(u=u, s=np.ascontiguousarray(s), v=v)


def best_rank_k_error(w: Matrix, k: int) -> float:
    """Minimal Frobenius error of any rank-``k`` approximation of ``w``."""
    d = min(w.shape)
    if k < 0 or k > d:
        raise ValidationError(f"best_rank_k_error: k={k} outside [0, {d}]")
    tail = svd(w).s[k:]
    return float(np.sqrt(np.sum(tail * tail)))


def truncate(factors: SvdFactors, k: int) -> Matrix:
    """Rank-``k`` truncated reconstruction."""
    return (factors.u[:, :k] * factors.s[:k]) @ factors.v[:, :k].T

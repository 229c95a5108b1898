"""PCA of window features via cyclic Jacobi eigendecomposition."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidConfig, TooFewSamples

OFF_TOL = 1e-12
MAX_SWEEPS = 100


def jacobi_eigh(A: np.ndarray, tol: float = OFF_TOL, max_sweeps: int = MAX_SWEEPS):
    """Eigen-decompose a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvectors as columns,
    sorted by descending eigenvalue.  Iterates until the off-diagonal
    Frobenius norm drops below ``tol * max(1, ||A||_F)``.
    """
    A = np.array(A, dtype=np.float64)
    n = A.shape[0]
    if A.shape != (n, n):
        raise DimensionMismatch("matrix must be square")
    A = 0.5 * (A + A.T)
    V = np.eye(n)
    limit = tol * max(1.0, float(np.linalg.norm(A)))

    mask = ~np.eye(n, dtype=bool)

    def off(M):
        # sum the off-diagonal squares directly; ||M||^2 - ||diag||^2 cancels badly
        return float(np.linalg.norm(M[mask]))

    for _ in range(max_sweeps):
        if off(A) < limit:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                # rotation angle zeroing A[p, q]
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap, aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                A[p, q] = A[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        if off(A) >= limit:
            raise InvalidConfig("Jacobi iteration did not converge")

    vals = np.diag(A).copy()
    order = np.argsort(-vals, kind="stable")
    return vals[order], V[:, order]


def _fix_signs(components: np.ndarray) -> np.ndarray:
    out = components.copy()
    for row in out:
        k = int(np.argmax(np.abs(row)))
        if row[k] < 0:
            row *= -1.0
    return out


@dataclass(frozen=True, eq=False)
class PcaProjection:
    means: np.ndarray
    components: np.ndarray  # k x d, orthonormal rows
    eigenvalues: np.ndarray

    @property
    def k(self) -> int:
        return self.components.shape[0]


def pca_fit(X, k: int = 3) -> PcaProjection:
    """Top-``k`` principal axes of ``X`` (covariance normalized by n).

    Identical rows give all-zero eigenvalues with the identity axes as
    components.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch("X must be 2-D")
    n, d = X.shape
    if n < 2:
        raise TooFewSamples(f"PCA needs at least 2 rows, got {n}")
    if not 1 <= k <= d:
        raise InvalidConfig(f"k must be in [1, {d}], got {k}")
    means = X.mean(axis=0)
    Xc = X - means
    cov = Xc.T @ Xc / n
    vals, vecs = jacobi_eigh(cov)
    vals = np.maximum(vals, 0.0)
    comps = _fix_signs(vecs[:, :k].T)
    return PcaProjection(means, comps, vals[:k])


def pca_transform(proj: PcaProjection, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != proj.means.shape[0]:
        raise DimensionMismatch(f"projection expects {proj.means.shape[0]} columns, got {X.shape[1]}")
    return (X - proj.means) @ proj.components.T


def format_pca_csv(scores: np.ndarray, labels=None) -> str:
    k = scores.shape[1]
    lines = [",".join([*(f"pc{i + 1}" for i in range(k)), "label"])]
    for i, row in enumerate(scores):
        label = "" if labels is None else str(int(labels[i]))
        lines.append(",".join([*(repr(float(v)) for v in row), label]))
    return "\n".join(lines) + "\n"

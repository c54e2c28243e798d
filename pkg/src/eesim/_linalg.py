"""Small dense linear-algebra helpers shared by the precoding and rate code."""
from typing import NamedTuple

import numpy as np


class Svd(NamedTuple):
    u: np.ndarray  # (P, K)
    s: np.ndarray  # (K,) descending
    vh: np.ndarray  # (K, Q)

    @property
    def v(self):
        return self.vh.conj().T


def svd(a, k=None):
    """Thin SVD with a deterministic phase convention.

    Singular values come out descending. Each right singular vector is
    rotated so its largest-magnitude entry is real and positive; the left
    vector gets the matching rotation so ``u @ diag(s) @ vh`` still equals
    ``a``. With ``k`` larger than ``min(P, Q)`` the factorization is padded
    with zero singular values and completing right vectors.
    """
    a = np.asarray(a, dtype=np.complex128)
    p, q = a.shape
    full = k is not None and k > min(p, q)
    u, s, vh = np.linalg.svd(a, full_matrices=full)
    if full:
        s = np.concatenate([s, np.zeros(q - s.size)])
        if u.shape[1] < q:
            u = np.concatenate([u, np.zeros((p, q - u.shape[1]), dtype=complex)], axis=1)
        else:
            u = u[:, :q]
    idx = np.argmax(np.abs(vh), axis=1)
    pivots = vh[np.arange(vh.shape[0]), idx]
    phase = np.where(np.abs(pivots) > 0, pivots / np.where(pivots == 0, 1, np.abs(pivots)), 1)
    vh = vh * phase.conj()[:, None]
    u = u * phase[None, :]
    if k is not None:
        u, s, vh = u[:, :k], s[:k], vh[:k]
    return Svd(u, s, vh)


def log2det_eye_plus(m):
    """``log2 det(I + m)`` for Hermitian PSD ``m`` via Cholesky."""
    m = np.asarray(m)
    a = np.eye(m.shape[0]) + 0.5 * (m + m.conj().T)
    c = np.linalg.cholesky(a)
    return float(2.0 * np.sum(np.log2(np.abs(np.diag(c)))))


def log2det_pd(a):
    """``log2 det(a)`` for Hermitian positive definite ``a``."""
    a = np.asarray(a)
    c = np.linalg.cholesky(0.5 * (a + a.conj().T))
    return float(2.0 * np.sum(np.log2(np.abs(np.diag(c)))))


def whitening_filter(cov):
    """Eigendecomposition whitening ``L^{-1/2} J^H`` of ``cov = J L J^H``."""
    cov = np.asarray(cov)
    w, j = np.linalg.eigh(0.5 * (cov + cov.conj().T))
    if np.any(w <= 0):
        raise ValueError("covariance is not positive definite")
    return (1.0 / np.sqrt(w))[:, None] * j.conj().T

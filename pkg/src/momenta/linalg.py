"""Subspace arithmetic with a single relative SVD cutoff.

Subspaces are represented by matrices whose columns span them. Every
geometric test in the package reduces to a rank statement made here.

The cutoff is relative to the largest singular value, or to ``scale`` when
given; pass the norm of the map that produced ``A`` so that an image made
only of round-off is not promoted to a nonzero subspace.
"""

import numpy as np

RTOL = 1e-8


def _as2d(A, n=None):
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    if A.size == 0 and n is not None:
        return np.zeros((n, 0))
    return A


def _ref(s, scale):
    return s[0] if scale is None else max(s[0], scale)


def rank(A, rtol=RTOL, scale=None):
    A = _as2d(A)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * _ref(s, scale)))


def orth(A, rtol=RTOL, scale=None):
    """Orthonormal basis (columns) of the column space of ``A``."""
    A = _as2d(A)
    n = A.shape[0]
    if A.size == 0:
        return np.zeros((n, 0))
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((n, 0))
    r = int(np.sum(s > rtol * _ref(s, scale)))
    return U[:, :r]


def null_space(A, rtol=RTOL, scale=None):
    """Orthonormal basis (columns) of the kernel of ``A``."""
    A = _as2d(A)
    m, n = A.shape
    if m == 0 or A.size == 0 or not np.any(A):
        return np.eye(n)
    _, s, Vt = np.linalg.svd(A, full_matrices=True)
    r = int(np.sum(s > rtol * _ref(s, scale)))
    return Vt[r:].T.copy()


def annihilator(S, n=None, rtol=RTOL):
    """Covectors (columns) vanishing on span(S)."""
    S = _as2d(S, n)
    n = S.shape[0]
    if S.shape[1] == 0:
        return np.eye(n)
    return null_space(orth(S, rtol).T, rtol)


def subspace_sum(*spaces, rtol=RTOL):
    n = _as2d(spaces[0]).shape[0]
    blocks = [orth(_as2d(S, n), rtol) for S in spaces]
    return orth(np.hstack(blocks), rtol) if blocks else np.zeros((n, 0))


def intersection(A, B, rtol=RTOL):
    """Basis of span(A) ∩ span(B)."""
    A = orth(A, rtol)
    B = orth(B, rtol)
    n = A.shape[0]
    if A.shape[1] == 0 or B.shape[1] == 0:
        return np.zeros((n, 0))
    K = null_space(np.hstack([A, -B]), rtol)
    if K.shape[1] == 0:
        return np.zeros((n, 0))
    return orth(A @ K[: A.shape[1]], rtol)


def preimage(M, S, rtol=RTOL):
    """Basis of {x : M x ∈ span(S)}."""
    M = _as2d(M)
    Q = orth(S, rtol) if _as2d(S).size else np.zeros((M.shape[0], 0))
    P = np.eye(M.shape[0]) - Q @ Q.T
    R = P @ M
    if not np.any(np.abs(R) > 0):
        return np.eye(M.shape[1])
    # scale the cutoff by M itself so that an exactly-contained image is not
    # promoted to rank by round-off
    s_ref = np.linalg.norm(M, 2)
    _, s, Vt = np.linalg.svd(R, full_matrices=True)
    r = int(np.sum(s > rtol * max(s_ref, 1e-300)))
    return Vt[r:].T.copy()


def contains(big, small, rtol=RTOL):
    """True iff span(small) ⊆ span(big)."""
    big = orth(big, rtol)
    small = orth(small, rtol)
    if small.shape[1] == 0:
        return True
    if big.shape[1] == 0:
        return False
    return rank(np.hstack([big, small]), rtol) == big.shape[1]


def containment_residual(big, small, rtol=RTOL):
    """Largest norm of the part of a unit vector of span(small) outside span(big)."""
    big = orth(big, rtol)
    small = orth(small, rtol)
    if small.shape[1] == 0:
        return 0.0
    if big.shape[1] == 0:
        return 1.0
    rest = small - big @ (big.T @ small)
    return float(np.linalg.norm(rest, 2))


def dim(S, rtol=RTOL):
    return orth(S, rtol).shape[1]

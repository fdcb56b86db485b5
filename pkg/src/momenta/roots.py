"""Root decompositions of compact Lie algebras and the face structure of the
fundamental Weyl chamber.

Elements of t are coefficient vectors in g; covectors on t are stored by
their values on ``cartan_basis``. Roots are the real functionals alpha/i.
The chamber pairing uses the positive-definite form that is minus the
Killing form on t' = t ∩ [g, g], Euclidean on the centre basis, with the two
summands orthogonal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from . import linalg
from .errors import (
    CartanError,
    ChamberError,
    ClassificationError,
    DecompositionError,
    PreconditionError,
    SubalgebraError,
)

CLUSTER_TOL = 1e-8
CHAMBER_TOL = 1e-10
WALL_TOL = 1e-8
SIMPLE_SEED = 42
MAX_RESEED = 10


def default_cartan_basis(alg):
    """Diagonal basis elements (so(3): rotations about the last axis)."""
    if alg.kind == "so":
        return np.eye(alg.dim)[-1:]
    rows = []
    for i, E in enumerate(alg.matrix_rep):
        if np.allclose(E, np.diag(np.diag(E))):
            rows.append(np.eye(alg.dim)[i])
    if alg.kind == "product":
        rows = []
        offset = 0
        for f in alg.factors:
            for r in default_cartan_basis(f):
                v = np.zeros(alg.dim)
                v[offset : offset + f.dim] = r
                rows.append(v)
            offset += f.dim
    return np.array(rows).reshape(-1, alg.dim)


def center_basis(alg):
    """Rows spanning z(g) = {xi : ad xi = 0}."""
    # columns are vec(ad e_i), so M @ x = vec(ad x)
    M = np.stack([alg.ad(alg.basis(i)).ravel() for i in range(alg.dim)], axis=1)
    return linalg.null_space(M).T if np.any(M) else np.eye(alg.dim)


def commutator_span(alg, rows):
    brackets = [alg.bracket(a, b) for a, b in combinations(rows, 2)]
    if not brackets or not np.any(np.abs(brackets) > 1e-14):
        return np.zeros((0, alg.dim))
    return linalg.orth(np.array(brackets).T).T


@dataclass
class RootSystemData:
    algebra: object
    cartan_basis: np.ndarray
    center_basis: np.ndarray
    roots: np.ndarray
    root_spaces: list
    gram: np.ndarray  # positive-definite form on t in cartan coordinates
    seed: int = SIMPLE_SEED
    _simple: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def rank(self):
        return self.cartan_basis.shape[0]

    @property
    def dual_gram(self):
        return np.linalg.inv(self.gram)

    def pair(self, lam, alpha):
        return float(np.asarray(lam) @ self.dual_gram @ np.asarray(alpha))

    @property
    def simple(self):
        if self._simple is None:
            self._simple = simple_roots(self)
        return self._simple


def root_decomposition(alg, cartan=None, rng_seed=0):
    """Simultaneous eigendecomposition of ad t on the complexification."""
    C = default_cartan_basis(alg) if cartan is None else np.atleast_2d(np.asarray(cartan, dtype=float))
    r = C.shape[0]
    for a in range(r):
        for b in range(a + 1, r):
            if np.max(np.abs(alg.bracket(C[a], C[b]))) > 1e-10:
                raise CartanError("cartan basis elements do not commute")
    ads = [alg.ad(c) for c in C]
    M = np.vstack(ads)
    cent = linalg.null_space(M) if np.any(M) else np.eye(alg.dim)
    if cent.shape[1] != r:
        raise CartanError(f"cartan basis is not maximal abelian (centralizer dim {cent.shape[1]} > {r})")
    rng = np.random.default_rng(rng_seed)
    for _ in range(MAX_RESEED):
        c = rng.standard_normal(r)
        X = sum(ci * A for ci, A in zip(c, ads)) if r else np.zeros((alg.dim, alg.dim))
        _, V = np.linalg.eig(X)
        roots, spaces, zero = [], [], 0
        ok = True
        for k in range(V.shape[1]):
            v = V[:, k]
            vals = np.array([np.vdot(v, A @ v) / np.vdot(v, v) for A in ads])
            if any(np.linalg.norm(A @ v - lam * v) > CLUSTER_TOL * max(1.0, np.linalg.norm(A)) for A, lam in zip(ads, vals)):
                ok = False
                break
            a = vals.imag
            if np.linalg.norm(vals) < CLUSTER_TOL:
                zero += 1
                continue
            roots.append(a)
            spaces.append(v / np.linalg.norm(v))
        if ok and zero == r:
            break
    else:
        raise DecompositionError("could not separate root spaces within clustering tolerance")
    roots = np.array(roots).reshape(-1, r)
    # merge clusters, keeping one representative per distinct root
    uniq, uspaces = [], []
    for a, v in zip(roots, spaces):
        for j, b in enumerate(uniq):
            if np.linalg.norm(a - b) < 1e-6:
                uspaces[j].append(v)
                break
        else:
            uniq.append(a)
            uspaces.append([v])
    roots = np.array(uniq).reshape(-1, r)
    order = np.lexsort(roots.T[::-1]) if len(roots) else np.array([], dtype=int)
    roots = roots[order]
    uspaces = [uspaces[i] for i in order]
    z = center_basis(alg)
    gram = _chamber_gram(alg, C, z)
    return RootSystemData(
        alg, C, z, roots,
        [np.concatenate([np.array(vs).real.ravel(), np.array(vs).imag.ravel()]) for vs in uspaces],
        gram,
    )


def _chamber_gram(alg, C, z):
    """-Killing on t' plus the Euclidean form on z, with t' ⊥ z, in cartan coordinates."""
    r = C.shape[0]
    Cp = np.linalg.pinv(C.T)  # g-coefficients -> cartan coordinates (on t)
    zc = (Cp @ z.T).T if z.size else np.zeros((0, r))
    if z.size and np.max(np.abs(zc @ C - z)) > 1e-9:
        raise CartanError("centre is not contained in the cartan subalgebra")
    der = commutator_span(alg, np.eye(alg.dim))
    tprime = linalg.intersection(C.T, der.T) if der.size else np.zeros((alg.dim, 0))
    tpc = (Cp @ tprime).T if tprime.size else np.zeros((0, r))
    basis = np.vstack([tpc, zc])
    if basis.shape[0] != r:
        raise CartanError("t does not split as t' plus centre")
    K = alg.killing_matrix
    Kt = -(tpc @ C) @ K @ (tpc @ C).T if tpc.size else np.zeros((0, 0))
    # centre basis taken orthonormal
    block = np.zeros((r, r))
    k = tpc.shape[0]
    block[:k, :k] = Kt
    if zc.shape[0]:
        zo = np.eye(zc.shape[0])
        block[k:, k:] = zo
    Binv = np.linalg.inv(basis)
    # rows of ``basis`` are cartan coordinates of the split basis
    return Binv @ block @ Binv.T


def decomposition_residuals(rsd):
    """Completeness count, ± pairing, centre annihilation, root orthogonality."""
    alg = rsd.algebra
    d = alg.dim
    dims = sum(len(s) // (2 * d) for s in rsd.root_spaces)
    complete = rsd.rank + dims == d
    pm = all(any(np.linalg.norm(a + b) < 1e-8 for b in rsd.roots) for a in rsd.roots)
    nonzero = all(np.linalg.norm(a) > 1e-8 for a in rsd.roots)
    Cp = np.linalg.pinv(rsd.cartan_basis.T)
    zc = (Cp @ rsd.center_basis.T).T if rsd.center_basis.size else np.zeros((0, rsd.rank))
    center_res = float(np.max(np.abs(rsd.roots @ zc.T))) if zc.size and rsd.roots.size else 0.0
    K = alg.killing_matrix
    orth = 0.0
    for s in rsd.root_spaces:
        n = len(s) // 2
        V = (s[:n] + 1j * s[n:]).reshape(-1, d)
        orth = max(orth, float(np.max(np.abs(rsd.cartan_basis @ K @ V.T))) if V.size else 0.0)
    return {
        "complete": bool(complete),
        "plus_minus": bool(pm),
        "nonzero": bool(nonzero),
        "center_residual": center_res,
        "orthogonality_residual": orth,
    }


def _expand(S, a):
    c, *_ = np.linalg.lstsq(S.T, a, rcond=None)
    return c, float(np.linalg.norm(S.T @ c - a))


def simple_roots(rsd, seed=None):
    """Simple roots for a pseudo-random positivity functional (rows)."""
    roots = rsd.roots
    r = rsd.rank
    if len(roots) == 0:
        return np.zeros((0, r))
    rng = np.random.default_rng(SIMPLE_SEED if seed is None else seed)
    for _ in range(MAX_RESEED):
        h = rng.standard_normal(r)
        vals = roots @ h
        if np.min(np.abs(vals)) > 1e-8:
            break
    else:
        raise DecompositionError("no generic positivity functional found")
    pos = roots[vals > 0]
    simple = []
    for a in pos:
        decomposable = any(
            np.linalg.norm(a - b - c) < 1e-8 for i, b in enumerate(pos) for c in pos[i:]
        )
        if not decomposable:
            simple.append(a)
    S = np.array(simple)
    for a in roots:
        c, res = _expand(S, a)
        if res > 1e-8 or not (np.all(c > -1e-8) or np.all(c < 1e-8)):
            raise DecompositionError("a root does not expand over the simple roots with uniform sign")
    return S


def root_coefficients(rsd, a):
    c, _ = _expand(rsd.simple, a)
    return np.round(c, 8)


def chamber_membership(rsd, lam):
    S = rsd.simple
    if len(S) == 0:
        return True, np.inf
    pairs = S @ rsd.dual_gram @ np.asarray(lam, dtype=float)
    margin = float(np.min(pairs))
    return bool(margin >= -CHAMBER_TOL), margin


@dataclass(frozen=True)
class Face:
    root_system: RootSystemData = field(compare=False, hash=False)
    zero_set: frozenset = frozenset()

    def __repr__(self):
        return f"Face({sorted(self.zero_set)})"

    @property
    def key(self):
        return tuple(sorted(self.zero_set))


def all_faces(rsd):
    n = len(rsd.simple)
    return [Face(rsd, frozenset(c)) for k in range(n + 1) for c in combinations(range(n), k)]


def face_of(rsd, lam):
    ok, margin = chamber_membership(rsd, lam)
    if not ok:
        raise ChamberError(f"lambda lies outside the fundamental chamber (margin {margin:.3e})")
    S = rsd.simple
    pairs = S @ rsd.dual_gram @ np.asarray(lam, dtype=float) if len(S) else np.zeros(0)
    return Face(rsd, frozenset(int(i) for i in np.flatnonzero(np.abs(pairs) < WALL_TOL)))


def face_leq(sigma, tau):
    """sigma ≤ tau iff sigma lies in the closure of tau iff Σ0(tau) ⊆ Σ0(sigma)."""
    if sigma.root_system is not tau.root_system:
        raise PreconditionError("faces belong to different root systems")
    return tau.zero_set <= sigma.zero_set


def fundamental_weights(rsd):
    """Covectors w_i with <w_i, sigma_j> = delta_ij, inside the span of the roots."""
    S = rsd.simple
    if len(S) == 0:
        return np.zeros((0, rsd.rank))
    G = S @ rsd.dual_gram @ S.T
    return np.linalg.solve(G, S)


def sample_face_point(rsd, face, rng, center_scale=0.0):
    """A point in the relative interior of ``face``."""
    W = fundamental_weights(rsd)
    lam = np.zeros(rsd.rank)
    for i in range(len(W)):
        if i not in face.zero_set:
            lam += rng.uniform(0.5, 2.0) * W[i]
    if center_scale and rsd.center_basis.size:
        Cp = np.linalg.pinv(rsd.cartan_basis.T)
        zc = (Cp @ rsd.center_basis.T).T
        # covectors vanishing on t': gram-dual of the centre directions
        lam += center_scale * (rng.standard_normal(zc.shape[0]) @ (zc @ rsd.gram))
    return lam


def _root_real_complement(rsd):
    d = rsd.algebra.dim
    cols = []
    for s in rsd.root_spaces:
        n = len(s) // 2
        V = (s[:n] + 1j * s[n:]).reshape(-1, d)
        cols.extend([v.real for v in V] + [v.imag for v in V])
    return linalg.orth(np.array(cols).T) if cols else np.zeros((d, 0))


def extend_covector(rsd, lam):
    """lam on t extended by zero on the real span of the root spaces, as an element of g*."""
    d = rsd.algebra.dim
    B = np.hstack([rsd.cartan_basis.T, _root_real_complement(rsd)])
    if B.shape[1] != d:
        raise DecompositionError("t and the root spaces do not span g")
    coords = np.linalg.inv(B)[: rsd.rank]
    return coords.T @ np.asarray(lam, dtype=float)


def delta_zero(rsd, face):
    """Roots supported on the zero set of the face."""
    out = []
    for a in rsd.roots:
        c = root_coefficients(rsd, a)
        if all(abs(c[i]) < 1e-8 for i in range(len(c)) if i not in face.zero_set):
            out.append(a)
    return np.array(out).reshape(-1, rsd.rank)


def numeric_isotropy(rsd, lam):
    """Rows spanning {xi : ad*_xi lam~ = 0} for the extended covector."""
    alg = rsd.algebra
    a = extend_covector(rsd, lam)
    A = np.stack([alg.coadjoint_generator(alg.basis(i), a) for i in range(alg.dim)], axis=1)
    return linalg.null_space(A).T if np.any(np.abs(A) > 1e-14) else np.eye(alg.dim)


def isotropy_algebra_of_face(rsd, face, rng=None, samples=5):
    """Dimension and basis (rows) of g_sigma, cross-validated numerically."""
    rng = rng or np.random.default_rng(SIMPLE_SEED)
    dim = rsd.rank + len(delta_zero(rsd, face))
    basis = None
    for _ in range(samples):
        lam = sample_face_point(rsd, face, rng)
        iso = numeric_isotropy(rsd, lam)
        if iso.shape[0] != dim:
            raise DecompositionError(
                f"isotropy dimension mismatch: combinatorial {dim}, numerical {iso.shape[0]}"
            )
        basis = iso if basis is None else basis
    return dim, basis


def check_subalgebra(alg, rows, tol=1e-10):
    rows = np.atleast_2d(rows)
    Q = linalg.orth(rows.T)
    worst = 0.0
    for a, b in combinations(rows, 2):
        c = alg.bracket(a, b)
        worst = max(worst, float(np.linalg.norm(c - Q @ (Q.T @ c))))
    if worst > tol:
        raise SubalgebraError(f"span is not closed under the bracket (residual {worst:.3e})")
    return worst


def commutator_subalgebra(alg, rows):
    """Basis (rows) of [h, h] for the subalgebra h spanned by ``rows``."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    check_subalgebra(alg, rows)
    D = commutator_span(alg, rows)
    while D.shape[0]:
        more = [alg.bracket(a, b) for a in rows for b in D]
        E = linalg.orth(np.vstack([D, np.array(more)]).T).T
        if E.shape[0] == D.shape[0]:
            break
        D = E
    return D


def project_to_t(rsd, mu_value):
    """Restriction of a g* value to t, in cartan coordinates."""
    return rsd.cartan_basis @ np.asarray(mu_value, dtype=float)


def classify_moment_samples(rsd, mm, points):
    """Partition points by the face of mu(p) restricted to t."""
    lams = [project_to_t(rsd, mm(p)) for p in points]
    bad = [i for i, lam in enumerate(lams) if not chamber_membership(rsd, lam)[0]]
    if bad:
        raise ClassificationError(f"{len(bad)} moment values lie outside the chamber", bad)
    buckets = {}
    for p, lam in zip(points, lams):
        f = face_of(rsd, lam)
        buckets.setdefault(f.key, []).append(p)
    report = {}
    for key, pts in buckets.items():
        face = Face(rsd, frozenset(key))
        _, basis = isotropy_algebra_of_face(rsd, face)
        report[key] = {"points": pts, "commutator_dim": commutator_subalgebra(rsd.algebra, basis).shape[0]}
    return report


def in_natural_slice(rsd, sigma, lam):
    """lam (on t) lies in the union of faces tau with sigma ≤ tau."""
    ok, _ = chamber_membership(rsd, lam)
    return ok and face_leq(sigma, face_of(rsd, lam))


def summary(rsd):
    """Plain data description used by the command line."""
    faces = []
    for f in all_faces(rsd):
        dim, basis = isotropy_algebra_of_face(rsd, f)
        faces.append(
            {
                "zero_set": list(f.key),
                "isotropy_dim": int(dim),
                "commutator_dim": int(commutator_subalgebra(rsd.algebra, basis).shape[0]),
            }
        )
    return {
        "algebra": rsd.algebra.name,
        "rank": int(rsd.rank),
        "center_dim": int(rsd.center_basis.shape[0]),
        "roots": rsd.roots.tolist(),
        "simple_roots": rsd.simple.tolist(),
        "faces": faces,
    }

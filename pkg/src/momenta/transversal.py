"""Poisson submanifolds, Poisson transversals, and cross sections.

All pointwise linear algebra happens in an orthonormal frame ``F`` of T_pM
(columns, ambient coordinates). In that frame the bivector is
``P = F.T @ B @ F`` and the sharp map sends covector coordinates ``l`` to
``P.T @ l``. A submanifold N is cut out of M by extra constraints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import linalg
from .errors import (
    ChartError,
    ConsistencyError,
    ConstraintViolation,
    CrossSectionSetupError,
    DimensionError,
    PreconditionError,
)
from .phase_space import PhaseSpace, ScalarField, fd_jacobian

NEWTON_MAX_ITER = 50
LOCAL_RADIUS = 0.05
LOCAL_SAMPLES = 20


def frame(space, p):
    """Orthonormal frame of T_pM and the bivector in that frame."""
    F = linalg.orth(space.tangent_basis(p))
    return F, F.T @ space.bivector(p) @ F


@dataclass
class Submanifold:
    """N = {p in M : c(p) = 0} with ``constraints`` mapping ambient points to R^k."""

    space: PhaseSpace
    constraints: Callable
    codim: int
    jacobian: Optional[Callable] = None
    name: str = ""

    @classmethod
    def from_fields(cls, space, fields: Sequence[ScalarField], name=""):
        fields = list(fields)
        return cls(
            space,
            lambda x: np.array([f(x) for f in fields]),
            len(fields),
            lambda x: np.array([f.gradient(x) for f in fields]).reshape(len(fields), -1),
            name,
        )

    @classmethod
    def whole(cls, space):
        return cls(space, lambda x: np.zeros(0), 0, lambda x: np.zeros((0, space.ambient_dim)), "M")

    @classmethod
    def affine(cls, space, rows, values, name=""):
        """{x : rows @ x = values} for a constant matrix ``rows``."""
        A = np.atleast_2d(np.asarray(rows, dtype=float))
        v = np.asarray(values, dtype=float)
        return cls(space, lambda x: A @ x - v, A.shape[0], lambda x: A, name)

    def residual(self, p):
        c = np.asarray(self.constraints(p), dtype=float)
        r = float(np.max(np.abs(c))) if c.size else 0.0
        return max(r, self.space.constraint_residual(p))

    def check_point(self, p, tol=1e-9):
        p = self.space.check_point(p)
        r = self.residual(p)
        if r > tol:
            raise ConstraintViolation(f"point is off N by {r:.3e}")
        return p

    def jac(self, p):
        if self.codim == 0:
            return np.zeros((0, self.space.ambient_dim))
        if self.jacobian is not None:
            return np.atleast_2d(np.asarray(self.jacobian(p), dtype=float))
        return np.atleast_2d(fd_jacobian(self.constraints, p))

    def project(self, x, max_iter=NEWTON_MAX_ITER, tol=1e-12):
        """Damped Gauss-Newton projection of an ambient point onto N."""
        x = self.space.project(np.asarray(x, dtype=float))
        for _ in range(max_iter):
            c = np.concatenate([np.asarray(self.constraints(x), dtype=float), self.space.constraints(x)])
            if c.size == 0 or np.max(np.abs(c)) < tol:
                return x
            J = np.vstack([self.jac(x), self.space.constraint_jacobian(x)])
            step = np.linalg.lstsq(J, -c, rcond=None)[0]
            t = 1.0
            base = np.linalg.norm(c)
            while t > 1e-4:
                y = self.space.project(x + t * step)
                cy = np.concatenate([np.asarray(self.constraints(y), dtype=float), self.space.constraints(y)])
                if np.linalg.norm(cy) < base:
                    break
                t *= 0.5
            x = y
        c = np.asarray(self.constraints(x), dtype=float)
        if c.size and np.max(np.abs(c)) > 1e-9:
            raise ChartError(f"projection onto N did not converge (residual {np.max(np.abs(c)):.3e})")
        return x


def tangent_and_annihilator(N, p):
    """Frame coordinates of TN (columns) and TN° (columns), plus the frame."""
    p = N.check_point(p)
    F, _ = frame(N.space, p)
    D = N.jac(p) @ F
    if N.codim and linalg.rank(D) != N.codim:
        raise DimensionError(f"constraint Jacobian has rank {linalg.rank(D)} < codim {N.codim}")
    TN = linalg.null_space(D) if N.codim else np.eye(F.shape[1])
    TNo = linalg.orth(D.T) if N.codim else np.zeros((F.shape[1], 0))
    return TN, TNo, F


def is_poisson_submanifold(N, samples, tol=1e-8):
    out = []
    for p in samples:
        TN, TNo, F = tangent_and_annihilator(N, p)
        P = F.T @ N.space.bivector(p) @ F
        img = pi_image(P, TNo)
        out.append(linalg.containment_residual(TN, img) < tol)
    return out


@dataclass
class TransversalReport:
    point: np.ndarray
    is_submanifold_ok: bool
    is_poisson_sub: bool
    is_transversal: bool
    ranks: dict
    characterizations: list
    induced_bivector: Optional[np.ndarray] = None

    def to_dict(self):
        d = {
            "point": [float(v) for v in self.point],
            "submanifold_ok": self.is_submanifold_ok,
            "poisson_submanifold": self.is_poisson_sub,
            "transversal": self.is_transversal,
            "ranks": dict(self.ranks),
        }
        if self.induced_bivector is not None:
            d["induced_bivector"] = [[float(v) for v in row] for row in self.induced_bivector]
        return d


def pi_image(P, covectors):
    """Orthonormal basis of Pi(span covectors), with the cutoff scaled by |Pi|."""
    if covectors.shape[1] == 0:
        return np.zeros((P.shape[0], 0))
    return linalg.orth(P.T @ covectors, scale=np.linalg.norm(P, 2))


def characterizations(P, TN, TNo):
    """The four equivalent transversality tests, as booleans.

    (1) TN + Pi(TN°) = TM, (2) TN ⊕ Pi(TN°) = TM,
    (3) TN° ∩ Pi^-1(TN) = 0, (4) T*M = TN° ⊕ Pi^-1(TN).
    """
    m = P.shape[0]
    S = pi_image(P, TNo)
    n = linalg.dim(TN)
    c1 = linalg.rank(np.hstack([TN, S])) == m
    c2 = n + S.shape[1] == m and linalg.intersection(TN, S).shape[1] == 0
    K = linalg.preimage(P.T, TN)
    c3 = linalg.intersection(TNo, K).shape[1] == 0 if TNo.shape[1] else True
    c4 = TNo.shape[1] + K.shape[1] == m and linalg.rank(np.hstack([TNo, K])) == m
    return [bool(c1), bool(c2), bool(c3), bool(c4)]


def induced_bivector_frame(P, TN, TNo):
    """Pi_N in the basis TN, from the splitting T*M = TN° ⊕ Pi^-1(TN).

    The covectors of Pi^-1(TN) restrict isomorphically onto T*N, so the dual
    basis of TN is found inside Pi^-1(TN) and paired through Pi.
    """
    K = linalg.preimage(P.T, TN)
    L = K @ np.linalg.inv(TN.T @ K)  # L.T @ TN = I
    return L.T @ P @ L, L


def splitting_residual(P, TN, TNo):
    """Reassemble Pi from Pi_N and V and return the largest discrepancy."""
    PN, _ = induced_bivector_frame(P, TN, TNo)
    basis = np.hstack([TNo, linalg.preimage(P.T, TN)])
    coords = np.linalg.inv(basis)  # column j: split coordinates of the j-th unit covector
    k = TNo.shape[1]
    # unit covectors split as l2 + l1 with l2 in TN° and l1 in Pi^-1(TN)
    l2 = basis[:, :k] @ coords[:k]
    l1 = basis[:, k:] @ coords[k:]
    # Pi_N only sees the restriction of l1 to TN; V is Pi on TN°
    rebuilt = (TN.T @ l1).T @ PN @ (TN.T @ l1) + l2.T @ P @ l2
    return float(np.max(np.abs(rebuilt - P)))


def is_poisson_transversal(N, samples, with_bivector=True):
    reports = []
    for p in samples:
        p = np.asarray(p, dtype=float)
        try:
            TN, TNo, F = tangent_and_annihilator(N, p)
            ok = True
        except DimensionError:
            reports.append(TransversalReport(p, False, False, False, {}, []))
            continue
        P = F.T @ N.space.bivector(p) @ F
        S = pi_image(P, TNo)
        chars = characterizations(P, TN, TNo)
        if len(set(chars)) != 1:
            raise ConsistencyError(f"transversality characterizations disagree: {chars}")
        img_ok = linalg.containment_residual(TN, S) < 1e-8
        ranks = {
            "dim_TN": int(TN.shape[1]),
            "dim_Pi_TNo": int(S.shape[1]),
            "dim_sum": linalg.rank(np.hstack([TN, S])),
        }
        PN = None
        if chars[0] and with_bivector:
            PN, _ = induced_bivector_frame(P, TN, TNo)
        reports.append(TransversalReport(p, ok, bool(img_ok), chars[0], ranks, chars, PN))
    return reports


def induced_bivector(N, p):
    """Pi_N at p in the orthonormal basis of TN (frame coordinates) and that basis."""
    TN, TNo, F = tangent_and_annihilator(N, p)
    P = F.T @ N.space.bivector(p) @ F
    if not characterizations(P, TN, TNo)[0]:
        raise PreconditionError("N is not a Poisson transversal at this point")
    PN, _ = induced_bivector_frame(P, TN, TNo)
    return PN, F @ TN


# ------------------------------------------------------------ induced Jacobi


class GraphChart:
    """Graph coordinates over T_pN: y -> p + E y + W z(y) with c(...) = 0.

    ``E`` spans TN and ``W`` its ambient orthogonal complement, so z(y) solves a
    square system (constraints of N and of M) by damped Newton iteration.
    """

    def __init__(self, N, p, max_iter=NEWTON_MAX_ITER):
        TN, _, F = tangent_and_annihilator(N, p)
        self.N = N
        self.base = np.asarray(p, dtype=float)
        self.E = F @ TN
        self.W = linalg.null_space(self.E.T)
        self.max_iter = max_iter
        self._z0 = np.zeros(self.W.shape[1])

    @classmethod
    def at(cls, N, p):
        return cls(N, p)

    @property
    def dim(self):
        return self.E.shape[1]

    def _c(self, x):
        return np.concatenate([np.asarray(self.N.constraints(x), dtype=float), self.N.space.constraints(x)])

    def _J(self, x):
        return np.vstack([self.N.jac(x), self.N.space.constraint_jacobian(x)])

    def __call__(self, y):
        x0 = self.base + self.E @ np.asarray(y, dtype=float)
        z = self._z0.copy()
        if z.size == 0:
            return x0
        x = x0 + self.W @ z
        c = self._c(x)
        for _ in range(self.max_iter):
            if np.max(np.abs(c)) < 1e-15:
                break
            dz = np.linalg.solve(self._J(x) @ self.W, -c)
            t = 1.0
            while True:
                xn = x0 + self.W @ (z + t * dz)
                cn = self._c(xn)
                if np.linalg.norm(cn) < np.linalg.norm(c) or t < 1e-3:
                    break
                t *= 0.5
            if np.linalg.norm(cn) >= np.linalg.norm(c):
                break  # stalled at round-off
            z, x, c = z + t * dz, xn, cn
        if np.max(np.abs(c)) > 1e-10:
            raise ChartError(f"graph chart solve did not converge (residual {np.max(np.abs(c)):.3e})")
        return x


def induced_bracket_local(N, chart, f, g, y, h=1e-5):
    """{f, g}_N at chart(y) for functions f, g of the chart coordinates."""
    p = chart(y)
    PN, TNamb = induced_bivector(N, p)
    # d(chart) maps coordinate directions into TN; express them in the TNamb basis
    Dphi = fd_jacobian(chart, y, h)
    C = TNamb.T @ Dphi  # TN-coords of chart directions
    Ci = np.linalg.inv(C)
    df = _grad(f, y, h) @ Ci
    dg = _grad(g, y, h) @ Ci
    return float(df @ PN @ dg)


def _grad(f, y, h):
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    for i in range(y.size):
        e = np.zeros_like(y)
        e[i] = h
        out[i] = (f(y + e) - f(y - e)) / (2 * h)
    return out


def check_induced_jacobi(N, p, f, g, hfun, chart=None, h_outer=1e-4, h_inner=1e-4):
    """Cyclic Jacobi sum of the induced bracket in a graph chart around p.

    ``f, g, hfun`` are functions of the chart coordinates.
    """
    N.check_point(p, tol=1e-8)
    chart = chart or GraphChart.at(N, p)
    y0 = np.zeros(chart.dim)

    def br(a, b, step):
        return lambda y: induced_bracket_local(N, chart, a, b, y, step)

    total = 0.0
    for a, b, c in ((f, g, hfun), (g, hfun, f), (hfun, f, g)):
        total += induced_bracket_local(N, chart, a, br(b, c, h_inner), y0, h_outer)
    return abs(total)


# -------------------------------------------------------------- cross sections


@dataclass
class Slice:
    """Z ⊆ g* given by constraints with an explicit tangent basis at lambda."""

    constraints: Callable
    tangent: np.ndarray
    codim: int
    name: str = ""

    @classmethod
    def radial_line(cls, lam):
        lam = np.asarray(lam, dtype=float)
        u = lam / np.linalg.norm(lam)
        P = linalg.null_space(u[None, :]).T
        return cls(lambda a: P @ a, u[:, None], P.shape[0], "radial")

    @classmethod
    def whole(cls, d):
        return cls(lambda a: np.zeros(0), np.eye(d), 0, "g*")

    @classmethod
    def affine(cls, lam, tangent):
        """lam + span(tangent)."""
        T = linalg.orth(tangent)
        P = linalg.annihilator(T).T
        lam = np.asarray(lam, dtype=float)
        return cls(lambda a: P @ (a - lam), T, P.shape[0], "affine")


def _perfect_transversality(mm, Z, lam):
    alg = mm.action.algebra
    orbit = np.stack([alg.coadjoint_generator(alg.basis(i), lam) for i in range(alg.dim)], axis=1)
    tz = linalg.rank(Z.tangent) if Z.tangent.size else 0
    to = linalg.rank(orbit) if np.any(orbit) else 0
    total = linalg.rank(np.hstack([Z.tangent, orbit])) if (tz or to) else 0
    if not (total == alg.dim and tz + to == alg.dim):
        raise CrossSectionSetupError(
            f"slice is not perfectly transverse to the orbit (dims {tz} + {to}, span {total})"
        )


def preimage_submanifold(mm, Z):
    return Submanifold(mm.action.space, lambda x: Z.constraints(mm(x)), Z.codim, None, "mu^-1(Z)")


def local_samples(N, p, rng, count=LOCAL_SAMPLES, radius=LOCAL_RADIUS):
    """Points of N within ``radius`` of p, by projecting random tangent offsets."""
    TN, _, F = tangent_and_annihilator(N, p)
    E = F @ TN
    pts = []
    for _ in range(count):
        v = rng.standard_normal(E.shape[1])
        v *= rng.uniform(0, radius) / max(np.linalg.norm(v), 1e-300)
        pts.append(N.project(p + E @ v))
    return pts


@dataclass
class CrossSectionReport:
    points: list
    passed: list
    detail: list = field(default_factory=list)

    @property
    def ok(self):
        return all(self.passed)


def _symplectic_subspace(space, x, W):
    """True iff omega restricted to span(W) (ambient tangent vectors) is nondegenerate."""
    T = space.tangent_basis(x)
    C = np.linalg.lstsq(T, W, rcond=None)[0]
    Wt = space.omega_tangent(x)
    Om = C.T @ Wt @ C
    scale = np.linalg.norm(Wt, 2) * np.linalg.norm(C, 2) ** 2
    return linalg.rank(Om, scale=scale) == W.shape[1] if W.shape[1] else True


def check_symplectic_cross_section(mm, Z, lam, p, rng=None, count=LOCAL_SAMPLES, radius=LOCAL_RADIUS):
    """W_q = mu_*^-1(T Z) is a symplectic subspace at p and at nearby q on mu^-1(Z)."""
    space = mm.action.space
    p = space.check_point(p)
    lam = np.asarray(lam, dtype=float)
    if np.max(np.abs(mm(p) - lam)) > 1e-9:
        raise CrossSectionSetupError("mu(p) differs from lambda")
    _perfect_transversality(mm, Z, lam)
    N = preimage_submanifold(mm, Z)
    rng = rng or np.random.default_rng(42)
    pts = [p] + local_samples(N, p, rng, count, radius)
    passed, detail = [], []
    for q in pts:
        F, _ = frame(space, q)
        D = fd_jacobian(mm, q) @ F
        # T_{mu(q)} Z: differentiate the constraints of Z at mu(q)
        Dz = np.atleast_2d(fd_jacobian(Z.constraints, mm(q))) if Z.codim else np.zeros((0, D.shape[0]))
        W = F @ (linalg.null_space(Dz @ D) if Z.codim else np.eye(F.shape[1]))
        ok = _symplectic_subspace(space, q, W)
        passed.append(bool(ok))
        detail.append({"dim_W": int(W.shape[1])})
    return CrossSectionReport(pts, passed, detail)


def check_poisson_cross_section(mm, Z, lam, p, rng=None, count=LOCAL_SAMPLES, radius=LOCAL_RADIUS):
    """mu^-1(Z) is a Poisson transversal at p and at nearby sampled points."""
    space = mm.action.space
    p = space.check_point(p)
    lam = np.asarray(lam, dtype=float)
    if np.max(np.abs(mm(p) - lam)) > 1e-9:
        raise CrossSectionSetupError("mu(p) differs from lambda")
    _perfect_transversality(mm, Z, lam)
    N = preimage_submanifold(mm, Z)
    rng = rng or np.random.default_rng(42)
    pts = [p] + local_samples(N, p, rng, count, radius)
    reports = is_poisson_transversal(N, pts)
    return CrossSectionReport(pts, [r.is_transversal for r in reports], [r.to_dict() for r in reports])


def kernel_lemma_residual(mm, p, covectors):
    """max |mu_* Pi(l)(xi) + l(xi_M(p))| over covectors and basis xi."""
    from .actions import infinitesimal_generator

    space = mm.action.space
    alg = mm.action.algebra
    D = fd_jacobian(mm, p)
    B = space.bivector(p)
    worst = 0.0
    for l in covectors:
        lhs = D @ (B.T @ l)
        for i in range(alg.dim):
            rhs = -l @ infinitesimal_generator(mm.action, alg.basis(i), p)
            worst = max(worst, abs(lhs[i] - rhs))
    return worst


# ------------------------------------------------------------------ scenarios


def r5_space():
    from .phase_space import ConstantPoisson

    return ConstantPoisson.from_pairs(5, [(0, 1), (2, 3)])


def r5_submanifolds(k=None):
    """The named submanifolds of R^5 with the classification they should get."""
    M = r5_space()
    k = np.array([0.3, -0.2, 0.5, 0.1, 0.7]) if k is None else np.asarray(k, dtype=float)
    E = np.eye(5)
    return {
        "hyperplane": (Submanifold.affine(M, E[[4]], k[[4]], "x5=k"), {"poisson_sub": True, "transversal": False}),
        "line": (Submanifold.affine(M, E[:4], k[:4], "x1..x4=k"), {"poisson_sub": False, "transversal": True}),
        "plane-12": (Submanifold.affine(M, E[[0, 1]], k[[0, 1]], "(x1,x2)=k"), {"poisson_sub": False, "transversal": True}),
        "plane-34": (Submanifold.affine(M, E[[2, 3]], k[[2, 3]], "(x3,x4)=k"), {"poisson_sub": False, "transversal": True}),
        "whole": (Submanifold.whole(M), {"poisson_sub": True, "transversal": True}),
    }, k


def s2xs2_cross_section(phi=0.4):
    from .actions import s2xs2_diagonal

    mm = s2xs2_diagonal()
    lam = np.array([0.0, 0.0, 1.3])
    s = np.sqrt(1 - 0.65**2)
    x = np.array([s * np.cos(phi), s * np.sin(phi), 0.65])
    y = np.array([-x[0], -x[1], 0.65])
    return mm, Slice.radial_line(lam), lam, np.concatenate([x, y])


def so3dual_cross_section(lam=(0.3, -0.4, 1.2)):
    from .actions import coadjoint_identity

    mm = coadjoint_identity()
    lam = np.asarray(lam, dtype=float)
    return mm, Slice.radial_line(lam), lam, lam.copy()


def random_subspace_scenario(rng, dims=(4, 5, 6)):
    """A constant bivector of random rank on R^m and a random affine N through 0."""
    from .phase_space import ConstantPoisson

    m = int(rng.choice(dims))
    k = int(rng.integers(0, m // 2 + 1))
    A = rng.standard_normal((m, m))
    J = np.zeros((m, m))
    for i in range(k):
        J[2 * i, 2 * i + 1], J[2 * i + 1, 2 * i] = 1.0, -1.0
    B = A @ J @ A.T
    space = ConstantPoisson(0.5 * (B - B.T))
    c = int(rng.integers(0, m))
    N = Submanifold.affine(space, rng.standard_normal((c, m)), np.zeros(c)) if c else Submanifold.whole(space)
    return N, np.zeros(m)


def symplectic_subspace_test(N, p):
    """Direct test that omega restricted to T_pN is nondegenerate."""
    space = N.space
    TN, _, F = tangent_and_annihilator(N, p)
    return _symplectic_subspace(space, p, F @ TN)


def random_symplectic_scenario(rng, n_choices=(2, 3)):
    from .phase_space import StandardSymplectic

    n = int(rng.choice(n_choices))
    space = StandardSymplectic(n)
    c = int(rng.integers(1, 2 * n))
    N = Submanifold.affine(space, rng.standard_normal((c, 2 * n)), np.zeros(c))
    return N, np.zeros(2 * n)

"""Reduction checks: level-set kernels, descent of the reduced form, KKS forms,
Lie-Poisson flows, pi-relatedness, reconstruction of lifted motions, and the
Marsden-Ratiu reducibility condition.

Reduced spaces are never built; every claim is tested on representatives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lie, linalg
from .actions import generator_matrix, infinitesimal_generator, isotropy_algebra_basis
from .errors import (
    DecompositionError,
    LevelSetError,
    LiftError,
    PreconditionError,
)
from .phase_space import (
    LiePoissonDual,
    ScalarField,
    Trajectory,
    fd_jacobian,
    flow,
)
from .transversal import Submanifold, frame

LEVEL_TOL = 1e-9
SOLVE_TOL = 1e-6


@dataclass
class LevelSetSample:
    mm: object
    value: np.ndarray
    points: list

    def __post_init__(self):
        self.value = np.asarray(self.value, dtype=float)
        for p in self.points:
            r = float(np.max(np.abs(self.mm(p) - self.value)))
            if r > LEVEL_TOL:
                raise LevelSetError(f"sample is off the level set by {r:.3e}")
        for i in range(len(self.points)):
            for j in range(i):
                if np.allclose(self.points[i], self.points[j], atol=1e-14, rtol=0):
                    raise ValueError("level-set samples must be pairwise distinct")


@dataclass
class CoadjointOrbitSample:
    algebra: lie.LieAlgebra
    seed: np.ndarray
    points: list

    @classmethod
    def draw(cls, algebra, seed, rng, count, scale=1.0):
        seed = np.asarray(seed, dtype=float)
        pts = [algebra.Ad_star(algebra.random_element(rng, scale), seed) for _ in range(count)]
        return cls(algebra, seed, pts)


@dataclass
class ReconstructionResult:
    xi_curve: np.ndarray
    g_curve: np.ndarray
    gamma: Trajectory
    residual: float
    solve_residual: float = 0.0


def _tangent_data(mm, p):
    space = mm.action.space
    F, _ = frame(space, p)
    D = fd_jacobian(mm, p) @ F
    G = F.T @ generator_matrix(mm.action, p)
    W = F.T @ _omega_ambient(space, p) @ F
    return F, D, G, W


def _omega_ambient(space, p):
    """Ambient matrix whose restriction to T_pM is omega."""
    T = space.tangent_basis(p)
    Tp = np.linalg.pinv(T)
    return Tp.T @ space.omega_tangent(p) @ Tp


def check_clean_level_kernel(mm, p):
    """ker mu_* = g_M(p)^perp and im mu_* = g_p° at a point of a symplectic space."""
    space = mm.action.space
    p = space.check_point(p)
    F, D, G, W = _tangent_data(mm, p)
    m = F.shape[1]
    K = linalg.null_space(D) if np.any(np.abs(D) > 1e-12) else np.eye(m)
    orbit = linalg.orth(G) if np.any(np.abs(G) > 1e-12) else np.zeros((m, 0))
    omega_res = float(np.max(np.abs(K.T @ W @ orbit))) if orbit.shape[1] and K.shape[1] else 0.0
    iso = isotropy_algebra_basis(mm.action, p)  # rows
    image = linalg.orth(D) if np.any(np.abs(D) > 1e-12) else np.zeros((D.shape[0], 0))
    ann_res = float(np.max(np.abs(iso @ image))) if iso.size and image.size else 0.0
    out = {
        "dim_ker": int(K.shape[1]),
        "dim_orbit": int(orbit.shape[1]),
        "dim_M": int(m),
        "dim_image": int(image.shape[1]),
        "dim_isotropy": int(iso.shape[0]),
        "omega_residual": omega_res,
        "annihilator_residual": ann_res,
    }
    out["ok"] = (
        out["dim_ker"] + out["dim_orbit"] == m
        and out["dim_image"] + out["dim_isotropy"] == mm.action.algebra.dim
        and omega_res < 1e-6
        and ann_res < 1e-6
    )
    return out


def coadjoint_isotropy_basis(alg, alpha):
    """Rows spanning g_alpha = {xi : ad*_xi alpha = 0}."""
    A = np.stack([alg.coadjoint_generator(alg.basis(i), alpha) for i in range(alg.dim)], axis=1)
    return linalg.null_space(A).T


def check_reduced_form_descends(mm, alpha, p, tangent_samples=()):
    """Degeneracy of omega on T_p mu^-1(alpha) is exactly T_p(G_alpha p)."""
    space = mm.action.space
    p = space.check_point(p)
    alpha = np.asarray(alpha, dtype=float)
    r = float(np.max(np.abs(mm(p) - alpha)))
    if r > 1e-8:
        raise LevelSetError(f"point is off the level set by {r:.3e}")
    alg = mm.action.algebra
    F, D, _, W = _tangent_data(mm, p)
    m = F.shape[1]
    K = linalg.null_space(D) if np.any(np.abs(D) > 1e-12) else np.eye(m)
    rows = coadjoint_isotropy_basis(alg, alpha)
    U = np.stack([F.T @ infinitesimal_generator(mm.action, xi, p) for xi in rows], axis=1) if len(rows) else np.zeros((m, 0))
    U = linalg.orth(U) if np.any(np.abs(U) > 1e-12) else np.zeros((m, 0))
    V = K
    extra = [F.T @ np.asarray(v, dtype=float) for v in tangent_samples]
    if extra:
        V = np.hstack([K, np.stack(extra, axis=1)])
    omega_res = float(np.max(np.abs(U.T @ W @ V))) if U.shape[1] else 0.0
    Wr = K.T @ W @ K
    reduced_rank = linalg.rank(Wr, scale=np.linalg.norm(W, 2))
    out = {
        "dim_level_tangent": int(K.shape[1]),
        "orbit_dim": int(U.shape[1]),
        "degeneracy_dim": int(K.shape[1] - reduced_rank),
        "reduced_rank": int(reduced_rank),
        "omega_residual": omega_res,
        "orbit_in_level": linalg.contains(K, U) if U.shape[1] else True,
    }
    out["ok"] = (
        out["degeneracy_dim"] == out["orbit_dim"] and omega_res < 1e-6 and out["orbit_in_level"]
    )
    return out


def kks_form(alg, beta, xi, eta):
    """Kirillov-Kostant-Souriau form -beta([xi, eta]) on the coadjoint orbit through beta."""
    return -float(np.asarray(beta, dtype=float) @ alg.bracket(xi, eta))


def lie_poisson_flow(alg, H, alpha0, T, dt, columns=None):
    """Integral curve of X_H = Pi(dH) on g* for the Lie-Poisson structure."""
    return flow(LiePoissonDual(alg), H, np.asarray(alpha0, dtype=float), T, dt, columns)


def rigid_body_hamiltonian(inertia=(1.0, 2.0, 3.0)):
    Iinv = 1.0 / np.asarray(inertia, dtype=float)
    return ScalarField(lambda a: 0.5 * float(np.sum(Iinv * a * a)), lambda a: Iinv * a)


def casimir_so3(a):
    return float(np.dot(a, a))


def check_pi_relatedness(
    full_space, H, projection, reduced_space=None, h=None, samples=(), reduced_vf=None, descend_tol=1e-9,
    fd_step=1e-6,
):
    """max |pi_* X_H(p) - X_h(pi(p))| over samples.

    ``reduced_vf`` may replace ``X_h`` when the reduced space is only known
    through representatives (it receives pi(p)).
    """
    worst = 0.0
    for p in samples:
        p = full_space.check_point(p)
        q = np.asarray(projection(p), dtype=float)
        if h is not None:
            r = abs(H(p) - h(q))
            if r > descend_tol:
                raise PreconditionError(f"H does not descend to h (residual {r:.3e})")
        XH = full_space.bivector(p).T @ H.gradient(p)
        lhs = (np.asarray(projection(p + fd_step * XH)) - np.asarray(projection(p - fd_step * XH))) / (2 * fd_step)
        if reduced_vf is not None:
            rhs = np.asarray(reduced_vf(q), dtype=float)
        else:
            rhs = reduced_space.bivector(q).T @ h.gradient(q)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def hamiltonian_equivariance_residual(action, H, group_samples, points):
    """max |Phi_{g*} X_H(p) - X_H(Phi_g p)| for invariant H."""
    space = action.space
    worst = 0.0
    for g, p in zip(group_samples, points):
        XH = space.bivector(p).T @ H.gradient(p)
        D = fd_jacobian(lambda y: action.act(g, y), p)
        gp = action.act(g, p)
        worst = max(worst, float(np.max(np.abs(D @ XH - space.bivector(gp).T @ H.gradient(gp)))))
    return worst


# ----------------------------------------------------------------- reconstruction


def time_derivative(states, dt):
    """Fourth-order finite-difference derivative along the first axis."""
    x = np.asarray(states, dtype=float)
    n = len(x)
    if n < 5:
        raise ValueError("need at least five samples to differentiate")
    d = np.empty_like(x)
    d[2:-2] = (x[:-4] - 8 * x[1:-3] + 8 * x[3:-1] - x[4:]) / (12 * dt)
    # one-sided stencils at the two points nearest each end
    c0 = np.array([-25, 48, -36, 16, -3]) / (12 * dt)
    c1 = np.array([-3, -10, 18, -6, 1]) / (12 * dt)
    d[0] = np.tensordot(c0, x[:5], axes=1)
    d[1] = np.tensordot(c1, x[:5], axes=1)
    d[-1] = -np.tensordot(c0, x[::-1][:5], axes=1)
    d[-2] = -np.tensordot(c1, x[::-1][:5], axes=1)
    return d


def reconstruct(mm, H, beta, alpha, g0=None, galpha_basis=None, solve_tol=SOLVE_TOL, level_tol=1e-6):
    """Recover a motion Gamma(t) = Phi_{g(t)} beta(t) from a curve beta in mu^-1(alpha).

    At each sample the algebraic equation xi_M(beta) = X_H(beta) - beta' is
    solved by least squares over generators of g_alpha, then g' = g xi is
    integrated by exponential steps with the averaged xi of each interval.
    """
    action = mm.action
    space = action.space
    alg = action.algebra
    alpha = np.asarray(alpha, dtype=float)
    times = np.asarray(beta.times, dtype=float)
    states = np.asarray(beta.states, dtype=float)
    dt = float(times[1] - times[0])
    for s in states:
        r = float(np.max(np.abs(mm(s) - alpha)))
        if r > level_tol:
            raise LevelSetError(f"beta leaves mu^-1(alpha) by {r:.3e}")
    rows = coadjoint_isotropy_basis(alg, alpha) if galpha_basis is None else np.atleast_2d(galpha_basis)
    bdot = time_derivative(states, dt)
    xis = np.empty((len(states), alg.dim))
    worst_solve = 0.0
    for k, s in enumerate(states):
        A = np.stack([infinitesimal_generator(action, xi, s, check=False) for xi in rows], axis=1)
        if linalg.rank(A) != A.shape[1]:
            raise DecompositionError("generators of g_alpha are not independent at beta(t)")
        rhs = space.bivector(s).T @ H.gradient(s) - bdot[k]
        c, *_ = np.linalg.lstsq(A, rhs, rcond=None)
        res = float(np.linalg.norm(A @ c - rhs))
        worst_solve = max(worst_solve, res)
        if res > solve_tol:
            raise LiftError(f"beta is not a lift of a reduced motion (solve residual {res:.3e} at t={times[k]:.4g})")
        xis[k] = rows.T @ c
    g = alg.identity() if g0 is None else np.asarray(g0)
    gs = np.empty((len(states),) + g.shape, dtype=g.dtype)
    gs[0] = g
    for k in range(len(states) - 1):
        g = alg.maybe_reproject(g @ alg.exp(0.5 * dt * (xis[k] + xis[k + 1])))
        gs[k + 1] = g
    gamma = np.stack([action.act(gk, s) for gk, s in zip(gs, states)])
    gdot = time_derivative(gamma, dt)
    resid = max(
        float(np.max(np.abs(gdot[k] - space.bivector(x).T @ H.gradient(x)))) for k, x in enumerate(gamma)
    )
    return ReconstructionResult(xis, gs, Trajectory(times, gamma, space), resid, worst_solve)


def minimal_rotation(a, b):
    """Rotation about a x b taking the direction of a to the direction of b."""
    a = np.asarray(a, dtype=float) / np.linalg.norm(a)
    b = np.asarray(b, dtype=float) / np.linalg.norm(b)
    axis = np.cross(a, b)
    s = np.linalg.norm(axis)
    if s < 1e-15:
        if a @ b > 0:
            return np.eye(3)
        raise PreconditionError("antipodal directions have no minimal rotation")
    return lie.rodrigues(axis / s * np.arctan2(s, a @ b))


def rigid_body_left_hamiltonian(inertia=(1.0, 2.0, 3.0)):
    """Left-invariant H(g, alpha) = h(g^T alpha) on T*SO(3) (right trivialisation)."""
    h = rigid_body_hamiltonian(inertia)
    Iinv = 1.0 / np.asarray(inertia, dtype=float)

    def f(x):
        M = x[:9].reshape(3, 3).T @ x[9:]
        return h(M)

    def grad(x):
        g = x[:9].reshape(3, 3)
        a = x[9:]
        Om = Iinv * (g.T @ a)
        return np.concatenate([np.outer(a, Om).ravel(), g @ Om])

    return ScalarField(f, grad)


def body_momentum(x):
    return x[:9].reshape(3, 3).T @ x[9:]


@dataclass
class RigidBodySetup:
    mm: object
    H: ScalarField
    alpha: np.ndarray
    full: Trajectory
    beta: Trajectory
    body: np.ndarray


def rigid_body_lift(T=5.0, dt=1e-3, M0=(1.0, 0.15, 0.1), inertia=(1.0, 2.0, 3.0), scale=1.0):
    """Test scaffolding: a curve beta in mu^-1(alpha) over a rigid-body motion.

    The full motion on T*SO(3) is integrated, projected to the body momentum
    M = g^T alpha, and each M is represented by (g_beta, alpha) with g_beta the
    minimal rotation taking M to alpha. ``scale`` multiplies H.
    """
    from .actions import cotangent_left_translation

    mm = cotangent_left_translation()
    space = mm.action.space
    H = rigid_body_left_hamiltonian(inertia).scaled(scale)
    alpha = np.asarray(M0, dtype=float)
    full = flow(space, H, space.pack(np.eye(3), alpha), T, dt)
    body = np.array([body_momentum(x) for x in full.states])
    reps = np.array([space.pack(minimal_rotation(Mk, alpha), alpha) for Mk in body])
    beta = Trajectory(full.times, reps, space)
    return RigidBodySetup(mm, H, alpha, full, beta, body)


# ------------------------------------------------------------- harmonic oscillator


def projective_representative(x, n):
    """Projector z z^H / |z|^2 with z = q + i p, flattened to real and imaginary parts."""
    z = x[:n] + 1j * x[n:]
    P = np.outer(z, z.conj()) / np.vdot(z, z).real
    return np.concatenate([P.real.ravel(), P.imag.ravel()])


def oscillator_level_point(rng, n, energy=0.5):
    x = rng.standard_normal(2 * n)
    return x * np.sqrt(2 * energy) / np.linalg.norm(x)


# ------------------------------------------------------------------ Marsden-Ratiu


def check_marsden_ratiu(space, N, E, samples):
    """Pi(E°) ⊆ TN + E at each sample, by rank comparison.

    ``N`` is a Submanifold of ``space`` (or None for N = M) and ``E(p)`` returns
    ambient vectors (columns) spanning the distribution.
    """
    N = Submanifold.whole(space) if N is None else N
    out = []
    for p in samples:
        p = N.check_point(p)
        F, P = frame(space, p)
        D = N.jac(p) @ F
        TN = linalg.null_space(D) if N.codim else np.eye(F.shape[1])
        Ep = np.asarray(E(p), dtype=float)
        Ec = F.T @ Ep if Ep.size else np.zeros((F.shape[1], 0))
        if Ec.shape[1] and not np.any(np.abs(Ec) > 1e-14):
            Ec = np.zeros((F.shape[1], 0))
        Eo = linalg.annihilator(Ec, F.shape[1])
        PiEo = P.T @ Eo
        base = np.hstack([TN, Ec])
        r1 = linalg.rank(base, scale=1.0)
        r2 = linalg.rank(np.hstack([base, PiEo]), scale=max(1.0, np.linalg.norm(P, 2)))
        out.append(r1 == r2)
    return out


def zero_distribution(p):
    return np.zeros((np.size(p), 0))

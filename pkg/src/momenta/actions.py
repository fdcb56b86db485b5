"""Group actions, infinitesimal generators, and moment maps.

A ``GroupAction`` acts by matrices from its algebra's group on points of a
``PhaseSpace``. A ``MomentMap`` is an explicit evaluator into g* (dual-basis
coefficients). The ``check_*`` functions return residuals; callers compare
them against tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import lie, linalg
from .errors import InvarianceViolation, SymmetryViolation
from .phase_space import (
    CotangentGroup,
    Product,
    ScalarField,
    Sphere2,
    StandardSymplectic,
    LiePoissonDual,
    fd_jacobian,
    flow,
)

GENERATOR_STEP = 1e-6


@dataclass
class GroupAction:
    algebra: lie.LieAlgebra
    space: object
    act: Callable
    generator: Optional[Callable] = None
    name: str = ""


@dataclass
class MomentMap:
    action: GroupAction
    mu: Callable
    name: str = ""

    def __call__(self, x):
        return np.asarray(self.mu(np.asarray(x, dtype=float)), dtype=float)

    def comoment(self, xi, fd_step=1e-6):
        """The function p -> mu(p)(xi)."""
        xi = np.asarray(xi, dtype=float)
        return ScalarField(lambda x: float(self(x) @ xi), None, fd_step)


def infinitesimal_generator(action, xi, x, analytic=True, check=True):
    xi = np.asarray(xi, dtype=float)
    x = action.space.check_point(x) if check else np.asarray(x, dtype=float)
    if analytic and action.generator is not None:
        return np.asarray(action.generator(xi, x), dtype=float)
    alg = action.algebra
    h = GENERATOR_STEP
    fwd = action.act(alg.exp(h * xi), x)
    bwd = action.act(alg.exp(-h * xi), x)
    return (fwd - bwd) / (2 * h)


def generator_matrix(action, x, analytic=True):
    """Ambient columns xi_M(x) for the basis elements of the algebra."""
    alg = action.algebra
    return np.stack(
        [infinitesimal_generator(action, alg.basis(i), x, analytic) for i in range(alg.dim)],
        axis=1,
    )


def isotropy_algebra_basis(action, x):
    """Basis (rows) of g_x = {xi : xi_M(x) = 0}."""
    G = generator_matrix(action, x)
    return linalg.null_space(G).T


def orbit_tangent_basis(action, x):
    """Orthonormal ambient basis (columns) of T_x(G.x)."""
    return linalg.orth(generator_matrix(action, x))


def moment_from_potential(action, theta, points=(), group_samples=(), tol=1e-8):
    """Moment map mu(x)(xi) = theta_x(xi_M(x)) for an invariant one-form.

    ``theta(x)`` returns the ambient covector of the one-form at x. Invariance
    Phi_g^* theta = theta is checked on tangent vectors at the supplied samples.
    """
    space = action.space
    for x in points:
        x = np.asarray(x, dtype=float)
        T = space.tangent_basis(x)
        for g in group_samples:
            D = fd_jacobian(lambda y: action.act(g, y), x)
            pulled = (D @ T).T @ theta(action.act(g, x))
            base = T.T @ theta(x)
            err = float(np.max(np.abs(pulled - base)))
            if err > tol * max(1.0, np.max(np.abs(base))):
                raise InvarianceViolation(f"one-form is not invariant (residual {err:.3e})")

    def mu(x):
        return generator_matrix(action, x).T @ theta(x)

    return MomentMap(action, mu, name=f"potential[{action.name}]")


@dataclass
class ConfigAction:
    """Action of a group on a configuration space R^n."""

    algebra: lie.LieAlgebra
    n: int
    act: Callable
    generator: Optional[Callable] = None
    name: str = ""

    def gen(self, xi, q):
        if self.generator is not None:
            return self.generator(xi, q)
        h = GENERATOR_STEP
        return (self.act(self.algebra.exp(h * xi), q) - self.act(self.algebra.exp(-h * xi), q)) / (2 * h)


@dataclass
class LeftTranslation:
    """A group acting on itself by left multiplication."""

    algebra: lie.LieAlgebra


def cotangent_lift_moment(base):
    """Lift a configuration-space action to the cotangent bundle.

    Returns the moment map mu(alpha)(xi) = alpha(xi_Q(pi(alpha))) together
    with its lifted action.
    """
    if isinstance(base, LeftTranslation):
        return left_translation_moment(base.algebra)
    n = base.n
    space = StandardSymplectic(n)
    alg = base.algebra

    def act(g, x):
        q, p = x[:n], x[n:]
        D = fd_jacobian(lambda y: base.act(g, y), q)
        return np.concatenate([base.act(g, q), np.linalg.solve(D.T, p)])

    action = GroupAction(alg, space, act, name=f"lift[{base.name}]")

    def mu(x):
        q, p = x[:n], x[n:]
        return np.array([p @ base.gen(alg.basis(i), q) for i in range(alg.dim)])

    return MomentMap(action, mu, name=f"lift[{base.name}]")


def left_translation_moment(alg):
    space = CotangentGroup(alg)

    def act(h, x):
        g, a = space.unpack(x)
        return space.pack(h @ g, alg.Ad_star(h, a))

    def gen(xi, x):
        g, a = space.unpack(x)
        return space.pack(alg.hat(xi) @ g, alg.coadjoint_generator(xi, a))

    action = GroupAction(alg, space, act, gen, name="left-translation")
    return MomentMap(action, lambda x: space.unpack(x)[1].copy(), name="cotangent-left-translation")


# ------------------------------------------------------------------- checks


def check_moment_condition(mm, samples):
    """max |Pi(d mu(xi))(p) - xi_M(p)| over basis xi and samples."""
    space = mm.action.space
    alg = mm.action.algebra
    worst = 0.0
    for x in samples:
        x = space.check_point(x)
        Dmu = fd_jacobian(mm, x)  # d x ambient
        B = space.bivector(x)
        for i in range(alg.dim):
            X = B.T @ Dmu[i]
            gen = infinitesimal_generator(mm.action, alg.basis(i), x)
            worst = max(worst, float(np.max(np.abs(X - gen))))
    return worst


def check_equivariance(mm, group_samples, points):
    alg = mm.action.algebra
    worst = 0.0
    for g, x in zip(group_samples, points):
        lhs = mm(mm.action.act(g, x))
        rhs = alg.Ad_star(g, mm(x))
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def invariance_residual(action, H, group_samples, points):
    worst = 0.0
    for g in group_samples:
        for x in points:
            worst = max(worst, abs(H(action.act(g, x)) - H(x)))
    return worst


def check_noether(mm, H, x0, T, dt, group_samples=(), sym_tol=1e-8):
    """Max drift of mu along the flow of an invariant Hamiltonian."""
    action = mm.action
    if group_samples:
        r = invariance_residual(action, H, group_samples, [x0])
        if r > sym_tol:
            raise SymmetryViolation(f"Hamiltonian is not invariant (residual {r:.3e})")
    traj = flow(action.space, H, x0, T, dt)
    mu0 = mm(traj.states[0])
    drift = max(float(np.max(np.abs(mm(s) - mu0))) for s in traj.states)
    return drift


def check_comoment_antihom(mm, samples):
    """max |{mu(xi), mu(eta)} + mu([xi, eta])| over basis pairs and samples."""
    space = mm.action.space
    alg = mm.action.algebra
    worst = 0.0
    for x in samples:
        x = space.check_point(x)
        Dmu = fd_jacobian(mm, x)
        B = space.bivector(x)
        m = mm(x)
        for i in range(alg.dim):
            for j in range(i + 1, alg.dim):
                lhs = Dmu[i] @ B @ Dmu[j]
                rhs = -m @ alg.bracket(alg.basis(i), alg.basis(j))
                worst = max(worst, abs(lhs - rhs))
    return worst


def moment_pushforward_residual(mm, samples):
    """max |mu_* xi_M(p) - xi_{g*}(mu(p))| over basis xi."""
    alg = mm.action.algebra
    worst = 0.0
    for x in samples:
        Dmu = fd_jacobian(mm, x)
        m = mm(x)
        for i in range(alg.dim):
            e = alg.basis(i)
            lhs = Dmu @ infinitesimal_generator(mm.action, e, x)
            worst = max(worst, float(np.max(np.abs(lhs - alg.coadjoint_generator(e, m)))))
    return worst


def ad_generator_residual(action, group_samples, points):
    """max |(Ad(g) xi)_M(Phi_g p) - Phi_{g*} xi_M(p)|."""
    alg = action.algebra
    worst = 0.0
    for g, x in zip(group_samples, points):
        D = fd_jacobian(lambda y: action.act(g, y), x)
        gx = action.act(g, x)
        for i in range(alg.dim):
            e = alg.basis(i)
            lhs = infinitesimal_generator(action, alg.Ad(g, e), gx)
            rhs = D @ infinitesimal_generator(action, e, x)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def vector_field_bracket(X, Y, x, h=1e-4):
    """[X, Y](x) = DY.X - DX.Y for ambient vector fields."""
    DX = fd_jacobian(X, x, h)
    DY = fd_jacobian(Y, x, h)
    return DY @ X(x) - DX @ Y(x)


def generator_bracket_residual(action, points, h=1e-4):
    """max |[xi_M, eta_M] + [xi, eta]_M| over basis pairs."""
    alg = action.algebra

    # differentiated off the manifold, so use the ambient extension
    def field(e):
        return lambda y: infinitesimal_generator(action, e, y, check=False)

    worst = 0.0
    for x in points:
        for i in range(alg.dim):
            for j in range(i + 1, alg.dim):
                ei, ej = alg.basis(i), alg.basis(j)
                lhs = vector_field_bracket(field(ei), field(ej), x, h)
                rhs = -infinitesimal_generator(action, alg.bracket(ei, ej), x)
                worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def moment_rank(mm, x):
    """Rank of mu_* restricted to T_xM."""
    T = mm.action.space.tangent_basis(x)
    return linalg.rank(fd_jacobian(mm, x) @ T)


# ----------------------------------------------------------------- catalogue


def so3_on_r6():
    alg = lie.so3()
    space = StandardSymplectic(3)

    def act(R, x):
        return np.concatenate([R @ x[:3], R @ x[3:]])

    def gen(xi, x):
        X = lie.hat(xi)
        return np.concatenate([X @ x[:3], X @ x[3:]])

    return GroupAction(alg, space, act, gen, name="so3-on-r6")


def translations_on_r6():
    alg = lie.translations(3)
    space = StandardSymplectic(3)

    def act(g, x):
        return np.concatenate([x[:3] + g[:3, 3], x[3:]])

    def gen(a, x):
        return np.concatenate([a, np.zeros(3)])

    return GroupAction(alg, space, act, gen, name="translations-on-r6")


def canonical_one_form(n):
    """theta = p_i dq^i on R^{2n} as an ambient covector."""
    return lambda x: np.concatenate([x[n:], np.zeros(n)])


def linear_momentum():
    action = translations_on_r6()
    return MomentMap(action, lambda x: x[3:].copy(), name="linear-momentum")


def angular_momentum():
    action = so3_on_r6()
    return MomentMap(action, lambda x: np.cross(x[:3], x[3:]), name="angular-momentum")


def sphere_so3(radius=1.0):
    alg = lie.so3()
    space = Sphere2(radius)
    action = GroupAction(alg, space, lambda R, x: R @ x, lambda xi, x: np.cross(xi, x), name="so3-on-s2")
    return MomentMap(action, lambda x: x.copy(), name="sphere-so3")


def s2xs2_diagonal():
    alg = lie.so3()
    space = Product(Sphere2(1.0), Sphere2(1.0))

    def act(R, x):
        return np.concatenate([R @ x[:3], R @ x[3:]])

    def gen(xi, x):
        return np.concatenate([np.cross(xi, x[:3]), np.cross(xi, x[3:])])

    action = GroupAction(alg, space, act, gen, name="so3-diagonal-on-s2xs2")
    return MomentMap(action, lambda x: x[:3] + x[3:], name="s2xs2-diagonal")


def cotangent_left_translation():
    return left_translation_moment(lie.so3())


def harmonic_oscillator_hamiltonian(n):
    return ScalarField(lambda x: 0.5 * float(x @ x), lambda x: x.copy())


def oscillator_flow_map(n, t, x):
    q, p = x[:n], x[n:]
    c, s = np.cos(t), np.sin(t)
    return np.concatenate([q * c + p * s, p * c - q * s])


def hamiltonian_r_action(n=1):
    """The circle action generated by the flow of the harmonic oscillator.

    Its flow is 2*pi-periodic, so the R-action factors through the torus T^1.
    """
    alg = lie.torus(1)
    space = StandardSymplectic(n)
    H = harmonic_oscillator_hamiltonian(n)

    def act(g, x):
        return oscillator_flow_map(n, float(np.angle(g[0, 0])), x)

    def gen(a, x):
        return a[0] * (space.bivector(x).T @ H.gradient(x))

    action = GroupAction(alg, space, act, gen, name="oscillator-flow")
    return MomentMap(action, lambda x: np.array([H(x)]), name="hamiltonian-r-action")


def coadjoint_identity(alg=None):
    alg = alg or lie.so3()
    space = LiePoissonDual(alg)
    action = GroupAction(
        alg, space, lambda g, a: alg.Ad_star(g, a), lambda xi, a: alg.coadjoint_generator(xi, a),
        name="coadjoint",
    )
    return MomentMap(action, lambda a: a.copy(), name="coadjoint-identity")


def trivial_action(space, alg=None):
    alg = alg or lie.so3()
    action = GroupAction(alg, space, lambda g, x: x, lambda xi, x: np.zeros_like(x), name="trivial")
    return MomentMap(action, lambda x: np.zeros(alg.dim), name="trivial")


MOMENT_SCENARIOS = {
    "linear-momentum": linear_momentum,
    "angular-momentum": angular_momentum,
    "sphere-so3": sphere_so3,
    "s2xs2-diagonal": s2xs2_diagonal,
    "cotangent-left-translation": cotangent_left_translation,
    "hamiltonian-r-action": hamiltonian_r_action,
}


def sample_points(mm, rng, count):
    space = mm.action.space
    return [space.random_point(rng) for _ in range(count)]


def sample_group(alg, rng, count, scale=1.0):
    return [alg.random_element(rng, scale) for _ in range(count)]


def central_force_hamiltonian(strength=1.0):
    """H = |p|^2/2 + strength/|q| on R^6 minus the origin."""

    def H(x):
        return 0.5 * float(x[3:] @ x[3:]) + strength / np.linalg.norm(x[:3])

    def grad(x):
        q = x[:3]
        r = np.linalg.norm(q)
        return np.concatenate([-strength * q / r**3, x[3:]])

    return ScalarField(H, grad)

"""Model symplectic and Poisson phase spaces embedded in Euclidean space.

Conventions (fixed throughout the package):

* ``bivector(x)`` returns the matrix ``B`` with ``B[i, j] = Pi(dx_i, dx_j)``.
* The Hamiltonian vector field is ``X_f = Pi(df) = B.T @ grad f``, which on a
  symplectic space is the unique field with ``i_{X_f} omega = df``.
* ``{f, g} = Pi(df, dg) = grad f @ B @ grad g = X_f g = -omega(X_f, X_g)``.

With ``omega = dq^i ^ dp_i`` this gives ``X_H = (dH/dp, -dH/dq)`` and
``{q, p} = -1``; on a Lie-Poisson dual ``B[i, j] = -alpha([e_i, e_j])``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    ConstraintViolation,
    DimensionError,
    IntegrationFailure,
    TangencyError,
    UnsupportedError,
)
from .lie import LieAlgebra

ON_MANIFOLD_TOL = 1e-9
DRIFT_TOL = 1e-4


@dataclass
class ScalarField:
    """A smooth function on the ambient space, optionally with its gradient."""

    func: Callable[[np.ndarray], float]
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    fd_step: float = 1e-6

    def __call__(self, x):
        return float(self.func(np.asarray(x, dtype=float)))

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        if self.grad is not None:
            return np.asarray(self.grad(x), dtype=float)
        return fd_gradient(self.func, x, self.fd_step)

    def __mul__(self, other):
        f, g = self, other
        return ScalarField(
            lambda x: f(x) * g(x),
            lambda x: f.gradient(x) * g(x) + f(x) * g.gradient(x),
            min(f.fd_step, g.fd_step),
        )

    def __neg__(self):
        f = self
        return ScalarField(lambda x: -f(x), lambda x: -f.gradient(x), f.fd_step)

    def scaled(self, c):
        f = self
        return ScalarField(lambda x: c * f(x), lambda x: c * f.gradient(x), f.fd_step)

    @classmethod
    def constant(cls, value, n):
        return cls(lambda x: value, lambda x: np.zeros(n))

    @classmethod
    def linear(cls, c, offset=0.0):
        c = np.asarray(c, dtype=float)
        return cls(lambda x: float(c @ x) + offset, lambda x: c)

    @classmethod
    def quadratic(cls, Q, c=None, offset=0.0):
        """x -> x.Q.x/2 + c.x + offset with Q symmetrised."""
        Q = np.asarray(Q, dtype=float)
        Q = 0.5 * (Q + Q.T)
        c = np.zeros(Q.shape[0]) if c is None else np.asarray(c, dtype=float)
        return cls(lambda x: 0.5 * x @ Q @ x + c @ x + offset, lambda x: Q @ x + c)

    @classmethod
    def random_quadratic(cls, rng, n, scale=1.0):
        return cls.quadratic(
            scale * rng.standard_normal((n, n)),
            scale * rng.standard_normal(n),
            float(rng.standard_normal()),
        )

    @classmethod
    def coordinate(cls, i, n):
        e = np.zeros(n)
        e[i] = 1.0
        return cls.linear(e)


def fd_gradient(func, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (func(xp) - func(xm)) / (2 * h)
    return g


def fd_jacobian(func, x, h=1e-6):
    """Central-difference Jacobian of a vector-valued map."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        cols.append((np.asarray(func(xp), dtype=float) - np.asarray(func(xm), dtype=float)) / (2 * h))
    return np.stack(cols, axis=-1)


def fd_directional(func, x, v, h=1e-6):
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    return (np.asarray(func(x + h * v), dtype=float) - np.asarray(func(x - h * v), dtype=float)) / (2 * h)


# ---------------------------------------------------------------------- spaces


class PhaseSpace:
    """Embedded model space. Subclasses fill in the geometry."""

    kind = "abstract"
    symplectic = False
    ambient_dim: int
    dim: int

    def constraints(self, x):
        return np.zeros(0)

    def constraint_jacobian(self, x):
        return np.zeros((0, self.ambient_dim))

    def project(self, x):
        return np.asarray(x, dtype=float)

    def tangent_basis(self, x):
        return np.eye(self.ambient_dim)

    def bivector(self, x):
        raise NotImplementedError

    def omega_tangent(self, x):
        """Matrix of omega in the coordinates of ``tangent_basis(x)``."""
        raise UnsupportedError(f"{self.kind} carries no symplectic form")

    def random_point(self, rng):
        return rng.standard_normal(self.ambient_dim)

    def constraint_residual(self, x):
        c = self.constraints(x)
        return float(np.max(np.abs(c))) if c.size else 0.0

    def check_point(self, x, tol=ON_MANIFOLD_TOL):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.ambient_dim,):
            raise DimensionError(
                f"{self.kind}: expected ambient vector of length {self.ambient_dim}, got {x.shape}"
            )
        r = self.constraint_residual(x)
        if r > tol:
            raise ConstraintViolation(f"{self.kind}: point violates constraints by {r:.3e}")
        return x

    def tangent_coords(self, x, u, tol=1e-8):
        """Coordinates of ambient vector ``u`` in ``tangent_basis(x)``."""
        T = self.tangent_basis(x)
        c, *_ = np.linalg.lstsq(T, u, rcond=None)
        res = np.linalg.norm(T @ c - u)
        if res > tol * max(1.0, np.linalg.norm(u)):
            raise TangencyError(f"{self.kind}: vector is not tangent (residual {res:.3e})")
        return c


class StandardSymplectic(PhaseSpace):
    """R^{2n} with coordinates (q^1..q^n, p_1..p_n) and omega = dq^i ^ dp_i."""

    kind = "standard"
    symplectic = True

    def __init__(self, n):
        self.n = n
        self.ambient_dim = self.dim = 2 * n
        I = np.eye(n)
        Z = np.zeros((n, n))
        self._W = np.block([[Z, I], [-I, Z]])
        self._B = np.block([[Z, -I], [I, Z]])

    def bivector(self, x):
        return self._B

    def omega_tangent(self, x):
        return self._W


class ConstantPoisson(PhaseSpace):
    """R^n with a constant Poisson bivector."""

    kind = "constant"

    def __init__(self, B):
        B = np.asarray(B, dtype=float)
        if B.shape[0] != B.shape[1] or np.max(np.abs(B + B.T)) > 0:
            raise DimensionError("constant bivector must be a square antisymmetric matrix")
        self._B = B
        self.ambient_dim = self.dim = B.shape[0]

    def bivector(self, x):
        return self._B

    @classmethod
    def from_pairs(cls, n, pairs):
        """Sum of d_i ^ d_j for (i, j) in ``pairs`` (0-based)."""
        B = np.zeros((n, n))
        for i, j in pairs:
            B[i, j] += 1.0
            B[j, i] -= 1.0
        return cls(B)


class Sphere2(PhaseSpace):
    """Round sphere of given radius in R^3 with omega_x(u, v) = <x, u x v> / r^2.

    For the unit sphere this is the area form. The Hamiltonian field is found
    by solving i_v omega = df on the tangent plane.
    """

    kind = "sphere"
    symplectic = True
    ambient_dim = 3
    dim = 2

    def __init__(self, radius=1.0):
        self.radius = float(radius)

    def constraints(self, x):
        return np.array([x @ x - self.radius**2])

    def constraint_jacobian(self, x):
        return 2 * np.asarray(x, dtype=float)[None, :]

    def project(self, x):
        return self.radius * x / np.linalg.norm(x)

    def tangent_basis(self, x):
        n = x / np.linalg.norm(x)
        a = np.array([1.0, 0, 0]) if abs(n[0]) < 0.9 else np.array([0, 1.0, 0])
        t1 = np.cross(n, a)
        t1 /= np.linalg.norm(t1)
        t2 = np.cross(n, t1)
        return np.stack([t1, t2], axis=1)

    def omega_tangent(self, x):
        T = self.tangent_basis(x)
        w = x @ np.cross(T[:, 0], T[:, 1]) / self.radius**2
        return np.array([[0.0, w], [-w, 0.0]])

    def bivector(self, x):
        T = self.tangent_basis(x)
        return T @ np.linalg.inv(self.omega_tangent(x)) @ T.T

    def random_point(self, rng):
        return self.project(rng.standard_normal(3))


class LiePoissonDual(PhaseSpace):
    """Dual of a Lie algebra with B[i, j](alpha) = -alpha([e_i, e_j])."""

    kind = "lie-poisson"

    def __init__(self, algebra: LieAlgebra):
        self.algebra = algebra
        self.ambient_dim = self.dim = algebra.dim

    def bivector(self, x):
        return -np.einsum("ijk,k->ij", self.algebra.structure_constants, x)


class CotangentGroup(PhaseSpace):
    """T*G trivialised by right translations, embedded as (vec g, alpha).

    Tangent vectors are R_{g*} xi + beta, i.e. ambient (vec(X_xi g), beta).
    The symplectic form is omega(R xi + b, R eta + c) = c(xi) - b(eta) - alpha([xi, eta]).
    """

    kind = "cotangent"
    symplectic = True

    def __init__(self, algebra: LieAlgebra):
        if algebra.is_complex_rep:
            raise UnsupportedError("CotangentGroup needs a real matrix representation")
        self.algebra = algebra
        self.n = algebra.rep_size
        self.d = algebra.dim
        self.ambient_dim = self.n * self.n + self.d
        self.dim = 2 * self.d
        iu = np.triu_indices(self.n)
        self._iu = iu

    def pack(self, g, alpha):
        return np.concatenate([np.asarray(g, dtype=float).ravel(), np.asarray(alpha, dtype=float)])

    def unpack(self, x):
        n2 = self.n * self.n
        return x[:n2].reshape(self.n, self.n), x[n2:]

    def constraints(self, x):
        g, _ = self.unpack(x)
        if self.algebra.kind == "so":
            return (g.T @ g - np.eye(self.n))[self._iu]
        return np.atleast_1d(self.algebra.group_residual(g))

    def constraint_jacobian(self, x):
        return fd_jacobian(self.constraints, x, 1e-7)

    def project(self, x):
        g, a = self.unpack(x)
        return self.pack(self.algebra.maybe_reproject(g), a)

    def right_trivialization(self, x):
        """Ambient images of R_{g*} e_i and of the dual basis (columns)."""
        g, _ = self.unpack(x)
        n2 = self.n * self.n
        J = np.zeros((self.ambient_dim, 2 * self.d))
        for i, E in enumerate(self.algebra.matrix_rep):
            J[:n2, i] = (E @ g).ravel()
        J[n2:, self.d :] = np.eye(self.d)
        return J

    tangent_basis = right_trivialization

    def omega_tangent(self, x):
        _, a = self.unpack(x)
        A = np.einsum("ijk,k->ij", self.algebra.structure_constants, a)
        I = np.eye(self.d)
        return np.block([[-A, I], [-I, np.zeros((self.d, self.d))]])

    def bivector(self, x):
        J = self.right_trivialization(x)
        return J @ np.linalg.inv(self.omega_tangent(x)) @ J.T

    def random_point(self, rng):
        return self.pack(self.algebra.random_element(rng), rng.standard_normal(self.d))


class Product(PhaseSpace):
    kind = "product"

    def __init__(self, *spaces):
        self.spaces = spaces
        self.symplectic = all(s.symplectic for s in spaces)
        self.ambient_dim = sum(s.ambient_dim for s in spaces)
        self.dim = sum(s.dim for s in spaces)
        self._offsets = np.cumsum([0] + [s.ambient_dim for s in spaces])

    def split(self, x):
        return [x[a:b] for a, b in zip(self._offsets[:-1], self._offsets[1:])]

    def join(self, parts):
        return np.concatenate(parts)

    def constraints(self, x):
        return np.concatenate([s.constraints(p) for s, p in zip(self.spaces, self.split(x))])

    def constraint_jacobian(self, x):
        blocks = [s.constraint_jacobian(p) for s, p in zip(self.spaces, self.split(x))]
        rows = sum(b.shape[0] for b in blocks)
        J = np.zeros((rows, self.ambient_dim))
        r = 0
        for b, a in zip(blocks, self._offsets[:-1]):
            J[r : r + b.shape[0], a : a + b.shape[1]] = b
            r += b.shape[0]
        return J

    def project(self, x):
        return self.join([s.project(p) for s, p in zip(self.spaces, self.split(x))])

    def _blockdiag(self, mats, row_sizes, col_sizes):
        out = np.zeros((sum(row_sizes), sum(col_sizes)))
        r = c = 0
        for m, rs, cs in zip(mats, row_sizes, col_sizes):
            out[r : r + rs, c : c + cs] = m
            r += rs
            c += cs
        return out

    def tangent_basis(self, x):
        parts = self.split(x)
        mats = [s.tangent_basis(p) for s, p in zip(self.spaces, parts)]
        return self._blockdiag(mats, [m.shape[0] for m in mats], [m.shape[1] for m in mats])

    def omega_tangent(self, x):
        if not self.symplectic:
            raise UnsupportedError("product has a non-symplectic factor")
        mats = [s.omega_tangent(p) for s, p in zip(self.spaces, self.split(x))]
        sizes = [m.shape[0] for m in mats]
        return self._blockdiag(mats, sizes, sizes)

    def bivector(self, x):
        mats = [s.bivector(p) for s, p in zip(self.spaces, self.split(x))]
        sizes = [m.shape[0] for m in mats]
        return self._blockdiag(mats, sizes, sizes)

    def random_point(self, rng):
        return self.join([s.random_point(rng) for s in self.spaces])


# ------------------------------------------------------------------ operations


def bivector_at(space, x):
    space.check_point(x)
    return space.bivector(np.asarray(x, dtype=float))


def sharp(space, x, covector):
    """Pi(lambda) = i_lambda Pi as an ambient vector."""
    return space.bivector(x).T @ np.asarray(covector, dtype=float)


def symplectic_form_at(space, x, u, v):
    if not space.symplectic:
        raise UnsupportedError(f"{space.kind} carries no symplectic form")
    x = space.check_point(x)
    cu = space.tangent_coords(x, np.asarray(u, dtype=float))
    cv = space.tangent_coords(x, np.asarray(v, dtype=float))
    return float(cu @ space.omega_tangent(x) @ cv)


def hamiltonian_vf(space, H, x, check=True):
    x = space.check_point(x) if check else np.asarray(x, dtype=float)
    return space.bivector(x).T @ H.gradient(x)


def poisson_bracket(space, f, g, x, check=True):
    x = space.check_point(x) if check else np.asarray(x, dtype=float)
    return float(f.gradient(x) @ space.bivector(x) @ g.gradient(x))


def bracket_field(space, f, g, fd_step=1e-5):
    """{f, g} as a ScalarField on the ambient space (gradient by differences)."""
    return ScalarField(lambda x: poisson_bracket(space, f, g, x, check=False), None, fd_step)


COTANGENT_BRACKET_SIGN = -1.0


def _cotangent_partials(space, F, x):
    J = space.right_trivialization(x)
    dF = J.T @ F.gradient(x)
    return dF[: space.d], dF[space.d :]


def cotangent_group_bracket(space: CotangentGroup, F, H, x, sign=None):
    """H_g(R_{g*} F_alpha) - F_g(R_{g*} H_alpha) + sign * alpha([F_alpha, H_alpha]).

    ``sign`` defaults to the value pinned by agreement with -omega(X_F, X_H).
    """
    x = space.check_point(x)
    s = COTANGENT_BRACKET_SIGN if sign is None else sign
    _, alpha = space.unpack(x)
    Fg, Fa = _cotangent_partials(space, F, x)
    Hg, Ha = _cotangent_partials(space, H, x)
    alg = space.algebra
    return float(Hg @ Fa - Fg @ Ha + s * alpha @ alg.bracket(Fa, Ha))


def resolve_cotangent_bracket_sign(space: CotangentGroup, F, H, x):
    """Return the sign of the alpha([F_a, H_a]) term that matches -omega(X_F, X_H)."""
    XF = hamiltonian_vf(space, F, x)
    XH = hamiltonian_vf(space, H, x)
    target = -symplectic_form_at(space, x, XF, XH)
    plus = cotangent_group_bracket(space, F, H, x, sign=+1.0)
    minus = cotangent_group_bracket(space, F, H, x, sign=-1.0)
    return (+1.0 if abs(plus - target) < abs(minus - target) else -1.0), target


# ------------------------------------------------------------------ trajectories


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    space: Optional[PhaseSpace] = None
    columns: Optional[list] = None
    extras: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    def max_constraint_residual(self):
        if self.space is None:
            return 0.0
        return max((self.space.constraint_residual(s) for s in self.states), default=0.0)

    def table(self):
        names = ["t"] + (self.columns or [f"x{i + 1}" for i in range(self.states.shape[1])])
        cols = [self.times[:, None], self.states]
        for k, v in self.extras.items():
            names.append(k)
            cols.append(np.asarray(v, dtype=float)[:, None])
        return names, np.hstack(cols)

    def to_csv(self, path):
        names, data = self.table()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(names)
            for row in data:
                w.writerow([f"{v:.15g}" for v in row])

    def to_json(self, path=None):
        names, data = self.table()
        payload = {
            "schema": 1,
            "columns": names,
            "rows": [[float(f"{v:.15g}") for v in row] for row in data],
        }
        text = json.dumps(payload, indent=1)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def rk4(vf, x0, T, dt, project=None, post_step=None):
    """Fixed-step classical Runge-Kutta; returns (times, states).

    The step is shrunk to T/ceil(T/dt) so the last sample lands on T exactly.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    steps = int(np.ceil(abs(T) / dt - 1e-9))
    h = T / steps if steps else dt
    xs = np.empty((steps + 1, np.size(x0)))
    x = np.asarray(x0, dtype=float).copy()
    xs[0] = x
    for k in range(steps):
        k1 = vf(x)
        k2 = vf(x + 0.5 * h * k1)
        k3 = vf(x + 0.5 * h * k2)
        k4 = vf(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if project is not None:
            x = project(x)
        xs[k + 1] = x
        if post_step is not None:
            try:
                post_step(k + 1, x)
            except Exception as exc:
                exc.partial = (h * np.arange(k + 2), xs[: k + 2].copy())
                raise
    times = h * np.arange(steps + 1)
    return times, xs


def flow(space, H, x0, T, dt, columns=None):
    """Integral curve of X_H by RK4 with constraint re-projection after each step."""
    x0 = space.check_point(x0)

    def vf(x):
        return space.bivector(x).T @ H.gradient(x)

    def post(k, x):
        r = space.constraint_residual(x)
        if r > DRIFT_TOL:
            raise IntegrationFailure(f"constraint drift {r:.3e} at step {k}")

    try:
        times, xs = rk4(vf, x0, T, dt, project=space.project, post_step=post)
    except IntegrationFailure as exc:
        exc.partial = Trajectory(*exc.partial, space, columns)
        raise
    return Trajectory(times, xs, space, columns)


def check_jacobi(space, f, g, h, x, fd_step=1e-5):
    """|{f,{g,h}} + {g,{h,f}} + {h,{f,g}}| at x with differenced inner brackets."""
    x = np.asarray(x, dtype=float)
    total = 0.0
    for a, b, c in ((f, g, h), (g, h, f), (h, f, g)):
        inner = bracket_field(space, b, c, fd_step)
        total += poisson_bracket(space, a, inner, x, check=False)
    return abs(total)

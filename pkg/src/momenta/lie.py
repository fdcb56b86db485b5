"""Finite-dimensional Lie algebras and their matrix groups.

An algebra is a basis plus structure constants ``c[i, j, k]`` with
``[e_i, e_j] = sum_k c[i, j, k] e_k``. Every built-in algebra also carries a
faithful matrix representation, so group elements are always square
matrices: orthogonal for so(n), unitary for su(n)/u(n), diagonal unitary for
tori, and affine unipotent for the translation group R^n. Algebra elements
and dual elements are plain coefficient vectors (the dual in the dual basis).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from .errors import DimensionError, UnsupportedError

GROUP_TOL = 1e-10
REPROJECT_TOL = 1e-8


def hat(v):
    """R^3 -> so(3) such that ``hat(v) @ q == np.cross(v, q)``."""
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise DimensionError(f"hat expects a length-3 vector, got shape {v.shape}")
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def vee(X):
    X = np.asarray(X)
    if X.shape != (3, 3):
        raise DimensionError(f"vee expects a 3x3 matrix, got shape {X.shape}")
    return np.array([X[2, 1], X[0, 2], X[1, 0]], dtype=float)


def rodrigues(v):
    """Closed-form exponential of hat(v)."""
    v = np.asarray(v, dtype=float)
    theta = np.linalg.norm(v)
    K = hat(v)
    if theta < 1e-8:
        # Taylor coefficients to O(theta^4)
        a = 1.0 - theta**2 / 6.0
        b = 0.5 - theta**2 / 24.0
    else:
        a = np.sin(theta) / theta
        b = (1.0 - np.cos(theta)) / theta**2
    return np.eye(3) + a * K + b * (K @ K)


def _realify(M):
    M = np.asarray(M)
    if np.iscomplexobj(M):
        return np.concatenate([M.real.ravel(), M.imag.ravel()])
    return np.concatenate([M.ravel(), np.zeros(M.size)])


@dataclass(eq=False)
class LieAlgebra:
    """Basis-and-structure-constant Lie algebra with a matrix representation."""

    name: str
    structure_constants: np.ndarray
    basis_labels: tuple
    matrix_rep: np.ndarray
    kind: str
    factors: tuple = field(default=())

    def __post_init__(self):
        c = np.asarray(self.structure_constants, dtype=float)
        d = len(self.basis_labels)
        if c.shape != (d, d, d):
            raise DimensionError(f"structure constants must have shape {(d, d, d)}")
        self.structure_constants = c
        self.matrix_rep = np.asarray(self.matrix_rep)

    # ------------------------------------------------------------------ algebra
    @property
    def dim(self):
        return len(self.basis_labels)

    @property
    def rep_size(self):
        return self.matrix_rep.shape[1]

    @property
    def is_complex_rep(self):
        return np.iscomplexobj(self.matrix_rep)

    def _check(self, *vectors):
        for v in vectors:
            if np.shape(v) != (self.dim,):
                raise DimensionError(
                    f"{self.name}: expected coefficient vector of length {self.dim}, "
                    f"got shape {np.shape(v)}"
                )

    def basis(self, i):
        e = np.zeros(self.dim)
        e[i] = 1.0
        return e

    def bracket(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        self._check(x, y)
        return np.einsum("i,j,ijk->k", x, y, self.structure_constants)

    def ad(self, x):
        """Matrix of ad x acting on coefficient vectors."""
        x = np.asarray(x, dtype=float)
        self._check(x)
        return np.einsum("i,ijk->kj", x, self.structure_constants)

    def killing(self, x, y):
        return float(np.trace(self.ad(x) @ self.ad(y)))

    @cached_property
    def killing_matrix(self):
        ads = [self.ad(self.basis(i)) for i in range(self.dim)]
        return np.array([[np.trace(a @ b) for b in ads] for a in ads])

    def pair(self, a, x):
        """Dual pairing a(x)."""
        self._check(np.asarray(a), np.asarray(x))
        return float(np.dot(a, x))

    def coadjoint_generator(self, x, a):
        """Infinitesimal coadjoint action: the covector eta -> -a([x, eta])."""
        a = np.asarray(a, dtype=float)
        self._check(a)
        return -self.ad(x).T @ a

    def structure_residual(self):
        """Largest violation of antisymmetry and of the Jacobi identity."""
        c = self.structure_constants
        anti = np.max(np.abs(c + c.transpose(1, 0, 2))) if c.size else 0.0
        jac = (
            np.einsum("ijm,mkl->ijkl", c, c)
            + np.einsum("jkm,mil->ijkl", c, c)
            + np.einsum("kim,mjl->ijkl", c, c)
        )
        return float(max(anti, np.max(np.abs(jac)) if jac.size else 0.0))

    # ------------------------------------------------------------ representation
    def hat(self, x):
        x = np.asarray(x, dtype=float)
        self._check(x)
        return np.tensordot(x, self.matrix_rep, axes=1)

    @cached_property
    def _vee_pinv(self):
        B = np.stack([_realify(E) for E in self.matrix_rep], axis=1)
        return np.linalg.pinv(B)

    def vee(self, X):
        return self._vee_pinv @ _realify(X)

    def rep_residual(self):
        """Largest mismatch between matrix commutators and structure constants."""
        worst = 0.0
        for i in range(self.dim):
            for j in range(self.dim):
                Ei, Ej = self.matrix_rep[i], self.matrix_rep[j]
                lhs = Ei @ Ej - Ej @ Ei
                rhs = np.tensordot(self.structure_constants[i, j], self.matrix_rep, axes=1)
                worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        return worst

    # ----------------------------------------------------------------- group
    def identity(self):
        return np.eye(self.rep_size, dtype=self.matrix_rep.dtype)

    def exp(self, x):
        X = self.hat(x)
        if self.kind == "so" and self.rep_size == 3:
            return rodrigues(vee(X))
        if self.kind == "su" and self.rep_size == 2:
            # X^2 = -theta^2 I for traceless anti-Hermitian 2x2 X, so |X|_F^2 = 2 theta^2
            theta = np.linalg.norm(X) / np.sqrt(2.0)
            s = 1.0 if theta < 1e-12 else np.sin(theta) / theta
            return np.cos(theta) * np.eye(2) + s * X
        if self.kind == "torus":
            return np.diag(np.exp(np.diag(X)))
        return scipy.linalg.expm(X)

    def mul(self, g, h):
        return g @ h

    def inv(self, g):
        if self.kind in ("so",):
            return g.T
        if self.kind in ("su", "u", "torus"):
            return g.conj().T
        return np.linalg.inv(g)

    def Ad(self, g, x):
        x = np.asarray(x, dtype=float)
        self._check(x)
        return self.vee(g @ self.hat(x) @ self.inv(g))

    def Ad_matrix(self, g):
        ginv = self.inv(g)
        return np.stack(
            [self.vee(g @ E @ ginv) for E in self.matrix_rep], axis=1
        )

    def Ad_star(self, g, a):
        """Coadjoint action Ad*(g) a = a o Ad(g^-1)."""
        a = np.asarray(a, dtype=float)
        self._check(a)
        return self.Ad_matrix(self.inv(g)).T @ a

    def group_residual(self, g):
        """Distance of ``g`` from satisfying the group invariants."""
        g = np.asarray(g)
        n = self.rep_size
        if g.shape != (n, n):
            raise DimensionError(f"{self.name}: expected {n}x{n} group matrix")
        if self.kind == "product":
            res, k = 0.0, 0
            for f in self.factors:
                m = f.rep_size
                res = max(res, f.group_residual(g[k : k + m, k : k + m]))
                k += m
            off = g.copy()
            k = 0
            for f in self.factors:
                m = f.rep_size
                off[k : k + m, k : k + m] = 0
                k += m
            return max(res, float(np.max(np.abs(off))))
        if self.kind == "so":
            return max(
                float(np.max(np.abs(g.T @ g - np.eye(n)))), abs(np.linalg.det(g) - 1.0)
            )
        if self.kind == "su":
            return max(
                float(np.max(np.abs(g.conj().T @ g - np.eye(n)))),
                abs(np.linalg.det(g) - 1.0),
            )
        if self.kind in ("u", "torus"):
            res = float(np.max(np.abs(g.conj().T @ g - np.eye(n))))
            if self.kind == "torus":
                res = max(res, float(np.max(np.abs(g - np.diag(np.diag(g))))))
            return res
        if self.kind == "vector":
            ref = np.eye(n)
            ref[:-1, -1] = g[:-1, -1]
            return float(np.max(np.abs(g - ref)))
        raise UnsupportedError(f"unknown group kind {self.kind}")

    def is_group_element(self, g, tol=GROUP_TOL):
        return self.group_residual(g) <= tol

    def reproject(self, g):
        """Nearest group element (polar decomposition for compact groups)."""
        if self.kind == "product":
            out = np.zeros_like(g)
            k = 0
            for f in self.factors:
                m = f.rep_size
                out[k : k + m, k : k + m] = f.reproject(g[k : k + m, k : k + m])
                k += m
            return out
        if self.kind in ("so", "su", "u"):
            U, _, Vh = np.linalg.svd(g)
            q = U @ Vh
            if self.kind == "so" and np.linalg.det(q) < 0:
                U[:, -1] *= -1
                q = U @ Vh
            if self.kind == "su":
                phase = np.angle(np.linalg.det(q))
                q = q * np.exp(-1j * phase / self.rep_size)
            return q
        if self.kind == "torus":
            d = np.diag(g)
            return np.diag(d / np.abs(d))
        if self.kind == "vector":
            out = np.eye(self.rep_size)
            out[:-1, -1] = np.real(g[:-1, -1])
            return out
        raise UnsupportedError(f"unknown group kind {self.kind}")

    def maybe_reproject(self, g, tol=REPROJECT_TOL):
        return self.reproject(g) if self.group_residual(g) > tol else g

    def random_element(self, rng, scale=1.0):
        return self.exp(scale * rng.standard_normal(self.dim))

    def torus_angles(self, g):
        if self.kind != "torus":
            raise UnsupportedError("torus_angles only applies to tori")
        return np.mod(np.angle(np.diag(g)), 2 * np.pi)


def _from_matrices(name, mats, labels, kind, factors=()):
    mats = np.asarray(mats)
    d = len(mats)
    probe = LieAlgebra(name, np.zeros((d, d, d)), tuple(labels), mats, kind, factors)
    c = np.zeros((d, d, d))
    for i in range(d):
        for j in range(d):
            C = mats[i] @ mats[j] - mats[j] @ mats[i]
            c[i, j] = probe.vee(C)
    c[np.abs(c) < 1e-14] = 0.0
    return LieAlgebra(name, c, tuple(labels), mats, kind, factors)


def so3():
    eps = np.zeros((3, 3, 3))
    for i, j, k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
        eps[i, j, k] = 1.0
        eps[j, i, k] = -1.0
    mats = np.array([hat(np.eye(3)[i]) for i in range(3)])
    return LieAlgebra("so3", eps, ("e1", "e2", "e3"), mats, "so")


_PAULI = np.array(
    [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex
)


def su2():
    mats = -0.5j * _PAULI
    return _from_matrices("su2", mats, ("e1", "e2", "e3"), "su")


def u2():
    mats = np.concatenate([-0.5j * _PAULI, [-0.5j * np.eye(2)]])
    return _from_matrices("u2", mats, ("e1", "e2", "e3", "e4"), "u")


def _gell_mann():
    L = np.zeros((8, 3, 3), dtype=complex)
    L[0][0, 1] = L[0][1, 0] = 1
    L[1][0, 1], L[1][1, 0] = -1j, 1j
    L[2][0, 0], L[2][1, 1] = 1, -1
    L[3][0, 2] = L[3][2, 0] = 1
    L[4][0, 2], L[4][2, 0] = -1j, 1j
    L[5][1, 2] = L[5][2, 1] = 1
    L[6][1, 2], L[6][2, 1] = -1j, 1j
    L[7] = np.diag([1, 1, -2]) / np.sqrt(3)
    return L


def su3():
    mats = -0.5j * _gell_mann()
    return _from_matrices("su3", mats, tuple(f"e{i + 1}" for i in range(8)), "su")


def torus(n):
    mats = np.zeros((n, n, n), dtype=complex)
    for i in range(n):
        mats[i, i, i] = 1j
    return LieAlgebra(
        f"t{n}", np.zeros((n, n, n)), tuple(f"e{i + 1}" for i in range(n)), mats, "torus"
    )


def translations(n):
    """Abelian algebra R^n of the additive group, as affine (n+1)x(n+1) matrices."""
    mats = np.zeros((n, n + 1, n + 1))
    for i in range(n):
        mats[i, i, n] = 1.0
    return LieAlgebra(
        f"r{n}", np.zeros((n, n, n)), tuple(f"a{i + 1}" for i in range(n)), mats, "vector"
    )


def product(*algebras):
    dims = [a.dim for a in algebras]
    sizes = [a.rep_size for a in algebras]
    d, n = sum(dims), sum(sizes)
    complex_rep = any(a.is_complex_rep for a in algebras)
    mats = np.zeros((d, n, n), dtype=complex if complex_rep else float)
    c = np.zeros((d, d, d))
    labels = []
    i0 = r0 = 0
    for a in algebras:
        mats[i0 : i0 + a.dim, r0 : r0 + a.rep_size, r0 : r0 + a.rep_size] = a.matrix_rep
        c[i0 : i0 + a.dim, i0 : i0 + a.dim, i0 : i0 + a.dim] = a.structure_constants
        labels += [f"{a.name}.{lab}" for lab in a.basis_labels]
        i0 += a.dim
        r0 += a.rep_size
    name = "x".join(a.name for a in algebras)
    return LieAlgebra(name, c, tuple(labels), mats, "product", tuple(algebras))


BUILTIN_ALGEBRAS = {
    "so3": so3,
    "su2": su2,
    "su3": su3,
    "u2": u2,
    "t1": lambda: torus(1),
    "t2": lambda: torus(2),
    "t3": lambda: torus(3),
    "su2xsu2": lambda: product(su2(), su2()),
}


def algebra_by_name(name):
    try:
        return BUILTIN_ALGEBRAS[name]()
    except KeyError:
        raise UnsupportedError(f"unknown algebra {name!r}") from None


# explicit named identifications; they are coordinate identities by design
def so3_to_r3(x):
    """so(3) coefficients -> R^3 under the hat identification."""
    return np.asarray(x, dtype=float).copy()


def so3_dual_to_r3(a):
    """so(3)* dual-basis coefficients -> R^3 via the Euclidean inner product."""
    return np.asarray(a, dtype=float).copy()

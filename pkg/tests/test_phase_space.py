import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from momenta import lie
from momenta.errors import ConstraintViolation, DimensionError, UnsupportedError
from momenta.phase_space import (
    COTANGENT_BRACKET_SIGN,
    ConstantPoisson,
    CotangentGroup,
    LiePoissonDual,
    Product,
    ScalarField,
    Sphere2,
    StandardSymplectic,
    bivector_at,
    check_jacobi,
    cotangent_group_bracket,
    flow,
    hamiltonian_vf,
    poisson_bracket,
    resolve_cotangent_bracket_sign,
    sharp,
    symplectic_form_at,
)
from momenta.reduction import rigid_body_hamiltonian

SPACES = {
    "standard": StandardSymplectic(2),
    "constant": ConstantPoisson.from_pairs(5, [(0, 1), (2, 3)]),
    "sphere": Sphere2(1.0),
    "sphere-r2": Sphere2(2.0),
    "so3-dual": LiePoissonDual(lie.so3()),
    "su3-dual": LiePoissonDual(lie.su3()),
    "cotangent": CotangentGroup(lie.so3()),
    "product": Product(Sphere2(1.0), StandardSymplectic(1)),
}
SYMPLECTIC = ["standard", "sphere", "sphere-r2", "cotangent", "product"]


def test_standard_sharp_matrix():
    # the sharp map dq -> ..., dp -> ... has matrix [[0, 1], [-1, 0]]
    space = StandardSymplectic(1)
    x = np.array([0.3, -0.7])
    S = np.stack([sharp(space, x, e) for e in np.eye(2)], axis=1)
    assert np.allclose(S, [[0, 1], [-1, 0]])


def test_lie_poisson_bivector_values():
    space = LiePoissonDual(lie.so3())
    assert np.isclose(bivector_at(space, [0, 0, 1])[0, 1], -1.0)
    assert np.allclose(bivector_at(space, np.zeros(3)), 0.0)


@pytest.mark.parametrize("name", sorted(SPACES))
def test_bivector_antisymmetric(name):
    space = SPACES[name]
    rng = np.random.default_rng(0)
    for _ in range(100):
        x = space.random_point(rng)
        v = rng.standard_normal(space.ambient_dim)
        assert abs(v @ space.bivector(x) @ v) < 1e-12 * max(1.0, np.linalg.norm(space.bivector(x)))


@pytest.mark.parametrize("name", SYMPLECTIC)
def test_bivector_inverts_symplectic_form(name):
    space = SPACES[name]
    rng = np.random.default_rng(1)
    for _ in range(20):
        x = space.random_point(rng)
        T = space.tangent_basis(x)
        W = space.omega_tangent(x)
        # Pi in tangent coordinates is W^-1, and omega(Pi(l), .) = l on tangent vectors
        Bt = np.linalg.pinv(T) @ space.bivector(x) @ np.linalg.pinv(T).T
        assert np.max(np.abs(Bt @ W - np.eye(W.shape[0]))) < 1e-10
        lam = rng.standard_normal(space.ambient_dim)
        v = sharp(space, x, lam)
        for u in T.T:
            assert abs(symplectic_form_at(space, x, v, u) - lam @ u) < 1e-9


def test_symplectic_form_examples():
    sphere = Sphere2(1.0)
    assert np.isclose(symplectic_form_at(sphere, [0, 0, 1], [1, 0, 0], [0, 1, 0]), 1.0)
    cg = CotangentGroup(lie.so3())
    rng = np.random.default_rng(2)
    x = cg.random_point(rng)
    g, _ = cg.unpack(x)
    xi, gamma = rng.standard_normal(3), rng.standard_normal(3)
    u = cg.pack(lie.hat(xi) @ g, np.zeros(3))
    v = cg.pack(np.zeros((3, 3)), gamma)
    assert np.isclose(symplectic_form_at(cg, x, u, v), gamma @ xi)
    assert np.isclose(symplectic_form_at(cg, x, u, u), 0.0)


def test_symplectic_form_rejects_non_tangent_and_poisson():
    with pytest.raises(Exception):
        symplectic_form_at(Sphere2(1.0), [0, 0, 1], [0, 0, 1], [1, 0, 0])
    with pytest.raises(UnsupportedError):
        symplectic_form_at(LiePoissonDual(lie.so3()), [0, 0, 1], [1, 0, 0], [0, 1, 0])


def test_hamiltonian_vf_standard():
    space = StandardSymplectic(2)
    rng = np.random.default_rng(3)
    H = ScalarField.random_quadratic(rng, 4)
    x = rng.standard_normal(4)
    dH = H.gradient(x)
    assert np.allclose(hamiltonian_vf(space, H, x), np.concatenate([dH[2:], -dH[:2]]))
    assert np.allclose(hamiltonian_vf(space, ScalarField.constant(1.0, 4), x), 0.0)


def test_rigid_body_field_is_time_reversed_euler():
    # X_H = Pi(dH) = Omega x alpha; Euler's body equation is alpha' = alpha x Omega
    space = LiePoissonDual(lie.so3())
    H = rigid_body_hamiltonian((1.0, 2.0, 3.0))
    rng = np.random.default_rng(4)
    for _ in range(10):
        a = rng.standard_normal(3)
        Om = a / np.array([1.0, 2.0, 3.0])
        assert np.allclose(hamiltonian_vf(space, H, a), -np.cross(a, Om))


def test_poisson_bracket_examples():
    std = StandardSymplectic(1)
    q, p = ScalarField.coordinate(0, 2), ScalarField.coordinate(1, 2)
    # {q, p} = omega-convention sign, see the module docstring
    assert np.isclose(poisson_bracket(std, q, p, [0.1, 0.2]), -1.0)
    lp = LiePoissonDual(lie.so3())
    a = np.array([0.3, -1.2, 0.7])
    f, g = ScalarField.coordinate(0, 3), ScalarField.coordinate(1, 3)
    assert np.isclose(poisson_bracket(lp, f, g, a), -a[2])
    assert np.isclose(poisson_bracket(lp, f, f, a), 0.0)


@pytest.mark.parametrize("name", sorted(SPACES))
def test_leibniz_rule(name):
    space = SPACES[name]
    rng = np.random.default_rng(5)
    n = space.ambient_dim
    for _ in range(20):
        x = space.random_point(rng)
        f, g, h = (ScalarField.random_quadratic(rng, n) for _ in range(3))
        lhs = poisson_bracket(space, f, g * h, x)
        rhs = poisson_bracket(space, f, g, x) * h(x) + g(x) * poisson_bracket(space, f, h, x)
        assert abs(lhs - rhs) < 1e-6 * max(1.0, abs(lhs))


def test_cotangent_bracket_sign_resolves_to_minus():
    cg = CotangentGroup(lie.so3())
    rng = np.random.default_rng(6)
    for _ in range(5):
        x = cg.random_point(rng)
        F = ScalarField.random_quadratic(rng, cg.ambient_dim)
        H = ScalarField.random_quadratic(rng, cg.ambient_dim)
        sign, target = resolve_cotangent_bracket_sign(cg, F, H, x)
        assert sign == COTANGENT_BRACKET_SIGN == -1.0
        assert np.isclose(cotangent_group_bracket(cg, F, H, x), target)
        assert np.isclose(cotangent_group_bracket(cg, F, H, x), poisson_bracket(cg, F, H, x))


def test_cotangent_bracket_of_pulled_back_coordinates():
    cg = CotangentGroup(lie.so3())
    x = cg.pack(np.eye(3), [0.0, 0.0, 1.0])
    F = ScalarField.linear(np.eye(12)[9])
    H = ScalarField.linear(np.eye(12)[10])
    val = cotangent_group_bracket(cg, F, H, x)
    assert np.isclose(abs(val), 1.0)
    assert np.isclose(val, -1.0)
    assert np.isclose(cotangent_group_bracket(cg, F, F, x), 0.0)


def test_cotangent_rejects_complex_rep():
    with pytest.raises(UnsupportedError):
        CotangentGroup(lie.su2())


def test_check_point_errors():
    with pytest.raises(ConstraintViolation):
        Sphere2(1.0).check_point([0, 0, 1.1])
    with pytest.raises(DimensionError):
        StandardSymplectic(1).check_point([1.0, 2.0, 3.0])


def test_scalar_field_gradient_matches_differences():
    rng = np.random.default_rng(7)
    H = ScalarField.random_quadratic(rng, 4)
    Hfd = ScalarField(H.func)
    x = rng.standard_normal(4)
    assert np.max(np.abs(H.gradient(x) - Hfd.gradient(x))) < 1e-5


def test_oscillator_is_2pi_periodic():
    H = ScalarField(lambda x: 0.5 * x @ x, lambda x: x)
    tr = flow(StandardSymplectic(1), H, [1.0, 0.0], 2 * np.pi, 1e-3)
    assert np.max(np.abs(tr.states[-1] - [1.0, 0.0])) < 1e-6


def test_constant_hamiltonian_gives_constant_trajectory():
    tr = flow(Sphere2(1.0), ScalarField.constant(2.0, 3), [0, 0.6, 0.8], 1.0, 1e-2)
    assert np.allclose(tr.states, tr.states[0])


def test_rigid_body_casimir_and_energy():
    H = rigid_body_hamiltonian()
    tr = flow(LiePoissonDual(lie.so3()), H, [1.0, 0.3, -0.4], 10.0, 1e-3)
    c = np.sum(tr.states**2, axis=1)
    assert np.max(np.abs(c - c[0])) < 1e-8
    assert max(abs(H(a) - H(tr.states[0])) for a in tr.states) < 1e-6


def test_sphere_flow_stays_on_sphere():
    H = ScalarField(lambda x: x[0] * x[1] + x[2] ** 2)
    tr = flow(Sphere2(1.0), H, [0.6, 0.0, 0.8], 5.0, 1e-2)
    assert tr.max_constraint_residual() < 1e-12
    assert max(abs(H(s) - H(tr.states[0])) for s in tr.states) < 1e-6


def test_jacobi_examples():
    std = StandardSymplectic(2)
    coords = [ScalarField.coordinate(i, 4) for i in range(3)]
    assert check_jacobi(std, *coords, np.zeros(4)) == 0.0
    lp = LiePoissonDual(lie.so3())
    rng = np.random.default_rng(8)
    x = rng.standard_normal(3)
    lin = [ScalarField.linear(rng.standard_normal(3)) for _ in range(3)]
    # inner brackets are linear here, so a wide difference step is exact and avoids round-off
    assert check_jacobi(lp, *lin, x, fd_step=1e-2) < 1e-10
    quad = [ScalarField.random_quadratic(rng, 3) for _ in range(3)]
    assert check_jacobi(lp, *quad, x) < 1e-4


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_jacobi_on_sphere_random_quadratics(seed):
    rng = np.random.default_rng(seed)
    space = Sphere2(1.0)
    fs = [ScalarField.random_quadratic(rng, 3) for _ in range(3)]
    assert check_jacobi(space, *fs, space.random_point(rng)) < 1e-4


def test_trajectory_serialisation(tmp_path):
    tr = flow(StandardSymplectic(1), ScalarField(lambda x: 0.5 * x @ x, lambda x: x), [1.0, 0.0], 0.01, 1e-3)
    tr.extras["H"] = [0.5] * len(tr)
    tr.to_csv(tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "t,x1,x2,H"
    assert len(lines) == len(tr) + 1
    assert '"schema": 1' in tr.to_json()

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from momenta import lie
from momenta.errors import DimensionError, UnsupportedError

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)
vec3 = arrays(np.float64, 3, elements=finite)

ALL = sorted(lie.BUILTIN_ALGEBRAS)


@pytest.mark.parametrize("name", ALL)
def test_structure_constants_antisymmetric_and_jacobi(name):
    alg = lie.algebra_by_name(name)
    assert alg.structure_residual() <= 1e-12


@pytest.mark.parametrize("name", ALL)
def test_matrix_rep_matches_structure_constants(name):
    assert lie.algebra_by_name(name).rep_residual() <= 1e-12


def test_so3_bracket_is_commutator_of_hat_matrices():
    alg = lie.so3()
    X1, X2 = lie.hat([1, 0, 0]), lie.hat([0, 1, 0])
    oracle = lie.vee(X1 @ X2 - X2 @ X1)
    assert np.allclose(alg.bracket([1, 0, 0], [0, 1, 0]), oracle)
    assert np.allclose(oracle, [0, 0, 1])


@given(vec3, vec3)
def test_so3_bracket_is_cross_product(x, y):
    assert np.allclose(lie.so3().bracket(x, y), np.cross(x, y), atol=1e-12)


@given(vec3)
def test_self_bracket_vanishes(x):
    for alg in (lie.so3(), lie.su2()):
        assert np.allclose(alg.bracket(x, x), 0.0)


def test_torus_is_abelian():
    alg = lie.torus(3)
    assert np.allclose(alg.bracket([1, 2, 3], [-1, 0, 4]), 0.0)
    assert np.allclose(alg.killing_matrix, 0.0)


def test_bracket_rejects_wrong_length():
    with pytest.raises(DimensionError):
        lie.so3().bracket([1, 0], [0, 1, 0])


def test_exp_zero_is_identity():
    for name in ALL:
        alg = lie.algebra_by_name(name)
        assert np.allclose(alg.exp(np.zeros(alg.dim)), alg.identity())


def test_exp_pi_e3_is_half_turn():
    assert np.allclose(lie.so3().exp([0, 0, np.pi]), np.diag([-1.0, -1.0, 1.0]), atol=1e-12)


@given(vec3)
def test_rodrigues_matches_expm(v):
    assert np.allclose(lie.rodrigues(v), scipy.linalg.expm(lie.hat(v)), atol=1e-10)


@given(vec3)
def test_su2_closed_form_matches_expm(v):
    alg = lie.su2()
    assert np.allclose(alg.exp(v), scipy.linalg.expm(alg.hat(v)), atol=1e-10)


def test_torus_exp_gives_angles_mod_2pi():
    alg = lie.torus(2)
    xi = np.array([1.0, 2 * np.pi + 0.5])
    assert np.allclose(alg.torus_angles(alg.exp(xi)), [1.0, 0.5])


@pytest.mark.parametrize("name", ALL)
def test_exp_inverse_and_group_invariants(name):
    alg = lie.algebra_by_name(name)
    rng = np.random.default_rng(0)
    for _ in range(100):
        xi = rng.standard_normal(alg.dim)
        xi *= rng.uniform(0, 10) / np.linalg.norm(xi)
        g = alg.exp(xi)
        assert alg.group_residual(g) < 1e-10
        assert np.allclose(g @ alg.exp(-xi), alg.identity(), atol=1e-10)


def test_adjoint_examples():
    alg = lie.so3()
    R = alg.exp([0, 0, np.pi / 2])
    assert np.allclose(alg.Ad(alg.identity(), [1, 2, 3]), [1, 2, 3])
    assert np.allclose(alg.Ad(R, [1, 0, 0]), [0, 1, 0])
    # conjugation oracle
    assert np.allclose(alg.hat(alg.Ad(R, [1, 0, 0])), R @ lie.hat([1, 0, 0]) @ R.T)
    t = lie.torus(2)
    assert np.allclose(t.Ad(t.exp([0.3, 1.1]), [1.0, -2.0]), [1.0, -2.0])


def test_coadjoint_on_so3_rotates_vector():
    alg = lie.so3()
    rng = np.random.default_rng(1)
    for _ in range(10):
        R = alg.random_element(rng)
        a = rng.standard_normal(3)
        assert np.allclose(alg.Ad_star(R, a), R @ a)
        assert np.allclose(alg.Ad_star(alg.identity(), a), a)


@pytest.mark.parametrize("name", ["so3", "su2", "su3", "u2"])
def test_coadjoint_is_a_representation_and_preserves_pairing(name):
    alg = lie.algebra_by_name(name)
    rng = np.random.default_rng(2)
    for _ in range(50):
        g, h = alg.random_element(rng), alg.random_element(rng)
        a, x = rng.standard_normal(alg.dim), rng.standard_normal(alg.dim)
        lhs = alg.Ad_star(g @ h, a)
        assert np.max(np.abs(lhs - alg.Ad_star(g, alg.Ad_star(h, a)))) < 1e-10
        assert abs(alg.Ad_star(g, a) @ alg.Ad(g, x) - a @ x) < 1e-10


def test_coadjoint_generator_examples():
    alg = lie.so3()
    # result(e3) = -alpha([e1, e3]) = alpha(e2) = 1
    assert np.isclose(alg.coadjoint_generator([1, 0, 0], [0, 1, 0])[2], 1.0)
    t = lie.torus(2)
    assert np.allclose(t.coadjoint_generator([1.0, 2.0], [3.0, 4.0]), 0.0)


@pytest.mark.parametrize("h", [1e-4, 1e-5])
def test_coadjoint_generator_matches_differences(h):
    alg = lie.su3()
    rng = np.random.default_rng(3)
    xi, a = rng.standard_normal(8), rng.standard_normal(8)
    fd = (alg.Ad_star(alg.exp(h * xi), a) - alg.Ad_star(alg.exp(-h * xi), a)) / (2 * h)
    assert np.max(np.abs(fd - alg.coadjoint_generator(xi, a))) < 100 * h**2


@pytest.mark.parametrize("name", ["so3", "su3"])
def test_adjoint_differentiates_to_bracket(name):
    alg = lie.algebra_by_name(name)
    rng = np.random.default_rng(4)
    xi, eta = rng.standard_normal(alg.dim), rng.standard_normal(alg.dim)
    h = 1e-4
    fd = (alg.Ad(alg.exp(h * xi), eta) - alg.Ad(alg.exp(-h * xi), eta)) / (2 * h)
    scale = np.linalg.norm(xi) ** 3 * np.linalg.norm(eta)
    assert np.max(np.abs(fd - alg.bracket(xi, eta))) <= 10 * h**2 * scale


def test_killing_form_values():
    assert np.allclose(lie.so3().killing_matrix, -2 * np.eye(3))
    assert np.allclose(lie.su2().killing_matrix, -2 * np.eye(3))
    # su(n): B(X, Y) = 2n tr(XY) on the defining representation
    alg = lie.su3()
    oracle = np.array([[6 * np.trace(A @ B).real for B in alg.matrix_rep] for A in alg.matrix_rep])
    assert np.allclose(alg.killing_matrix, oracle)


@pytest.mark.parametrize("name", ["so3", "su3", "u2"])
def test_killing_form_symmetric_and_ad_invariant(name):
    alg = lie.algebra_by_name(name)
    rng = np.random.default_rng(5)
    for _ in range(100):
        x, y = rng.standard_normal(alg.dim), rng.standard_normal(alg.dim)
        assert np.isclose(alg.killing(x, y), alg.killing(y, x))
    g = alg.random_element(rng)
    x, y = rng.standard_normal(alg.dim), rng.standard_normal(alg.dim)
    assert abs(alg.killing(alg.Ad(g, x), alg.Ad(g, y)) - alg.killing(x, y)) < 1e-9


def test_hat_map():
    assert np.allclose(lie.hat([0, 0, 1]) @ [1, 0, 0], [0, 1, 0])
    assert np.allclose(lie.hat([0, 0, 0]), 0.0)
    rng = np.random.default_rng(6)
    for _ in range(100):
        v = rng.standard_normal(3)
        assert np.allclose(lie.hat(v) @ v, 0.0)
        assert np.allclose(lie.vee(lie.hat(v)), v)
    with pytest.raises(DimensionError):
        lie.hat([1.0, 2.0])


def test_reproject_restores_group_invariants():
    alg = lie.so3()
    g = alg.exp([0.1, 0.2, 0.3]) + 1e-6
    assert alg.group_residual(g) > 1e-8
    assert alg.group_residual(alg.maybe_reproject(g)) < 1e-12


def test_product_algebra_is_blockwise():
    alg = lie.product(lie.so3(), lie.torus(1))
    assert alg.dim == 4
    x = np.array([1.0, 0, 0, 5.0])
    y = np.array([0, 1.0, 0, -2.0])
    assert np.allclose(alg.bracket(x, y), [0, 0, 1, 0])


def test_unknown_algebra():
    with pytest.raises(UnsupportedError):
        lie.algebra_by_name("e8")

import numpy as np
import pytest

from momenta import actions as A
from momenta import lie
from momenta import transversal as TV
from momenta.errors import ChartError, CrossSectionSetupError, DimensionError, PreconditionError
from momenta.phase_space import ConstantPoisson, LiePoissonDual, Product, ScalarField, StandardSymplectic
from momenta.scenarios import curved_transversal


@pytest.fixture(scope="module")
def r5():
    return TV.r5_submanifolds()


def test_tangent_and_annihilator_r5(r5):
    subs, k = r5
    TN, TNo, F = TV.tangent_and_annihilator(subs["line"][0], k)
    assert TN.shape[1] == 1 and TNo.shape[1] == 4
    assert np.allclose(np.abs((F @ TN)[:, 0]), [0, 0, 0, 0, 1])
    TN, TNo, _ = TV.tangent_and_annihilator(subs["whole"][0], k)
    assert TN.shape[1] == 5 and TNo.shape[1] == 0


def test_tangent_of_sphere_is_orthogonal_complement():
    space = ConstantPoisson(np.zeros((3, 3)))
    N = TV.Submanifold.from_fields(space, [ScalarField(lambda x: x @ x - 1.0)])
    x = np.array([0.6, 0.0, 0.8])
    TN, TNo, F = TV.tangent_and_annihilator(N, x)
    assert TN.shape[1] == 2
    assert np.allclose(x @ (F @ TN), 0.0)
    assert TN.shape[1] + TNo.shape[1] == 3


def test_rank_deficient_constraint():
    N = TV.Submanifold.from_fields(TV.r5_space(), [ScalarField(lambda x: x[0] ** 2)])
    with pytest.raises(DimensionError):
        TV.tangent_and_annihilator(N, np.zeros(5))


def test_projection_failure_raises_chart_error():
    N = TV.Submanifold.from_fields(TV.r5_space(), [ScalarField(lambda x: x[0] ** 2 + 1.0)])
    with pytest.raises(ChartError):
        N.project(np.ones(5))


@pytest.mark.parametrize("key", ["hyperplane", "line", "plane-12", "plane-34", "whole"])
def test_r5_classification(r5, key):
    subs, k = r5
    N, expect = subs[key]
    assert TV.is_poisson_submanifold(N, [k]) == [expect["poisson_sub"]]
    rep = TV.is_poisson_transversal(N, [k])[0]
    assert rep.is_transversal == expect["transversal"]
    assert len(set(rep.characterizations)) == 1


def test_r5_hyperplane_ranks(r5):
    subs, k = r5
    rep = TV.is_poisson_transversal(subs["hyperplane"][0], [k])[0]
    assert rep.ranks == {"dim_TN": 4, "dim_Pi_TNo": 0, "dim_sum": 4}
    assert rep.induced_bivector is None


def test_induced_bivector_on_r5_three_plane(r5):
    subs, k = r5
    PN, E = TV.induced_bivector(subs["plane-12"][0], k)
    # oracle: the ambient form of Pi_N is the (x3, x4) block of Pi, zero elsewhere
    B = TV.r5_space().bivector(k)
    expected = np.zeros((5, 5))
    expected[2:4, 2:4] = B[2:4, 2:4]
    assert np.allclose(E @ PN @ E.T, expected)
    PN, _ = TV.induced_bivector(subs["line"][0], k)
    assert np.allclose(PN, 0.0) and PN.shape == (1, 1)
    with pytest.raises(PreconditionError):
        TV.induced_bivector(subs["hyperplane"][0], k)


def test_induced_bivector_inverts_restricted_form():
    space = StandardSymplectic(2)
    rng = np.random.default_rng(0)
    done = 0
    while done < 10:
        N = TV.Submanifold.affine(space, rng.standard_normal((2, 4)), np.zeros(2))
        p = np.zeros(4)
        if not TV.symplectic_subspace_test(N, p):
            continue
        PN, E = TV.induced_bivector(N, p)
        Om = E.T @ space.omega_tangent(p) @ E  # frame is the identity here
        assert np.allclose(PN @ Om, np.eye(2), atol=1e-10)
        done += 1


def test_characterizations_agree_on_random_subspaces():
    rng = np.random.default_rng(1)
    verdicts = set()
    for _ in range(200):
        N, p = TV.random_subspace_scenario(rng)
        rep = TV.is_poisson_transversal(N, [p])[0]
        assert len(set(rep.characterizations)) == 1
        verdicts.add(rep.is_transversal)
    assert verdicts == {True, False}


def test_transversal_agrees_with_symplectic_subspace_test():
    rng = np.random.default_rng(2)
    for _ in range(100):
        N, p = TV.random_symplectic_scenario(rng)
        assert TV.is_poisson_transversal(N, [p])[0].is_transversal == TV.symplectic_subspace_test(N, p)


def test_splitting_reassembles_bivector(r5):
    subs, k = r5
    cases = [(subs[key][0], k) for key in ("line", "plane-12", "plane-34", "whole")]
    cases.append(curved_transversal())
    for N, p in cases:
        TN, TNo, F = TV.tangent_and_annihilator(N, p)
        P = F.T @ N.space.bivector(p) @ F
        assert TV.splitting_residual(P, TN, TNo) < 1e-9


def test_induced_jacobi_linear_and_quadratic(r5):
    subs, k = r5
    N = subs["plane-12"][0]
    rng = np.random.default_rng(3)
    lin = [(lambda y, c=rng.standard_normal(3): c @ y) for _ in range(3)]
    assert TV.check_induced_jacobi(N, k, *lin) < 1e-10
    quad = []
    for _ in range(3):
        Q, b = rng.standard_normal((3, 3)), rng.standard_normal(3)
        quad.append(lambda y, Q=Q, b=b: 0.5 * y @ Q @ y + b @ y)
    assert TV.check_induced_jacobi(N, k, *quad) < 1e-4
    assert TV.check_induced_jacobi(N, k, quad[0], quad[0], quad[1]) < 1e-6


def test_induced_jacobi_on_curved_transversal():
    N, p = curved_transversal()
    assert TV.is_poisson_transversal(N, [p])[0].is_transversal
    rng = np.random.default_rng(4)
    fs = []
    for _ in range(3):
        Q, b = rng.standard_normal((3, 3)), rng.standard_normal(3)
        fs.append(lambda y, Q=Q, b=b: 0.5 * y @ Q @ y + b @ y)
    assert TV.check_induced_jacobi(N, p, *fs) < 1e-4


def test_graph_chart_stays_on_n():
    N, p = curved_transversal()
    chart = TV.GraphChart(N, p)
    assert np.allclose(chart(np.zeros(chart.dim)), p)
    for y in np.random.default_rng(5).uniform(-0.1, 0.1, (5, chart.dim)):
        assert np.max(np.abs(N.residual(chart(y)))) < 1e-10


def test_symplectic_cross_section_s2xs2():
    mm, Z, lam, p = TV.s2xs2_cross_section()
    rep = TV.check_symplectic_cross_section(mm, Z, lam, p, np.random.default_rng(6))
    assert len(rep.points) == 21 and rep.ok
    # the Poisson version reaches the same verdict
    prep = TV.check_poisson_cross_section(mm, Z, lam, p, np.random.default_rng(6))
    assert prep.ok
    N = TV.preimage_submanifold(mm, Z)
    for q in rep.points[1:]:
        assert np.linalg.norm(q - p) < 0.06
        assert np.max(np.abs(N.residual(q))) < 1e-9


def test_poisson_cross_section_so3_dual():
    mm, Z, lam, p = TV.so3dual_cross_section()
    rep = TV.check_poisson_cross_section(mm, Z, lam, p, np.random.default_rng(7))
    assert rep.ok
    assert rep.detail[0]["ranks"] == {"dim_TN": 1, "dim_Pi_TNo": 2, "dim_sum": 3}


def test_trivial_group_cross_sections():
    mm = A.trivial_action(StandardSymplectic(2))
    p = np.array([0.1, 0.2, 0.3, 0.4])
    Z = TV.Slice.whole(3)
    assert TV.check_symplectic_cross_section(mm, Z, np.zeros(3), p, count=3).ok
    mm = A.trivial_action(TV.r5_space())
    assert TV.check_poisson_cross_section(mm, Z, np.zeros(3), np.ones(5), count=3).ok


def test_slice_tangent_to_orbit_rejected():
    mm, _, lam, p = TV.s2xs2_cross_section()
    orbit_dir = np.cross([1.0, 0, 0], lam)
    Z = TV.Slice.affine(lam, orbit_dir[:, None])
    with pytest.raises(CrossSectionSetupError):
        TV.check_symplectic_cross_section(mm, Z, lam, p)
    with pytest.raises(CrossSectionSetupError):
        TV.check_poisson_cross_section(mm, Z, lam, p)


@pytest.mark.parametrize("name", ["angular-momentum", "sphere-so3", "s2xs2-diagonal"])
def test_kernel_lemma(name):
    mm = A.MOMENT_SCENARIOS[name]()
    rng = np.random.default_rng(8)
    for p in A.sample_points(mm, rng, 5):
        covs = rng.standard_normal((4, mm.action.space.ambient_dim))
        assert TV.kernel_lemma_residual(mm, p, covs) < 1e-5


def test_coadjoint_kernel_lemma():
    mm = A.coadjoint_identity(lie.su3())
    rng = np.random.default_rng(9)
    p = rng.standard_normal(8)
    assert TV.kernel_lemma_residual(mm, p, rng.standard_normal((4, 8))) < 1e-5


def test_report_serialises(r5):
    subs, k = r5
    d = TV.is_poisson_transversal(subs["plane-34"][0], [k])[0].to_dict()
    assert d["transversal"] is True
    assert len(d["induced_bivector"]) == 3


def test_product_space_frame_is_orthonormal():
    M = Product(LiePoissonDual(lie.so3()), StandardSymplectic(1))
    F, P = TV.frame(M, np.array([0.2, 0.1, 0.5, 0.3, 0.2]))
    assert np.allclose(F.T @ F, np.eye(F.shape[1]))
    assert np.allclose(P, -P.T)

"""Named check batteries run by ``momenta verify`` and the trajectory
generators behind ``momenta simulate``.

Every battery is a list of ``(name, anchor, tolerance, fn)`` where ``fn(cfg, rng)``
returns a residual; a check passes when residual <= tolerance.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import actions as A
from . import lie
from . import reduction as R
from . import roots as RW
from . import transversal as TV
from .phase_space import (
    CotangentGroup,
    LiePoissonDual,
    ScalarField,
    StandardSymplectic,
    check_jacobi,
    flow,
)

ANCHORS = {
    "moment": "definition of moment map: i_{xi_M} omega = d mu(xi)",
    "equivariance": "equivariance: mu o Phi_g = Ad*(g) o mu",
    "noether": "Noether theorem: mu is a conserved quantity",
    "antihom": "comoment: {mu(xi), mu(eta)} = -mu([xi, eta])",
    "pushforward": "moment map properties: mu_* xi_M(p) = xi_{g*}(mu(p))",
    "ad_generator": "infinitesimal generator properties: (Ad(g) xi)_M = Phi_{g*} xi_M",
    "generator": "infinitesimal generator: d/dt Phi_{exp(t xi)}(p)",
    "action": "group action: Phi_e = id, Phi_g o Phi_h = Phi_{gh}",
    "jacobi": "Poisson bivector: vanishing Jacobiator",
    "kks": "coadjoint orbit: Kirillov-Kostant-Souriau symplectic form",
    "lie_poisson": "Lie-Poisson structure: {F, H}(alpha) = -alpha([dF, dH])",
    "pi_related": "reduced dynamics: X_H and X_h are pi-related",
    "lifted": "lifted motion: xi(t)_M(beta(t)) = X_H(beta(t)) - beta'(t)",
    "oscillator": "harmonic oscillator: H^-1(1/2)/S^1 = CP^{n-1}",
    "mw": "Marsden-Weinstein reduction: i*omega = pi*omega_alpha",
    "mr": "Marsden-Ratiu: Poisson reducible iff Pi(E°) ⊆ TN + E",
    "r5": "R^5 example: hyperplanes {x5=k} are Poisson submanifolds",
    "roots": "root decomposition: g_C = t_C ⊕ sum of root spaces",
    "isotropy": "isotropy groups of faces: T lies in every isotropy group",
    "transversal": "Poisson transversals: the following are equivalent",
    "splitting": "splitting lemma: Pi|_N = Pi_N + V",
    "induced": "induced structure: Pi_N defines a Poisson structure on N",
    "cross_section": "Poisson cross-section: mu^-1(Z) is a Poisson transversal",
}


@dataclass
class Config:
    scenario: str = ""
    algebra: str = "su3"
    T: Optional[float] = None
    dt: Optional[float] = None
    seed: int = 42
    samples: int = 20
    parallel: int = 1
    tolerances: dict = field(default_factory=dict)

    def get_T(self, default):
        return default if self.T is None else float(self.T)

    def get_dt(self, default):
        return default if self.dt is None else float(self.dt)


@dataclass
class Check:
    name: str
    anchor: str
    tolerance: float
    fn: Callable


def _fmt(v):
    v = float(v)
    if not np.isfinite(v):
        return None
    return float(f"{v:.15g}")


def run_checks(checks, cfg):
    """Evaluate a battery; each check gets its own stream derived from the seed."""

    def one(item):
        idx, chk = item
        rng = np.random.default_rng([cfg.seed, idx])
        residual = float(chk.fn(cfg, rng))
        tol = float(cfg.tolerances.get(chk.name, chk.tolerance))
        return {
            "name": chk.name,
            "paper_anchor": chk.anchor,
            "residual": _fmt(residual),
            "tolerance": _fmt(tol),
            "pass": bool(residual <= tol),
        }

    items = list(enumerate(checks))
    if cfg.parallel > 1:
        with ThreadPoolExecutor(max_workers=cfg.parallel) as ex:
            return list(ex.map(one, items))
    return [one(it) for it in items]


# --------------------------------------------------------------- moment maps


def _action_axioms(mm):
    def fn(cfg, rng):
        alg = mm.action.algebra
        worst = 0.0
        for _ in range(cfg.samples):
            p = mm.action.space.random_point(rng)
            g, h = alg.random_element(rng), alg.random_element(rng)
            worst = max(worst, float(np.max(np.abs(mm.action.act(alg.identity(), p) - p))))
            lhs = mm.action.act(g, mm.action.act(h, p))
            worst = max(worst, float(np.max(np.abs(lhs - mm.action.act(alg.mul(g, h), p)))))
        return worst

    return fn


def _generator_agreement(mm):
    def fn(cfg, rng):
        alg = mm.action.algebra
        worst = 0.0
        for _ in range(cfg.samples):
            p = mm.action.space.random_point(rng)
            xi = rng.standard_normal(alg.dim)
            a = A.infinitesimal_generator(mm.action, xi, p)
            b = A.infinitesimal_generator(mm.action, xi, p, analytic=False)
            worst = max(worst, float(np.max(np.abs(a - b))))
        return worst

    return fn


def _points(mm, cfg, rng):
    return A.sample_points(mm, rng, cfg.samples)


def moment_battery(mm):
    def groups(cfg, rng, n):
        return A.sample_group(mm.action.algebra, rng, n)

    return [
        Check("action_axioms", ANCHORS["action"], 1e-9, _action_axioms(mm)),
        Check("generator_fd_agreement", ANCHORS["generator"], 1e-5, _generator_agreement(mm)),
        Check("moment_condition", ANCHORS["moment"], 1e-5, lambda c, r: A.check_moment_condition(mm, _points(mm, c, r))),
        Check(
            "equivariance", ANCHORS["equivariance"], 1e-8,
            lambda c, r: A.check_equivariance(mm, groups(c, r, c.samples), _points(mm, c, r)),
        ),
        Check("comoment_antihom", ANCHORS["antihom"], 1e-5, lambda c, r: A.check_comoment_antihom(mm, _points(mm, c, r))),
        Check("pushforward", ANCHORS["pushforward"], 1e-4, lambda c, r: A.moment_pushforward_residual(mm, _points(mm, c, r))),
        Check(
            "ad_generator", ANCHORS["ad_generator"], 1e-5,
            lambda c, r: A.ad_generator_residual(mm.action, groups(c, r, c.samples), _points(mm, c, r)),
        ),
    ]


def _noether_central(cfg, rng):
    mm = A.angular_momentum()
    x0 = np.array([1.0, 0.0, 0.0, 0.0, 1.0, 0.2])
    return A.check_noether(mm, A.central_force_hamiltonian(), x0, cfg.get_T(10.0), cfg.get_dt(1e-3))


def _noether_self(mm):
    def fn(cfg, rng):
        H = ScalarField(lambda x: float(mm(x)[0]))
        x0 = mm.action.space.random_point(rng)
        return A.check_noether(mm, H, x0, cfg.get_T(2.0), cfg.get_dt(1e-2))

    return fn


def _jacobi(space):
    def fn(cfg, rng):
        n = space.ambient_dim
        worst = 0.0
        for _ in range(cfg.samples):
            x = space.random_point(rng)
            f, g, h = (ScalarField.random_quadratic(rng, n) for _ in range(3))
            worst = max(worst, check_jacobi(space, f, g, h, x))
        return worst

    return fn


def moment_scenario(name):
    mm = A.MOMENT_SCENARIOS[name]()
    checks = moment_battery(mm)
    if name == "angular-momentum":
        checks.append(Check("noether_central_force", ANCHORS["noether"], 1e-6, _noether_central))
    elif name == "hamiltonian-r-action":
        checks.append(Check("noether_self_flow", ANCHORS["noether"], 1e-6, _noether_self(mm)))
    checks.append(Check("jacobi_bivector", ANCHORS["jacobi"], 1e-4, _jacobi(mm.action.space)))
    return checks


# ------------------------------------------------------------------ reduction


def _recon(cfg, dt):
    S = R.rigid_body_lift(cfg.get_T(5.0), dt)
    return R.reconstruct(S.mm, S.H, S.beta, S.alpha)


def rigid_body_reconstruction():
    cache = {}

    def at(cfg, dt):
        if dt not in cache:
            cache[dt] = _recon(cfg, dt)
        return cache[dt]

    def res(cfg, rng):
        return at(cfg, cfg.get_dt(1e-3)).residual

    def order(cfg, rng):
        dt = cfg.get_dt(1e-3)
        ratio = at(cfg, dt).residual / max(at(cfg, dt / 2).residual, 1e-300)
        return 1.0 / ratio

    def solve(cfg, rng):
        return at(cfg, cfg.get_dt(1e-3)).solve_residual

    return [
        Check("lifted_motion_residual", ANCHORS["lifted"], 1e-4, res),
        Check("algebraic_solve_residual", ANCHORS["lifted"], 1e-6, solve),
        Check("inverse_convergence_ratio", ANCHORS["lifted"], 1.0 / 3.0, order),
    ]


def _oscillator_checks(n):
    mm = A.hamiltonian_r_action(n)
    H = A.harmonic_oscillator_hamiltonian(n)
    space = mm.action.space

    def traj(cfg, rng):
        x0 = R.oscillator_level_point(rng, n)
        return x0, flow(space, H, x0, cfg.get_T(2 * np.pi), cfg.get_dt(1e-3))

    def sphere(cfg, rng):
        _, tr = traj(cfg, rng)
        return float(np.max(np.abs(np.sum(tr.states**2, axis=1) - 1.0)))

    def projective(cfg, rng):
        x0, tr = traj(cfg, rng)
        P0 = R.projective_representative(x0, n)
        return max(float(np.max(np.abs(R.projective_representative(s, n) - P0))) for s in tr.states)

    def degeneracy(cfg, rng):
        worst = 0
        for _ in range(cfg.samples):
            rep = R.check_reduced_form_descends(mm, [0.5], R.oscillator_level_point(rng, n))
            worst = max(worst, abs(rep["degeneracy_dim"] - 1))
        return worst

    def related(cfg, rng):
        pts = [R.oscillator_level_point(rng, n) for _ in range(cfg.samples)]
        return R.check_pi_relatedness(
            space, H, lambda x: R.projective_representative(x, n),
            h=lambda q: 0.5, samples=pts, reduced_vf=lambda q: np.zeros_like(q),
        )

    return [
        Check(f"n{n}_sphere_preserved", ANCHORS["oscillator"], 1e-8, sphere),
        Check(f"n{n}_projective_identity", ANCHORS["oscillator"], 1e-9, projective),
        Check(f"n{n}_degeneracy_count_error", ANCHORS["mw"], 0.0, degeneracy),
        Check(f"n{n}_pi_related", ANCHORS["pi_related"], 1e-6, related),
    ]


def harmonic_oscillator_reduction():
    return _oscillator_checks(2) + _oscillator_checks(3)


def _kks_checks():
    alg = lie.so3()

    def orbit(cfg, rng):
        seed = rng.standard_normal(3)
        return R.CoadjointOrbitSample.draw(alg, seed, rng, max(cfg.samples, 1)).points

    def antisym(cfg, rng):
        worst = 0.0
        for b in orbit(cfg, rng):
            x, y = rng.standard_normal(3), rng.standard_normal(3)
            worst = max(worst, abs(R.kks_form(alg, b, x, y) + R.kks_form(alg, b, y, x)))
        return worst

    def rep(cfg, rng):
        worst = 0.0
        for b in orbit(cfg, rng):
            x, y = rng.standard_normal(3), rng.standard_normal(3)
            z = rng.standard_normal() * b  # coadjoint stabiliser direction
            worst = max(worst, abs(R.kks_form(alg, b, x + z, y) - R.kks_form(alg, b, x, y)))
        return worst

    def lp(cfg, rng):
        worst = 0.0
        sp = LiePoissonDual(alg)
        for b in orbit(cfg, rng):
            x, y = rng.standard_normal(3), rng.standard_normal(3)
            worst = max(worst, abs(R.kks_form(alg, b, x, y) - x @ sp.bivector(b) @ y))
        return worst

    return [
        Check("kks_antisymmetry", ANCHORS["kks"], 1e-12, antisym),
        Check("kks_representative_independence", ANCHORS["kks"], 1e-12, rep),
        Check("kks_matches_lie_poisson", ANCHORS["kks"], 1e-9, lp),
    ]


def kks_so3():
    return _kks_checks()


def rigid_body_lie_poisson():
    alg = lie.so3()
    h = R.rigid_body_hamiltonian()
    cache = {}

    def traj(cfg):
        key = (cfg.get_T(10.0), cfg.get_dt(1e-3))
        if key not in cache:
            cache[key] = R.lie_poisson_flow(alg, h, [0.01, 1.0, 0.0], *key)
        return cache[key]

    def energy(cfg, rng):
        tr = traj(cfg)
        return max(abs(h(a) - h(tr.states[0])) for a in tr.states)

    def casimir(cfg, rng):
        tr = traj(cfg)
        return float(np.max(np.abs(np.sum(tr.states**2, axis=1) - np.sum(tr.states[0] ** 2))))

    def escape(cfg, rng):
        tr = traj(cfg)
        # residual <= 0 once the motion leaves the 0.1-ball around e2
        return 0.1 - float(np.max(np.linalg.norm(tr.states - np.array([0.0, 1.0, 0.0]), axis=1)))

    def related(cfg, rng):
        cg = CotangentGroup(alg)
        H = ScalarField(lambda x: h(x[9:]), lambda x: np.concatenate([np.zeros(9), h.gradient(x[9:])]))
        pts = [cg.random_point(rng) for _ in range(cfg.samples)]
        return R.check_pi_relatedness(cg, H, lambda x: x[9:], LiePoissonDual(alg), h, pts)

    return [
        Check("energy_drift", ANCHORS["lie_poisson"], 1e-6, energy),
        Check("casimir_drift", ANCHORS["lie_poisson"], 1e-6, casimir),
        Check("instability_escape", ANCHORS["lie_poisson"], 0.0, escape),
        Check("pi_relatedness", ANCHORS["pi_related"], 1e-4, related),
    ]


def marsden_ratiu_r5():
    subs, k = TV.r5_submanifolds()
    checks = []
    for key in ("hyperplane", "line", "plane-12", "plane-34"):
        N, expect = subs[key]

        def classify(cfg, rng, N=N, expect=expect):
            sub = TV.is_poisson_submanifold(N, [k])[0]
            tr = TV.is_poisson_transversal(N, [k])[0].is_transversal
            return float(sub != expect["poisson_sub"]) + float(tr != expect["transversal"])

        checks.append(Check(f"r5_{key}_classification", ANCHORS["r5"], 0.0, classify))

    def hyperplane_reducible(cfg, rng):
        N = subs["hyperplane"][0]
        return float(not all(R.check_marsden_ratiu(N.space, N, R.zero_distribution, [k])))

    def orbit_distribution(cfg, rng):
        bad = 0
        for name in ("angular-momentum", "sphere-so3", "s2xs2-diagonal"):
            mm = A.MOMENT_SCENARIOS[name]()
            pts = A.sample_points(mm, rng, cfg.samples)
            ok = R.check_marsden_ratiu(mm.action.space, None, lambda p, mm=mm: A.generator_matrix(mm.action, p), pts)
            bad += sum(not o for o in ok)
        return float(bad)

    checks.append(Check("mr_hyperplane_zero_distribution", ANCHORS["mr"], 0.0, hyperplane_reducible))
    checks.append(Check("mr_orbit_distribution_failures", ANCHORS["mr"], 0.0, orbit_distribution))
    return checks


# --------------------------------------------------------- roots, transversals


def root_systems():
    def counts(cfg, rng):
        bad = 0
        for name, nroots, nsimple, nfaces in (("su2", 2, 1, 2), ("su3", 6, 2, 4)):
            rsd = RW.root_decomposition(lie.algebra_by_name(name))
            got = (len(rsd.roots), len(rsd.simple), len(RW.all_faces(rsd)))
            bad += int(got != (nroots, nsimple, nfaces))
        return float(bad)

    def isotropy(cfg, rng):
        bad = 0
        for name in ("su2", "su3", "u2", "su2xsu2"):
            rsd = RW.root_decomposition(lie.algebra_by_name(name))
            for f in RW.all_faces(rsd):
                try:
                    RW.isotropy_algebra_of_face(rsd, f, rng)
                except Exception:
                    bad += 1
        return float(bad)

    def interior(cfg, rng):
        rsd = RW.root_decomposition(lie.su3())
        dim, basis = RW.isotropy_algebra_of_face(rsd, RW.Face(rsd, frozenset()), rng)
        from . import linalg

        return float(dim != rsd.rank) + float(not linalg.contains(basis.T, rsd.cartan_basis.T))

    return [
        Check("root_counts_mismatch", ANCHORS["roots"], 0.0, counts),
        Check("isotropy_cross_validation_failures", ANCHORS["isotropy"], 0.0, isotropy),
        Check("interior_isotropy_is_t", ANCHORS["isotropy"], 0.0, interior),
    ]


def curved_transversal():
    from .phase_space import Product

    M = Product(LiePoissonDual(lie.so3()), StandardSymplectic(1))
    cs = [
        ScalarField(lambda x: x[2] + x[3] + 0.3 * x[0] ** 2 - 0.5),
        ScalarField(lambda x: x[4] + x[0] + 0.2 * x[1] * x[3] - 0.2),
    ]
    N = TV.Submanifold.from_fields(M, cs, "curved")
    return N, N.project(np.array([0.2, 0.1, 0.5, 0.3, 0.2]))


def random_quadratic_local(rng, n):
    Q = rng.standard_normal((n, n))
    b = rng.standard_normal(n)
    return lambda y: 0.5 * y @ Q @ y + b @ y


def poisson_transversals():
    def random_agree(cfg, rng):
        for _ in range(100):
            N, p = TV.random_subspace_scenario(rng)
            TV.is_poisson_transversal(N, [p])  # raises on disagreement
        return 0.0

    def named_agree(cfg, rng):
        subs, k = TV.r5_submanifolds()
        for N, _ in subs.values():
            TV.is_poisson_transversal(N, [k])
        N, p = curved_transversal()
        TV.is_poisson_transversal(N, [p])
        return 0.0

    def splitting(cfg, rng):
        worst = 0.0
        subs, k = TV.r5_submanifolds()
        cases = [(subs[key][0], k) for key in ("line", "plane-12", "plane-34", "whole")]
        cases.append(curved_transversal())
        for N, p in cases:
            TN, TNo, F = TV.tangent_and_annihilator(N, p)
            P = F.T @ N.space.bivector(p) @ F
            worst = max(worst, TV.splitting_residual(P, TN, TNo))
        return worst

    def jacobi(cfg, rng):
        N, p = curved_transversal()
        fs = [random_quadratic_local(rng, 3) for _ in range(3)]
        return TV.check_induced_jacobi(N, p, *fs)

    def cross(which):
        def fn(cfg, rng):
            mm, Z, lam, p = which()
            return float(sum(not ok for ok in TV.check_poisson_cross_section(mm, Z, lam, p, rng).passed))

        return fn

    return [
        Check("characterizations_random", ANCHORS["transversal"], 0.0, random_agree),
        Check("characterizations_named", ANCHORS["transversal"], 0.0, named_agree),
        Check("splitting_reassembly", ANCHORS["splitting"], 1e-9, splitting),
        Check("induced_jacobi", ANCHORS["induced"], 1e-4, jacobi),
        Check("cross_section_s2xs2_failures", ANCHORS["cross_section"], 0.0, cross(TV.s2xs2_cross_section)),
        Check("cross_section_so3dual_failures", ANCHORS["cross_section"], 0.0, cross(TV.so3dual_cross_section)),
    ]


def builtin_spaces():
    from .phase_space import ConstantPoisson, Product, Sphere2

    so3 = lie.so3()
    return {
        "standard-r6": StandardSymplectic(3),
        "constant-r5": ConstantPoisson.from_pairs(5, [(0, 1), (2, 3)]),
        "sphere": Sphere2(1.0),
        "so3-dual": LiePoissonDual(so3),
        "su3-dual": LiePoissonDual(lie.su3()),
        "cotangent-so3": CotangentGroup(so3),
        "s2xs2": Product(Sphere2(1.0), Sphere2(1.0)),
    }


def jacobi_identity():
    return [
        Check(f"jacobi_{name}", ANCHORS["jacobi"], 1e-4, _jacobi(space)) for name, space in builtin_spaces().items()
    ]


VERIFY_SCENARIOS = {name: (lambda name=name: moment_scenario(name)) for name in A.MOMENT_SCENARIOS}
VERIFY_SCENARIOS.update(
    {
        "rigid-body-reconstruction": rigid_body_reconstruction,
        "harmonic-oscillator-reduction": harmonic_oscillator_reduction,
        "kks-so3": kks_so3,
        "marsden-ratiu-r5": marsden_ratiu_r5,
        "rigid-body-lie-poisson": rigid_body_lie_poisson,
        "root-systems": root_systems,
        "poisson-transversals": poisson_transversals,
        "jacobi-identity": jacobi_identity,
    }
)


# ----------------------------------------------------------------- simulate


def simulate_rigid_body(cfg):
    alg = lie.so3()
    h = R.rigid_body_hamiltonian()
    tr = R.lie_poisson_flow(alg, h, [0.01, 1.0, 0.0], cfg.get_T(10.0), cfg.get_dt(1e-3), ["a1", "a2", "a3"])
    tr.extras["H"] = [h(a) for a in tr.states]
    tr.extras["casimir"] = [R.casimir_so3(a) for a in tr.states]
    return tr


def simulate_harmonic_oscillator(cfg, n=2):
    H = A.harmonic_oscillator_hamiltonian(n)
    x0 = R.oscillator_level_point(np.random.default_rng(cfg.seed), n)
    cols = [f"q{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)]
    tr = flow(StandardSymplectic(n), H, x0, cfg.get_T(2 * np.pi), cfg.get_dt(1e-3), cols)
    tr.extras["H"] = [H(x) for x in tr.states]
    tr.extras["norm2"] = [float(x @ x) for x in tr.states]
    return tr


def simulate_central_force(cfg):
    mm = A.angular_momentum()
    H = A.central_force_hamiltonian()
    x0 = np.array([1.0, 0.0, 0.0, 0.0, 1.0, 0.2])
    tr = flow(StandardSymplectic(3), H, x0, cfg.get_T(10.0), cfg.get_dt(1e-3), ["q1", "q2", "q3", "p1", "p2", "p3"])
    tr.extras["H"] = [H(x) for x in tr.states]
    L = np.array([mm(x) for x in tr.states])
    for i in range(3):
        tr.extras[f"mu{i + 1}"] = L[:, i]
    return tr


SIMULATE_SCENARIOS = {
    "rigid-body": simulate_rigid_body,
    "harmonic-oscillator": simulate_harmonic_oscillator,
    "central-force": simulate_central_force,
}


# ---------------------------------------------------------------- transversal


def transversal_points(name, cfg):
    """Per-point reports for the named transversal scenarios."""
    rng = np.random.default_rng(cfg.seed)
    if name == "r5":
        subs, k = TV.r5_submanifolds()
        out = {}
        for key, (N, _) in subs.items():
            rep = TV.is_poisson_transversal(N, [k])[0]
            d = rep.to_dict()
            d["poisson_submanifold"] = TV.is_poisson_submanifold(N, [k])[0]
            out[key] = [d]
        return out
    which = {"s2xs2": TV.s2xs2_cross_section, "so3dual": TV.so3dual_cross_section}[name]
    mm, Z, lam, p = which()
    rep = TV.check_poisson_cross_section(mm, Z, lam, p, rng, count=max(cfg.samples, 1))
    return {"cross-section": rep.detail}


TRANSVERSAL_SCENARIOS = ("r5", "s2xs2", "so3dual")

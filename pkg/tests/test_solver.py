import numpy as np
import pytest

from capillary_orlicz import body as cb
from capillary_orlicz import mesh as cm
from capillary_orlicz import solver as sv
from capillary_orlicz.orlicz import PowerLaw, gauge_from_config
from oracles import smooth_body

TH = np.pi / 3


@pytest.fixture(scope="module")
def mesh():
    return cm.build_mesh(2, TH, (32, 64))


def full_residual(m, h, data, t):
    Ri, Rb = sv.residual(h, data, t)
    F = np.zeros(m.size)
    F[m.interior_ids] = Ri
    F[m.boundary_ids] = Rb
    return F


def test_start_point_residual(mesh):
    data = sv.ProblemData(mesh, sv.manufactured_cap_data(mesh, PowerLaw(3), 1.5), PowerLaw(3))
    F = full_residual(mesh, mesh.ell, data, 0.0)
    assert np.max(np.abs(F)) <= 10 * cm.hessian_consistency(mesh) + 1e-14


def test_manufactured_residual(mesh):
    phi = gauge_from_config("x^3+x^4")
    r = 0.7
    data = sv.ProblemData(mesh, sv.manufactured_cap_data(mesh, phi, r), phi)
    assert np.max(np.abs(full_residual(mesh, r * mesh.ell, data, 1.0))) < 1e-10


def test_equality_case_residual_normalized():
    m = cm.build_mesh(2, TH, (64, 128))
    phi = PowerLaw(3)
    data = sv.ProblemData(m, sv.equality_case_data(m, phi), phi, form="normalized")
    r = cm.cap_volume(2, TH) ** (-1 / 3)
    h = r * m.ell
    assert np.max(np.abs(full_residual(m, h, data, 1.0))) < 1e-6
    assert cm.integrate(m, h * cb.CapillaryBody(m, h).det_W) / 3 == pytest.approx(1.0, abs=1e-6)


def test_gauge_coefficients_at_cap(mesh):
    phi = PowerLaw(3)
    data = sv.ProblemData(mesh, phi(1.0) * mesh.ell, phi)
    # (1 - ell phi'/(h phi)) f_0 = -n phi(1) ell at h = ell
    coeff = sv._gauge_factor(data, mesh.ell) * data.f_t(0.0)
    assert np.allclose(coeff, -2 * mesh.ell, rtol=1e-14)
    assert np.allclose(sv.orlicz_weight(mesh.ell, data), 0.0, atol=1e-14)


def test_cofactor_of_scalar_matrix():
    W = np.tile(3.0 * np.eye(2), (4, 1, 1))
    assert np.allclose(sv._cofactor(W), 3.0 * np.eye(2))


def test_log_jacobian_directional_derivative(mesh):
    phi = gauge_from_config("x^3+x^4")
    h, _ = smooth_body(mesh, 0.1)
    data = sv.ProblemData(mesh, sv.manufactured_cap_data(mesh, phi, 1.2), phi)
    J = sv.log_jacobian(h, data, 0.6)
    rng = np.random.default_rng(1)
    v = cm.reflect_even(mesh, sv.random_robin_field(mesh, rng) * 0.1)
    errs = []
    for s in (1e-2, 5e-3):
        fd = (full_residual(mesh, h + s * v, data, 0.6)
              - full_residual(mesh, h - s * v, data, 0.6)) / (2 * s)
        errs.append(np.max(np.abs(fd - J @ v)))
    scale = np.max(np.abs(J @ v))
    assert errs[0] < 1e-4 * scale
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)  # O(s^2)


def test_cofactor_operator_matches_log_jacobian_at_solution(mesh):
    phi = PowerLaw(4)
    r = 1.3
    data = sv.ProblemData(mesh, sv.manufactured_cap_data(mesh, phi, r), phi)
    h = r * mesh.ell
    J, L = sv.assemble_linearized(h, data, 1.0)
    v = sv.random_robin_field(mesh, np.random.default_rng(2))
    ii = mesh.interior_ids
    assert np.allclose((L @ v)[ii], r**2 * (J @ v)[ii], rtol=1e-9, atol=1e-9)


def test_newton_from_perturbed_start(mesh):
    phi = PowerLaw(4)
    r = 1.5
    data = sv.ProblemData(mesh, sv.manufactured_cap_data(mesh, phi, r), phi)
    h, rec = sv.newton_solve(1.2 * r * mesh.ell, data, 1.0)
    assert rec.converged
    assert np.max(np.abs(h - r * mesh.ell)) < 1e-10
    hist = np.array(rec.residual_history)
    # terminal quadratic convergence: r_{k+1} <= C r_k^2
    tail = [(a, b) for a, b in zip(hist, hist[1:]) if a < 1e-2 and b > 1e-11]
    assert tail and all(b <= 10 * a**2 for a, b in tail)


def test_newton_at_exact_solution(mesh):
    phi = PowerLaw(4)
    data = sv.ProblemData(mesh, sv.manufactured_cap_data(mesh, phi, 0.8), phi)
    _, rec = sv.newton_solve(0.8 * mesh.ell, data, 1.0)
    assert rec.iterations <= 1


def test_homotopy_trivial_path(mesh):
    phi = PowerLaw(3)
    rep = sv.homotopy_solve(sv.ProblemData(mesh, phi(1.0) * mesh.ell, phi))
    assert rep.converged
    assert np.max(np.abs(rep.body.h - mesh.ell)) < 1e-12


@pytest.mark.parametrize("r", [0.7, 1.5])
def test_homotopy_manufactured_power4(mesh, r):
    phi = PowerLaw(4)
    rep = sv.homotopy_solve(sv.ProblemData(mesh, sv.manufactured_cap_data(mesh, phi, r), phi))
    assert rep.converged
    assert np.max(np.abs(rep.body.h - r * mesh.ell)) / r < 1e-10
    ts = [s.t for s in rep.steps if s.accepted]
    assert ts == sorted(ts) and ts[-1] == 1.0


def test_homotopy_equality_case_normalized(mesh):
    phi = PowerLaw(3)
    data = sv.ProblemData(mesh, sv.equality_case_data(mesh, phi), phi, form="normalized")
    rep = sv.homotopy_solve(data)
    assert rep.converged
    assert rep.volume == pytest.approx(1.0, abs=1e-6)
    target = cm.cap_volume(2, TH) ** (-1 / 3) * mesh.ell
    assert np.max(np.abs(rep.body.h - target)) < 1e-3


def test_fixed_point_normalization_on_power4(mesh):
    phi = PowerLaw(4)
    data = sv.ProblemData(mesh, sv.equality_case_data(mesh, phi), phi, form="normalized")
    # for x^p the volume map lam -> V(h_lam) is lam^(-k), k = (n+1)/(p-n-1) = 3, so the
    # damped update has slope 1 - 4 d at the fixed point; d = 1/4 makes it superlinear
    cfg = sv.SolverConfig(normalization="fixed_point", fp_damping=0.25)
    rep = sv.homotopy_solve(data, cfg)
    assert rep.converged
    assert rep.volume == pytest.approx(1.0, abs=1e-6)


def test_smooth_data_second_order():
    phi = PowerLaw(4)
    errs = []
    for res in [(16, 32), (32, 64)]:
        m = cm.build_mesh(2, TH, res)
        h, W = smooth_body(m, 0.1)
        f = phi(m.ell / h) * h * np.linalg.det(W)
        rep = sv.homotopy_solve(sv.ProblemData(m, f, phi))
        assert rep.converged
        errs.append(np.max(np.abs(rep.body.h - h)))
    assert errs[0] / errs[1] > 3.5


def test_admissibility(mesh):
    phi = PowerLaw(3)
    m = cm.build_mesh(2, TH, (64, 128))
    f = sv.equality_case_data(m, phi)
    rep = sv.check_admissibility(m, f, phi)
    assert abs(rep.margin) <= 1e-8
    rep2 = sv.check_admissibility(m, 2 * f, phi)
    assert rep2.margin == pytest.approx(phi(cm.cap_volume(2, TH) ** (1 / 3)), rel=1e-6)
    odd = f * (1 + 0.1 * np.cos(m.azimuth))
    assert not sv.check_admissibility(m, odd, phi).even


def test_problem_data_errors(mesh):
    phi = PowerLaw(3)
    with pytest.raises(ValueError):
        sv.ProblemData(mesh, -mesh.ell, phi)
    with pytest.raises(ValueError):
        sv.ProblemData(mesh, mesh.ell, phi, form="other")
    obtuse = cm.build_mesh(2, 2.0, (16, 32))
    with pytest.raises(ValueError):
        sv.ProblemData(obtuse, obtuse.ell, phi)


def test_config_validation():
    with pytest.raises(ValueError):
        sv.SolverConfig.from_dict({"nope": 1})
    with pytest.raises(ValueError):
        sv.SolverConfig(dt0=2.0)
    cfg = sv.SolverConfig.from_dict({"tol": 1e-10})
    assert sv.SolverConfig.from_dict(cfg.to_dict()) == cfg


def test_stall_is_reported(mesh):
    phi = PowerLaw(4)
    data = sv.ProblemData(mesh, sv.manufactured_cap_data(mesh, phi, 3.0), phi)
    rep = sv.homotopy_solve(data, sv.SolverConfig(max_iter=1, dt_min=0.2))
    assert rep.status == "stalled"
    assert rep.last_good_t < 1.0


def test_symmetry_defect_is_second_order():
    phi = PowerLaw(3)
    sup = []
    for res in [(16, 32), (32, 64), (64, 128)]:
        m = cm.build_mesh(2, TH, res)
        K = cb.perturbed_cap(m, "cos2", 0.05)
        data = sv.ProblemData(m, phi(m.ell / K.h) * K.h * K.det_W, phi)
        cs = []
        for seed in range(6):
            rng = np.random.default_rng(seed)
            v, w = sv.random_robin_field(m, rng), sv.random_robin_field(m, rng)
            cs.append(sv.symmetry_defect(K.h, data, v, w) / m.spacing**2)
        sup.append(max(cs))
    # single pairs can pass through a sign change of the leading term; the sup is stable
    assert max(sup) / min(sup) < 1.5


def test_orthogonality_diagnostic(mesh):
    d3 = sv.ProblemData(mesh, mesh.ell, PowerLaw(3))
    rep = sv.orthogonality_diagnostic(mesh.ell, d3, t=0.0)
    assert rep.weight_min == pytest.approx(0.0, abs=1e-13)
    assert rep.weight_max == pytest.approx(0.0, abs=1e-13)
    assert any(rep.near_kernel)
    d4 = sv.ProblemData(mesh, mesh.ell, PowerLaw(4))
    rep4 = sv.orthogonality_diagnostic(mesh.ell, d4, t=0.0)
    assert rep4.weight_min > 0 and not any(rep4.near_kernel)

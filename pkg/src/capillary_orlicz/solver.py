"""Damped Newton and continuation for the capillary Orlicz-Minkowski problem.

The unknown is a support function ``h`` on the cap mesh.  At interior nodes
the discrete equation is taken in logarithmic form

    R(h) = log det W + log phi(ell/h) + log h - log f_t            (unnormalized)
    R(h) = log det W + log phi(ell/h) + log h - log V(h) - log f_t  (normalized)

with ``W = hess h + h I`` and ``f_t = (1 - t) phi(1) ell + t f``.  Boundary
nodes carry the Robin rows ``D_mu h - cot(theta) h = 0`` instead.  The path
starts from the exact solution at ``t = 0`` and marches to ``t = 1`` with
adaptive steps; every step is a damped Newton solve with a backtracking line
search, a positivity safeguard on ``W`` and an optional even projection.

For the normalized form the volume enters through ``mu = log V`` as one extra
unknown (bordered Newton).  A damped outer fixed point on ``V`` with ``V``
frozen inside each Newton solve is available as an alternative policy; it
cannot work for ``phi = x^(n+1)``, where the frozen problem is invariant
under scaling of ``h``.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import functionals as fn
from . import mesh as cm
from .body import CapillaryBody, validate
from .mesh import CapMesh
from .orlicz import OrliczFunction, inverse

FORMS = ("unnormalized", "normalized")


class NotConvexError(ValueError):
    """``W`` is not positive definite somewhere."""

    def __init__(self, node: int, eigenvalue: float):
        super().__init__(f"W not positive definite at node {node} (eigenvalue {eigenvalue:.3e})")
        self.node = node
        self.eigenvalue = eigenvalue


class NewtonFailure(RuntimeError):
    def __init__(self, message: str, record: "NewtonRecord"):
        super().__init__(message)
        self.record = record


@dataclass
class ProblemData:
    """Data of one solve: mesh, right-hand side ``f``, gauge and equation form."""

    mesh: CapMesh
    f: np.ndarray
    phi: OrliczFunction
    form: str = "unnormalized"

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValueError(f"form must be one of {FORMS}, got {self.form!r}")
        if isinstance(self.f, fn.MeasureDensity):
            self.f = self.f.values
        self.f = cm._as_field(self.mesh, self.f).copy()
        if not self.mesh.theta < np.pi / 2:
            raise ValueError("the solver needs a contact angle below pi/2")
        if not np.all(self.f > 0):
            raise ValueError("data f must be strictly positive")

    def f_t(self, t: float) -> np.ndarray:
        return (1.0 - t) * float(self.phi(1.0)) * self.mesh.ell + t * self.f


@dataclass
class SolverConfig:
    dt0: float = 0.25
    dt_min: float = 1e-4
    grow: float = 1.5
    shrink: float = 0.5
    tol: float = 1e-9
    max_iter: int = 25
    line_search_max: int = 30
    armijo: float = 1e-4
    psd_tol: float = 0.0
    even_projection: bool = True
    normalization: str = "bordered"
    fp_damping: float = 1.0
    fp_tol: float = 1e-10
    fp_max: int = 60
    predictor: bool = True
    jacobian_check_every: int = 10
    diagnostics: bool = False

    def __post_init__(self):
        for name in ("dt0", "dt_min", "tol", "fp_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.dt0 <= 1:
            raise ValueError("dt0 must lie in (0, 1]")
        if not (0 < self.shrink < 1 and self.grow >= 1):
            raise ValueError("need 0 < shrink < 1 <= grow")
        if self.normalization not in ("bordered", "fixed_point"):
            raise ValueError("normalization must be 'bordered' or 'fixed_point'")
        if not 0 < self.fp_damping <= 1:
            raise ValueError("fp_damping must lie in (0, 1]")

    @classmethod
    def from_dict(cls, d: dict) -> "SolverConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown solver options: {sorted(extra)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


# --------------------------------------------------------------------------
# residual and linearization
# --------------------------------------------------------------------------


def _nodal_W(mesh, h):
    W = cm.area_operator(mesh, h)
    if mesh.n == 1:
        lam = W[:, 0, 0]
        return W, lam.copy(), lam.copy()
    lam = np.linalg.eigvalsh(W)
    return W, np.linalg.det(W), lam[:, 0]


def _check_pd(h, lam_min, psd_tol=0.0):
    if np.min(h) <= 0:
        i = int(np.argmin(h))
        raise NotConvexError(i, float(h[i]))
    if np.min(lam_min) <= psd_tol:
        i = int(np.argmin(lam_min))
        raise NotConvexError(i, float(lam_min[i]))


def _volume(mesh, h, detW):
    return cm.integrate(mesh, h * detW) / (mesh.n + 1)


def residual(h, data: ProblemData, t: float, log_volume: float | None = None):
    """Interior and boundary residuals of ``h`` at homotopy time ``t``.

    Returns ``(R_interior, R_boundary)``: the log-form equation at
    ``mesh.interior_ids`` and the Robin defect at ``mesh.boundary_ids``.  For
    the normalized form ``log_volume`` overrides ``log V(h)`` (this is how the
    extra unknown or a frozen volume enters).  Raises :class:`NotConvexError`
    if ``W`` is not positive definite or ``h`` is not positive.
    """
    m = data.mesh
    h = cm._as_field(m, h)
    W, detW, lam = _nodal_W(m, h)
    _check_pd(h, lam)
    R = _log_residual(m, h, detW, data, t, log_volume)
    return R[m.interior_ids], _robin(m, h)


def _log_residual(m, h, detW, data, t, log_volume):
    R = np.log(detW) + np.log(data.phi(m.ell / h)) + np.log(h) - np.log(data.f_t(t))
    if data.form == "normalized":
        R -= np.log(_volume(m, h, detW)) if log_volume is None else log_volume
    return R


def _robin(m, h):
    return m.normal_op @ h - h[m.boundary_ids] / np.tan(m.theta)


def _cofactor(W):
    n = W.shape[-1]
    if n == 1:
        return np.ones_like(W)
    if n == 2:
        C = np.empty_like(W)
        C[:, 0, 0] = W[:, 1, 1]
        C[:, 1, 1] = W[:, 0, 0]
        C[:, 0, 1] = C[:, 1, 0] = -W[:, 0, 1]
        return C
    return np.linalg.det(W)[:, None, None] * np.linalg.inv(W)


def _second_order_part(m, coeff):
    """Sparse matrix of ``v -> sum_ij coeff_ij (hess v)_ij + tr(coeff) v``."""
    n = m.n
    M = sp.diags(np.trace(coeff, axis1=1, axis2=2))
    for (i, j), H in m.hessian_ops.items():
        mult = 1.0 if i == j else 2.0
        M = M + sp.diags(mult * coeff[:, i, j]) @ H
    return M.tocsr()


def _gauge_factor(data, h):
    """``1 - ell phi'(ell/h) / (h phi(ell/h))``."""
    x = data.mesh.ell / h
    return 1.0 - x * data.phi.deriv(x) / data.phi(x)


def _with_robin_rows(m, A):
    """Replace the boundary rows of ``A`` by the linearized Robin condition."""
    N = m.size
    keep = np.ones(N)
    keep[m.boundary_ids] = 0.0
    P = sp.diags(keep)
    E = sp.csr_matrix((np.ones(m.boundary_ids.size), (m.boundary_ids, np.arange(m.boundary_ids.size))),
                      shape=(N, m.boundary_ids.size))
    robin = m.normal_op - sp.csr_matrix(
        (np.full(m.boundary_ids.size, 1.0 / np.tan(m.theta)),
         (np.arange(m.boundary_ids.size), m.boundary_ids)), shape=(m.boundary_ids.size, N))
    return (P @ A + E @ robin).tocsr()


def log_jacobian(h, data: ProblemData, t: float, robin_rows: bool = True):
    """Newton Jacobian of the log residual (unknown ``h`` only).

    ``J v = tr(W^-1 A[v]) + (v/h)(1 - ell phi'/(h phi))`` at interior rows,
    Robin rows at boundary nodes.  For the normalized form the ``-log V``
    term is not included; see :func:`volume_gradient`.
    """
    m = data.mesh
    h = cm._as_field(m, h)
    W, detW, lam = _nodal_W(m, h)
    _check_pd(h, lam)
    Winv = np.linalg.inv(W)
    J = _second_order_part(m, Winv) + sp.diags(_gauge_factor(data, h) / h)
    return _with_robin_rows(m, J) if robin_rows else J.tocsr()


def cofactor_operator(h, data: ProblemData, t: float, robin_rows: bool = True):
    """The linearized operator ``L_h`` written with the cofactor matrix:

    ``L_h v = sum c(W)_ij (v_ij + v delta_ij) + v f_t (1 - ell phi'/(h phi)) / (h^2 phi)``.

    At a solution this is ``det W`` times the log Jacobian row by row.  With
    ``robin_rows`` the boundary rows are replaced by the Robin condition.
    """
    m = data.mesh
    h = cm._as_field(m, h)
    W, detW, lam = _nodal_W(m, h)
    _check_pd(h, lam)
    C = _cofactor(W)
    x = m.ell / h
    zeroth = data.f_t(t) * _gauge_factor(data, h) / (h ** 2 * data.phi(x))
    L = _second_order_part(m, C) + sp.diags(zeroth)
    return _with_robin_rows(m, L) if robin_rows else L.tocsr()


def assemble_linearized(h, data: ProblemData, t: float):
    """Both linearizations: ``(log_jacobian, cofactor_operator)``."""
    return log_jacobian(h, data, t), cofactor_operator(h, data, t)


def volume_gradient(mesh: CapMesh, h) -> np.ndarray:
    """Gradient of the discrete volume with respect to the nodal values of ``h``."""
    W, detW, _ = _nodal_W(mesh, h)
    C = _cofactor(W)
    w = mesh.weights
    g = w * detW + w * h * np.trace(C, axis1=1, axis2=2)
    for (i, j), H in mesh.hessian_ops.items():
        mult = 1.0 if i == j else 2.0
        g = g + mult * (H.T @ (w * h * C[:, i, j]))
    return g / (mesh.n + 1)


# --------------------------------------------------------------------------
# Newton
# --------------------------------------------------------------------------


@dataclass
class NewtonRecord:
    t: float
    iterations: int = 0
    residual_history: list = field(default_factory=list)
    max_residual_history: list = field(default_factory=list)
    step_lengths: list = field(default_factory=list)
    jacobian_checks: list = field(default_factory=list)
    converged: bool = False
    message: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


class _System:
    """Residual vector and Jacobian of the full square system."""

    def __init__(self, data, t, mu_frozen=None, bordered=False):
        self.data, self.t = data, t
        self.mu_frozen = mu_frozen
        self.bordered = bordered and data.form == "normalized"
        m = data.mesh
        self.w_int = np.zeros(m.size)
        self.w_int[m.interior_ids] = m.weights[m.interior_ids]
        self.w_int /= self.w_int.sum()

    def unpack(self, x):
        if self.bordered:
            return x[:-1], x[-1]
        return x, self.mu_frozen

    def evaluate(self, x):
        """Full residual vector or raise :class:`NotConvexError`."""
        m = self.data.mesh
        h, mu = self.unpack(x)
        W, detW, lam = _nodal_W(m, h)
        _check_pd(h, lam)
        R = _log_residual(m, h, detW, self.data, self.t, mu)
        F = R.copy()
        F[m.boundary_ids] = _robin(m, h) / np.max(h)
        if self.bordered:
            F = np.append(F, mu - np.log(_volume(m, h, detW)))
        return F

    def norm(self, F):
        m = self.data.mesh
        Fh = F[:m.size]
        nb = m.boundary_ids.size
        val = np.sum(self.w_int * Fh ** 2) + np.sum(Fh[m.boundary_ids] ** 2) / nb
        if self.bordered:
            val += F[-1] ** 2
        return float(np.sqrt(val))

    def jacobian(self, x):
        m = self.data.mesh
        h, mu = self.unpack(x)
        J = _with_robin_rows(m, log_jacobian(h, self.data, self.t, robin_rows=False))
        # boundary residual rows are scaled by 1/max h (treated as frozen)
        D = np.ones(m.size)
        D[m.boundary_ids] = 1.0 / np.max(h)
        J = sp.diags(D) @ J
        if not self.bordered:
            return J.tocsc()
        col = np.full(m.size, -1.0)
        col[m.boundary_ids] = 0.0
        V = _volume(m, h, _nodal_W(m, h)[1])
        row = -volume_gradient(m, h) / V
        return sp.bmat([[J, sp.csr_matrix(col[:, None])],
                        [sp.csr_matrix(row[None, :]), sp.csr_matrix([[1.0]])]]).tocsc()


def _project(data, x, bordered):
    m = data.mesh
    if bordered:
        return np.append(cm.reflect_even(m, x[:-1]), x[-1])
    return cm.reflect_even(m, x)


def _newton(system: _System, x0, config: SolverConfig, record: NewtonRecord):
    project = config.even_projection
    x = _project(system.data, x0, system.bordered) if project else np.array(x0, float)
    F = system.evaluate(x)
    r = system.norm(F)
    record.residual_history.append(r)
    record.max_residual_history.append(float(np.max(np.abs(F))))
    for k in range(config.max_iter):
        if r <= config.tol:
            record.converged = True
            return x
        J = system.jacobian(x)
        try:
            dx = spla.splu(J).solve(-F)
        except RuntimeError as exc:
            record.message = f"linear solve failed: {exc}"
            raise NewtonFailure(record.message, record)
        if config.jacobian_check_every and k % config.jacobian_check_every == 0:
            record.jacobian_checks.append(_fd_check(system, x, F, J, dx))
        alpha = 1.0
        for _ in range(config.line_search_max):
            trial = x + alpha * dx
            if project:
                trial = _project(system.data, trial, system.bordered)
            try:
                Ft = system.evaluate(trial)
            except NotConvexError:
                alpha *= 0.5
                continue
            rt = system.norm(Ft)
            if rt <= (1.0 - config.armijo * alpha) * r or rt <= config.tol:
                break
            alpha *= 0.5
        else:
            record.message = "line search failed"
            raise NewtonFailure(record.message, record)
        x, F, r = trial, Ft, rt
        record.iterations = k + 1
        record.step_lengths.append(alpha)
        record.residual_history.append(r)
        record.max_residual_history.append(float(np.max(np.abs(F))))
    if r <= config.tol:
        record.converged = True
        return x
    record.message = f"no convergence in {config.max_iter} iterations (residual {r:.3e})"
    raise NewtonFailure(record.message, record)


def _fd_check(system, x, F, J, direction):
    """Relative mismatch between a central difference of the residual and
    the Jacobian action along the Newton direction."""
    s = 1e-6 / max(1.0, float(np.max(np.abs(direction))))
    try:
        Fp = system.evaluate(x + s * direction)
        Fm = system.evaluate(x - s * direction)
    except NotConvexError:
        return float("nan")
    fd = (Fp - Fm) / (2 * s)
    Jv = J @ direction
    return float(np.max(np.abs(fd - Jv)) / max(np.max(np.abs(Jv)), 1e-300))


def newton_solve(h0, data: ProblemData, t: float, config: SolverConfig | None = None,
                 log_volume: float | None = None):
    """Damped Newton at fixed ``t``.  Returns ``(h, record)``.

    For the normalized form with the bordered policy the volume is an extra
    unknown; pass ``log_volume`` to freeze it instead.  Raises
    :class:`NewtonFailure` (carrying the record) if it does not converge.
    """
    config = config or SolverConfig()
    m = data.mesh
    h0 = cm._as_field(m, h0)
    record = NewtonRecord(t=float(t))
    bordered = data.form == "normalized" and log_volume is None
    system = _System(data, t, mu_frozen=log_volume, bordered=bordered)
    if bordered:
        x0 = np.append(h0, np.log(_volume(m, h0, _nodal_W(m, h0)[1])))
    else:
        x0 = h0
    try:
        x = _newton(system, x0, config, record)
    except NotConvexError as exc:
        record.message = f"start point not admissible: {exc}"
        raise NewtonFailure(record.message, record) from exc
    h, _ = system.unpack(x)
    return h, record


# --------------------------------------------------------------------------
# continuation
# --------------------------------------------------------------------------


@dataclass
class StepRecord:
    t: float
    dt: float
    accepted: bool
    iterations: int
    residual_history: list
    final_residual: float
    min_h: float = float("nan")
    max_h: float = float("nan")
    min_eig_W: float = float("nan")
    max_grad: float = float("nan")
    max_hess: float = float("nan")
    volume: float = float("nan")
    message: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SolveReport:
    status: str
    body: CapillaryBody | None
    steps: list
    last_good_t: float
    admissibility: dict
    volume: float
    final_residual: float
    validation: dict
    outer_iterations: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    runtime_s: float = 0.0

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def to_dict(self, include_h: bool = False) -> dict:
        out = {"status": self.status, "converged": self.converged,
               "last_good_t": self.last_good_t, "admissibility": self.admissibility,
               "volume": self.volume, "final_residual": self.final_residual,
               "validation": self.validation,
               "steps": [s.to_dict() for s in self.steps],
               "outer_iterations": self.outer_iterations,
               "diagnostics": self.diagnostics}
        if include_h and self.body is not None:
            out["h"] = self.body.h.tolist()
        return out


def _monitors(m, h):
    W, detW, lam = _nodal_W(m, h)
    g = cm.gradient(m, h)
    H = cm.hessian(m, h)
    return dict(min_h=float(h.min()), max_h=float(h.max()), min_eig_W=float(lam.min()),
                max_grad=float(np.max(np.linalg.norm(g, axis=1))),
                max_hess=float(np.max(np.linalg.norm(H, axis=(1, 2)))),
                volume=_volume(m, h, detW))


def start_point(data: ProblemData) -> np.ndarray:
    """Exact discrete solution at ``t = 0``.

    ``ell`` for the unnormalized form.  For the normalized form ``c ell`` with
    ``1/c = phi^{-1}(phi(1) |C|)``, using the discrete volume ``|C|`` of the
    unit cap so the start is exact on the mesh.
    """
    m = data.mesh
    if data.form == "unnormalized":
        return m.ell.copy()
    vol = cm.integrate(m, m.ell) / (m.n + 1)
    c = 1.0 / inverse(data.phi, float(data.phi(1.0)) * vol)
    return c * m.ell


def homotopy_solve(data: ProblemData, config: SolverConfig | None = None) -> SolveReport:
    """March ``t`` from 0 to 1 with adaptive steps and Newton corrections."""
    config = config or SolverConfig()
    t0 = time.perf_counter()
    if data.form == "normalized" and config.normalization == "fixed_point":
        report = _fixed_point_solve(data, config)
    else:
        report = _march(data, config, log_volume=None)
    if report.body is not None and config.diagnostics:
        report.diagnostics = orthogonality_diagnostic(report.body.h, data).to_dict()
    report.runtime_s = time.perf_counter() - t0
    return report


def _march(data, config, log_volume, h_start=None):
    m = data.mesh
    h = start_point(data) if h_start is None else h_start
    steps = []
    mon = _monitors(m, h)
    try:
        h, rec = newton_solve(h, data, 0.0, config, log_volume=log_volume)
        steps.append(StepRecord(0.0, 0.0, True, rec.iterations, rec.residual_history,
                                rec.residual_history[-1], **_monitors(m, h)))
    except NewtonFailure as exc:
        steps.append(StepRecord(0.0, 0.0, False, exc.record.iterations,
                                exc.record.residual_history, float("nan"), **mon,
                                message=str(exc)))
        return _finish(data, "stalled", None, steps, -1.0)
    t, dt = 0.0, config.dt0
    h_prev, t_prev = None, None
    while t < 1.0:
        dt = min(dt, 1.0 - t)
        t_new = t + dt
        guess = h
        if config.predictor and h_prev is not None:
            guess = h + (h - h_prev) * (dt / (t - t_prev))
            try:
                _check_pd(guess, _nodal_W(m, guess)[2])
            except NotConvexError:
                guess = h
        try:
            h_new, rec = newton_solve(guess, data, t_new, config, log_volume=log_volume)
        except NewtonFailure as exc:
            steps.append(StepRecord(t_new, dt, False, exc.record.iterations,
                                    exc.record.residual_history, float("nan"), message=str(exc)))
            dt *= config.shrink
            if dt < config.dt_min:
                return _finish(data, "stalled", h, steps, t)
            continue
        steps.append(StepRecord(t_new, dt, True, rec.iterations, rec.residual_history,
                                rec.residual_history[-1], **_monitors(m, h_new)))
        h_prev, t_prev = h, t
        h, t = h_new, t_new
        if rec.iterations <= 4:
            dt = min(1.0, dt * config.grow)
    return _finish(data, "converged", h, steps, 1.0)


def _finish(data, status, h, steps, last_t, outer=None):
    m = data.mesh
    adm = check_admissibility(data).to_dict()
    if h is None:
        return SolveReport(status, None, steps, last_t, adm, float("nan"), float("nan"), {},
                           outer or [])
    body = CapillaryBody(m, h, even=True, label=f"solution({data.form})")
    t_eval = 1.0 if status == "converged" else max(last_t, 0.0)
    Ri, Rb = residual(h, data, t_eval)
    final = float(max(np.max(np.abs(Ri)), np.max(np.abs(Rb)) / np.max(h)))
    return SolveReport(status, body, steps, last_t, adm, fn.volume(body), final,
                       validate(body).to_dict(), outer or [])


def _fixed_point_solve(data, config):
    """Normalized form by an outer damped fixed point on the volume."""
    m = data.mesh
    h = start_point(data)
    lam = _volume(m, h, _nodal_W(m, h)[1])
    outer, steps = [], []
    report = None
    for it in range(config.fp_max):
        report = _march(data, config, log_volume=np.log(lam), h_start=h)
        steps.extend(report.steps)
        if not report.converged:
            report.steps = steps
            report.outer_iterations = outer
            return report
        h = report.body.h
        V = report.volume
        outer.append({"iteration": it, "lambda": lam, "volume": V})
        if abs(lam - V) <= config.fp_tol * lam:
            break
        lam = (1 - config.fp_damping) * lam + config.fp_damping * V
    else:
        report = _finish(data, "stalled", h, steps, 1.0, outer)
        return report
    report.steps = steps
    report.outer_iterations = outer
    return report


# --------------------------------------------------------------------------
# admissibility and diagnostics
# --------------------------------------------------------------------------


@dataclass
class AdmissibilityReport:
    lhs: float
    rhs: float
    margin: float
    positive: bool
    even: bool
    evenness_defect: float

    @property
    def admissible(self) -> bool:
        return self.positive and self.even and self.margin >= 0

    def to_dict(self) -> dict:
        out = asdict(self)
        out["admissible"] = self.admissible
        return out


def check_admissibility(data_or_mesh, f=None, phi=None, even_tol: float = 1e-10):
    """``(1/(n+1)) int f - phi(|C|^(1/(n+1)))`` with the closed-form cap volume,
    plus positivity and evenness of ``f``.  Accepts a :class:`ProblemData` or
    ``(mesh, f, phi)`` so that inadmissible data can be reported."""
    if isinstance(data_or_mesh, ProblemData):
        m, f, phi = data_or_mesh.mesh, data_or_mesh.f, data_or_mesh.phi
    else:
        m = data_or_mesh
    f = cm._as_field(m, f)
    n = m.n
    lhs = cm.integrate(m, f) / (n + 1)
    rhs = float(phi(cm.cap_volume(n, m.theta) ** (1.0 / (n + 1))))
    defect = float(np.max(np.abs(f - f[m.reflection])))
    return AdmissibilityReport(lhs, rhs, lhs - rhs, bool(np.all(f > 0)),
                               defect <= even_tol * max(1.0, float(np.max(np.abs(f)))), defect)


def equality_case_data(mesh: CapMesh, phi: OrliczFunction) -> np.ndarray:
    """``f = phi(|C|^(1/(n+1))) ell / |C|``: the cap ``|C|^(-1/(n+1)) C`` solves
    the normalized equation with this data and it meets the admissibility
    condition with equality."""
    vol = cm.cap_volume(mesh.n, mesh.theta)
    return float(phi(vol ** (1.0 / (mesh.n + 1)))) * mesh.ell / vol


def manufactured_cap_data(mesh: CapMesh, phi: OrliczFunction, r: float) -> np.ndarray:
    """``f = phi(1/r) r^(n+1) ell``, solved by ``h = r ell`` (unnormalized form)."""
    return float(phi(1.0 / r)) * r ** (mesh.n + 1) * mesh.ell


def orlicz_weight(h, data: ProblemData) -> np.ndarray:
    """``ell phi'(ell/h) / (h phi(ell/h)) - n - 1``."""
    x = data.mesh.ell / h
    return x * data.phi.deriv(x) / data.phi(x) - data.mesh.n - 1


def random_robin_field(mesh: CapMesh, rng: np.random.Generator) -> np.ndarray:
    """Random even field ``v = ell u`` with ``D_mu u = 0`` on the boundary.

    ``u = A(z) + (z - z0)^2 (b1 (x^2 - y^2) + b2 x y)`` with ``z = cos psi``,
    ``z0 = cos theta`` and ``A'(z0) = 0``.
    """
    nu = mesh.nu
    z = nu[:, -1]
    z0 = np.cos(mesh.theta)
    a = rng.normal(size=4)
    u = a[0] + (z - z0) ** 2 * (a[1] + a[2] * z)
    if mesh.n == 2:
        x, y = nu[:, 0], nu[:, 1]
        b = rng.normal(size=2)
        u = u + (z - z0) ** 2 * (b[0] * (x ** 2 - y ** 2) + b[1] * x * y)
    return mesh.ell * u


def symmetry_defect(h, data: ProblemData, v, w, t: float = 1.0) -> float:
    """``|int w L_h v - int v L_h w| / (|v| |w|)`` with quadrature weights and
    the operator evaluated at every node (no Robin row replacement)."""
    m = data.mesh
    L = cofactor_operator(h, data, t, robin_rows=False)
    v = cm._as_field(m, v)
    w = cm._as_field(m, w)
    a = cm.integrate(m, w * (L @ v))
    b = cm.integrate(m, v * (L @ w))
    nv = np.sqrt(cm.integrate(m, v * v))
    nw = np.sqrt(cm.integrate(m, w * w))
    return float(abs(a - b) / (nv * nw))


@dataclass
class OrthogonalityReport:
    singular_values: list
    near_kernel: list
    definition_quadratures: list
    kernel_quadratures: list
    h_quadratures: list
    weight_min: float
    weight_max: float
    weight_sign: dict
    shift_used: float

    def to_dict(self) -> dict:
        return asdict(self)


def orthogonality_diagnostic(h, data: ProblemData, t: float = 1.0, k: int = 4,
                             kernel_tol: float = 1e-6) -> OrthogonalityReport:
    """Smallest singular values of the weighted cofactor operator and, for each
    singular vector ``v``, the quadratures of the orthogonality condition:

    * ``int w f v / (h phi)`` (definition form),
    * ``int w v det W`` (kernel form),
    * ``int h v``,

    with ``w = ell phi'/(h phi) - n - 1``.  ``v`` is normalized in the
    quadrature-weighted L2 norm.
    """
    m = data.mesh
    h = cm._as_field(m, h)
    L = cofactor_operator(h, data, t)
    sq = np.sqrt(m.weights)
    M = (sp.diags(sq) @ L @ sp.diags(1.0 / sq)).tocsc()
    shift = 0.0
    try:
        lu = spla.splu(M)
        probe = lu.solve(np.ones(m.size))
        if not np.all(np.isfinite(probe)):
            raise RuntimeError("singular factorization")
    except RuntimeError:
        shift = 1e-10 * float(abs(M).max())
        lu = spla.splu((M + shift * sp.identity(m.size)).tocsc())
    op = spla.LinearOperator((m.size, m.size), dtype=float,
                             matvec=lambda x: lu.solve(lu.solve(x, trans="T")))
    k = min(k, m.size - 2)
    vals, vecs = spla.eigsh(op, k=k, which="LM", v0=np.ones(m.size))
    order = np.argsort(-vals)
    sig = 1.0 / np.sqrt(np.abs(vals[order]))
    vecs = vecs[:, order]
    W, detW, _ = _nodal_W(m, h)
    weight = orlicz_weight(h, data)
    x = m.ell / h
    q_def, q_kernel, q_h = [], [], []
    for j in range(k):
        v = vecs[:, j] / sq
        v /= np.sqrt(cm.integrate(m, v * v))
        q_def.append(cm.integrate(m, weight * data.f * v / (h * data.phi(x))))
        q_kernel.append(cm.integrate(m, weight * v * detW))
        q_h.append(cm.integrate(m, h * v))
    tiny = 1e-12
    sign = {"positive": float(np.mean(weight > tiny)), "negative": float(np.mean(weight < -tiny)),
            "zero": float(np.mean(np.abs(weight) <= tiny))}
    return OrthogonalityReport(sig.tolist(), [bool(s <= kernel_tol) for s in sig], q_def, q_kernel,
                               q_h, float(weight.min()), float(weight.max()), sign, shift)

"""Numerical checks of the Orlicz-Minkowski, Orlicz-Brunn-Minkowski,
Minkowski and Aleksandrov-Fenchel inequalities, the variational formula and
the equivalence function, plus a seeded random corpus of capillary bodies.

Every check returns an :class:`InequalityReport` for an inequality written as
``lhs >= rhs``.  ``margin = lhs - rhs`` must be at least ``-slack``.
"""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, field

import numpy as np

from . import functionals as fn
from .body import CapillaryBody, ConvexityError, cap, perturbed_cap, translate_horizontal, validate
from .combination import CombinationSpec, combine, combine_support, perturb
from .mesh import CapMesh
from .orlicz import OrliczFunction, PowerLaw, inverse

DEFAULT_SLACK = 1e-8


@dataclass
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    slack: float
    eq_tol: float
    digest: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    @property
    def relative_margin(self) -> float:
        g = np.sqrt(abs(self.lhs * self.rhs))
        return self.margin / g if g > 0 else self.margin

    @property
    def passed(self) -> bool:
        return bool(self.margin >= -self.slack)

    @property
    def equality(self) -> bool:
        return bool(abs(self.margin) <= self.eq_tol)

    def to_dict(self) -> dict:
        out = asdict(self)
        out.update(margin=self.margin, relative_margin=self.relative_margin,
                   passed=self.passed, equality=self.equality)
        return out


def digest(*bodies) -> str:
    """Short hash of the support functions involved in a check."""
    hsh = hashlib.sha256()
    for b in bodies:
        hsh.update(np.ascontiguousarray(b.h).tobytes())
    return hsh.hexdigest()[:16]


def _report(name, lhs, rhs, rel_slack, rel_eq, bodies, **extra):
    scale = max(abs(lhs), abs(rhs), np.finfo(float).tiny)
    return InequalityReport(name, float(lhs), float(rhs), rel_slack * scale, rel_eq * scale,
                            digest(*bodies), extra)


def check_orlicz_minkowski(phi: OrliczFunction, K: CapillaryBody, L: CapillaryBody,
                           rel_slack: float = DEFAULT_SLACK, rel_eq: float = 1e-9):
    """``V_phi(K, L) >= V(K) phi((V(L)/V(K))^(1/(n+1)))``."""
    n = K.mesh.n
    VK, VL = fn.volume(K), fn.volume(L)
    lhs = fn.orlicz_mixed_volume(phi, K, L)
    rhs = VK * float(phi((VL / VK) ** (1.0 / (n + 1))))
    return _report("orlicz_minkowski", lhs, rhs, rel_slack, rel_eq, (K, L))


def check_obm(phi: OrliczFunction, alpha: float, beta: float, K: CapillaryBody,
              L: CapillaryBody, rel_slack: float = DEFAULT_SLACK, rel_eq: float = 1e-9):
    """``1 >= alpha phi((V(K)/V(M))^(1/(n+1))) + beta phi((V(L)/V(M))^(1/(n+1)))``
    with ``M`` the Orlicz combination of ``K`` and ``L``."""
    n = K.mesh.n
    M = combine(CombinationSpec(phi, alpha, beta), K, L, check=False)
    VM = fn.volume(M)
    rhs = (alpha * float(phi((fn.volume(K) / VM) ** (1.0 / (n + 1))))
           + beta * float(phi((fn.volume(L) / VM) ** (1.0 / (n + 1)))))
    return _report("obm", 1.0, rhs, rel_slack, rel_eq, (K, L), volume_M=VM,
                   phi_at_one=float(phi(1.0)))


def check_minkowski_V1(K: CapillaryBody, L: CapillaryBody,
                       rel_slack: float = DEFAULT_SLACK, rel_eq: float = 1e-8):
    """``V_1(K, L)^(n+1) >= V(K)^n V(L)``."""
    n = K.mesh.n
    lhs = fn.V1(K, L) ** (n + 1)
    rhs = fn.volume(K) ** n * fn.volume(L)
    return _report("minkowski_V1", lhs, rhs, rel_slack, rel_eq, (K, L))


def check_af_quadratic(K: CapillaryBody, L: CapillaryBody, fixed=(),
                       rel_slack: float = DEFAULT_SLACK, rel_eq: float = 1e-8):
    """``V(K, L, F...)^2 >= V(K, K, F...) V(L, L, F...)`` with ``n - 1`` fixed bodies."""
    m = K.mesh
    if m.n < 2:
        raise ValueError("the quadratic Aleksandrov-Fenchel form needs n >= 2")
    fixed = tuple(fixed)
    if len(fixed) != m.n - 1:
        raise ValueError(f"need {m.n - 1} fixed bodies")
    fh = [F.h for F in fixed]
    vKL = fn.mixed_volume(m, K.h, L.h, *fh)
    vKK = fn.mixed_volume(m, K.h, K.h, *fh)
    vLL = fn.mixed_volume(m, L.h, L.h, *fh)
    return _report("af_quadratic", vKL ** 2, vKK * vLL, rel_slack, rel_eq, (K, L) + fixed)


def _signed_perturb_volume(phi, K, L, eps):
    """Volume of the perturbation with a possibly negative ``eps``."""
    if eps >= 0:
        return fn.volume(perturb(phi, K, L, eps, check=False))
    # phi(h1/t) + eps phi(h2/t) = 1 by Newton from the eps = 0 root; the
    # left side stays strictly decreasing in t for the tiny |eps| used here.
    t = K.h / inverse(phi, 1.0)
    for _ in range(50):
        g = phi(K.h / t) + eps * phi(L.h / t) - 1.0
        dg = -(K.h * phi.deriv(K.h / t) + eps * L.h * phi.deriv(L.h / t)) / t ** 2
        step = g / dg
        t = t - step
        if np.max(np.abs(step) / t) < 1e-15:
            break
    return fn.volume(K.with_h(t))


@dataclass
class VariationalReport:
    fd_slope: float
    integral: float
    relative_error: float
    steps: tuple

    def to_dict(self) -> dict:
        return asdict(self)


def check_variational_formula(phi: OrliczFunction, K: CapillaryBody, L: CapillaryBody,
                              steps=(1e-3, 1e-4)) -> VariationalReport:
    """Compare ``d/deps V(K +_phi eps L)`` at 0 with ``(n+1) V_phi(K, L) / phi'(1)``.

    Central differences at the two step sizes are Richardson-combined.
    """
    dphi = float(phi.deriv(1.0))
    if not dphi > 0:
        raise ValueError("the variational formula needs phi'(1) > 0")
    e1, e2 = steps
    d = []
    for e in steps:
        d.append((_signed_perturb_volume(phi, K, L, e) - _signed_perturb_volume(phi, K, L, -e))
                 / (2 * e))
    r = (e1 / e2) ** 2
    slope = (r * d[1] - d[0]) / (r - 1)
    integral = (K.mesh.n + 1) * fn.orlicz_mixed_volume(phi, K, L) / dphi
    return VariationalReport(float(slope), float(integral),
                             float(abs(slope - integral) / abs(integral)), tuple(steps))


@dataclass
class EquivalenceReport:
    eps: np.ndarray
    values: np.ndarray
    second_differences: np.ndarray
    right_derivative_fd: float
    right_derivative_formula: float
    max_value: float
    min_second_difference: float

    def to_dict(self) -> dict:
        out = asdict(self)
        for k in ("eps", "values", "second_differences"):
            out[k] = np.asarray(out[k]).tolist()
        return out


def equivalence_function(phi: OrliczFunction, K: CapillaryBody, L: CapillaryBody,
                         eps_grid=None) -> EquivalenceReport:
    """Sample ``f(eps) = phi((V(K)/V_eps)^(1/(n+1))) + eps phi((V(L)/V_eps)^(1/(n+1))) - 1``.

    Requires ``phi(1) = 1``.  Reports the samples, their second differences
    (uniform grid assumed for the convexity reading) and the right derivative
    at zero both by a one-sided difference and by the closed form
    ``phi((V(L)/V(K))^(1/(n+1))) - V_phi(K, L)/V(K)``.
    """
    if abs(float(phi(1.0)) - 1.0) > 1e-12:
        raise ValueError("the equivalence function needs a gauge with phi(1) = 1")
    n = K.mesh.n
    eps = np.linspace(0.0, 1.0, 21) if eps_grid is None else np.asarray(eps_grid, float)
    if np.any(eps < 0):
        raise ValueError("eps grid must be nonnegative")
    VK, VL = fn.volume(K), fn.volume(L)

    def f_at(e):
        Ve = fn.volume(perturb(phi, K, L, e, check=False))
        return (float(phi((VK / Ve) ** (1.0 / (n + 1))))
                + e * float(phi((VL / Ve) ** (1.0 / (n + 1)))) - 1.0)

    vals = np.array([f_at(e) for e in eps])
    d2 = vals[:-2] - 2 * vals[1:-1] + vals[2:]
    h = 1e-4
    fd = (-3 * f_at(0.0) + 4 * f_at(h) - f_at(2 * h)) / (2 * h)
    formula = float(phi((VL / VK) ** (1.0 / (n + 1)))) - fn.orlicz_mixed_volume(phi, K, L) / VK
    return EquivalenceReport(eps, vals, d2, float(fd), float(formula), float(vals.max()),
                             float(d2.min()) if d2.size else 0.0)


# --------------------------------------------------------------------------
# random corpus
# --------------------------------------------------------------------------

BODY_KINDS = ("perturbed", "translate", "lp_combination")
_MODES = ("radial", "cos2", "sin2", "cos4")


def random_body(mesh: CapMesh, rng: np.random.Generator, kind: str | None = None,
                max_tries: int = 20) -> CapillaryBody:
    """Draw a valid random body, rejection-sampled on the validator.

    Kinds: a scaled perturbed cap, a horizontally translated (perturbed) cap,
    or an L_p combination of two translated caps.
    """
    for _ in range(max_tries):
        k = kind or BODY_KINDS[rng.integers(len(BODY_KINDS))]
        try:
            body = _draw(mesh, rng, k)
        except (ValueError, ConvexityError):
            continue
        if validate(body).passed:
            return body
    raise RuntimeError("could not draw a valid random body")


def _random_shift(mesh, rng, r):
    # |x| sin(theta) < r min(ell) keeps h > 0
    lim = 0.5 * r * np.min(mesh.ell) / max(np.sin(min(mesh.theta, np.pi / 2)), 1e-12)
    x = rng.uniform(-1, 1, mesh.n)
    return lim * rng.uniform(0.2, 1.0) * x / np.linalg.norm(x)


def _draw(mesh, rng, kind):
    r = rng.uniform(0.6, 1.6)
    if kind == "perturbed":
        modes = _MODES if mesh.n == 2 else ("radial",)
        mode = modes[rng.integers(len(modes))]
        eps = rng.uniform(-0.08, 0.08) if mesh.n == 2 else rng.uniform(-0.03, 0.03)
        return perturbed_cap(mesh, mode, eps).scaled(r)
    if kind == "translate":
        base = cap(mesh, r)
        if rng.random() < 0.5:
            modes = _MODES if mesh.n == 2 else ("radial",)
            base = perturbed_cap(mesh, modes[rng.integers(len(modes))],
                                 rng.uniform(-0.05, 0.05) if mesh.n == 2 else 0.02).scaled(r)
        return translate_horizontal(base, _random_shift(mesh, rng, r))
    if kind == "lp_combination":
        r2 = rng.uniform(0.6, 1.6)
        A = translate_horizontal(cap(mesh, r), _random_shift(mesh, rng, r))
        B = translate_horizontal(cap(mesh, r2), _random_shift(mesh, rng, r2))
        p = rng.uniform(1.0, 4.0)
        spec = CombinationSpec(PowerLaw(p), rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0))
        return combine(spec, A, B)
    raise ValueError(f"unknown body kind {kind!r}")


def random_pairs(mesh: CapMesh, count: int, seed: int, kinds=None):
    """``count`` reproducible pairs ``(K, L)``; pair ``i`` uses the ``i``-th
    child of ``SeedSequence(seed)`` so that pairs are independent of each
    other and of the order in which they are evaluated."""
    children = np.random.SeedSequence(seed).spawn(count)
    out = []
    for child in children:
        rng = np.random.default_rng(child)
        kk = None if kinds is None else kinds[rng.integers(len(kinds))]
        out.append((random_body(mesh, rng, kk), random_body(mesh, rng, kk)))
    return out


def dilate_pair(mesh: CapMesh, rng: np.random.Generator):
    """A body and a dilate of it."""
    K = random_body(mesh, rng)
    return K, K.scaled(rng.uniform(0.5, 2.0))


def horizontal_homothetic_pair(mesh: CapMesh, r: float = 1.0, s: float = 2.0, x=None):
    """``cap(r)`` and a horizontal translate of ``cap(s)``."""
    if x is None:
        x = np.full(mesh.n, 0.2 * s / np.sqrt(mesh.n))
    return cap(mesh, r), translate_horizontal(cap(mesh, s), x)


def cap_combination_scale(phi: OrliczFunction, alpha: float, beta: float, r: float, s: float,
                          ) -> float:
    """Radius of ``M_phi(alpha, beta; cap(r), cap(s))``, which is again a cap."""
    t, _ = combine_support(CombinationSpec(phi, alpha, beta), np.array([r]), np.array([s]))
    return float(t[0])

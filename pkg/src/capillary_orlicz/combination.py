"""Capillary Orlicz combinations of two bodies.

For weights ``alpha, beta >= 0`` the combination has support function

    h(xi) = inf { t > 0 : alpha phi(h1/t) + beta phi(h2/t) <= 1 },

i.e. the unique root of the strictly decreasing function
``g(t) = alpha phi(h1/t) + beta phi(h2/t) - 1``.  The root is found node by
node with a guaranteed bracket, bisection and a Newton polish.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .body import CapillaryBody, ValidationReport, validate
from .orlicz import OrliczFunction, inverse


@dataclass(frozen=True)
class CombinationSpec:
    phi: OrliczFunction
    alpha: float
    beta: float

    def __post_init__(self):
        a, b = float(self.alpha), float(self.beta)
        if not (np.isfinite(a) and np.isfinite(b)) or a < 0 or b < 0:
            raise ValueError("combination weights must be finite and nonnegative")
        if a == 0 and b == 0:
            raise ValueError("combination weights must not both vanish")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)


class CombinationError(RuntimeError):
    """The per-node root solve failed (cannot happen for valid inputs)."""


def combine_support(spec: CombinationSpec, h1, h2, rtol: float = 1e-14):
    """Per-node root ``t`` of ``alpha phi(h1/t) + beta phi(h2/t) = 1``.

    Returns ``(t, residual)`` with residual the nodal value of ``g(t)``.
    """
    phi, a, b = spec.phi, spec.alpha, spec.beta
    h1 = np.asarray(h1, dtype=float)
    h2 = np.asarray(h2, dtype=float)
    if np.any(h1 <= 0) or np.any(h2 <= 0):
        raise ValueError("support functions must be positive")
    if a == 0:
        h1, a = h2, b
        b = 0.0
    # Closed bracket: with m = min, M = max of (h1, h2) and s = phi^{-1}(1/(a+b)),
    # g(m/s) <= 0 <= g(M/s).  When one weight vanishes the root is exact.
    if b == 0:
        t = h1 / inverse(phi, 1.0 / a)
        return t, _g(phi, a, b, h1, h2, t)
    s = inverse(phi, 1.0 / (a + b))
    lo = np.minimum(h1, h2) / s
    hi = np.maximum(h1, h2) / s
    lo, hi = _expand(phi, a, b, h1, h2, lo, hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gm = _g(phi, a, b, h1, h2, mid)
        lo = np.where(gm > 0, mid, lo)
        hi = np.where(gm > 0, hi, mid)
        if np.all(hi - lo <= 1e-9 * hi):
            break
    t = 0.5 * (lo + hi)
    for _ in range(10):
        r = _g(phi, a, b, h1, h2, t)
        dr = -(a * phi.deriv(h1 / t) * h1 + b * phi.deriv(h2 / t) * h2) / t ** 2
        t_new = np.clip(t - r / dr, lo, hi)
        done = np.abs(t_new - t) <= rtol * t
        t = t_new
        if done.all():
            break
    return t, _g(phi, a, b, h1, h2, t)


def _g(phi, a, b, h1, h2, t):
    out = a * phi(h1 / t)
    if b:
        out = out + b * phi(h2 / t)
    return out - 1.0


def _expand(phi, a, b, h1, h2, lo, hi):
    # The bracket above is exact in exact arithmetic; widen it against
    # round-off before bisecting.
    lo = lo * (1 - 1e-12)
    hi = hi * (1 + 1e-12)
    for _ in range(60):
        bad_lo = _g(phi, a, b, h1, h2, lo) < 0
        bad_hi = _g(phi, a, b, h1, h2, hi) > 0
        if not (bad_lo.any() or bad_hi.any()):
            return lo, hi
        lo = np.where(bad_lo, lo * 0.5, lo)
        hi = np.where(bad_hi, hi * 2.0, hi)
    raise CombinationError("could not bracket the combination root")


@dataclass
class CombinationResult:
    body: CapillaryBody
    root_residual: float
    report: ValidationReport

    @property
    def passed(self) -> bool:
        return self.report.passed and self.root_residual <= 1e-11


def combine(spec: CombinationSpec, K1: CapillaryBody, K2: CapillaryBody,
            *, check: bool = True) -> CapillaryBody:
    """The Orlicz combination ``M_phi(alpha, beta; K1, K2)``.

    The result is a plain :class:`CapillaryBody`; use
    :func:`combine_with_report` to also get the root residual and the
    validation report.  With ``check`` a failed positivity or convexity check
    raises ``ValueError`` naming the worst node.  The Robin property is not
    imposed: it is measured by the validator.
    """
    return combine_with_report(spec, K1, K2, check=check).body


def combine_with_report(spec: CombinationSpec, K1: CapillaryBody, K2: CapillaryBody,
                        *, check: bool = False) -> CombinationResult:
    if not K1.mesh.same_as(K2.mesh):
        raise ValueError("bodies live on different meshes")
    t, res = combine_support(spec, K1.h, K2.h)
    body = CapillaryBody(K1.mesh, t, even=K1.even and K2.even,
                         label=f"M[{spec.phi.label}]({spec.alpha:g},{spec.beta:g})")
    rep = validate(body)
    if check and not (rep.positive and rep.psd):
        raise ValueError(f"combination is not convex: min eig W {rep.min_eig_W:.3e} "
                         f"at node {rep.worst_psd_node}")
    return CombinationResult(body, float(np.max(np.abs(res))), rep)


def perturb(phi: OrliczFunction, K1: CapillaryBody, K2: CapillaryBody, eps: float,
            **kw) -> CapillaryBody:
    """Orlicz perturbation ``K1 +_phi eps K2 = M_phi(1, eps; K1, K2)``."""
    if not eps >= 0:
        raise ValueError("perturbation parameter must be nonnegative")
    return combine(CombinationSpec(phi, 1.0, eps), K1, K2, **kw)


def perturbation_derivative(phi: OrliczFunction, K1: CapillaryBody, K2: CapillaryBody):
    """Nodal derivative of the perturbed support function at ``eps = 0``:
    ``h1 phi(h2/h1) / phi'(1)``."""
    return K1.h * phi(K2.h / K1.h) / float(phi.deriv(1.0))

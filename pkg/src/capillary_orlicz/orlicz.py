"""Orlicz gauges: strictly increasing convex functions phi with phi(0) = 0.

The solver and the existence theory want three more properties for a
dimension ``n``:

* A1: ``phi'(x) -> 0`` as ``x -> 0+``;
* A2: ``liminf phi(x) / x**(n+1) > 0`` as ``x -> infinity``;
* A3: ``x phi'(x) >= phi(x)`` for every ``x > 0``.

Two families ship: a single power ``x**p`` and a positive sum of powers.
Both have analytic first and second derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_GRID = np.logspace(-6, 6, 241)


class OrliczFunction:
    """Base class for gauges.  Subclasses implement ``_eval``, ``_d1``, ``_d2``."""

    label = "gauge"

    def __call__(self, x):
        return self._eval(np.asarray(x, dtype=float))

    def deriv(self, x):
        return self._d1(np.asarray(x, dtype=float))

    def deriv2(self, x):
        return self._d2(np.asarray(x, dtype=float))

    def inverse(self, y):
        return inverse(self, y)

    def analytic_flags(self, n: int) -> dict:
        """Properties known in closed form for dimension ``n`` (empty if none)."""
        return {}

    def to_config(self) -> dict:
        raise NotImplementedError

    @property
    def sup(self) -> float:
        return np.inf

    def normalized(self) -> "OrliczFunction":
        """The gauge rescaled so that ``phi(1) = 1``."""
        return ScaledGauge(self, 1.0 / float(self(1.0)))


@dataclass(frozen=True)
class PowerLaw(OrliczFunction):
    """``phi(x) = x**p``."""

    p: float

    def __post_init__(self):
        if not np.isfinite(self.p) or self.p < 1.0:
            raise ValueError(f"power gauge needs p >= 1, got {self.p!r}")

    @property
    def label(self) -> str:
        return f"x^{self.p:g}"

    def _eval(self, x):
        return np.power(x, self.p)

    def _d1(self, x):
        return self.p * np.power(x, self.p - 1.0)

    def _d2(self, x):
        return self.p * (self.p - 1.0) * np.power(x, self.p - 2.0)

    def analytic_flags(self, n: int) -> dict:
        p = self.p
        return {"increasing": True, "convex": True, "log_concave": True,
                "A1": p > 1.0, "A2": p >= n + 1, "A3": True}

    def to_config(self) -> dict:
        return {"kind": "power", "p": self.p}

    def normalized(self) -> "PowerLaw":
        return self


@dataclass(frozen=True)
class PowerSum(OrliczFunction):
    """``phi(x) = sum_k c_k x**p_k`` with ``c_k > 0`` and ``p_k >= 1``."""

    terms: tuple = field()

    def __post_init__(self):
        terms = tuple((float(c), float(p)) for c, p in self.terms)
        if not terms:
            raise ValueError("power_sum gauge needs at least one term")
        for c, p in terms:
            if not (c > 0 and np.isfinite(c)) or not (p >= 1 and np.isfinite(p)):
                raise ValueError(f"power_sum term needs c > 0 and p >= 1, got {(c, p)}")
        object.__setattr__(self, "terms", terms)

    @property
    def label(self) -> str:
        return " + ".join(f"{c:g}x^{p:g}" for c, p in self.terms)

    def _eval(self, x):
        return sum(c * np.power(x, p) for c, p in self.terms)

    def _d1(self, x):
        return sum(c * p * np.power(x, p - 1.0) for c, p in self.terms)

    def _d2(self, x):
        return sum(c * p * (p - 1.0) * np.power(x, p - 2.0) for c, p in self.terms)

    def analytic_flags(self, n: int) -> dict:
        ps = [p for _, p in self.terms]
        # Log-concavity of a sum of powers is not automatic in general, so it
        # is left to the sampled check.
        return {"increasing": True, "convex": True, "A1": min(ps) > 1.0,
                "A2": max(ps) >= n + 1, "A3": True}

    def to_config(self) -> dict:
        return {"kind": "power_sum", "terms": [list(t) for t in self.terms]}

    def normalized(self) -> "PowerSum":
        s = float(self(1.0))
        return PowerSum(tuple((c / s, p) for c, p in self.terms))


@dataclass(frozen=True)
class ScaledGauge(OrliczFunction):
    """``phi(x) = scale * base(x)``."""

    base: OrliczFunction
    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("gauge scale must be positive")

    @property
    def label(self) -> str:
        return f"{self.scale:g}*({self.base.label})"

    def _eval(self, x):
        return self.scale * self.base._eval(x)

    def _d1(self, x):
        return self.scale * self.base._d1(x)

    def _d2(self, x):
        return self.scale * self.base._d2(x)

    def analytic_flags(self, n: int) -> dict:
        return self.base.analytic_flags(n)

    def to_config(self) -> dict:
        return {"kind": "scaled", "scale": self.scale, "base": self.base.to_config()}


# --------------------------------------------------------------------------
# registry
# --------------------------------------------------------------------------

_REGISTRY = {}


def register(kind: str):
    """Decorator adding a config constructor ``f(spec_dict) -> gauge``."""
    def deco(fn):
        _REGISTRY[kind] = fn
        return fn
    return deco


@register("power")
def _from_power(spec):
    return PowerLaw(float(spec["p"]))


@register("power_sum")
def _from_power_sum(spec):
    return PowerSum(tuple(tuple(t) for t in spec["terms"]))


@register("scaled")
def _from_scaled(spec):
    return ScaledGauge(gauge_from_config(spec["base"]), float(spec["scale"]))


def gauge_from_config(spec) -> OrliczFunction:
    """Build a gauge from ``{"kind": ..., ...}``.

    A bare string such as ``"x^3"`` or ``"power:3"`` is also accepted.
    """
    if isinstance(spec, OrliczFunction):
        return spec
    if isinstance(spec, str):
        spec = _parse_gauge_string(spec)
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError(f"gauge spec must be a mapping with a 'kind', got {spec!r}")
    kind = spec["kind"]
    if kind not in _REGISTRY:
        raise ValueError(f"unknown gauge kind {kind!r}; known: {sorted(_REGISTRY)}")
    try:
        gauge = _REGISTRY[kind](spec)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed {kind} gauge spec {spec!r}") from exc
    if spec.get("normalize"):
        gauge = gauge.normalized()
    return gauge


def _parse_gauge_string(text: str) -> dict:
    s = text.strip().replace(" ", "")
    if s.startswith("power:"):
        return {"kind": "power", "p": float(s.split(":", 1)[1])}
    terms = []
    for part in s.split("+"):
        coef, _, rest = part.rpartition("x^")
        if not rest:
            raise ValueError(f"cannot parse gauge {text!r}")
        c = float(coef.rstrip("*")) if coef.rstrip("*") else 1.0
        terms.append((c, float(rest)))
    if len(terms) == 1 and terms[0][0] == 1.0:
        return {"kind": "power", "p": terms[0][1]}
    return {"kind": "power_sum", "terms": terms}


# --------------------------------------------------------------------------
# inverse and validation
# --------------------------------------------------------------------------


def inverse(phi: OrliczFunction, y, rtol: float = 1e-14):
    """Solve ``phi(x) = y`` for ``x >= 0``, elementwise.

    Geometric bracketing, then bisection in log space, then Newton polish.
    """
    y = np.asarray(y, dtype=float)
    scalar = y.ndim == 0
    y = np.atleast_1d(y).copy()
    if np.any(~np.isfinite(y)) or np.any(y < 0):
        raise ValueError("inverse needs finite nonnegative values")
    if np.any(y > phi.sup):
        raise ValueError("value out of range of the gauge")
    x = np.zeros_like(y)
    pos = y > 0
    if np.any(pos):
        x[pos] = _inverse_positive(phi, y[pos], rtol)
    return float(x[0]) if scalar else x


def _inverse_positive(phi, y, rtol):
    lo = np.ones_like(y)
    hi = np.ones_like(y)
    for _ in range(200):
        mask = phi(lo) > y
        if not mask.any():
            break
        lo[mask] *= 0.5
    for _ in range(200):
        mask = phi(hi) < y
        if not mask.any():
            break
        hi[mask] *= 2.0
    if np.any(phi(lo) > y) or np.any(phi(hi) < y):
        raise ValueError("value out of range of the gauge")
    for _ in range(60):
        mid = np.sqrt(lo * hi)
        below = phi(mid) < y
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 1e-6 * hi):
            break
    x = 0.5 * (lo + hi)
    for _ in range(8):
        d = phi.deriv(x)
        step = (phi(x) - y) / np.where(d > 0, d, 1.0)
        x_new = np.clip(x - step, lo, hi)
        done = np.abs(x_new - x) <= rtol * x
        x = x_new
        if done.all():
            break
    return x


@dataclass
class MembershipReport:
    n: int
    checks: dict
    analytic: dict
    notes: dict

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {"n": self.n, "checks": dict(self.checks), "analytic": dict(self.analytic),
                "notes": dict(self.notes), "passed": self.passed}


def validate_membership(phi: OrliczFunction, n: int, sample_grid=None,
                        rtol: float = 1e-8) -> MembershipReport:
    """Check the gauge properties on a sample grid.

    Analytic flags short-circuit the sampled checks where available.  A2 is
    an asymptotic statement, so its sampled version is recorded as evidence
    only: ``phi(x)/x**(n+1)`` must not decay over the top decade of the grid.
    Non-finite values make a check fail rather than raise.
    """
    x = DEFAULT_GRID if sample_grid is None else np.sort(np.asarray(sample_grid, float))
    if x.size < 3 or np.any(x <= 0):
        raise ValueError("sample grid needs at least three positive points")
    analytic = phi.analytic_flags(n)
    with np.errstate(all="ignore"):
        f, d1, d2 = phi(x), phi.deriv(x), phi.deriv2(x)
        finite = bool(np.all(np.isfinite(f)) and np.all(np.isfinite(d1))
                      and np.all(np.isfinite(d2)))
        sampled = {
            "increasing": bool(np.all(d1 > 0) and np.all(np.diff(f) > 0)),
            "convex": bool(np.all(d2 >= -rtol * np.abs(d1) / x)),
            # (log phi)'' = (phi phi'' - phi'^2) / phi^2 <= 0
            "log_concave": bool(np.all(f * d2 - d1 ** 2 <= rtol * d1 ** 2)),
            "A1": bool(d1[0] < 1e-3 and d1[0] < d1[1]),
            "A3": bool(np.all(x * d1 - f >= -rtol * f)),
        }
        top = x >= x[-1] / 10.0
        ratio = f[top] / x[top] ** (n + 1)
        sampled["A2"] = bool(ratio[-1] >= ratio[0] * (1 - rtol) and ratio[-1] > 0)
    checks = {}
    notes = {"A2": "sampled evidence on a finite grid, not a proof"}
    for key in ("increasing", "convex", "log_concave", "A1", "A2", "A3"):
        if key in analytic:
            checks[key] = bool(analytic[key])
            notes.setdefault(key, "analytic")
        else:
            checks[key] = finite and sampled[key]
    if not finite:
        notes["finite"] = "non-finite evaluations on the sample grid"
        checks["finite"] = False
    return MembershipReport(n=n, checks=checks, analytic=analytic, notes=notes)

"""Capillary convex bodies stored as support functions on a cap mesh."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from functools import cached_property

import numpy as np

from . import mesh as cm
from .mesh import CapMesh

BODY_FORMAT = "capillary-body"
BODY_VERSION = 1
DEFAULT_REL_TOL = 1e-8


class ConvexityError(ValueError):
    """A constructed body has an area operator that is not positive semidefinite."""

    def __init__(self, message, min_eig=None, node=None):
        super().__init__(message)
        self.min_eig = min_eig
        self.node = node


@dataclass
class ValidationReport:
    min_h: float
    min_eig_W: float
    robin_residual: float
    robin_worst_node: int
    evenness_defect: float
    tol_psd: float
    tol_robin: float
    tol_even: float
    positive: bool
    psd: bool
    robin: bool
    even: bool | None
    worst_psd_node: int

    @property
    def passed(self) -> bool:
        return self.positive and self.psd and self.robin and self.even is not False

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


class CapillaryBody:
    """Support function ``h`` on a :class:`CapMesh`.

    ``h`` is the single source of truth.  The capillary support function
    ``u = h / ell``, the area operator ``W = hess h + h I`` and the scalar
    diagnostics are derived lazily and cached; the body never changes after
    construction.

    Tolerances default to ``1e-8 * max(h)``.  Setting ``even=True`` asks the
    validator to check the reflection symmetry ``h(xi) = h(xi_hat)``.
    """

    def __init__(self, mesh: CapMesh, h, *, even: bool = False, tol_psd=None,
                 tol_robin=None, tol_even=None, label: str = ""):
        h = np.array(h, dtype=float)
        if h.shape != (mesh.size,):
            raise ValueError(f"support function has shape {h.shape}, mesh has {mesh.size} nodes")
        if not np.all(np.isfinite(h)):
            raise ValueError("support function has non-finite values")
        h.setflags(write=False)
        self.mesh = mesh
        self.h = h
        self.even = bool(even)
        self.label = label
        scale = self.scale
        self.tol_psd = DEFAULT_REL_TOL * scale if tol_psd is None else float(tol_psd)
        self.tol_robin = DEFAULT_REL_TOL * scale if tol_robin is None else float(tol_robin)
        self.tol_even = DEFAULT_REL_TOL * scale if tol_even is None else float(tol_even)

    def __repr__(self):
        return (f"CapillaryBody(n={self.mesh.n}, theta={self.mesh.theta:.6g}, "
                f"resolution={self.mesh.resolution}, label={self.label!r})")

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.h)))

    @cached_property
    def u(self) -> np.ndarray:
        return self.h / self.mesh.ell

    @cached_property
    def W(self) -> np.ndarray:
        W = cm.area_operator(self.mesh, self.h)
        W.setflags(write=False)
        return W

    @cached_property
    def det_W(self) -> np.ndarray:
        return np.linalg.det(self.W) if self.mesh.n > 1 else self.W[:, 0, 0].copy()

    @cached_property
    def eig_W(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.W)

    @property
    def min_eig_W(self) -> float:
        return float(self.eig_W.min())

    @cached_property
    def robin_defect(self) -> np.ndarray:
        """``D_mu h - cot(theta) h`` on the boundary nodes."""
        m = self.mesh
        return cm.normal_derivative(m, self.h) - self.h[m.boundary_ids] / np.tan(m.theta)

    @property
    def robin_residual(self) -> float:
        """Robin defect relative to ``max h``."""
        return float(np.max(np.abs(self.robin_defect)) / self.scale)

    @property
    def evenness_defect(self) -> float:
        return float(np.max(np.abs(self.h - self.h[self.mesh.reflection])))

    @property
    def is_even(self) -> bool:
        return self.evenness_defect <= self.tol_even

    def with_h(self, h, label: str | None = None, **kw) -> "CapillaryBody":
        opts = {"even": self.even}
        opts.update(kw)
        return CapillaryBody(self.mesh, h, label=self.label if label is None else label, **opts)

    def scaled(self, r: float) -> "CapillaryBody":
        if not r > 0:
            raise ValueError("scale factor must be positive")
        return self.with_h(r * self.h)

    def validate(self) -> ValidationReport:
        return validate(self)

    # -- serialization ------------------------------------------------------

    def header(self) -> dict:
        return {"format": BODY_FORMAT, "version": BODY_VERSION,
                "mesh": self.mesh.descriptor(), "even": self.even, "label": self.label,
                "tolerances": {"psd": self.tol_psd, "robin": self.tol_robin,
                               "even": self.tol_even}}

    def to_dict(self) -> dict:
        out = self.header()
        out["h"] = self.h.tolist()
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def body_from_dict(doc: dict, mesh: CapMesh | None = None) -> CapillaryBody:
    if doc.get("format") != BODY_FORMAT:
        raise ValueError("not a capillary body document")
    if doc.get("version") != BODY_VERSION:
        raise ValueError(f"unsupported body version {doc.get('version')!r}")
    m = cm.mesh_from_descriptor(doc["mesh"])
    if mesh is not None:
        if not mesh.same_as(m):
            raise ValueError("body mesh does not match the supplied mesh")
        m = mesh
    tol = doc.get("tolerances", {})
    return CapillaryBody(m, doc["h"], even=bool(doc.get("even", False)),
                         tol_psd=tol.get("psd"), tol_robin=tol.get("robin"),
                         tol_even=tol.get("even"), label=doc.get("label", ""))


def body_from_json(text: str, mesh: CapMesh | None = None) -> CapillaryBody:
    return body_from_dict(json.loads(text), mesh)


def save_body(body: CapillaryBody, path) -> None:
    with open(path, "w") as fh:
        fh.write(body.to_json())


def load_body(path, mesh: CapMesh | None = None) -> CapillaryBody:
    with open(path) as fh:
        return body_from_json(fh.read(), mesh)


# --------------------------------------------------------------------------
# constructors
# --------------------------------------------------------------------------


def cap(mesh: CapMesh, r: float = 1.0) -> CapillaryBody:
    """The cap of radius ``r``: ``h = r ell``."""
    r = float(r)
    if not (r > 0 and np.isfinite(r)):
        raise ValueError(f"cap radius must be positive, got {r!r}")
    return CapillaryBody(mesh, r * mesh.ell, even=True, label=f"cap(r={r:g})")


def linear_support(mesh: CapMesh, x) -> np.ndarray:
    """``<x, nu>`` for a horizontal vector ``x`` (length n)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != mesh.n:
        raise ValueError(f"horizontal vector must have {mesh.n} components")
    return mesh.nu[:, :mesh.n] @ x


def translate_horizontal(body: CapillaryBody, x) -> CapillaryBody:
    """Translate by a horizontal vector: ``h + <x, nu>``.

    Raises ``ValueError`` if the origin leaves the flat boundary, i.e. the
    new support function is not positive.
    """
    h = body.h + linear_support(body.mesh, x)
    if np.min(h) <= 0:
        raise ValueError("translated body does not contain the origin (h <= 0 somewhere)")
    even = body.even and not np.any(np.asarray(x, float))
    return body.with_h(h, label=f"{body.label}+x", even=even)


def robin_project(mesh: CapMesh, h) -> np.ndarray:
    """Reset the boundary ring so the discrete Robin rows hold exactly.

    Each boundary row of the normal-derivative operator involves a single
    boundary node, so this is a diagonal solve.
    """
    h = np.array(h, dtype=float)
    b = mesh.boundary_ids
    N = mesh.normal_op.tocsc()
    mask = np.ones(mesh.size, dtype=bool)
    mask[b] = False
    rest = N[:, mask] @ h[mask]
    diag = N[:, b].diagonal() - 1.0 / np.tan(mesh.theta)
    h[b] = -rest / diag
    return h


def mode_field(mesh: CapMesh, mode) -> np.ndarray:
    """Even perturbation profile with zero normal derivative on the boundary.

    ``mode`` is ``"radial"`` (``cos(pi psi / theta)``), or an even integer
    ``m`` / string ``"cosM"`` / ``"sinM"`` giving
    ``sin^m(psi) (1 - m sin^2 psi / ((m+2) sin^2 theta))`` times
    ``cos(m a)`` or ``sin(m a)``.  For n = 1 the signed angle ``s`` replaces
    ``psi`` and only ``"radial"`` (``cos(pi s / theta)``) and ``"cos2"``
    (``cos(2 pi s / theta)``) exist.
    """
    th = mesh.theta
    if mesh.n == 1:
        s = mesh.coordinate
        if mode == "radial":
            return np.cos(np.pi * s / th)
        if mode in ("cos2", 2):
            return np.cos(2 * np.pi * s / th)
        raise ValueError(f"unknown n=1 perturbation mode {mode!r}")
    psi, a = mesh.psi, mesh.azimuth
    if mode == "radial":
        return np.cos(np.pi * psi / th)
    trig = np.cos
    if isinstance(mode, str):
        if mode.startswith("cos"):
            m = int(mode[3:])
        elif mode.startswith("sin"):
            m, trig = int(mode[3:]), np.sin
        else:
            raise ValueError(f"unknown perturbation mode {mode!r}")
    else:
        m = int(mode)
    if m <= 0 or m % 2:
        raise ValueError("angular modes must be positive and even to keep the body even")
    s = np.sin(psi)
    k = m / ((m + 2) * np.sin(th) ** 2)
    return s ** m * (1.0 - k * s ** 2) * trig(m * a)


def perturbed_cap(mesh: CapMesh, g, eps: float, *, project: bool = True,
                  check_even: bool = True) -> CapillaryBody:
    """``h = ell (1 + eps g)`` for an even ``g`` with zero normal derivative.

    ``g`` may be a nodal field or a mode name accepted by :func:`mode_field`.
    With ``project`` the boundary ring is adjusted so the discrete Robin rows
    hold to round-off (the continuous condition already holds).  Raises
    :class:`ConvexityError` if the area operator loses positivity.
    """
    if isinstance(g, (str, int)):
        g = mode_field(mesh, g)
    g = cm._as_field(mesh, g)
    if check_even and not cm.is_even(mesh, g, 1e-12 * max(1.0, np.max(np.abs(g)))):
        raise ValueError("perturbation must be even")
    h = mesh.ell * (1.0 + float(eps) * g)
    if project:
        h = robin_project(mesh, h)
        h = cm.reflect_even(mesh, h)
    if np.min(h) <= 0:
        raise ValueError("perturbation makes the support function nonpositive")
    body = CapillaryBody(mesh, h, even=True, label=f"perturbed(eps={eps:g})")
    lam = body.eig_W.min(axis=1)
    if lam.min() < -body.tol_psd:
        node = int(np.argmin(lam))
        raise ConvexityError(f"area operator not PSD: min eigenvalue {lam.min():.3e} at node {node}",
                             min_eig=float(lam.min()), node=node)
    return body


def validate(body: CapillaryBody) -> ValidationReport:
    """Check positivity, convexity, the Robin condition and (if requested) evenness."""
    lam = body.eig_W.min(axis=1)
    defect = np.abs(body.robin_defect)
    worst = int(np.argmax(defect))
    robin_res = float(defect[worst] / body.scale) if body.scale > 0 else np.inf
    even_def = body.evenness_defect
    return ValidationReport(
        min_h=float(body.h.min()),
        min_eig_W=float(lam.min()),
        robin_residual=robin_res,
        robin_worst_node=int(body.mesh.boundary_ids[worst]),
        evenness_defect=even_def,
        tol_psd=body.tol_psd,
        tol_robin=body.tol_robin,
        tol_even=body.tol_even,
        positive=bool(body.h.min() > 0),
        psd=bool(lam.min() >= -body.tol_psd),
        # the Robin residual is relative to max h, the tolerance is absolute
        robin=bool(defect[worst] <= body.tol_robin),
        even=bool(even_def <= body.tol_even) if body.even else None,
        worst_psd_node=int(np.argmin(lam)),
    )

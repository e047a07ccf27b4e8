"""Volumes, surface-area measures and mixed volumes of capillary bodies.

Every functional is a quadrature over C_theta of a nodal expression in the
support function and its discrete area operator ``A[h] = hess h + h I``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import factorial

import numpy as np

from . import mesh as cm
from .body import CapillaryBody
from .orlicz import OrliczFunction

DENSITY_KINDS = ("surface", "lp", "orlicz", "cone_volume", "data")


@dataclass(frozen=True)
class MeasureDensity:
    """A density with respect to the round measure on C_theta."""

    mesh: cm.CapMesh
    values: np.ndarray
    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in DENSITY_KINDS:
            raise ValueError(f"unknown density kind {self.kind!r}")
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.mesh.size,):
            raise ValueError("density has the wrong number of nodes")
        object.__setattr__(self, "values", v)

    def total(self) -> float:
        return cm.integrate(self.mesh, self.values)


def _check_same_mesh(*bodies):
    m = bodies[0].mesh
    for b in bodies[1:]:
        if b.mesh is not m and not b.mesh.same_as(m):
            raise ValueError("bodies live on different meshes")
    return m


def volume(body: CapillaryBody) -> float:
    """``V = 1/(n+1) * int h det W``."""
    n = body.mesh.n
    return cm.integrate(body.mesh, body.h * body.det_W) / (n + 1)


def wetting_energy(body: CapillaryBody) -> float:
    """``A = int ell det W``."""
    return cm.integrate(body.mesh, body.mesh.ell * body.det_W)


def density(body: CapillaryBody, kind: str, phi: OrliczFunction | None = None,
            p: float | None = None) -> MeasureDensity:
    """Nodal density of one of the capillary measures of ``body``.

    ``surface``       ``ell det W``
    ``lp``            ``ell h^(1-p) det W``
    ``orlicz``        ``phi(ell/h) h det W``
    ``cone_volume``   ``ell h det W / (n+1)``
    """
    h, m = body.h, body.mesh
    if np.any(h <= 0) and kind in ("lp", "orlicz"):
        raise ValueError("density needs a strictly positive support function")
    dW = body.det_W
    if kind == "surface":
        vals, params = m.ell * dW, ()
    elif kind == "lp":
        if p is None:
            raise ValueError("L_p density needs an exponent p")
        vals, params = m.ell * h ** (1.0 - p) * dW, (float(p),)
    elif kind == "orlicz":
        if phi is None:
            raise ValueError("Orlicz density needs a gauge")
        vals, params = phi(m.ell / h) * h * dW, (phi.label,)
    elif kind == "cone_volume":
        vals, params = m.ell * h * dW / (m.n + 1), ()
    else:
        raise ValueError(f"unknown density kind {kind!r}")
    return MeasureDensity(m, vals, kind, params)


def mixed_discriminant(*mats) -> np.ndarray:
    """Mixed discriminant ``Q(A_1, ..., A_n)`` of symmetric n x n matrices.

    Inputs may carry leading batch axes (shape ``(..., n, n)``).  Uses
    ``Q = 1/n! * sum_S (-1)^(n-|S|) det(sum_{i in S} A_i)``.
    """
    if not mats:
        raise ValueError("mixed discriminant needs at least one matrix")
    mats = [np.asarray(a, dtype=float) for a in mats]
    n = len(mats)
    for a in mats:
        if a.shape[-2:] != (n, n):
            raise ValueError(f"need {n} matrices of size {n}x{n}, got shape {a.shape}")
    total = 0.0
    for k in range(1, n + 1):
        sign = (-1.0) ** (n - k)
        for S in combinations(range(n), k):
            total = total + sign * np.linalg.det(sum(mats[i] for i in S))
    return total / factorial(n)


def mixed_volume(mesh: cm.CapMesh, g, *gs) -> float:
    """``V(g, g_1, ..., g_n) = 1/(n+1) int g Q(A[g_1], ..., A[g_n])``."""
    if len(gs) != mesh.n:
        raise ValueError(f"mixed volume needs {mesh.n} area-operator arguments")
    g = _values(mesh, g)
    As = [cm.area_operator(mesh, _values(mesh, x)) for x in gs]
    Q = mixed_discriminant(*As) if mesh.n > 1 else As[0][:, 0, 0]
    return cm.integrate(mesh, g * Q) / (mesh.n + 1)


def _values(mesh, x):
    if isinstance(x, CapillaryBody):
        if not x.mesh.same_as(mesh):
            raise ValueError("body lives on a different mesh")
        return x.h
    return cm._as_field(mesh, x)


def V1(K: CapillaryBody, L) -> float:
    """``V(L, K, ..., K)``: the first mixed volume of ``K`` and ``L``.

    ``L`` may be a body or a nodal field.  Since ``A[h_K]`` is symmetric in
    the last arguments this equals ``1/(n+1) int h_L det W_K``.
    """
    m = K.mesh
    hL = _values(m, L)
    return cm.integrate(m, hL * K.det_W) / (m.n + 1)


def orlicz_mixed_volume(phi: OrliczFunction, K: CapillaryBody, L) -> float:
    """``V_phi(K, L) = 1/(n+1) int phi(h_L/h_K) h_K det W_K``."""
    m = K.mesh
    hL = _values(m, L)
    return cm.integrate(m, phi(hL / K.h) * K.h * K.det_W) / (m.n + 1)


def uform_determinant(body: CapillaryBody) -> np.ndarray:
    """``det(ell hess u + cos(theta)(grad u (x) e^T + e^T (x) grad u) + u I)``."""
    m = body.mesh
    u = body.u
    H = cm.hessian(m, u)
    gu = cm.gradient(m, u)
    eT = m.e_tangential
    M = m.ell[:, None, None] * H + np.cos(m.theta) * (
        gu[:, :, None] * eT[:, None, :] + eT[:, :, None] * gu[:, None, :])
    M[:, range(m.n), range(m.n)] += u[:, None]
    return np.linalg.det(M) if m.n > 1 else M[:, 0, 0]


def uform_consistency(body: CapillaryBody) -> float:
    """Max nodal gap between ``det W`` computed from ``h`` and from ``u``."""
    return float(np.max(np.abs(body.det_W - uform_determinant(body))))


def measure_record(body: CapillaryBody, phi: OrliczFunction | None = None) -> dict:
    """Scalar functionals of one body as a plain dict."""
    rec = {"volume": volume(body), "wetting_energy": wetting_energy(body),
           "cap_volume": cm.cap_volume(body.mesh.n, body.mesh.theta),
           "min_det_W": float(body.det_W.min()),
           "uform_consistency": uform_consistency(body)}
    if phi is not None:
        rec["orlicz_surface_total"] = density(body, "orlicz", phi=phi).total()
        rec["orlicz_self_mixed_volume"] = orlicz_mixed_volume(phi, body, body)
    return rec

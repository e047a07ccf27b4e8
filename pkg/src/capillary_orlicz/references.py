"""Closed-form non-cap bodies with exact area operators.

These serve as manufactured targets for convergence studies: the data
``f = phi(ell/h) h det W`` is computed from the exact ``W``, so the solver
error is measured against a known support function.
"""

import numpy as np

def smooth_body(mesh, eps=0.1):
    """Support function ``ell (1 + eps q(psi) cos 2a)`` and its exact area operator.

    ``q = sin^2 psi - k sin^4 psi`` with ``q'(theta) = 0``, so the body meets
    the Robin condition in the continuum.  Returns ``(h, W)`` with ``W`` of
    shape (N, 2, 2) in the orthonormal polar frame.
    """
    th = mesh.theta
    p, a = mesh.psi, mesh.azimuth
    s, c = np.sin(p), np.cos(p)
    k = 1.0 / (2.0 * np.sin(th) ** 2)
    ct = np.cos(th)
    ell, ell1, ell2 = 1 - ct * c, ct * s, ct * c
    q = s**2 - k * s**4
    q1 = 2 * s * c - 4 * k * s**3 * c
    q2 = 2 * (c**2 - s**2) - k * (12 * s**2 * c**2 - 4 * s**4)
    g, g1, g2 = ell * q, ell1 * q + ell * q1, ell2 * q + 2 * ell1 * q1 + ell * q2
    C, S = np.cos(2 * a), np.sin(2 * a)
    h = ell + eps * g * C
    h_p = ell1 + eps * g1 * C
    h_pp = ell2 + eps * g2 * C
    h_a = -2 * eps * g * S
    h_aa = -4 * eps * g * C
    h_pa = -2 * eps * g1 * S
    W = np.empty((mesh.size, 2, 2))
    W[:, 0, 0] = h_pp + h
    W[:, 0, 1] = W[:, 1, 0] = h_pa / s - c * h_a / s**2
    W[:, 1, 1] = h_aa / s**2 + c / s * h_p + h
    return h, W


def smooth_body_1d(mesh, eps=0.05):
    """n = 1 analogue: ``h = ell (1 + eps cos(pi s / theta))`` and ``W = h'' + h``."""
    th = mesh.theta
    sg = mesh.coordinate
    ct = np.cos(th)
    ell, ell1, ell2 = 1 - ct * np.cos(sg), ct * np.sin(sg), ct * np.cos(sg)
    w = np.pi / th
    g, g1, g2 = np.cos(w * sg), -w * np.sin(w * sg), -w**2 * np.cos(w * sg)
    h = ell * (1 + eps * g)
    h2 = ell2 * (1 + eps * g) + 2 * ell1 * eps * g1 + ell * eps * g2
    return h, (h2 + h)[:, None, None]


def smooth_target(mesh, phi, eps=0.1):
    """``(h, f)``: exact support function and matching unnormalized data."""
    h, W = smooth_body(mesh, eps) if mesh.n == 2 else smooth_body_1d(mesh, eps)
    return h, phi(mesh.ell / h) * h * np.linalg.det(W)

"""Discrete geometry of the spherical cap C_theta.

The cap is the part of the unit sphere centred at ``cos(theta) e`` (with
``e = -E_{n+1}``) lying in the closed upper half-space.  Writing
``xi = cos(theta) e + nu`` with ``nu`` on the unit sphere, a point of the cap
is described by the polar distance ``psi`` of ``nu`` from the apex ``E_{n+1}``
(``0 <= psi <= theta``) and, for ``n = 2``, an azimuth ``a``.

Node layout
-----------
``n = 2``
    Rings ``psi_k = (k + 1/2) dpsi`` for ``k = 0 .. npsi-1`` with
    ``dpsi = theta / (npsi - 1/2)``, so there is no node at the apex and the
    last ring sits exactly on the boundary ``psi = theta``.  Azimuths
    ``a_j = 2 pi j / nazi``.  Node ``k * nazi + j`` (polar-major,
    azimuth-minor).
``n = 1``
    The cap is an arc; nodes are at signed angles ``s_i`` uniformly spaced on
    ``[-theta, theta]`` (both end points are boundary nodes).  ``psi = |s|``.

All difference stencils are second order for generic smooth data and exact
on the span of constants and first spherical harmonics.  The latter makes
the area operator ``A[f] = hess f + f I`` return exactly ``I`` on the cap
support function and exactly ``0`` on the support function of a horizontal
translation, which keeps cap volumes and translation invariance at
round-off level.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import mpmath
import numpy as np
import scipy.sparse as sp

MESH_FORMAT = "capillary-cap-mesh"
MESH_VERSION = 1

# Points in the one-sided first-derivative stencil used on the boundary.
# Seven points fitted on {1, cos s, sin s, ..., cos 3s, sin 3s} give a
# sixth-order normal derivative, so Robin residuals of nodewise nonlinear
# combinations stay below the validator tolerance at desk resolutions.
BOUNDARY_DERIV_POINTS = 7


def check_theta(theta: float) -> float:
    theta = float(theta)
    if not (0.0 < theta < np.pi) or not np.isfinite(theta):
        raise ValueError(f"contact angle must lie in (0, pi), got {theta!r}")
    return theta


def ell_of_psi(theta: float, psi):
    """Support function of C_theta as a function of the polar distance."""
    return 1.0 - np.cos(theta) * np.cos(psi)


# --------------------------------------------------------------------------
# stencil weights
# --------------------------------------------------------------------------

_TRIG_BASIS = (
    (lambda s: mpmath.mpf(1), lambda s: mpmath.mpf(0), lambda s: mpmath.mpf(0)),
    (mpmath.cos, lambda s: -mpmath.sin(s), lambda s: -mpmath.cos(s)),
    (mpmath.sin, mpmath.cos, lambda s: -mpmath.sin(s)),
    (lambda s: mpmath.sin(2 * s), lambda s: 2 * mpmath.cos(2 * s),
     lambda s: -4 * mpmath.sin(2 * s)),
    (lambda s: mpmath.cos(2 * s), lambda s: -2 * mpmath.sin(2 * s),
     lambda s: -4 * mpmath.cos(2 * s)),
    (lambda s: mpmath.sin(3 * s), lambda s: 3 * mpmath.cos(3 * s),
     lambda s: -9 * mpmath.sin(3 * s)),
    (lambda s: mpmath.cos(3 * s), lambda s: -3 * mpmath.sin(3 * s),
     lambda s: -9 * mpmath.cos(3 * s)),
)


def fitted_weights(offsets, order: int) -> np.ndarray:
    """Stencil weights for the ``order``-th derivative at offset 0.

    The weights are exact on the first ``len(offsets)`` functions of
    ``1, cos s, sin s, sin 2s, cos 2s, sin 3s, cos 3s``.  Solved in extended precision; the
    systems are tiny but badly conditioned for small spacings.
    """
    m = len(offsets)
    if m > len(_TRIG_BASIS):
        raise ValueError(f"at most {len(_TRIG_BASIS)} stencil points are supported")
    with mpmath.workdps(50):
        pts = [mpmath.mpf(repr(float(o))) for o in offsets]
        mat = mpmath.matrix(m, m)
        rhs = mpmath.matrix(m, 1)
        for i in range(m):
            f = _TRIG_BASIS[i]
            for j in range(m):
                mat[i, j] = f[0](pts[j])
            rhs[i] = f[order](mpmath.mpf(0))
        w = mpmath.lu_solve(mat, rhs)
        return np.array([float(w[j]) for j in range(m)])


def _cubic_composite_weights(x: np.ndarray, lo: float, hi: float, jac,
                             left_ghost: bool) -> np.ndarray:
    """Node weights integrating a piecewise local cubic interpolant times ``jac``.

    ``x`` are increasing nodes with uniform spacing (except that with
    ``left_ghost`` the field is even about 0 and nodes start at half a
    spacing).  Each interval between consecutive nodes uses the four nearest
    nodes; near the ends the stencil is shifted inwards.  With ``left_ghost``
    the interval ``[0, x[0]]`` is added and mirrored nodes ``-x[i]`` carry the
    value of node ``i``.
    """
    n = len(x)
    if left_ghost:
        ext = np.concatenate([-x[1::-1], x])
        owner = np.concatenate([[1, 0], np.arange(n)])
    else:
        ext = x
        owner = np.arange(n)
    m = len(ext)
    gl_x, gl_w = np.polynomial.legendre.leggauss(8)
    w = np.zeros(n)

    def add_interval(a, b, idx):
        pts = ext[idx]
        q = 0.5 * (b - a) * gl_x + 0.5 * (a + b)
        qw = 0.5 * (b - a) * gl_w * jac(q)
        for c, i in enumerate(idx):
            others = np.delete(pts, c)
            basis = np.prod((q[:, None] - others) / (pts[c] - others), axis=1)
            w[owner[i]] += np.dot(qw, basis)

    start = 2 if left_ghost else 0
    if left_ghost:
        add_interval(lo, x[0], np.arange(0, 4))
    for i in range(start, m - 1):
        first = min(max(i - 1, 0), m - 4)
        add_interval(ext[i], ext[i + 1], np.arange(first, first + 4))
    return w


# --------------------------------------------------------------------------
# the mesh
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CapMesh:
    """Structured mesh of C_theta for n in {1, 2}.

    Build with :func:`build_mesh`.  Arrays are read-only; derived difference
    operators are computed lazily and cached.
    """

    n: int
    theta: float
    resolution: tuple
    psi: np.ndarray = field(repr=False)
    azimuth: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    boundary_ids: np.ndarray = field(repr=False)

    # -- basic per-node data ------------------------------------------------

    @property
    def size(self) -> int:
        return self.psi.size

    @property
    def spacing(self) -> float:
        """Polar (n=2) or arc-length (n=1) node spacing."""
        if self.n == 2:
            return self.theta / (self.resolution[0] - 0.5)
        return 2.0 * self.theta / (self.resolution[0] - 1)

    @cached_property
    def coordinate(self) -> np.ndarray:
        """Polar coordinate along which derivatives are taken.

        ``psi`` for n=2 and the signed angle for n=1.
        """
        if self.n == 2:
            return self.psi
        return _frozen(np.where(self.azimuth > 0, -self.psi, self.psi))

    @cached_property
    def ell(self) -> np.ndarray:
        return _frozen(ell_of_psi(self.theta, self.psi))

    @cached_property
    def nu(self) -> np.ndarray:
        """Unit normal ``nu = xi - cos(theta) e`` in R^{n+1}, shape (N, n+1)."""
        if self.n == 2:
            s = np.sin(self.psi)
            out = np.stack([s * np.cos(self.azimuth), s * np.sin(self.azimuth),
                            np.cos(self.psi)], axis=1)
        else:
            c = self.coordinate
            out = np.stack([np.sin(c), np.cos(c)], axis=1)
        return _frozen(out)

    @cached_property
    def xi(self) -> np.ndarray:
        """Points of C_theta in R^{n+1}."""
        out = self.nu.copy()
        out[:, -1] -= np.cos(self.theta)
        return _frozen(out)

    @cached_property
    def e_tangential(self) -> np.ndarray:
        """Tangential part of ``e`` in the orthonormal polar frame, shape (N, n).

        ``<e, e_psi> = sin psi`` and ``<e, e_a> = 0``.
        """
        if self.n == 2:
            out = np.zeros((self.size, 2))
            out[:, 0] = np.sin(self.psi)
        else:
            out = np.sin(self.coordinate)[:, None].copy()
        return _frozen(out)

    @cached_property
    def reflection(self) -> np.ndarray:
        """Permutation ``p`` with node ``p[i]`` the image of node ``i`` under
        ``xi -> (-xi_1, ..., -xi_n, xi_{n+1})``."""
        if self.n == 2:
            npsi, nazi = self.resolution
            k, j = np.divmod(np.arange(self.size), nazi)
            out = k * nazi + (j + nazi // 2) % nazi
        else:
            out = np.arange(self.size)[::-1].copy()
        return _frozen(out)

    @property
    def interior_ids(self) -> np.ndarray:
        mask = np.ones(self.size, dtype=bool)
        mask[self.boundary_ids] = False
        return np.flatnonzero(mask)

    @property
    def area(self) -> float:
        """Closed-form measure of C_theta (arc length for n=1)."""
        return cap_area(self.n, self.theta)

    # -- difference operators -----------------------------------------------

    @cached_property
    def _ops(self) -> dict:
        if self.n == 2:
            return _build_ops_2d(self)
        return _build_ops_1d(self)

    @property
    def hessian_terms(self) -> dict:
        """Covariant Hessian components as lists of ``(scale, matrix)`` terms.

        Keys ``(i, j)`` with ``i <= j`` in the orthonormal polar frame;
        component ``= sum(scale * (matrix @ g))`` with ``scale`` None meaning 1.
        """
        return self._ops["hessian"]

    @cached_property
    def hessian_ops(self) -> dict:
        """Each Hessian component assembled into one sparse matrix."""
        return {k: _combine(t) for k, t in self.hessian_terms.items()}

    @cached_property
    def gradient_ops(self) -> list:
        return [_combine(t) for t in self._ops["gradient"]]

    @property
    def normal_op(self) -> sp.csr_matrix:
        """Rows of the outward normal derivative on the boundary nodes."""
        return self._ops["normal"]

    # -- serialization ------------------------------------------------------

    def descriptor(self) -> dict:
        return {"format": MESH_FORMAT, "version": MESH_VERSION, "n": self.n,
                "theta": self.theta, "resolution": list(self.resolution)}

    def to_json(self) -> str:
        return json.dumps(self.descriptor(), sort_keys=True)

    def same_as(self, other: "CapMesh") -> bool:
        return (self.n == other.n and self.theta == other.theta
                and tuple(self.resolution) == tuple(other.resolution))


def _combine(terms) -> sp.csr_matrix:
    out = None
    for scale, mat in terms:
        part = mat if scale is None else sp.diags(scale) @ mat
        out = part if out is None else out + part
    return out.tocsr()


def _apply(terms, g: np.ndarray) -> np.ndarray:
    out = np.zeros_like(g)
    for scale, mat in terms:
        v = mat @ g
        out += v if scale is None else scale * v
    return out


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    a.setflags(write=False)
    return a


def cap_area(n: int, theta: float) -> float:
    """Measure of C_theta: arc length 2 theta (n=1) or 2 pi (1 - cos theta)."""
    if n == 1:
        return 2.0 * theta
    if n == 2:
        return 2.0 * np.pi * (1.0 - np.cos(theta))
    raise ValueError(f"unsupported dimension n={n}")


def cap_volume(n: int, theta: float) -> float:
    """Closed-form volume of the capillary cap body bounded by C_theta."""
    c = np.cos(theta)
    if n == 1:
        return theta - np.sin(theta) * c
    if n == 2:
        return np.pi / 3.0 * (1.0 - c) ** 2 * (2.0 + c)
    raise ValueError(f"unsupported dimension n={n}")


def build_mesh(n: int, theta: float, resolution) -> CapMesh:
    """Build a :class:`CapMesh`.

    ``resolution`` is ``(npsi, nazi)`` for n=2 and a node count (or 1-tuple)
    for n=1.
    """
    theta = check_theta(theta)
    res = tuple(int(r) for r in np.atleast_1d(resolution))
    if n == 2:
        if len(res) != 2:
            raise ValueError("n=2 needs resolution (npsi, nazi)")
        npsi, nazi = res
        if npsi < 4:
            raise ValueError("need at least 4 polar rings")
        if nazi < 8 or nazi % 2:
            raise ValueError("azimuth count must be even and >= 8")
        dpsi = theta / (npsi - 0.5)
        rings = (np.arange(npsi) + 0.5) * dpsi
        rings[-1] = theta
        dazi = 2.0 * np.pi / nazi
        ring_w = _cubic_composite_weights(rings, 0.0, theta, np.sin,
                                          left_ghost=True)
        psi = np.repeat(rings, nazi)
        azi = np.tile(np.arange(nazi) * dazi, npsi)
        weights = np.repeat(ring_w * dazi, nazi)
        boundary = np.arange((npsi - 1) * nazi, npsi * nazi)
    elif n == 1:
        if len(res) != 1:
            raise ValueError("n=1 needs a single node count")
        (npts,) = res
        if npts < 4:
            raise ValueError("need at least 4 nodes")
        s = np.linspace(-theta, theta, npts)
        weights = _cubic_composite_weights(s, -theta, theta, np.ones_like,
                                           left_ghost=False)
        psi = np.abs(s)
        # the sign of s is carried in the "azimuth" (0 or pi)
        azi = np.where(s < 0, np.pi, 0.0)
        boundary = np.array([0, npts - 1])
    else:
        raise ValueError(f"unsupported dimension n={n}; meshes exist for n in (1, 2)")
    if np.any(weights <= 0):
        raise ValueError("quadrature produced non-positive weights; refine the mesh")
    return CapMesh(n=n, theta=theta, resolution=res, psi=_frozen(psi),
                   azimuth=_frozen(azi), weights=_frozen(weights),
                   boundary_ids=_frozen(boundary))


def mesh_from_descriptor(desc: dict) -> CapMesh:
    if desc.get("format") != MESH_FORMAT:
        raise ValueError(f"not a mesh descriptor: {desc.get('format')!r}")
    if int(desc.get("version", -1)) != MESH_VERSION:
        raise ValueError(f"unsupported mesh descriptor version {desc.get('version')!r}")
    return build_mesh(int(desc["n"]), float(desc["theta"]), desc["resolution"])


# --------------------------------------------------------------------------
# operator assembly
# --------------------------------------------------------------------------


def _central_weights(d: float):
    d1 = 1.0 / (2.0 * np.sin(d))
    d2 = 1.0 / (4.0 * np.sin(0.5 * d) ** 2)
    return d1, d2


def _line_operators(m: int, d: float, ghost=None):
    """First/second derivative matrices on a uniform line of ``m`` points.

    ``ghost`` (callable or None): for the first point, the left neighbour is
    supplied externally; the matrices then return the coefficient on the
    ghost separately.  Both ends otherwise use fitted one-sided stencils.
    """
    d1, d2 = _central_weights(d)
    nb = min(BOUNDARY_DERIV_POINTS, m)
    w1_end = fitted_weights([-d * i for i in range(nb)], 1)
    w2_end = fitted_weights([-d * i for i in range(4)], 2)
    rows1, cols1, vals1 = [], [], []
    rows2, cols2, vals2 = [], [], []
    ghost1 = ghost2 = None
    for i in range(m):
        if 0 < i < m - 1:
            rows1 += [i, i]
            cols1 += [i - 1, i + 1]
            vals1 += [-d1, d1]
            rows2 += [i, i, i]
            cols2 += [i - 1, i, i + 1]
            vals2 += [d2, -2 * d2, d2]
        elif i == m - 1:
            rows1 += [i] * nb
            cols1 += [i - k for k in range(nb)]
            vals1 += list(w1_end)
            rows2 += [i] * 4
            cols2 += [i - k for k in range(4)]
            vals2 += list(w2_end)
        elif ghost:
            rows1 += [0]
            cols1 += [1]
            vals1 += [d1]
            ghost1 = -d1
            rows2 += [0, 0]
            cols2 += [0, 1]
            vals2 += [-2 * d2, d2]
            ghost2 = d2
        else:
            # mirror image of the right-end stencil
            rows1 += [0] * nb
            cols1 += list(range(nb))
            vals1 += list(-w1_end)
            rows2 += [0] * 4
            cols2 += list(range(4))
            vals2 += list(w2_end)
    D1 = sp.csr_matrix((vals1, (rows1, cols1)), shape=(m, m))
    D2 = sp.csr_matrix((vals2, (rows2, cols2)), shape=(m, m))
    return D1, D2, ghost1, ghost2


def _build_ops_2d(mesh: CapMesh) -> dict:
    npsi, nazi = mesh.resolution
    dpsi = mesh.spacing
    dazi = 2.0 * np.pi / nazi
    Ipsi_1, Ipsi_2, g1, g2 = _line_operators(npsi, dpsi, ghost=True)
    eye_a = sp.identity(nazi, format="csr")
    # ghost of ring 0 at azimuth j is ring 0 at azimuth j + nazi/2
    half = sp.csr_matrix((np.ones(nazi), (np.arange(nazi),
                                          (np.arange(nazi) + nazi // 2) % nazi)),
                         shape=(nazi, nazi))
    e00 = sp.csr_matrix(([1.0], ([0], [0])), shape=(npsi, npsi))
    Dpsi = sp.kron(Ipsi_1, eye_a) + g1 * sp.kron(e00, half)
    Dpsipsi = sp.kron(Ipsi_2, eye_a) + g2 * sp.kron(e00, half)

    d1, d2 = _central_weights(dazi)
    j = np.arange(nazi)
    Da_1 = sp.csr_matrix((np.r_[np.full(nazi, d1), np.full(nazi, -d1)],
                          (np.r_[j, j], np.r_[(j + 1) % nazi, (j - 1) % nazi])),
                         shape=(nazi, nazi))
    Da_2 = sp.csr_matrix((np.r_[np.full(nazi, d2), np.full(nazi, d2),
                                np.full(nazi, -2 * d2)],
                          (np.r_[j, j, j], np.r_[(j + 1) % nazi, (j - 1) % nazi, j])),
                         shape=(nazi, nazi))
    eye_p = sp.identity(npsi, format="csr")
    Da = sp.kron(eye_p, Da_1).tocsr()
    Daa = sp.kron(eye_p, Da_2).tocsr()
    Dpsi = Dpsi.tocsr()
    Dpsipsi = Dpsipsi.tocsr()
    Dpsia = (Dpsi @ Da).tocsr()

    s = np.sin(mesh.psi)
    c = np.cos(mesh.psi)
    # each component is a sum of (row scaling, matrix) terms; they are
    # applied separately so that O(1/dpsi^4) pole coefficients never meet
    # O(1) partial sums inside one sparse row
    terms = {
        (0, 0): [(None, Dpsipsi)],
        (0, 1): [(1.0 / s, Dpsia), (-c / s**2, Da)],
        (1, 1): [(1.0 / s**2, Daa), (c / s, Dpsi)],
    }
    grad = [[(None, Dpsi)], [(1.0 / s, Da)]]
    normal = Dpsi[mesh.boundary_ids]
    return {"hessian": terms, "gradient": grad, "normal": normal.tocsr()}


def _build_ops_1d(mesh: CapMesh) -> dict:
    m = mesh.resolution[0]
    D1, D2, _, _ = _line_operators(m, mesh.spacing, ghost=None)
    # outward co-normal is -d/ds at s=-theta and +d/ds at s=theta
    normal = sp.vstack([-D1[0], D1[m - 1]]).tocsr()
    return {"hessian": {(0, 0): [(None, D2)]}, "gradient": [[(None, D1)]],
            "normal": normal}


# --------------------------------------------------------------------------
# field operations
# --------------------------------------------------------------------------


def _as_field(mesh: CapMesh, g) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.shape != (mesh.size,):
        raise ValueError(f"field has shape {g.shape}, mesh has {mesh.size} nodes")
    return g


def integrate(mesh: CapMesh, g) -> float:
    """Quadrature of a nodal field over C_theta."""
    g = _as_field(mesh, g)
    return float(np.sum(g * mesh.weights))


def gradient(mesh: CapMesh, g) -> np.ndarray:
    """Covariant gradient in the orthonormal polar frame, shape (N, n)."""
    g = _as_field(mesh, g)
    return np.stack([_apply(t, g) for t in mesh._ops["gradient"]], axis=1)


def hessian(mesh: CapMesh, g) -> np.ndarray:
    """Covariant Hessian in the orthonormal polar frame, shape (N, n, n)."""
    g = _as_field(mesh, g)
    n = mesh.n
    out = np.empty((mesh.size, n, n))
    for (i, j), terms in mesh.hessian_terms.items():
        out[:, i, j] = _apply(terms, g)
        out[:, j, i] = out[:, i, j]
    return out


def area_operator(mesh: CapMesh, g) -> np.ndarray:
    """``A[g] = hess g + g I`` nodewise."""
    g = _as_field(mesh, g)
    out = hessian(mesh, g)
    for i in range(mesh.n):
        out[:, i, i] += g
    return out


def normal_derivative(mesh: CapMesh, g) -> np.ndarray:
    """Outward co-normal derivative on the boundary nodes (order of
    ``mesh.boundary_ids``)."""
    g = _as_field(mesh, g)
    return mesh.normal_op @ g


def reflect_even(mesh: CapMesh, g) -> np.ndarray:
    """Even part ``(g(xi) + g(xi_hat)) / 2``."""
    g = _as_field(mesh, g)
    return 0.5 * (g + g[mesh.reflection])


def is_even(mesh: CapMesh, g, tol: float) -> bool:
    g = _as_field(mesh, g)
    return bool(np.max(np.abs(g - g[mesh.reflection])) <= tol)


def hessian_consistency(mesh: CapMesh) -> float:
    """Max-norm of ``hess(ell) + ell I - I``: the stencil error on the cap."""
    W = area_operator(mesh, mesh.ell)
    W[:, range(mesh.n), range(mesh.n)] -= 1.0
    return float(np.max(np.abs(W)))


def field_to_grid(mesh: CapMesh, g) -> np.ndarray:
    """Reshape a nodal field to (npsi, nazi) for n=2 (identity for n=1)."""
    g = _as_field(mesh, g)
    if mesh.n == 2:
        return g.reshape(mesh.resolution)
    return g

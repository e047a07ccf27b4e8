"""
Solving the capillary Orlicz-Minkowski problem by continuation
==============================================================

The equation ``phi(ell/h) h det(hess h + h I) = f`` with the Robin condition
``D_mu h = cot(theta) h`` is solved by marching ``f_t = (1-t) phi(1) ell + t f``
from ``t = 0`` (solved by ``h = ell``) to ``t = 1`` with Newton corrections.
"""

import numpy as np

from capillary_orlicz import mesh as cm
from capillary_orlicz import solver as sv
from capillary_orlicz.orlicz import PowerLaw

phi = PowerLaw(4)
theta = np.pi / 3

###############################################################################
# Manufactured data: the cap of radius r solves the problem with
# f = phi(1/r) r^3 ell.
mesh = cm.build_mesh(2, theta, (32, 64))
rep = sv.homotopy_solve(sv.ProblemData(mesh, sv.manufactured_cap_data(mesh, phi, 1.5), phi))
print(rep.status, "max error:", np.max(np.abs(rep.body.h - 1.5 * mesh.ell)))
for s in rep.steps:
    print(f"  t={s.t:.4f} dt={s.dt:.4f} iterations={s.iterations} accepted={s.accepted}")

###############################################################################
# A non-cap target: data built from a smooth perturbed body.  The error
# against the exact support function decreases like the square of the spacing.
from capillary_orlicz.references import smooth_target  # noqa: E402

for res in [(16, 32), (32, 64), (64, 128)]:
    m = cm.build_mesh(2, theta, res)
    h, f = smooth_target(m, phi, 0.1)
    out = sv.homotopy_solve(sv.ProblemData(m, f, phi))
    print(res, out.status, "max error %.3e" % np.max(np.abs(out.body.h - h)))

###############################################################################
# With phi = x^3 (= x^{n+1}) the unnormalized problem is scale invariant: the
# linearization has a kernel and the orthogonality weight vanishes.
d3 = sv.ProblemData(mesh, mesh.ell, PowerLaw(3))
diag = sv.orthogonality_diagnostic(mesh.ell, d3, t=0.0)
print("smallest singular values:", diag.singular_values[:2], "weight range:",
      diag.weight_min, diag.weight_max)

"""
Spherical caps, capillary support functions and their measures
==============================================================

A capillary convex body is described by its support function ``h`` on the
spherical cap of contact angle ``theta``.  The model body is the cap itself,
whose support function is ``ell = 1 - cos(theta) cos(psi)``.
"""

import numpy as np

from capillary_orlicz import body as cb
from capillary_orlicz import functionals as fn
from capillary_orlicz import mesh as cm

# A polar mesh of 64 rings by 128 azimuths on the cap of contact angle pi/3.
mesh = cm.build_mesh(2, np.pi / 3, (64, 128))
print(mesh)

###############################################################################
# The unit cap has curvature radii 1, so its area operator ``W = hess h + h I``
# is the identity.  The stencils are exact on ``ell``.
K = cb.cap(mesh)
print("max |W - I| on the unit cap:", np.max(np.abs(K.W - np.eye(2))))

###############################################################################
# Volume against the closed form (pi/3)(1 - cos t)^2 (2 + cos t).
for theta in (np.pi / 6, np.pi / 3, np.pi / 2):
    m = cm.build_mesh(2, theta, (64, 128))
    print(f"theta={theta:.4f}  V={fn.volume(cb.cap(m)):.12f}  exact={cm.cap_volume(2, theta):.12f}")

###############################################################################
# A non-cap body: a cos(2a) perturbation that keeps the Robin boundary
# condition.  The validator checks positivity, convexity (W >= 0), the Robin
# condition and evenness.
P = cb.perturbed_cap(mesh, "cos2", 0.05)
print(cb.validate(P))

###############################################################################
# Measures are nodal densities integrated with the cap quadrature.  The cone
# volume density divided by ``ell`` integrates back to the volume.
cone = fn.density(P, "cone_volume")
print("int cone/ell =", cm.integrate(mesh, cone.values / mesh.ell), " V =", fn.volume(P))
print("wetting energy:", fn.wetting_energy(P))

###############################################################################
# Horizontal translations add a linear function, which the area operator
# annihilates, so volume and wetting energy are unchanged.
T = cb.translate_horizontal(P, [0.1, -0.05])
print("volume change under translation:", fn.volume(T) - fn.volume(P))

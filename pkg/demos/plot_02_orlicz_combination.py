"""
Orlicz combinations of capillary bodies
=======================================

For a gauge ``phi`` and weights ``alpha, beta`` the combination has support
function ``t`` solving ``alpha phi(h1/t) + beta phi(h2/t) = 1`` at every node.
The result is again a capillary convex body.
"""

import numpy as np

from capillary_orlicz import body as cb
from capillary_orlicz import functionals as fn
from capillary_orlicz import mesh as cm
from capillary_orlicz.combination import CombinationSpec, combine_with_report, perturb
from capillary_orlicz.orlicz import PowerLaw, gauge_from_config, validate_membership

mesh = cm.build_mesh(2, np.pi / 3, (64, 128))
K = cb.perturbed_cap(mesh, "cos2", 0.05)
L = cb.translate_horizontal(cb.cap(mesh, 0.8), [0.1, 0.0])

###############################################################################
# The gauge x^3 + x^4 belongs to the admissible class for n = 2.
phi = gauge_from_config("x^3+x^4")
print(validate_membership(phi, 2))

###############################################################################
# Combine and validate.  The root residual measures the nodal equation, and
# the validator confirms that the result is a capillary convex body.
res = combine_with_report(CombinationSpec(phi, 0.6, 0.9), K, L)
print("root residual:", res.root_residual)
print(res.report)

###############################################################################
# With phi(x) = x the combination is the Minkowski sum of support functions.
lin = combine_with_report(CombinationSpec(PowerLaw(1), 1.0, 1.0), K, L).body
print("max |h - (h1 + h2)| for phi = x:", np.max(np.abs(lin.h - K.h - L.h)))

###############################################################################
# The Orlicz perturbation K +_phi eps L grows monotonically in eps.
for eps in (0.0, 0.1, 0.5, 1.0):
    print(f"eps={eps:.1f}  V={fn.volume(perturb(PowerLaw(3), K, L, eps)):.10f}")

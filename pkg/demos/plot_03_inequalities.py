"""
Checking the Orlicz-Minkowski family of inequalities
====================================================

A reproducible random corpus of capillary bodies (perturbed caps,
translates and L_p combinations) is used to test the Orlicz-Minkowski and
Orlicz-Brunn-Minkowski inequalities, the Minkowski inequality for V1 and the
quadratic Aleksandrov-Fenchel form.
"""

import numpy as np

from capillary_orlicz import body as cb
from capillary_orlicz import inequalities as iq
from capillary_orlicz import mesh as cm
from capillary_orlicz.orlicz import PowerLaw, gauge_from_config

mesh = cm.build_mesh(2, np.pi / 3, (64, 128))
pairs = iq.random_pairs(mesh, 20, seed=7)
phi = gauge_from_config("x^3+x^4")

margins = [iq.check_orlicz_minkowski(phi, K, L).relative_margin for K, L in pairs]
print("Orlicz-Minkowski relative margins: min %.3g, max %.3g" % (min(margins), max(margins)))

rng = np.random.default_rng(0)
lhs = [iq.check_obm(phi.normalized(), *rng.uniform(0.1, 1, 2), K, L).rhs for K, L in pairs]
print("Orlicz-Brunn-Minkowski left side never exceeds 1:", max(lhs))

###############################################################################
# Equality cases.  A cap and a horizontal translate of a larger cap are
# horizontally homothetic, so both Minkowski and Aleksandrov-Fenchel are sharp.
K, L = iq.horizontal_homothetic_pair(mesh, 1.0, 2.0)
print(iq.check_minkowski_V1(K, L).to_dict())
print(iq.check_af_quadratic(K, L, [cb.cap(mesh)]).to_dict())

###############################################################################
# The variational formula: the derivative of the volume along the Orlicz
# perturbation is (n+1) V_phi(K, L) / phi'(1).
K, L = pairs[0]
print(iq.check_variational_formula(PowerLaw(3), K, L))

###############################################################################
# The equivalence function f(eps) is nonpositive.  It is not convex in
# general; see the notes in the README.
e = iq.equivalence_function(phi.normalized(), K, L)
print("max f:", e.max_value, " min second difference:", e.min_second_difference)

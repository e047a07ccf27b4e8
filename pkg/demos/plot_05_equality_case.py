"""
The equality case of the existence condition
============================================

For the normalized equation ``(1/V) phi(ell/h) h det W = f``, data meeting
the integral condition with equality force the solution to be the cap of
volume one.
"""

import numpy as np

from capillary_orlicz import mesh as cm
from capillary_orlicz import solver as sv
from capillary_orlicz.orlicz import PowerLaw

mesh = cm.build_mesh(2, np.pi / 3, (64, 128))
phi = PowerLaw(3)
f = sv.equality_case_data(mesh, phi)
print(sv.check_admissibility(mesh, f, phi))

rep = sv.homotopy_solve(sv.ProblemData(mesh, f, phi, form="normalized"))
target = cm.cap_volume(2, mesh.theta) ** (-1 / 3) * mesh.ell
print(rep.status, "volume:", rep.volume, "max deviation from the cap:",
      np.max(np.abs(rep.body.h - target)))

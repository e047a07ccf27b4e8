"""Capillary convex bodies, Orlicz functionals and the capillary
Orlicz-Minkowski problem on a discretized spherical cap."""

from .body import (CapillaryBody, ConvexityError, ValidationReport, cap, load_body,
                   mode_field, perturbed_cap, robin_project, save_body, translate_horizontal,
                   validate)
from .combination import CombinationSpec, combine, combine_with_report, perturb
from .functionals import (MeasureDensity, V1, density, mixed_discriminant, mixed_volume,
                          orlicz_mixed_volume, uform_consistency, volume, wetting_energy)
from .inequalities import (InequalityReport, check_af_quadratic, check_minkowski_V1, check_obm,
                           check_orlicz_minkowski, check_variational_formula,
                           equivalence_function, random_body, random_pairs)
from .mesh import (CapMesh, area_operator, build_mesh, cap_area, cap_volume, gradient, hessian,
                   hessian_consistency, integrate, is_even, normal_derivative, reflect_even)
from .orlicz import (OrliczFunction, PowerLaw, PowerSum, gauge_from_config, inverse,
                     validate_membership)
from .solver import (ProblemData, SolveReport, SolverConfig, assemble_linearized,
                     check_admissibility, homotopy_solve, newton_solve, orthogonality_diagnostic,
                     residual)

__version__ = "0.1.0"

"""Numerics for the Liouville map of Teichmueller space into Hoelder
distributions on the space of geodesics, with a verification harness."""
from .currents import (BoxPartition, c_star, cell_measure_array, cell_measures, liouville_box_measure,
                       normalize_box, partition_box, partition_constant)
from .engine import (DistributionHandle, EvalParams, EvaluationTrace, GammaSampler, eval_current,
                     eval_derivative, eval_extension, evaluate_samples, quadrature_oracle, seminorm)
from .errors import *  # noqa: F401,F403
from .families import (BeltramiCoefficient, ComposedFamily, CyclicFuchsianGroup, HolomorphicQCFamily,
                       IdentityFamily, PowerStretchFamily, QCMap, VerticalStretchFamily, compose_beltrami,
                       conjugated_group, max_dilatation, power_stretch_family, vertical_stretch_family)
from .holder import (HolderFunction, StepApproximation, bump, holder_constant_estimate, product_bump,
                     step_approximation, step_function, table_function)
from .metrics import (check_punctured_disk_bound, decay_bound, density_01, dist_H, dist_punctured_disk,
                      lower_bound_density_01, radius_r_beta, validity_radius)
from .projective import (INF, GeodesicBox, MobiusTransform, SpherePoint, as_point, cross_ratio,
                         cr_minus_one, log_cross_ratio, mobius_through, normalize_quadruple)

__version__ = "0.1.0"

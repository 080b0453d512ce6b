"""Normal multi-scale transforms of closed planar curves."""

from .subdivision import (Scheme, ReproductionReport, apply, center, derived,
                          dd_scheme, lr_scheme, reindex, reproduction_report,
                          scheme_from_spec, shift_of)
from .curve import (Circle, Curve, Ellipse, Ray, TrigCurve, curve_from_spec,
                    initial_sample_parameter, initial_sample_quadratic,
                    initial_sample_uniform, intersect_ray)
from .transform import (Decomposition, NormalField, TransformConfig, decompose,
                        normals, predict, reconstruct, refine)
from .analysis import (DecayTable, detail_decay, difference_norms, fit_order,
                       normal_accuracy, omega_decay, table1)

__version__ = "0.1.0"

"""Contraction-metric controller synthesis and simulation on Finsler manifolds.

The toolkit covers the full pipeline at desk scale: control-affine systems
and their differential dynamics, candidate Finsler-Lyapunov functions,
discretized path geometry with asymmetric distance bounds, open-loop and
sampled-data tracking controllers, and numerical verification of the
dissipation and convergence guarantees.
"""

from .controller import (ControlProfile, RateSpec, RhoVariant, SampleEvent,
                         Trajectory, eval_ab, eval_k_delta, eval_rho,
                         integrate_kp, open_loop_run, propagate_forward_image)
from .errors import (CcmError, ConditionViolated, ConfigError, DegeneratePath,
                     InsufficientSamples, InvalidMetric, NonSmoothAtZero,
                     NumericalBlowup, RateNotExponential, ShapeError,
                     UnknownExample, UnknownMetric)
from .geometry import (DiscretizedPath, DistanceOptions, approx_distance,
                       energy_integral, length_integral, make_parametric_path,
                       make_straight_path, path_from_nodes, shorten_path)
from .metrics import (AxiomReport, AxiomSampleSpec, FinslerMetric, MetricEval,
                      broken_signed_line, check_finsler_axioms, eval_F,
                      eval_metric, load_metric, quadratic_line, resolve_metric)
from .numerics import (DEFAULT_TOL, Grid1D, ToleranceConfig,
                       finite_diff_jacobian, rk4_step, trapezoid_integral)
from .sampled_loop import PathUpdatePolicy, SampleSchedule, closed_loop_run
from .systems import (Box, ControlAffineSystem, TargetTrajectory,
                      constant_target, eval_A, eval_differential,
                      eval_dynamics, load_example, resolve_system,
                      trajectory_residual, uncontrollable_line)
from .verify import (ConvergenceReport, VerificationReport, check_ratio_bound,
                     check_th1, convergence_report, dissipation_monitor,
                     kernel_sampler_for)

__version__ = "0.1.0"

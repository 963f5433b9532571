"""Hierarchical group-LASSO lag selection for several autoregressive series."""
from .ar_core import (ARProcessSpec, SimulatedSeries, StabilityReport, companion_matrix,
                      reverse_char_poly_eval, simulate_ar, stability_report)
from .design import DesignSystem, MultiSeriesDataset, build_design, gram_operator_norm
from .diagnostics import (GuaranteeReport, effective_noise_surrogate, empirical_re_ratio,
                          estimation_error, evaluate_fit, false_discoveries,
                          one_step_prediction_mse, spectral_band, stability_census)
from .errors import (DegenerateProbe, DimensionMismatch, EmptySeries, HierLagError,
                     LagBoundInfeasible, LagTooLarge, NonFiniteCoefficient, ParseError,
                     UnstableProcess)
from .experiment import ExperimentGrid, RunConfig, run_experiment, simulate_dataset
from .hiergroup import (HierGroupStructure, dual_norm_upper_bound, group_norm, prox_hier,
                        prox_single_group)
from .io import load_dataset, save_long, save_wide
from .pipeline import (CVResult, FitResult, TheoryConstants, beta_min_check, compute_lambda,
                       cross_validate_lambda, noise_quantile_lambda, run_pipeline,
                       select_lag_bound)
from .solver import SolveTrace, SolverConfig, fit, fixed_point_residual, lambda_max, objective

__version__ = "0.1.0"

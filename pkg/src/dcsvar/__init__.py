"""Structural VAR identification with heavy-tailed shocks.

Independent non-Gaussian structural shocks are recovered from reduced-form
residuals by prewhitening followed by rotation-search minimizing an aggregate
distance-covariance objective; independence of candidate shocks is assessed by
a permutation test that is exact under the null without any moment conditions.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .distcov import DistCovConfig, aggregate_objective, dist_cov, dist_cov_fast
from .errors import (DataFormatError, DcsvarError, DegenerateInputError,
                     EstimationError, InternalConsistencyError,
                     NotPositiveDefiniteError, ParameterError, SimulationError)
from .ica import (IcaResult, OptimizerReport, OptimizerSettings,
                  amari_distance, estimate_unmixing, givens_rotation,
                  label_disaster_shock, omega_normalize)
from .indep import PermutationTestResult, permutation_test, test_battery
from .irf import (IrfTable, irf_choleski, irf_local_projection,
                  irf_var_implied, unit_effect_rescale)
from .model import (HeavyTailDamping, SimulationResult, SvarModel,
                    effective_matrices, model_from_dict, model_to_dict,
                    normalize_unmixing, simulate)
from .montecarlo import (ExperimentGrid, MonteCarloReport,
                         kurtosis_quantile_table, run_grid, write_report)
from .series import TimeSeriesMatrix, as_timeseries, read_csv, write_csv
from .shocks import (GaussianShock, ParetoShock, PearsonShock, StableShock,
                     StudentTShock, format_shock, hill_tail_index, parse_shock,
                     sample_kurtosis, sample_shock, simulate_stable_limit)
from .var import (VarFit, fit_var, low_frequency_detrend, ma_coefficients,
                  purge_exogenous)
from .whiten import (CholeskiOrdered, CovarianceSvd, DataSvd, Whitener,
                     kurtosis_order, whiten)

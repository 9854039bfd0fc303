"""RIS-assisted coverage on a one-dimensional street model.

Analytic mean covered length, SINR coverage probability, and Monte-Carlo
validation of both against sampled obstacle processes.
"""

from .backend import BACKEND_NAME, available_backends
from .numerics import (EvaluationError, QuadratureConfig, QuadratureError,
                       SeriesConfig, integrate, integrate_semi_infinite,
                       kummer_m, kummer_m_log)
from .street import (CallableDistribution, Environment, ExpoEnvParams,
                     GeneralEnvParams, StreetGeometry, default_window,
                     density_f_i, sample_environment, tau_before)
from .coverage import (CoveredSet, McEstimate, covered_set_scenarios,
                       grid_scan_covered_set, is_visible,
                       mc_mean_covered_length, mean_connectable_customers,
                       sample_connectable_count, scenario_discrepancy)
from .mean_length import (MeanLengthBreakdown, SeriesConvergenceError,
                          gap_mean_scenario1, gap_mean_scenario2,
                          gap_mean_scenario3, geometric_ratio,
                          mean_covered_length_approx,
                          mean_covered_length_closed_form,
                          mean_covered_length_series,
                          one_minus_geometric_ratio, verify_closed_forms)
from .sinr import (AcceptanceRateError, RadioConstants, RadioParams,
                   SinrQuery, coverage_probability_analytic, dbm_to_mw,
                   effective_intensity, mc_coverage_dependent,
                   mc_coverage_dependent_curve, mc_coverage_h0,
                   mc_coverage_h0_curve, radio_constants,
                   received_power_active, received_power_passive)

__version__ = "0.1.0"

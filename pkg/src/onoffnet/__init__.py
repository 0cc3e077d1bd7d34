"""Monte Carlo and analytic tools for threshold-based on-off power allocation
in clustered wireless interference networks."""

from .bounds import (BoundReport, GuaranteedBounds, ValidityError, avg_sum_rate_asymptote, bound_moderate_weak,
                     bound_theta_K, classify_regime, closed_form_alpha0, closed_form_M_equals_K,
                     guaranteed_bounds, shadow_activity_factor, xi_upper_bound)
from .channel import ChannelRealization, sample_cross_gain, sample_direct_gains, sample_realization, substream
from .config import ConfigError, NetworkConfig, ShadowingModel, load_config, save_config
from .harness import (SweepResult, SweepSpec, compare_strategies, concentration_suite, run_sweep,
                      scaling_suite)
from .metrics import (SumRateEstimate, average_sum_rate, guaranteed_sum_rate, interference_at,
                      interference_quantile, link_rate, truncation_contribution)
from .power import (PowerStrategy, ThresholdSolution, expected_onoff_utility, on_off_power, solve_threshold,
                    threshold_asymptotic, threshold_exact, threshold_fixed_point)
from .special import EULER_GAMMA, e1, ei, ei_asymptotic

__version__ = "0.1.0"

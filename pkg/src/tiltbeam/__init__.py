"""Joint downlink beamforming and antenna-tilt optimization for network
energy efficiency, with a multi-cell Monte-Carlo simulation harness."""

from .channel import ChannelSet, FadingParams, build_channel_set, draw_channel_vector, large_scale_gain
from .dinkelbach import OuterConfig, f_eta, outer_solve
from .harness import (CSV_HEADER, ConfigError, ExperimentConfig, default_config,
                      load_config, run_drop, run_sweep, run_user_sweep)
from .objective import (PowerModel, Solution, Weights, g_value, h_value, mse,
                        r_max, sinr, total_ee, user_rate_nats)
from .pattern import (LinkGainModel, PatternParams, concavity_halfwidth_deg,
                      gain_db, gain_db_2d, gain_lin)
from .scenario import Drop, NetworkConfig, build_layout, drop_users, elevation_aoa
from .tiltsearch import Cluster, chosen_user, cluster_users, exhaustive_tilt_scan, greedy_tilt_scan
from .wmmse import (AscentViolationError, InnerState, inner_iterate, inner_solve,
                    lambda_search, matched_init, solve_beamformers_bs,
                    update_filters, update_slacks)

__version__ = "0.1.0"

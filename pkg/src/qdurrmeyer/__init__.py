"""Numerical laboratory for the limit q-Durrmeyer operator."""
from .qcore import (ConvergenceError, DomainError, PrecisionError, QContext, QError,
                    TruncationReport, euler_recip_series, euler_series, jackson_qintegral,
                    log_qpoch_neg, qpoch_finite, qpoch_inf)
from .funcspace import (FunctionSpec, GridFunction, SpecParseError, parse_spec, read_grid_csv,
                        sample, sample_for_growth, sup_norm, value_at_node, write_grid_csv)
from .durrmeyer import (basis_p, coeff_A, coeff_A_qintegral, coefficient_sequence,
                        eval_entire, eval_entire_logpolar, eval_interval)
from .taylor import (PowerSeriesRep, RhoSeries, decay_check, divdiff_contour, divdiff_explicit,
                     divdiff_recursive, eval_taylor, g_eval, rho_coeffs, taylor_coeffs)
from .growth import (GrowthProfile, fit_decay_exponent, growth_profile, max_modulus_scaled,
                     o_estimate_check, sandwich_zz2, zeng_ratio)
from .extremal import ExtremalFamily, g_closed_form, lower_bound_check, make_extremal, s_seq

__version__ = "0.1.0"

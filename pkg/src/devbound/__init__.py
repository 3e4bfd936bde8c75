"""devbound: explicit finite-sample uniform deviation bounds for clustering.

Computes the closed-form deviation bounds for hard (Bregman / k-means)
clustering cost and bounded-spectrum Gaussian-mixture log-likelihood,
constructs the objects behind them (moment profiles, outer brackets, clamps,
epsilon-covers), and verifies bound dominance and rates by seeded Monte
Carlo on heavy-tailed data.
"""

__version__ = "0.1.0"

from .moments import (MomentProfile, ball_radius, chebyshev_deviation,
                      clip_radius, fit_profile, reference_cost,
                      sampled_clip_radius)
from .bregman import (BregmanSpec, CenterSet, divergence, hard_cost,
                      is_feasible, lloyd_fit, mean_cost, quadratic_form,
                      squared_euclidean)
from .gmm import (GmmParams, em_fit, is_feasible_mog, log_density,
                  mean_loglik, mixture_cost, restrict, spectrum_project)
from .covers import (CoverReport, bregman_center_cover, clamped_cover_tau,
                     covariance_cover, lp_ball_cover, mixture_cover)
from .brackets import (ClampSpec, GmmBracket, KmBracket, audit_bracket,
                       build_gmm_bracket, build_km_bracket,
                       clamp_from_bracket, gmm_one_center_radii,
                       gmm_separation_radius, gmm_upper_bracket,
                       one_center_radii)
from .bounds import (BoundReport, bregman_bound, clamp_bound,
                     delta_crossover_p, gmm_bound, kmeans_bound,
                     rate_exponent_gmm, rate_exponent_kmeans)
from .distributions import (DistributionSpec, certified_moment, draw,
                            gaussian, gmm_ground_truth, population_cost,
                            shifted_pareto, student_t, two_point)
from .harness import (ExperimentConfig, VerificationReport, audit,
                      rate_study, verify_gmm, verify_kmeans)

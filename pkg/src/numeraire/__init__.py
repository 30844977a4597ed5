"""Numeraire e-variables, reverse information projections and their certificates."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0+unknown"

from .certificate import Certificate, Check, FinitenessFlags
from .closed_form import (bernoulli, expfam_numeraire, gaussian_location, symmetric_discrete_null,
                          symmetric_numeraire)
from .errors import *  # noqa: F401,F403
from .finite_solver import (NumeraireSolution, SolverOptions, brute_force_numeraire,
                            first_order_certificate, solution_from_weights, solve_finite_null)
from .generated_solver import certify_generated, solve_bounded_mean, solve_subgaussian
from .measures import (DensityMeasure, DiscreteMeasure, Measure, cauchy, discrete, expect,
                       exponential, lebesgue_decompose, mixture, normal, relative_entropy,
                       renyi_divergence, uniform)
from .nullspec import (BoundedMean, CustomGenerated, EVariable, ExpFamily, FiniteMixture,
                       SubGaussian, Symmetric, effective_null_membership, is_evariable)
from .renyi import (RenyiSolution, renyi_certificate, renyi_from_weights, renyi_point_null,
                    solve_renyi_finite)
from .verify import (finiteness_flags, description_gain, duality_gap, log_t_inequality,
                     minimizing_sequence_diagnostic, numeraire_certificate,
                     universal_inference_compare)

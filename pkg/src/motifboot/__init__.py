"""Motif counts on networks, their bootstrap estimates and variances."""

__version__ = "0.1.0"

from .graph import Graph, EdgeListError, load_edge_list, write_edge_list, induced_subgraph, neighbors
from .motif import MotifPattern, PatternError, parse_motif, wheel, cycle, edge, vee, triangle
from .esu import (SamplingPlan, assign_order, enumerate_connected_subsets, sample_connected_subsets,
                  count_leaves, collect_leaves)
from .estimators import (BootstrapConfig, CountEstimate, DegenerateDensity, exact_count, uniform_bootstrap,
                         subgraph_bootstrap, bootstrap_count, transitivity, transitivity_gradient)
from .variance import (ScopeError, VarianceEstimate, CovarianceMatrix, empirical_variance, empirical_covariance,
                       bootstrap_variance, bootstrap_covariance, covariance_matrix, delta_variance)
from .models import SbmSpec, GraphonSpec, reference_sbm, highschool_sbm, pfa_graphon, sample_sbm, sample_graphon, sbm_moment
from .inference import (TestResult, CoverageReport, confidence_interval, one_sample_test, two_sample_test,
                        multivariate_test, coverage_experiment, transitivity_estimate)

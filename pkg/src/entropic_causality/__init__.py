"""Entropic causal inference for pairs of categorical variables."""

__version__ = "0.1.0"

from .coupling import Coupling, brute_force_mec_small, coupling_entropy, greedy_mec, transfer_coupling, validate_coupling
from .dist import conditional_profile, entropy, extended_entropy, sample_dirichlet, sample_low_entropy
from .inference import Direction, Verdict, infer_conditional, infer_exogenous, infer_observed, infer_total, thresholded_decision
from .scm import Scm, sample_scm, scm_joint

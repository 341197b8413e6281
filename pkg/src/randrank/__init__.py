"""Randomized rank-revealing factorizations (URV, ULV, and URV of implicit
products of matrices and inverses), with evaluators for their probabilistic
bounds and a Monte Carlo harness that checks them."""

from .bounds import BoundSet, DensityParams, deterministic_bounds, tail_probability_bound, theorem_bounds
from .dense import householder_qr, jacobi_svd_values, ql_decompose, rq_decompose, solve_upper_triangular, spectral_norm
from .errors import (
    ConstraintError, ConvergenceError, DomainError, InputError, NumericalError,
    RandRankError, SingularMatrixError, StructuralError,
)
from .grurv import FactorChain, GrurvResult, assemble_r, grurv, implicit_rank_metrics
from .labgen import SpectrumSpec, realize_spectrum, synthesize_matrix
from .metrics import TrialRecord, backward_error, orthogonality_defect, rank_reveal_metrics, summarize
from .randhaar import SeededRng, sample_corner_smin, sample_gaussian_matrix, sample_haar_orthogonal
from .rrr import RulvResult, RurvResult, rulv, rurv, split_r

__version__ = "0.1.0"

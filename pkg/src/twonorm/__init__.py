"""Empirical toolkit for linear 2-normed spaces: norms, window classifiers for
sequences, continuity probes and falsification-style theorem checks."""

__version__ = "0.1.0"

from .errors import (BoundViolationError, ConfigError, DimensionError, DslError, EvalError, InvalidAnchorError,
                     InvalidNormError, InvalidToleranceError, LexError, ParseError, TwoNormError)
from .norms import (AxiomReport, TwoNormSpace, are_dependent, check_axioms, eval_max_basis_norm, eval_seminorm,
                    eval_sum_norm, eval_two_norm, in_neighborhood)
from .sequences import (SeqSpec, SeqVerdict, ToleranceSchedule, classify_cauchy, classify_convergent,
                        classify_quasi_cauchy, delta, extract_quasi_cauchy_subsequence, interleave)
from .probes import (FuncFamilySpec, FuncSpec, ProbeReport, Witness, probe_sequential, probe_u_continuity,
                     probe_uniform_continuity, probe_ward, probe_ward_compact_image)
from .theorems import (Battery, LatticeVerdict, check_uniform_convergence, run_implication_matrix,
                       verify_uniform_limit_u, verify_uniform_limit_ward)
from .cases import TheoremCase, load_cases, run_cases, run_paper_examples

__all__ = [
    "__version__",
    "TwoNormError", "DimensionError", "InvalidNormError", "InvalidAnchorError", "InvalidToleranceError",
    "BoundViolationError", "DslError", "LexError", "ParseError", "EvalError", "ConfigError",
    "TwoNormSpace", "AxiomReport", "are_dependent", "check_axioms", "eval_two_norm", "eval_sum_norm",
    "eval_max_basis_norm", "eval_seminorm", "in_neighborhood",
    "SeqSpec", "SeqVerdict", "ToleranceSchedule", "classify_quasi_cauchy", "classify_convergent",
    "classify_cauchy", "delta", "interleave", "extract_quasi_cauchy_subsequence",
    "FuncSpec", "FuncFamilySpec", "ProbeReport", "Witness", "probe_ward", "probe_sequential",
    "probe_u_continuity", "probe_uniform_continuity", "probe_ward_compact_image",
    "Battery", "LatticeVerdict", "check_uniform_convergence", "verify_uniform_limit_ward",
    "verify_uniform_limit_u", "run_implication_matrix",
    "TheoremCase", "load_cases", "run_cases", "run_paper_examples",
]

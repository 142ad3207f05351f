"""Nested harmonic sums continued to the complex plane, with the weight-4
reflection-identity corpus, a sampling + rational-reconstruction derivation
engine, and numerical verification tooling."""

from .core import (ArgTag, ConstantMonomial, Expression, IndexVector, ONE,
                   Term, build_ansatz, build_basis, build_constants,
                   canonicalize, finite_sum, solver_unknown_count, weight)
from .continuation import (EvalContext, constant_value, evaluate,
                           evaluate_expression, laurent_coefficients)
from .engine import (DerivationWorkspace, IdentityRecord, PoleSeparationReport,
                     Provenance, SamplePlan, VerificationReport,
                     compose_trilinear, derive_identity, derivation_workspace,
                     pole_separation_check, reflect, sample_points,
                     verify_identity)
from .corpus import (CorpusFile, corpus_from_json, corpus_to_json,
                     default_corpus_path, load_corpus, load_default_corpus,
                     parse_expression, parse_identity, save_corpus,
                     serialize_corpus, serialize_expression, serialize_identity)
from .shuffle import stuffle_product
from . import errors

__version__ = "0.1.0"

__all__ = [
    "ArgTag", "ConstantMonomial", "CorpusFile", "DerivationWorkspace",
    "EvalContext", "Expression", "IdentityRecord", "IndexVector", "ONE",
    "PoleSeparationReport", "Provenance", "SamplePlan", "Term",
    "VerificationReport", "build_ansatz", "build_basis", "build_constants",
    "canonicalize", "compose_trilinear", "constant_value", "corpus_from_json",
    "corpus_to_json", "default_corpus_path", "derivation_workspace",
    "derive_identity", "errors", "evaluate", "evaluate_expression",
    "finite_sum", "laurent_coefficients", "load_corpus", "load_default_corpus",
    "parse_expression", "parse_identity", "pole_separation_check", "reflect",
    "sample_points", "save_corpus", "serialize_corpus", "serialize_expression",
    "serialize_identity", "solver_unknown_count", "stuffle_product",
    "verify_identity", "weight",
]

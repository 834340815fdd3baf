"""Exact inference in imprecise Markov trees under epistemic irrelevance."""

from ._core import (
    DEFAULT_TOLERANCE,
    HMM,
    PreconditionError,
    StructuralError,
    Tree,
    chain_study,
    evidence_probability,
    find_rightmost_root,
    posterior,
    random_tree,
    strong_interval,
    validate,
)

__all__ = [
    "DEFAULT_TOLERANCE",
    "HMM",
    "PreconditionError",
    "StructuralError",
    "Tree",
    "chain_study",
    "evidence_probability",
    "find_rightmost_root",
    "posterior",
    "random_tree",
    "strong_interval",
    "validate",
]

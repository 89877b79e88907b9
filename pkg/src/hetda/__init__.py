"""Heterogeneous domain adaptation through a shared linear subspace that
jointly matches distributions, preserves paired-sample correlation and keeps
local/global data structure, refined by iterative pseudo-labeling."""

from .classify import accuracy, predict, train
from .data import (UNLABELED, DomainData, HeteroDataset, SynthSpec,
                   load_domain, load_pairing, preprocess, synth_generate,
                   validate_dataset)
from .linalg import (EigenPairs, NumericError, ReducedRankError,
                     assemble_block_diag, centering_matrix, gen_eig_smallest,
                     sym_eig)
from .solver import HyperParams, SharedProjection, SubspaceModel, fit, project
from .terms import (build_adjacency, correlation_matrix, laplacian,
                    mmd_conditional, mmd_marginal, mmd_set, scatter_matrices)

__all__ = [
    "UNLABELED", "DomainData", "HeteroDataset", "SynthSpec", "EigenPairs",
    "NumericError", "ReducedRankError", "HyperParams", "SharedProjection",
    "SubspaceModel", "accuracy", "assemble_block_diag", "build_adjacency",
    "centering_matrix", "correlation_matrix", "fit", "gen_eig_smallest",
    "laplacian", "load_domain", "load_pairing", "mmd_conditional",
    "mmd_marginal", "mmd_set", "predict", "preprocess", "project",
    "scatter_matrices", "sym_eig", "synth_generate", "train",
    "validate_dataset",
]

__version__ = "0.1.0"

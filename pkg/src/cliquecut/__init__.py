"""Probabilistic combinatorial optimization on graphs.

Optimize a product distribution over nodes against a differentiable penalty
loss, read off tail-bound certificates for the quality of a random sample,
and derandomize by conditional expectation to get a concrete solution at
least as good as the bound.  Ships solvers for maximum-weight clique and
seeded low-conductance partitioning, a trainable message-passing producer,
and exact brute-force references for testing.
"""

from .certificates import (
    Certificate,
    CliqueObjective,
    CutVolumeObjective,
    box_certificate,
    markov_certificate,
    penalty_certificate,
    sampling_success,
    verify_solution,
)
from .datasets import Corpus, gen_gnp, gen_planted_clique, load_corpus, save_corpus, split_corpus
from .decoding import (
    CliquePenaltyObjective,
    CutObjective,
    DecodeTrace,
    decode_best_of_k,
    decode_clique_sweep,
    decode_conditional,
    decode_cut_with_volume,
    decode_maxcut_half,
    grow_to_maximal,
)
from .distributions import (
    CliqueLossParams,
    LossReport,
    VolumeConstraint,
    clique_loss,
    clique_violation_bound,
    cut_loss,
    expected_cut,
    expected_set_weight,
    expected_volume,
    rescale_to_target,
    sample,
)
from .graphs import (
    Graph,
    NodeSet,
    brute_force_expectation,
    brute_force_max_clique,
    conductance,
    cut_weight,
    graph_digest,
    hop_distances,
    is_clique,
    load_dimacs,
    load_dimacs_file,
    load_edge_list,
    load_edge_list_file,
    set_weight,
    to_edge_list_text,
    volume,
)
from .models import (
    CliqueLossSpec,
    CutLossSpec,
    MpnnParams,
    OptimState,
    TrainResult,
    load_checkpoint,
    mpnn_forward,
    optimize_direct,
    rescaled_cut_loss,
    save_checkpoint,
    train_mpnn,
)
from .solver import (
    SolveConfig,
    SolveResult,
    approximation_ratio,
    default_interval_schedule,
    greedy_mis_complement,
    solve_local_partition,
    solve_max_clique,
    uniform_random_baseline,
)

__version__ = "0.1.0"

__all__ = [
    "Certificate",
    "CliqueObjective",
    "CutVolumeObjective",
    "box_certificate",
    "markov_certificate",
    "penalty_certificate",
    "sampling_success",
    "verify_solution",
    "Corpus",
    "gen_gnp",
    "gen_planted_clique",
    "load_corpus",
    "save_corpus",
    "split_corpus",
    "CliquePenaltyObjective",
    "CutObjective",
    "DecodeTrace",
    "decode_best_of_k",
    "decode_clique_sweep",
    "decode_conditional",
    "decode_cut_with_volume",
    "decode_maxcut_half",
    "grow_to_maximal",
    "CliqueLossParams",
    "LossReport",
    "VolumeConstraint",
    "clique_loss",
    "clique_violation_bound",
    "cut_loss",
    "expected_cut",
    "expected_set_weight",
    "expected_volume",
    "rescale_to_target",
    "sample",
    "Graph",
    "NodeSet",
    "brute_force_expectation",
    "brute_force_max_clique",
    "conductance",
    "cut_weight",
    "graph_digest",
    "hop_distances",
    "is_clique",
    "load_dimacs",
    "load_dimacs_file",
    "load_edge_list",
    "load_edge_list_file",
    "set_weight",
    "to_edge_list_text",
    "volume",
    "CliqueLossSpec",
    "CutLossSpec",
    "MpnnParams",
    "OptimState",
    "TrainResult",
    "load_checkpoint",
    "mpnn_forward",
    "optimize_direct",
    "rescaled_cut_loss",
    "save_checkpoint",
    "train_mpnn",
    "SolveConfig",
    "SolveResult",
    "approximation_ratio",
    "default_interval_schedule",
    "greedy_mis_complement",
    "solve_local_partition",
    "solve_max_clique",
    "uniform_random_baseline",
    "__version__",
]

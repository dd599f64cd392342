"""Visual-token reduction: importance pruning plus distance-bounded
density-peak clustering, with reference clusterers and a binary tensor
format for layer dumps."""

from .attention import (
    attention_by_duplication,
    attention_with_bias,
    proportional_attention_bias,
    proportional_attention_oracle,
)
from .clusters import ClusterSet, max_intra_cluster_distance
from .dbdpc import (
    DBDPC,
    DbdpcParams,
    assign_to_centers,
    dbdpc_cluster,
    local_density,
    select_centers_iterative,
    select_centers_recursive,
)
from .distance import max_pairwise_distance, pairwise_distance
from .errors import ParameterError, TensorFormatError, ValidationError
from .euti import ImportanceSplit, euti_scores, global_query, split_tokens
from .pipeline import (
    PactReducer,
    ReductionConfig,
    ReductionResult,
    assign_position_ids,
    layer_key_spread,
    merge_clusters,
    pact_reduce,
    recover_pruned,
    select_reduction_layer,
)
from .reference import (
    DensityPeaks,
    DpcParams,
    KMeansClusterer,
    dpc_cluster,
    kmeans_cluster,
    representative_center,
)
from .rope import RopeConfig, apply_rope
from .synth import SyntheticScene, chain_scene, generate_scene
from .tensor_io import TokenTensor, read_tensor, write_tensor

__version__ = "0.1.0"

__all__ = [
    "DBDPC",
    "ClusterSet",
    "DbdpcParams",
    "DensityPeaks",
    "DpcParams",
    "ImportanceSplit",
    "KMeansClusterer",
    "PactReducer",
    "ParameterError",
    "ReductionConfig",
    "ReductionResult",
    "RopeConfig",
    "SyntheticScene",
    "TensorFormatError",
    "TokenTensor",
    "ValidationError",
    "apply_rope",
    "assign_position_ids",
    "assign_to_centers",
    "attention_by_duplication",
    "attention_with_bias",
    "chain_scene",
    "dbdpc_cluster",
    "dpc_cluster",
    "euti_scores",
    "generate_scene",
    "global_query",
    "kmeans_cluster",
    "layer_key_spread",
    "local_density",
    "max_intra_cluster_distance",
    "max_pairwise_distance",
    "merge_clusters",
    "pact_reduce",
    "pairwise_distance",
    "proportional_attention_bias",
    "proportional_attention_oracle",
    "read_tensor",
    "recover_pruned",
    "representative_center",
    "select_centers_iterative",
    "select_centers_recursive",
    "select_reduction_layer",
    "split_tokens",
    "write_tensor",
]

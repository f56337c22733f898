"""Cross-lingual knowledge-graph entity alignment.

Learns entity embeddings from topological, relation and attribute
features with two model variants (a multi-aspect GCN and its hybrid
sibling with highway feature encoders), evaluates alignment by
L1-distance ranking and fuses graph embeddings with external textual
signals.
"""

import os as _os

# KGALIGN_THREADS caps BLAS parallelism; it can only take effect if set
# before numpy initializes, so resolve it before importing submodules.
_cap = _os.environ.get("KGALIGN_THREADS")
if _cap:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                 "NUMEXPR_NUM_THREADS"):
        _os.environ.setdefault(_var, _cap)

__version__ = "0.1.0"

from .data import (  # noqa: E402
    AlignmentTask,
    LanguageGraph,
    disjoint_union_ids,
    export_task_dir,
    load_task,
    load_task_bin,
    save_task,
)
from .evaluator import (  # noqa: E402
    CandidatePool,
    RankingResult,
    hits_at_k,
    pool_recall_at_q,
    rank_all,
    rerank_pool,
    top_q_candidates,
)
from .features import FeatureSet, ablate, build_features  # noqa: E402
from .fusion import (  # noqa: E402
    TextualEmbeddingFile,
    load_scores,
    load_text_embeddings,
    save_scores,
    save_text_embeddings,
    weighted_concat,
)
from .linalg import SparseMatrix, normalize_adjacency, spmm  # noqa: E402
from .models import (  # noqa: E402
    HighwayEncoder,
    ModelParams,
    highway_forward,
    hman_forward,
    init_params,
    load_checkpoint,
    man_forward,
    save_checkpoint,
)
from .synth import SynthConfig, generate  # noqa: E402
from .trainer import (  # noqa: E402
    NegativePool,
    TrainConfig,
    build_adjacency,
    margin_loss,
    sample_negatives,
    train,
)

__all__ = [
    "AlignmentTask", "LanguageGraph", "disjoint_union_ids", "export_task_dir",
    "load_task", "load_task_bin", "save_task",
    "CandidatePool", "RankingResult", "hits_at_k", "pool_recall_at_q",
    "rank_all", "rerank_pool", "top_q_candidates",
    "FeatureSet", "ablate", "build_features",
    "TextualEmbeddingFile", "load_scores", "load_text_embeddings",
    "save_scores", "save_text_embeddings", "weighted_concat",
    "SparseMatrix", "normalize_adjacency", "spmm",
    "HighwayEncoder", "ModelParams", "highway_forward", "hman_forward",
    "init_params", "load_checkpoint", "man_forward", "save_checkpoint",
    "SynthConfig", "generate",
    "NegativePool", "TrainConfig", "build_adjacency", "margin_loss",
    "sample_negatives", "train",
]

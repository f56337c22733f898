"""Entity-description encoders for cross-lingual alignment.

Two modes over the same compact transformer backbone: a dual encoder
emitting per-entity textual embeddings (for weighted concatenation with
graph embeddings) and a cross-encoder producing pair probabilities (for
candidate-pool reranking).  All interchange with the alignment engine
happens through TSV files.
"""

__version__ = "0.1.0"

from .corpus import (
    DescriptionCorpus,
    load_descriptions,
    load_ills,
    load_pool,
    save_descriptions,
    save_embeddings,
    save_scores,
)
from .model import EncoderConfig
from .pairwise import encode_pairwise
from .pointwise import score_pointwise

__all__ = [
    "DescriptionCorpus", "EncoderConfig", "encode_pairwise", "score_pointwise",
    "load_descriptions", "load_ills", "load_pool", "save_descriptions",
    "save_embeddings", "save_scores",
]

"""Shared toy corpus and trained-artifact fixtures (training is seconds,
so the expensive fixtures are session-scoped)."""

import numpy as np
import pytest

from text_encoder import DescriptionCorpus, EncoderConfig, encode_pairwise


def build_toy_corpus(n_pairs=50, seed=0, offset=100):
    """Gold description pairs share a core word set across languages."""
    rng = np.random.default_rng(seed)
    words = [f"w{i}" for i in range(120)]
    src, tgt = {}, {}
    for i in range(n_pairs):
        core = list(rng.choice(words, size=6, replace=False))
        src[i] = "entity src " + " ".join(core)
        tgt[offset + i] = "entity tgt " + " ".join(rng.permutation(core))
    ills = [(i, offset + i) for i in range(n_pairs)]
    return DescriptionCorpus(src), DescriptionCorpus(tgt), ills


@pytest.fixture(scope="session")
def toy():
    src, tgt, ills = build_toy_corpus()
    return {"src": src, "tgt": tgt, "ills": ills}


@pytest.fixture(scope="session")
def pairwise_rows(toy):
    config = EncoderConfig(mode="pairwise", epochs=40, seed=1)
    rows, losses = encode_pairwise(toy["src"], toy["tgt"], toy["ills"], config)
    return {"rows": rows, "losses": losses, "config": config}

#!/usr/bin/env python3
"""Walkthrough: which input channel matters most?

Drops each channel (topology / relations / attributes) in turn on a task
whose count features are deliberately ambiguous: two relation types, six
attribute types and 30% feature noise.  Topology is the only channel that
can still tell colliding entities apart, so removing it hurts most.
"""

from kgalign.evaluator import SRC_TO_TGT, rank_all
from kgalign.features import build_features
from kgalign.models import forward
from kgalign.synth import SynthConfig, generate
from kgalign.trainer import TrainConfig, build_adjacency, train

task = generate(SynthConfig(n_entities=200, n_relations=2, n_attributes=6,
                            edge_density=0.04, feature_noise=0.3,
                            structural_noise=0.02, seed=0))
feats = build_features(task, top_f=1000)
a_hat = build_adjacency(task)


def hits_at_1(drop):
    result = train(task, feats, TrainConfig(variant="man", epochs=300, seed=0,
                                            drop=frozenset(drop)))
    emb, _ = forward(result.params, a_hat, feats)
    return rank_all(emb, task, SRC_TO_TGT, ks=(1,)).hits[1]


full = hits_at_1(())
print(f"{'configuration':<22}{'hits@1':>8}{'drop':>8}")
print(f"{'full model':<22}{full:>8.3f}{'-':>8}")
for channel, label in (("te", "w/o topology"), ("re", "w/o relations"),
                       ("ae", "w/o attributes")):
    h = hits_at_1((channel,))
    print(f"{label:<22}{h:>8.3f}{full - h:>+8.3f}")

# The topology drop dominates: count features collide across entities, so
# without the propagated anchor signal the model cannot separate them.
# The highway gate has an analogous switch: TrainConfig(highway=False)
# trains the hybrid variant with plain FC encoders instead.

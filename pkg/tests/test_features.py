"""Count-feature construction against a dictionary-counting oracle."""

import numpy as np
import pytest

from kgalign.features import ablate, build_features, parse_drop
from kgalign.synth import SynthConfig, generate


def oracle_counts(task, top_f):
    """Brute-force oracle: count with plain dicts, rank by (-freq, id)."""
    triples, tri_counts = task.all_relation_triples()
    freq = {}
    for (h, r, t), c in zip(triples, tri_counts):
        freq[int(r)] = freq.get(int(r), 0) + int(c)
    vocab = [r for r, _ in sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))[:top_f]]
    col = {r: i for i, r in enumerate(vocab)}
    rel = np.zeros((task.total_entities, max(len(vocab), 1)))
    for (h, r, t), c in zip(triples, tri_counts):
        if int(r) in col:
            rel[int(h), col[int(r)]] += int(c)
            rel[int(t), col[int(r)]] += int(c)

    pairs, attr_counts = task.all_attribute_pairs()
    afreq = {}
    for (e, a), c in zip(pairs, attr_counts):
        afreq[int(a)] = afreq.get(int(a), 0) + int(c)
    avocab = [a for a, _ in sorted(afreq.items(), key=lambda kv: (-kv[1], kv[0]))[:top_f]]
    acol = {a: i for i, a in enumerate(avocab)}
    attr = np.zeros((task.total_entities, max(len(avocab), 1)))
    for (e, a), c in zip(pairs, attr_counts):
        if int(a) in acol:
            attr[int(e), acol[int(a)]] += int(c)
    return rel, attr, col, acol


def make_task(seed=0, n=20):
    return generate(SynthConfig(n_entities=n, n_relations=5, n_attributes=6,
                                edge_density=0.15, seed=seed))


class TestBuildFeatures:
    def test_direct_count_example(self):
        task = make_task()
        feats = build_features(task, top_f=3)
        rel, _, vocab, _ = oracle_counts(task, 3)
        # spot-check one entity with known participation against the oracle row
        np.testing.assert_array_equal(feats.relation_feats.to_dense()[0], rel[0])

    def test_entity_without_triples_is_zero_row(self):
        task = make_task(seed=3)
        feats = build_features(task, top_f=10)
        dense = feats.relation_feats.to_dense()
        degrees = np.zeros(task.total_entities)
        triples, counts = task.all_relation_triples()
        for (h, r, t), c in zip(triples, counts):
            degrees[h] += c
            degrees[t] += c
        isolated = np.nonzero(degrees == 0)[0]
        if isolated.size:
            np.testing.assert_array_equal(dense[isolated], 0.0)

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_oracle(self, seed):
        task = make_task(seed=seed)
        top_f = int(np.random.default_rng(seed).integers(1, 8))
        feats = build_features(task, top_f=top_f)
        rel, attr, vocab, avocab = oracle_counts(task, top_f)
        np.testing.assert_array_equal(feats.relation_feats.to_dense(), rel)
        np.testing.assert_array_equal(feats.attribute_feats.to_dense(), attr)
        assert feats.vocab_relations == vocab
        assert feats.vocab_attributes == avocab

    def test_top_f_larger_than_distinct_keeps_all(self):
        task = make_task()
        feats = build_features(task, top_f=10_000)
        distinct = np.unique(task.all_relation_triples()[0][:, 1]).size
        assert feats.relation_feats.cols == distinct

    def test_column_sums_are_twice_triple_counts(self):
        for seed in range(10):
            task = make_task(seed=seed)
            feats = build_features(task, top_f=4)
            sums = feats.relation_feats.to_dense().sum(axis=0)
            triples, counts = task.all_relation_triples()
            inv = {col: rid for rid, col in feats.vocab_relations.items()}
            for col in range(feats.relation_feats.cols):
                restricted = sum(int(c) for (h, r, t), c in zip(triples, counts)
                                 if int(r) == inv[col])
                assert sums[col] == 2 * restricted

    def test_vocabulary_deterministic(self):
        task = make_task(seed=5)
        a = build_features(task, top_f=4)
        b = build_features(task, top_f=4)
        assert a.vocab_relations == b.vocab_relations
        np.testing.assert_array_equal(a.relation_feats.values, b.relation_feats.values)


class TestAblate:
    def test_drop_relation_channel(self):
        feats = build_features(make_task(), top_f=5)
        out = ablate(feats, {"re"})
        assert out.relation_feats is None
        assert out.attribute_feats is not None
        assert out.include_topology
        assert out.active_channels() == ("te", "ae")

    def test_drop_nothing(self):
        feats = build_features(make_task(), top_f=5)
        out = ablate(feats, set())
        assert out.active_channels() == ("te", "re", "ae")

    def test_drop_everything_rejected(self):
        feats = build_features(make_task(), top_f=5)
        with pytest.raises(ValueError):
            ablate(feats, {"te", "re", "ae"})

    def test_unknown_channel_rejected(self):
        feats = build_features(make_task(), top_f=5)
        with pytest.raises(ValueError):
            ablate(feats, {"xx"})

    def test_parse_drop(self):
        assert parse_drop("none") == frozenset()
        assert parse_drop("") == frozenset()
        assert parse_drop("te,re") == frozenset({"te", "re"})

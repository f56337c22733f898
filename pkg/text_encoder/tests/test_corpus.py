"""TSV parsing and writing contracts."""

import pytest

from text_encoder.corpus import (
    load_descriptions,
    load_ills,
    load_pool,
    save_descriptions,
    save_embeddings,
    save_scores,
)


class TestDescriptions:
    def test_round_trip(self, tmp_path):
        texts = {0: "a public research university", 5: "une ville de France"}
        path = tmp_path / "d.tsv"
        save_descriptions(path, texts)
        corpus = load_descriptions(path)
        assert corpus.texts == texts

    def test_text_may_contain_spaces_not_tabs(self, tmp_path):
        path = tmp_path / "d.tsv"
        path.write_text("3\tone two three\n", encoding="utf-8")
        assert load_descriptions(path).get(3) == "one two three"

    def test_duplicate_id_rejected(self, tmp_path):
        path = tmp_path / "d.tsv"
        path.write_text("1\ta\n1\tb\n")
        with pytest.raises(ValueError, match="duplicate"):
            load_descriptions(path)

    def test_empty_rejected(self, tmp_path):
        path = tmp_path / "d.tsv"
        path.write_text("")
        with pytest.raises(ValueError):
            load_descriptions(path)


class TestOtherFormats:
    def test_ills(self, tmp_path):
        path = tmp_path / "ills.tsv"
        path.write_text("0\t100\n1\t101\n")
        assert load_ills(path) == [(0, 100), (1, 101)]

    def test_pool(self, tmp_path):
        path = tmp_path / "pool.tsv"
        path.write_text("0\t100,101,102\n1\t103,104\n")
        assert load_pool(path) == [(0, [100, 101, 102]), (1, [103, 104])]

    def test_embeddings_header(self, tmp_path):
        path = tmp_path / "e.tsv"
        save_embeddings(path, 3, {7: [0.1, 0.2, 0.3]})
        lines = path.read_text().splitlines()
        assert lines[0] == "#dim 3"
        assert lines[1].startswith("7\t")

    def test_embeddings_wrong_width_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            save_embeddings(tmp_path / "e.tsv", 3, {0: [1.0]})

    def test_scores(self, tmp_path):
        path = tmp_path / "s.tsv"
        save_scores(path, [(0, 100, 0.5)])
        assert path.read_text() == "0\t100\t0.5\n"

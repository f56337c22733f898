"""End-to-end CLI pipeline: synth -> load -> features -> train -> eval ->
candidates -> export/fuse/rerank, plus determinism and error contracts."""

import json

import numpy as np
import pytest

from kgalign.cli import main


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """One small seeded pipeline shared by the read-only checks."""
    root = tmp_path_factory.mktemp("pipe")
    synth_dir = root / "data"
    task = root / "task.bin"
    feats = root / "feats.bin"
    ckpt = root / "m.bin"
    assert run("synth", "--n", 60, "--density", 0.06, "--noise", 0.05,
               "--seed", 7, "--out-dir", synth_dir) == 0
    assert run("load", "--data", synth_dir, "--split", 0.3, "--seed", 7,
               "--out", task) == 0
    assert run("features", "--task", task, "--top-f", 1000, "--out", feats) == 0
    assert run("train", "--task", task, "--feats", feats, "--model", "man",
               "--margin", 3, "--epochs", 120, "--lr", "1.0", "--neg-k", 5,
               "--seed", 7, "--drop", "none", "--ckpt-out", ckpt,
               "--loss-out", root / "loss.csv") == 0
    return root


class TestPipeline:
    def test_eval_writes_report(self, pipeline):
        report = pipeline / "report.json"
        assert run("eval", "--ckpt", pipeline / "m.bin", "--task", pipeline / "task.bin",
                   "--ks", "1,10,50", "--universe", "test", "--report", report) == 0
        data = json.loads(report.read_text())
        assert set(data["src_to_tgt"]["hits"]) == {"1", "10", "50"}
        assert "tgt_to_src" in data
        assert 0.0 <= data["src_to_tgt"]["hits"]["1"] <= 1.0
        assert (pipeline / "report.json.manifest.json").exists()

    def test_eval_repeat_byte_identical(self, pipeline):
        r1, r2 = pipeline / "r1.json", pipeline / "r2.json"
        for r in (r1, r2):
            assert run("eval", "--ckpt", pipeline / "m.bin", "--task",
                       pipeline / "task.bin", "--ks", "1,10", "--report", r) == 0
        assert r1.read_bytes() == r2.read_bytes()

    def test_loss_csv_format(self, pipeline):
        lines = (pipeline / "loss.csv").read_text().splitlines()
        assert lines[0] == "epoch,loss"
        assert len(lines) == 121
        epoch, loss = lines[1].split(",")
        assert epoch == "0" and float(loss) >= 0.0

    def test_candidates_and_rerank(self, pipeline):
        pool = pipeline / "pool.tsv"
        assert run("candidates", "--ckpt", pipeline / "m.bin", "--task",
                   pipeline / "task.bin", "--q", 10, "--out", pool) == 0
        lines = [l for l in pool.read_text().splitlines() if l]
        assert len(lines) > 0

        # perfect scores: indicator of the gold pair
        from kgalign.data import load_task_bin
        from kgalign.evaluator import load_pool
        from kgalign.fusion import save_scores
        task = load_task_bin(pipeline / "task.bin")
        gold = {int(s): int(t) for s, t in task.test_ills}
        p = load_pool(pool)
        entries = [(int(s), int(c), 1.0 if gold[int(s)] == int(c) else 0.0)
                   for s, row in zip(p.src_ids, p.candidates) for c in row]
        scores = pipeline / "scores.tsv"
        save_scores(scores, entries)
        report = pipeline / "rerank.json"
        assert run("rerank", "--task", pipeline / "task.bin", "--pool", pool,
                   "--scores", scores, "--ks", "1,10", "--report", report) == 0
        data = json.loads(report.read_text())
        assert data["src_to_tgt"]["hits"]["1"] > 0.0

    def test_export_and_fuse(self, pipeline):
        emb = pipeline / "emb.tsv"
        assert run("export-emb", "--ckpt", pipeline / "m.bin", "--task",
                   pipeline / "task.bin", "--out", emb) == 0
        assert emb.read_text().startswith("#dim ")

        # textual table: reuse the graph embedding as a stand-in signal
        report = pipeline / "fuse.json"
        assert run("fuse", "--task", pipeline / "task.bin", "--graph-emb", emb,
                   "--text-emb", emb, "--tau", 0.8, "--ks", "1,10",
                   "--report", report) == 0
        data = json.loads(report.read_text())
        assert data["tau"] == 0.8
        assert data["text_rows_missing"] == 0

    def test_manifest_contents(self, pipeline):
        manifest = json.loads((pipeline / "m.bin.manifest.json").read_text())
        assert manifest["tool"] == "kgalign"
        assert manifest["command"] == "train"
        assert manifest["seed"] == 7
        assert manifest["flags"]["model"] == "man"
        assert len(manifest["input_digests"]) == 2
        assert manifest["wall_time_s"] > 0


class TestDeterminism:
    def test_same_seed_byte_identical_outputs(self, tmp_path):
        outs = []
        for name in ("a", "b"):
            d = tmp_path / name
            d.mkdir()
            assert run("synth", "--n", 40, "--density", 0.08, "--noise", 0.02,
                       "--seed", 3, "--out-dir", d / "data") == 0
            assert run("load", "--data", d / "data", "--split", 0.3, "--seed", 3,
                       "--out", d / "task.bin") == 0
            assert run("features", "--task", d / "task.bin", "--out", d / "feats.bin") == 0
            assert run("train", "--task", d / "task.bin", "--feats", d / "feats.bin",
                       "--model", "hman", "--epochs", 40, "--seed", 3,
                       "--ckpt-out", d / "m.bin") == 0
            assert run("eval", "--ckpt", d / "m.bin", "--task", d / "task.bin",
                       "--report", d / "report.json") == 0
            assert run("candidates", "--ckpt", d / "m.bin", "--task", d / "task.bin",
                       "--q", 5, "--out", d / "pool.tsv") == 0
            outs.append(d)
        a, b = outs
        for name in ("task.bin", "feats.bin", "m.bin", "report.json", "pool.tsv"):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name


class TestErrors:
    def test_drop_all_channels_fails(self, tmp_path, capsys):
        d = tmp_path
        assert run("synth", "--n", 20, "--density", 0.2, "--seed", 1,
                   "--out-dir", d / "data") == 0
        assert run("load", "--data", d / "data", "--out", d / "task.bin") == 0
        assert run("features", "--task", d / "task.bin", "--out", d / "feats.bin") == 0
        code = run("train", "--task", d / "task.bin", "--feats", d / "feats.bin",
                   "--drop", "te,re,ae", "--epochs", 1, "--ckpt-out", d / "m.bin")
        assert code != 0
        err = capsys.readouterr().err
        assert err.startswith("kgalign: error:")
        assert err.count("\n") == 1  # single-line machine-parsable message

    def test_missing_file_single_line_error(self, tmp_path, capsys):
        code = run("features", "--task", tmp_path / "nope.bin", "--out", tmp_path / "f.bin")
        assert code != 0
        assert capsys.readouterr().err.startswith("kgalign: error:")

    def test_dump_config(self, tmp_path, capsys):
        run("synth", "--n", 20, "--density", 0.2, "--seed", 1,
            "--out-dir", tmp_path / "d", "--dump-config")
        first = capsys.readouterr().out.splitlines()[0]
        cfg = json.loads(first)
        assert cfg["n"] == 20 and cfg["seed"] == 1

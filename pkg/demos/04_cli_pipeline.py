#!/usr/bin/env python3
"""Walkthrough: the same pipeline through the kgalign command line.

Every stage exchanges data through files (binary caches, TSV tables,
JSON reports), and every artifact gets a sidecar manifest recording the
resolved flags and input digests.  Identical seeds reproduce identical
bytes.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

root = Path(tempfile.mkdtemp(prefix="kgalign-demo-"))
print(f"working in {root}\n")


def kgalign(*args):
    cmd = [sys.executable, "-m", "kgalign.cli"] + [str(a) for a in args]
    print("$ kgalign " + " ".join(str(a) for a in args))
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.stdout:
        print(proc.stdout, end="")
    if proc.returncode != 0:
        print(proc.stderr, end="")
        raise SystemExit(proc.returncode)
    print()


kgalign("synth", "--n", 120, "--density", 0.03, "--noise", 0.05,
        "--seed", 11, "--out-dir", root / "data")
kgalign("load", "--data", root / "data", "--split", 0.3, "--seed", 11,
        "--out", root / "task.bin")
kgalign("features", "--task", root / "task.bin", "--top-f", 1000,
        "--out", root / "feats.bin")
kgalign("train", "--task", root / "task.bin", "--feats", root / "feats.bin",
        "--model", "hman", "--margin", 3, "--epochs", 400, "--lr", 0.01,
        "--neg-k", 5, "--seed", 11, "--drop", "none",
        "--ckpt-out", root / "m.bin", "--loss-out", root / "loss.csv")
kgalign("eval", "--ckpt", root / "m.bin", "--task", root / "task.bin",
        "--ks", "1,10,50", "--universe", "test", "--report", root / "report.json")
kgalign("candidates", "--ckpt", root / "m.bin", "--task", root / "task.bin",
        "--q", 20, "--out", root / "pool.tsv")
kgalign("export-emb", "--ckpt", root / "m.bin", "--task", root / "task.bin",
        "--out", root / "emb.tsv")

report = json.loads((root / "report.json").read_text())
print("report.json src->tgt hits:", report["src_to_tgt"]["hits"])

manifest = json.loads((root / "m.bin.manifest.json").read_text())
print("checkpoint manifest keys:", sorted(manifest))
print("\nartifacts:")
for p in sorted(root.iterdir()):
    print(f"  {p.name}")

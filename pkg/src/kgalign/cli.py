"""kgalign command line: load, features, synth, train, eval, candidates,
fuse, rerank, export-emb.

Every artifact-producing command writes a ``<output>.manifest.json`` next
to its primary output recording the resolved flags, seeds, input digests,
tool version and wall time.  All randomness is controlled by ``--seed``;
repeated runs with the same flags produce byte-identical primary outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS")


def _apply_thread_cap() -> None:
    """Honor KGALIGN_THREADS; must run before numpy is first imported."""
    cap = os.environ.get("KGALIGN_THREADS")
    if not cap:
        return
    for var in _THREAD_VARS:
        os.environ.setdefault(var, cap)


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _digest_dir(path: str) -> dict:
    digests = {}
    for name in sorted(os.listdir(path)):
        full = os.path.join(path, name)
        if os.path.isfile(full):
            digests[name] = _sha256(full)
    return digests


def _effective_config(args: argparse.Namespace) -> dict:
    skip = {"func", "dump_config"}
    return {k: (sorted(v) if isinstance(v, (set, frozenset)) else v)
            for k, v in sorted(vars(args).items()) if k not in skip}


def _start(args: argparse.Namespace) -> float:
    if getattr(args, "dump_config", False):
        print(json.dumps(_effective_config(args), sort_keys=True))
    return time.perf_counter()


def _write_manifest(out_path: str, args: argparse.Namespace, inputs: dict, t0: float) -> None:
    from . import __version__
    manifest = {
        "tool": "kgalign",
        "version": __version__,
        "command": args.command,
        "flags": _effective_config(args),
        "seed": getattr(args, "seed", None),
        "input_digests": inputs,
        "wall_time_s": round(time.perf_counter() - t0, 6),
    }
    with open(out_path + ".manifest.json", "w", encoding="utf-8") as f:
        json.dump(manifest, f, sort_keys=True, indent=2)
        f.write("\n")


def _parse_ks(text: str):
    ks = tuple(int(p) for p in text.split(",") if p.strip())
    if not ks or any(k < 1 for k in ks):
        raise ValueError(f"invalid --ks value {text!r}")
    return ks


def _parse_dims(text: str):
    dims = tuple(int(p) for p in text.split(","))
    if len(dims) != 3 or any(d < 1 for d in dims):
        raise ValueError(f"--dims expects three positive integers, got {text!r}")
    return dims


def _cmd_load(args) -> int:
    from .data import load_task, save_task
    t0 = _start(args)
    task = load_task(args.data, split_fraction=args.split, seed=args.seed)
    save_task(task, args.out)
    _write_manifest(args.out, args, _digest_dir(args.data), t0)
    print(f"loaded {task.source.entity_count} + {task.target.entity_count} entities, "
          f"{len(task.train_ills)} train / {len(task.test_ills)} test ILLs -> {args.out}")
    return 0


def _cmd_features(args) -> int:
    from .data import load_task_bin
    from .features import build_features, save_features
    t0 = _start(args)
    task = load_task_bin(args.task)
    feats = build_features(task, top_f=args.top_f)
    save_features(feats, args.out)
    _write_manifest(args.out, args, {os.path.basename(args.task): _sha256(args.task)}, t0)
    print(f"features: {feats.relation_feats.cols} relation cols, "
          f"{feats.attribute_feats.cols} attribute cols -> {args.out}")
    return 0


def _cmd_synth(args) -> int:
    from .data import export_task_dir
    from .synth import SynthConfig, generate
    t0 = _start(args)
    config = SynthConfig(
        n_entities=args.n, n_relations=args.relations, n_attributes=args.attributes,
        edge_density=args.density,
        structural_noise=args.structural_noise if args.structural_noise is not None else args.noise,
        feature_noise=args.feature_noise if args.feature_noise is not None else args.noise,
        ill_fraction=args.ill_fraction, seed=args.seed)
    task = generate(config)
    export_task_dir(task, args.out_dir)
    marker = os.path.join(args.out_dir, "ill_ent_ids")
    _write_manifest(marker, args, {}, t0)
    print(f"synthetic task with {args.n} + {args.n} entities written to {args.out_dir}")
    return 0


def _cmd_train(args) -> int:
    import numpy as np

    from .data import load_task_bin
    from .features import load_features, parse_drop
    from .models import save_checkpoint
    from .trainer import TrainConfig, train
    t0 = _start(args)
    task = load_task_bin(args.task)
    feats = load_features(args.feats)
    config = TrainConfig(
        variant=args.model, margin=args.margin, epochs=args.epochs,
        learning_rate=args.lr, neg_k=args.neg_k, resample_interval=args.resample_interval,
        seed=args.seed, drop=parse_drop(args.drop), highway=not args.no_highway,
        dims=args.dims, layers=args.layers)
    result = train(task, feats, config)
    save_checkpoint(result.params, args.ckpt_out, extra_meta={
        "task_digest": _sha256(args.task), "epochs": config.resolved_epochs(),
        "learning_rate": config.resolved_learning_rate(), "margin": args.margin})
    inputs = {os.path.basename(args.task): _sha256(args.task),
              os.path.basename(args.feats): _sha256(args.feats)}
    _write_manifest(args.ckpt_out, args, inputs, t0)
    if args.loss_out:
        from ._binio import atomic_write
        with atomic_write(args.loss_out) as f:
            lines = ["epoch,loss\n"]
            lines += [f"{e},{repr(v)}\n" for e, v in enumerate(result.loss_curve)]
            f.write("".join(lines).encode("utf-8"))
        _write_manifest(args.loss_out, args, inputs, t0)
    final = result.loss_curve[-1] if result.loss_curve else float("nan")
    print(f"trained {args.model} for {config.resolved_epochs()} epochs "
          f"(final loss {final:.4f}, {result.wall_time_s:.1f}s) -> {args.ckpt_out}")
    return 0


def _embed_from_checkpoint(ckpt_path: str, task_path: str):
    from .data import load_task_bin
    from .features import ablate, build_features
    from .models import forward, load_checkpoint
    from .trainer import build_adjacency
    task = load_task_bin(task_path)
    params, meta = load_checkpoint(ckpt_path)
    if params.n_entities != task.total_entities:
        raise ValueError(
            f"checkpoint covers {params.n_entities} entities but the task has "
            f"{task.total_entities}")
    feats = ablate(build_features(task, top_f=params.top_f), frozenset(meta["drop"]))
    emb, _ = forward(params, build_adjacency(task), feats)
    return task, emb


def _report(task, emb, ks, universe) -> dict:
    from .evaluator import SRC_TO_TGT, TGT_TO_SRC, rank_all
    report = {"universe": universe, "ks": list(ks)}
    for direction in (SRC_TO_TGT, TGT_TO_SRC):
        report[direction] = rank_all(emb, task, direction, ks=ks, universe=universe).as_report()
    return report


def _write_report(report: dict, path: str) -> None:
    from ._binio import atomic_write
    with atomic_write(path) as f:
        f.write((json.dumps(report, sort_keys=True, indent=2) + "\n").encode("utf-8"))


def _cmd_eval(args) -> int:
    t0 = _start(args)
    task, emb = _embed_from_checkpoint(args.ckpt, args.task)
    report = _report(task, emb, _parse_ks(args.ks), args.universe)
    _write_report(report, args.report)
    inputs = {os.path.basename(p): _sha256(p) for p in (args.ckpt, args.task)}
    _write_manifest(args.report, args, inputs, t0)
    hits = report["src_to_tgt"]["hits"]
    print("src->tgt " + " ".join(f"hits@{k}={hits[str(k)]:.4f}" for k in _parse_ks(args.ks)))
    return 0


def _cmd_candidates(args) -> int:
    from .evaluator import save_pool, top_q_candidates
    t0 = _start(args)
    task, emb = _embed_from_checkpoint(args.ckpt, args.task)
    pool = top_q_candidates(emb, task, q=args.q, universe=args.universe)
    save_pool(pool, args.out)
    inputs = {os.path.basename(p): _sha256(p) for p in (args.ckpt, args.task)}
    _write_manifest(args.out, args, inputs, t0)
    print(f"{pool.src_ids.size} pools of width {pool.candidates.shape[1]} -> {args.out}")
    return 0


def _cmd_export_emb(args) -> int:
    from .fusion import save_text_embeddings
    t0 = _start(args)
    task, emb = _embed_from_checkpoint(args.ckpt, args.task)
    save_text_embeddings(args.out, emb.shape[1], {i: emb[i] for i in range(emb.shape[0])})
    inputs = {os.path.basename(p): _sha256(p) for p in (args.ckpt, args.task)}
    _write_manifest(args.out, args, inputs, t0)
    print(f"{emb.shape[0]} x {emb.shape[1]} embedding table -> {args.out}")
    return 0


def _load_emb_matrix(path: str, total: int):
    import numpy as np

    from .fusion import load_text_embeddings
    table = load_text_embeddings(path, total_entities=total)
    mat = np.zeros((total, table.dim))
    for eid, vec in table.rows.items():
        mat[eid] = vec
    return mat


def _cmd_fuse(args) -> int:
    from .data import load_task_bin
    from .fusion import load_text_embeddings, weighted_concat
    t0 = _start(args)
    task = load_task_bin(args.task)
    graph_emb = _load_emb_matrix(args.graph_emb, task.total_entities)
    text = load_text_embeddings(args.text_emb, total_entities=task.total_entities)
    fused, missing = weighted_concat(graph_emb, text, args.tau)
    report = _report(task, fused, _parse_ks(args.ks), args.universe)
    report["tau"] = args.tau
    report["text_rows_missing"] = missing
    _write_report(report, args.report)
    inputs = {os.path.basename(p): _sha256(p)
              for p in (args.task, args.graph_emb, args.text_emb)}
    _write_manifest(args.report, args, inputs, t0)
    hits = report["src_to_tgt"]["hits"]
    print("fused src->tgt " + " ".join(f"hits@{k}={hits[str(k)]:.4f}" for k in _parse_ks(args.ks)))
    return 0


def _cmd_rerank(args) -> int:
    from .data import load_task_bin
    from .evaluator import load_pool, rerank_pool
    from .fusion import load_scores
    t0 = _start(args)
    task = load_task_bin(args.task)
    pool = load_pool(args.pool, q=args.q)
    scores = load_scores(args.scores)
    ks = _parse_ks(args.ks)
    result = rerank_pool(pool, scores, task, ks=ks)
    report = {"universe": "pool", "ks": list(ks), "src_to_tgt": result.as_report()}
    _write_report(report, args.report)
    inputs = {os.path.basename(p): _sha256(p) for p in (args.task, args.pool, args.scores)}
    _write_manifest(args.report, args, inputs, t0)
    print("reranked src->tgt " + " ".join(f"hits@{k}={result.hits[k]:.4f}" for k in ks))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kgalign",
        description="Cross-lingual KG entity alignment: graph embeddings, "
                    "evaluation and fusion with textual signals.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--dump-config", action="store_true",
                       help="print the resolved flag values as JSON before running")
        return p

    p = add("load", _cmd_load, "ingest a task directory into a binary task cache")
    p.add_argument("--data", required=True, help="directory with the tab-separated input files")
    p.add_argument("--split", type=float, default=0.3, help="train fraction of the ILLs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output task cache path")

    p = add("features", _cmd_features, "build relation/attribute count features")
    p.add_argument("--task", required=True)
    p.add_argument("--top-f", type=int, default=1000, dest="top_f")
    p.add_argument("--out", required=True)

    p = add("synth", _cmd_synth, "generate a synthetic task directory")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--relations", type=int, default=8)
    p.add_argument("--attributes", type=int, default=12)
    p.add_argument("--density", type=float, default=0.02)
    p.add_argument("--noise", type=float, default=0.0,
                   help="sets both noise kinds unless overridden")
    p.add_argument("--structural-noise", type=float, default=None)
    p.add_argument("--feature-noise", type=float, default=None)
    p.add_argument("--ill-fraction", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)

    p = add("train", _cmd_train, "train MAN or HMAN with the margin ranking loss")
    p.add_argument("--task", required=True)
    p.add_argument("--feats", required=True)
    p.add_argument("--model", choices=("man", "hman"), default="man")
    p.add_argument("--margin", type=float, default=3.0)
    p.add_argument("--epochs", type=int, default=None,
                   help="default: 2000 for man, 50000 for hman")
    p.add_argument("--lr", type=float, default=None,
                   help="default: 1.0 for man, 0.01 for hman")
    p.add_argument("--neg-k", type=int, default=5, dest="neg_k")
    p.add_argument("--resample-interval", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--drop", default="none",
                   help="comma list of feature channels to ablate: te,re,ae")
    p.add_argument("--no-highway", action="store_true",
                   help="replace highway encoders with plain FC layers (hman)")
    p.add_argument("--dims", type=_parse_dims, default=(200, 100, 100),
                   help="topology,relation,attribute embedding widths")
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--ckpt-out", required=True)
    p.add_argument("--loss-out", default=None, help="optional epoch,loss CSV")

    p = add("eval", _cmd_eval, "rank test ILLs in both directions")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--task", required=True)
    p.add_argument("--ks", default="1,10,50")
    p.add_argument("--universe", choices=("test", "all"), default="test")
    p.add_argument("--report", required=True)

    p = add("candidates", _cmd_candidates, "export top-q candidate pools")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--task", required=True)
    p.add_argument("--q", type=int, default=200)
    p.add_argument("--universe", choices=("test", "all"), default="test")
    p.add_argument("--out", required=True)

    p = add("export-emb", _cmd_export_emb, "write the embedding table as TSV")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--task", required=True)
    p.add_argument("--out", required=True)

    p = add("fuse", _cmd_fuse, "weighted concatenation of graph and text embeddings")
    p.add_argument("--task", required=True)
    p.add_argument("--graph-emb", required=True, dest="graph_emb")
    p.add_argument("--text-emb", required=True, dest="text_emb")
    p.add_argument("--tau", type=float, default=0.8)
    p.add_argument("--ks", default="1,10,50")
    p.add_argument("--universe", choices=("test", "all"), default="test")
    p.add_argument("--report", required=True)

    p = add("rerank", _cmd_rerank, "rerank candidate pools with external scores")
    p.add_argument("--task", required=True)
    p.add_argument("--pool", required=True)
    p.add_argument("--scores", required=True)
    p.add_argument("--q", type=int, default=None,
                   help="sentinel rank denominator; default: pool width")
    p.add_argument("--ks", default="1,10,50")
    p.add_argument("--report", required=True)

    return parser


def main(argv=None) -> int:
    _apply_thread_cap()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"kgalign: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

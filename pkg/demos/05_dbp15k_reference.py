#!/usr/bin/env python3
"""Optional long-running reference run on a real DBP15K-style directory.

Not part of the test gate: full training takes hours on CPU and needs the
dataset on disk (seven tab-separated files: ent_ids_1/2, triples_1/2,
attrs_1/2, ill_ent_ids).

Reference targets for the ZH->EN subset with the hybrid variant at the
standard settings (two layers, F=1000, dims 200/100/100, margin 3,
50000 epochs): Hits@1/10/50 around 56.2 / 85.1 / 93.4, give or take
about 2 points of Hits@1.  Two caveats when comparing numbers:

  * the candidate universe matters: ``--universe test`` ranks against the
    test-side gold entities only (the convention used here), while
    ``--universe all`` ranks against every counterpart entity and yields
    lower absolute numbers;
  * the fusion route additionally pre-normalizes each embedding source,
    which changes absolute distances (not the tau=0/1 rankings).

Usage:
    python demos/05_dbp15k_reference.py --data /path/to/zh_en \\
        [--model hman] [--epochs 50000] [--smoke]
"""

import argparse
import sys
import time

from kgalign.data import load_task
from kgalign.evaluator import SRC_TO_TGT, TGT_TO_SRC, rank_all
from kgalign.features import build_features
from kgalign.models import forward
from kgalign.trainer import TrainConfig, build_adjacency, train


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data", required=True, help="task directory (e.g. zh_en)")
    parser.add_argument("--model", choices=("man", "hman"), default="hman")
    parser.add_argument("--epochs", type=int, default=None,
                        help="default: 2000 for man, 50000 for hman")
    parser.add_argument("--lr", type=float, default=None)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--universe", choices=("test", "all"), default="test")
    parser.add_argument("--smoke", action="store_true",
                        help="200 epochs only, to validate the plumbing")
    args = parser.parse_args()

    t0 = time.perf_counter()
    task = load_task(args.data, split_fraction=0.3, seed=args.seed)
    print(f"loaded {task.source.entity_count} + {task.target.entity_count} entities, "
          f"{len(task.train_ills)} train / {len(task.test_ills)} test ILLs "
          f"({time.perf_counter() - t0:.0f}s)")

    feats = build_features(task, top_f=1000)
    print(f"features: {feats.relation_feats.cols} relation cols, "
          f"{feats.attribute_feats.cols} attribute cols")

    config = TrainConfig(variant=args.model, epochs=200 if args.smoke else args.epochs,
                         learning_rate=args.lr, seed=args.seed, dims=(200, 100, 100))
    print(f"training {args.model} for {config.resolved_epochs()} epochs "
          f"(lr {config.resolved_learning_rate()}) ...")
    result = train(task, feats, config)
    print(f"final loss {result.loss_curve[-1]:.2f} after {result.wall_time_s / 60:.1f} min")

    emb, _ = forward(result.params, build_adjacency(task), feats)
    for direction in (SRC_TO_TGT, TGT_TO_SRC):
        r = rank_all(emb, task, direction, ks=(1, 10, 50), universe=args.universe)
        hits = " ".join(f"@{k}={100 * v:.1f}" for k, v in sorted(r.hits.items()))
        print(f"{direction} ({args.universe} universe): {hits}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

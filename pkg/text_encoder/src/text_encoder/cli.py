"""text-encoder command line: pairwise embeddings and pointwise scores.

Both commands fine-tune on the provided gold pairs first; outputs use the
TSV formats the alignment engine's fuse/rerank commands parse directly.
"""

from __future__ import annotations

import argparse
import sys


def _encoder_config(args, mode):
    from .model import EncoderConfig
    # the exchange contract fixes the textual embedding width at 300
    return EncoderConfig(
        mode=mode, output_dim=300, margin=args.margin, max_len=args.max_len,
        seed=args.seed, learning_rate=args.lr, epochs=args.epochs, neg_k=args.neg_k)


def _cmd_pairwise(args) -> int:
    from .corpus import load_descriptions, load_ills, save_embeddings
    from .pairwise import encode_pairwise
    src = load_descriptions(args.desc_src)
    tgt = load_descriptions(args.desc_tgt)
    ills = load_ills(args.ills)
    config = _encoder_config(args, "pairwise")
    rows, losses = encode_pairwise(src, tgt, ills, config)
    save_embeddings(args.out, config.output_dim, rows)
    print(f"embedded {len(rows)} entities (dim {config.output_dim}), "
          f"loss {losses[0]:.3f} -> {losses[-1]:.3f} -> {args.out}")
    return 0


def _cmd_pointwise(args) -> int:
    from .corpus import load_descriptions, load_ills, load_pool, save_scores
    from .pointwise import score_pointwise
    src = load_descriptions(args.desc_src)
    tgt = load_descriptions(args.desc_tgt)
    ills = load_ills(args.ills)
    pool = load_pool(args.pool)
    config = _encoder_config(args, "pointwise")
    entries, skipped = score_pointwise(src, tgt, ills, pool, config)
    save_scores(args.out, entries)
    if skipped:
        print(f"warning: {skipped} pool pairs had missing descriptions, scored 0.0",
              file=sys.stderr)
    print(f"scored {len(entries)} pool pairs -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="text-encoder",
        description="Entity-description encoders: pairwise textual embeddings "
                    "and pointwise pair scores for reranking.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--desc-src", required=True, dest="desc_src",
                       help="source-language descriptions TSV: <entity_id>\\t<text>")
        p.add_argument("--desc-tgt", required=True, dest="desc_tgt")
        p.add_argument("--ills", required=True, help="gold training pairs TSV")
        p.add_argument("--out", required=True)
        p.add_argument("--margin", type=float, default=1.0)
        p.add_argument("--max-len", type=int, default=48, dest="max_len")
        p.add_argument("--epochs", type=int, default=100)
        p.add_argument("--lr", type=float, default=1e-3)
        p.add_argument("--neg-k", type=int, default=2, dest="neg_k")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("pairwise", help="emit textual entity embeddings")
    p.set_defaults(func=_cmd_pairwise)
    common(p)

    p = sub.add_parser("pointwise", help="score candidate-pool pairs")
    p.set_defaults(func=_cmd_pointwise)
    common(p)
    p.add_argument("--pool", required=True, help="candidate pool TSV from kgalign")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"text-encoder: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

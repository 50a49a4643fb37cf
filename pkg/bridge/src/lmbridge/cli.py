"""lmbridge command line: pretrain the tiny models, then serve the wire
protocol over stdio or TCP.

    python -m lmbridge train --corpus train.jsonl --objective causal --out causal.pt
    python -m lmbridge serve --causal causal.pt [--masked masked.pt] [--tcp PORT]
"""

from __future__ import annotations

import argparse
import sys

import torch

from .model import load_checkpoint, save_checkpoint
from .scorer import BridgeScorer
from .server import serve_stdio, serve_tcp
from .train import train_model


def cmd_train(args) -> int:
    model, vocab = train_model(
        args.corpus, objective=args.objective, steps=args.steps,
        batch_size=args.batch_size, segment_length=args.segment_length,
        lr=args.lr, seed=args.seed, d_model=args.d_model,
        n_layers=args.layers, log_every=args.log_every,
    )
    save_checkpoint(args.out, model, vocab)
    print(f"wrote {args.out} (vocab {len(vocab)}, "
          f"{sum(p.numel() for p in model.parameters())} parameters)", file=sys.stderr)
    return 0


def cmd_serve(args) -> int:
    torch.set_num_threads(args.threads)
    causal = load_checkpoint(args.causal) if args.causal else None
    masked = load_checkpoint(args.masked) if args.masked else None
    try:
        scorer = BridgeScorer(causal=causal, masked=masked)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.tcp:
        serve_tcp(scorer, args.tcp)
    else:
        serve_stdio(scorer)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lmbridge")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="pretrain a tiny LM on original-order text")
    p.add_argument("--corpus", required=True, help="JSONL corpus (sentences or text field)")
    p.add_argument("--out", required=True, help="checkpoint path (.pt)")
    p.add_argument("--objective", choices=["causal", "masked"], default="causal")
    p.add_argument("--steps", type=int, default=600)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--segment-length", type=int, default=128)
    p.add_argument("--lr", type=float, default=3e-4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--d-model", type=int, default=128)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--log-every", type=int, default=100)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("serve", help="answer wire-protocol requests")
    p.add_argument("--causal", help="causal checkpoint for generative mode")
    p.add_argument("--masked", help="masked checkpoint for mlm mode")
    p.add_argument("--tcp", type=int, default=0, help="serve one TCP connection on this port")
    p.add_argument("--threads", type=int, default=1, help="torch CPU threads")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)

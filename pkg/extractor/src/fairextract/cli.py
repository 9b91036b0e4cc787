"""CLI wrapper: extract --root DIR --encoder ID --out FILE [--batch N].

Exit codes follow the main toolkit: 0 success, 1 domain errors (bad layout,
encoder failures), 2 usage and I/O errors.
"""

from __future__ import annotations

import argparse
import sys

from .encoders import EncoderNotAvailableError
from .extract import LayoutError, extract_embeddings


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairadapter-extract", description=__doc__)
    parser.add_argument("--root", required=True, help="folder tree <category>/<real|fake>/<images>")
    parser.add_argument("--encoder", default="pixel-proj",
                        help="encoder id: pixel-proj[:dim] or clip:<hf-model-id>")
    parser.add_argument("--out", required=True, help="embedding file to write")
    parser.add_argument("--batch", type=int, default=32)
    return parser


def run_cli(argv: list[str]) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        summary = extract_embeddings(args.root, args.encoder, args.out, args.batch)
    except EncoderNotAvailableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NotADirectoryError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (LayoutError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {summary.records_written} records "
          f"({len(summary.categories)} categories, dim {summary.dim}) to {args.out}; "
          f"skipped {len(summary.skipped)}", file=sys.stderr)
    return 0


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))

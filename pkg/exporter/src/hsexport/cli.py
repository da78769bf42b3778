"""Command line entry point for the hidden-state exporter."""

from __future__ import annotations

import argparse
import sys

from .export import ExportError, ExportSpec, export_hidden_states


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="hsexport",
        description="Run a transformer over texts and dump hidden states.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("export", help="export hidden states for a text file")
    p.add_argument("--model", required=True, help="model id or local path")
    p.add_argument(
        "--layer", default="last",
        help="hidden-state layer index, or 'last' (default: last)",
    )
    p.add_argument(
        "--input", required=True,
        help="line-delimited text file, one sequence per line",
    )
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument(
        "--dtype", default="float32", choices=["float32", "float64"],
        help="on-disk precision (default: float32)",
    )
    args = parser.parse_args(argv)

    layer: int | str = args.layer
    if layer != "last":
        try:
            layer = int(layer)
        except ValueError:
            print(f"error: --layer must be an integer or 'last', got {layer!r}",
                  file=sys.stderr)
            return 1
    try:
        spec = ExportSpec(
            model_id=args.model,
            layer=layer,
            texts=args.input,
            out_dir=args.out,
            dtype=args.dtype,
        )
        manifest = export_hidden_states(spec)
    except (ExportError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(manifest)
    return 0


if __name__ == "__main__":
    sys.exit(main())

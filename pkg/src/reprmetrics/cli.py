"""Command-line entry point.

Subcommands: compute (single-model metric bundles), compare (two-model
composite report), sweep (composite over a weight grid), bench (exact
vs randomized timing table), verify (oracle agreement battery).

Option values resolve in precedence order: command-line flag, then
config file (flat key=value lines), then environment (threads only),
then built-in default. Exit codes: 0 success, 1 error, 2 success with
some sequences skipped under the drop policy.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import bench as bench_mod
from . import jsonout, selfcheck
from .compare import (
    REPORT_SCHEMA_VERSION,
    Weights,
    _config_dict,
    collect_bundles,
    collect_pairs,
    compare_corpus,
    report_to_json,
    weight_sweep,
)
from .errors import FileUnreadableError, ReprMetricsError
from .matrix_io import DatasetManifest, ManifestEntry, load_manifest
from .metrics import BundleConfig

DEFAULTS = {
    "weights": "0.5,0.5",
    "delta-kind": "erank",
    "k": "full",
    "backend": "exact",
    "base": "nats",
    "skip-policy": "drop",
    "seed": "42",
    "threads": "1",
    "normalize-terms": "on",
    "skip-centering": "off",
}

_DELTA_KINDS = {"entropy": "entropy", "erank": "effective_rank"}


class _CliError(Exception):
    """Bad command-line or config-file input; reported and exits 1."""


class _Parser(argparse.ArgumentParser):
    # Argparse exits 2 on usage errors by default; 2 means "partial
    # skips" here, so route usage problems through exit code 1.
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"error: {message}\n")


@dataclass(frozen=True)
class Settings:
    weights: Weights
    config: BundleConfig
    skip_policy: str
    threads: int


def _common_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("shared options")
    g.add_argument("--weights", metavar="WE,WM",
                   help="composite weights as two comma-separated numbers "
                        "(default: 0.5,0.5)")
    g.add_argument("--delta-kind", choices=sorted(_DELTA_KINDS),
                   help="which entropy-family delta feeds the composite "
                        "(default: erank)")
    g.add_argument("--k", metavar="full|INT",
                   help="retained spectrum size (default: full)")
    g.add_argument("--backend", choices=["exact", "randomized"],
                   help="spectrum backend for truncated k (default: exact)")
    g.add_argument("--base", choices=["nats", "bits"],
                   help="entropy unit (default: nats)")
    g.add_argument("--skip-policy", choices=["drop", "strict"],
                   help="handling of degenerate sequences (default: drop)")
    g.add_argument("--seed", metavar="INT",
                   help="seed for the randomized backend (default: 42)")
    g.add_argument("--threads", metavar="INT",
                   help="worker threads across sequences; the report does "
                        "not depend on it (default: 1, or REPRMETRICS_THREADS)")
    g.add_argument("--normalize-terms", choices=["on", "off"],
                   help="divide each composite term by its scale cap "
                        "(default: on)")
    g.add_argument("--skip-centering", choices=["on", "off"],
                   help="row-scale only, without mean-centering; for "
                        "controlled fixtures (default: off)")
    g.add_argument("--output", metavar="PATH",
                   help="write the JSON report here instead of stdout "
                        "(default: stdout)")
    g.add_argument("--config", metavar="PATH",
                   help="flat key=value config file, overridden by flags "
                        "(default: none)")


def build_parser() -> _Parser:
    parser = _Parser(prog="reprmetrics",
                     description="Spectral representation metrics over "
                                 "hidden-state matrices.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="metric bundles for one model",
                       description="Compute per-sequence metric bundles for "
                                   "one manifest or one array file.")
    p.add_argument("input", help="manifest file, or a single .npy/.csv array")
    _common_options(p)

    p = sub.add_parser("compare", help="composite report for two models",
                       description="Compare two models over paired manifests.")
    p.add_argument("manifest_a", help="manifest for model A")
    p.add_argument("manifest_b", help="manifest for model B")
    _common_options(p)

    p = sub.add_parser("sweep", help="composite across a weight grid",
                       description="Evaluate the aggregate composite for "
                                   "several weightings at once.")
    p.add_argument("manifest_a", help="manifest for model A")
    p.add_argument("manifest_b", help="manifest for model B")
    p.add_argument("--grid", metavar="WE,WM;WE,WM;...",
                   default="1,0;0.75,0.25;0.5,0.5;0.25,0.75;0,1",
                   help="semicolon-separated weight pairs "
                        "(default: 1,0;0.75,0.25;0.5,0.5;0.25,0.75;0,1)")
    _common_options(p)

    p = sub.add_parser("bench", help="exact vs randomized timing table",
                       description="Time both spectrum backends on synthetic "
                                   "matrices.")
    p.add_argument("--sizes", metavar="N,N,...",
                   default="256,512,1024,2048",
                   help="square matrix sizes (default: 256,512,1024,2048)")
    _common_options(p)

    p = sub.add_parser("verify", help="oracle agreement battery",
                       description="Check the fast spectral paths against "
                                   "the slow reference implementations.")
    _common_options(p)
    return parser


def _read_config_file(path: str) -> dict[str, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FileUnreadableError(f"{path}: {exc}") from None
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise _CliError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key = key.strip()
        if key not in DEFAULTS:
            raise _CliError(f"{path}:{lineno}: unknown config key {key!r}")
        out[key] = value.strip()
    return out


def _parse_int(raw: str, name: str, minimum: int) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise _CliError(f"{name} must be an integer, got {raw!r}") from None
    if value < minimum:
        raise _CliError(f"{name} must be at least {minimum}, got {value}")
    return value


def _parse_pair(raw: str, name: str) -> tuple[float, float]:
    parts = raw.split(",")
    if len(parts) != 2:
        raise _CliError(f"{name} must be two comma-separated numbers, got {raw!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise _CliError(f"{name} must be two numbers, got {raw!r}") from None


def resolve_settings(args: argparse.Namespace) -> Settings:
    values = dict(DEFAULTS)
    env_threads = os.environ.get("REPRMETRICS_THREADS")
    if env_threads is not None and env_threads != "":
        values["threads"] = env_threads
    if getattr(args, "config", None):
        values.update(_read_config_file(args.config))
    for key in DEFAULTS:
        flag = getattr(args, key.replace("-", "_"), None)
        if flag is not None:
            values[key] = flag

    if values["delta-kind"] not in _DELTA_KINDS:
        raise _CliError(
            f"delta-kind must be one of {sorted(_DELTA_KINDS)}, "
            f"got {values['delta-kind']!r}"
        )
    for key, allowed in (("backend", ("exact", "randomized")),
                         ("base", ("nats", "bits")),
                         ("skip-policy", ("drop", "strict")),
                         ("normalize-terms", ("on", "off")),
                         ("skip-centering", ("on", "off"))):
        if values[key] not in allowed:
            raise _CliError(f"{key} must be one of {list(allowed)}, "
                            f"got {values[key]!r}")

    k: int | str = values["k"]
    if k != "full":
        k = _parse_int(k, "k", 1)
    we, wm = _parse_pair(values["weights"], "weights")
    try:
        weights = Weights(
            w_entropy=we,
            w_mnn=wm,
            delta_kind=_DELTA_KINDS[values["delta-kind"]],
            normalize_terms=values["normalize-terms"] == "on",
        )
    except ValueError as exc:
        raise _CliError(str(exc)) from None
    config = BundleConfig(
        k=k,
        base=values["base"],
        backend=values["backend"],
        seed=_parse_int(values["seed"], "seed", 0),
        skip_centering=values["skip-centering"] == "on",
    )
    return Settings(
        weights=weights,
        config=config,
        skip_policy=values["skip-policy"],
        threads=_parse_int(values["threads"], "threads", 1),
    )


def _emit(args: argparse.Namespace, payload: str, summary: str) -> None:
    """Report to --output with the summary on stdout, or report to
    stdout with the summary on stderr."""
    if args.output:
        Path(args.output).write_text(payload + "\n", encoding="utf-8")
        print(summary)
    else:
        print(payload)
        print(summary, file=sys.stderr)


def _input_manifest(path: str) -> DatasetManifest:
    p = Path(path)
    if p.suffix.lower() in (".npy", ".csv"):
        return DatasetManifest(entries=(ManifestEntry(p, p.stem),))
    return load_manifest(p)


def cmd_compute(args: argparse.Namespace, settings: Settings) -> int:
    manifest = _input_manifest(args.input)
    bundles, skipped = collect_bundles(
        manifest,
        settings.config,
        skip_policy=settings.skip_policy,
        threads=settings.threads,
    )
    count = len(bundles)
    means = {
        name: sum(getattr(b, name) for _, b in bundles) / count
        for name in ("entropy_nats", "entropy_bits", "effective_rank",
                     "mnn_hidden", "mnn_covariance")
    }
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "config": _config_dict(settings.config, settings.skip_policy),
        "per_sequence": [b.to_dict() for _, b in bundles],
        "aggregate": means,
        "skipped": [{"label": s.label, "reason": s.reason} for s in skipped],
    }
    summary = (f"{count} sequences ({len(skipped)} skipped); "
               f"mean effective rank {means['effective_rank']:.6g}; "
               f"mean mnn {means['mnn_hidden']:.6g}")
    _emit(args, jsonout.dumps(report), summary)
    return 2 if skipped else 0


def cmd_compare(args: argparse.Namespace, settings: Settings) -> int:
    report = compare_corpus(
        load_manifest(args.manifest_a),
        load_manifest(args.manifest_b),
        settings.weights,
        settings.config,
        skip_policy=settings.skip_policy,
        threads=settings.threads,
    )
    summary = (f"aggregate composite "
               f"{jsonout.format_float(report.aggregate.composite)} "
               f"over {len(report.per_sequence)} sequences "
               f"({len(report.skipped)} skipped)")
    _emit(args, report_to_json(report), summary)
    return 2 if report.skipped else 0


def cmd_sweep(args: argparse.Namespace, settings: Settings) -> int:
    grid = []
    for chunk in (c for c in args.grid.split(";") if c.strip()):
        we, wm = _parse_pair(chunk.strip(), "grid entry")
        try:
            grid.append(Weights(we, wm, settings.weights.delta_kind,
                                settings.weights.normalize_terms))
        except ValueError as exc:
            raise _CliError(str(exc)) from None
    if not grid:
        raise _CliError("grid is empty")
    pairs, skipped = collect_pairs(
        load_manifest(args.manifest_a),
        load_manifest(args.manifest_b),
        settings.config,
        skip_policy=settings.skip_policy,
        threads=settings.threads,
    )
    rows = weight_sweep(pairs, grid)
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "config": _config_dict(settings.config, settings.skip_policy),
        "grid": [
            {"w_entropy": w.w_entropy, "w_mnn": w.w_mnn,
             "delta_kind": w.delta_kind, "mean_composite": score}
            for w, score in rows
        ],
        "skipped": [{"label": s.label, "reason": s.reason} for s in skipped],
    }
    scores = [score for _, score in rows]
    summary = (f"swept {len(rows)} weightings over {len(pairs)} sequences; "
               f"composite range [{min(scores):.6g}, {max(scores):.6g}]")
    _emit(args, jsonout.dumps(report), summary)
    return 2 if skipped else 0


def cmd_bench(args: argparse.Namespace, settings: Settings) -> int:
    raw = [c for c in args.sizes.split(",") if c.strip()]
    sizes = [_parse_int(c.strip(), "size", 2) for c in raw]
    k = 64 if settings.config.k == "full" else settings.config.k
    rows = bench_mod.run_bench(
        sizes,
        k=k,
        oversample=settings.config.oversample,
        power_iters=settings.config.power_iters,
        seed=settings.config.seed,
    )
    print(bench_mod.format_table(rows))
    if args.output:
        payload = jsonout.dumps({
            "schema_version": REPORT_SCHEMA_VERSION,
            "rows": [r.to_dict() for r in rows],
        })
        Path(args.output).write_text(payload + "\n", encoding="utf-8")
    return 0


def cmd_verify(args: argparse.Namespace, settings: Settings) -> int:
    # Fault-injection hook so the failure path itself is testable.
    perturb = float(os.environ.get("REPRMETRICS_VERIFY_PERTURB", "0") or 0.0)
    result = selfcheck.run_selfcheck(seed=settings.config.seed, perturb=perturb)
    if result.ok:
        print(result.describe())
        return 0
    print(f"error: {result.describe()}", file=sys.stderr)
    return 1


_COMMANDS = {
    "compute": cmd_compute,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
    "bench": cmd_bench,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = resolve_settings(args)
        return _COMMANDS[args.command](args, settings)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ReprMetricsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

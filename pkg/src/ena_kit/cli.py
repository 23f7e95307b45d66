"""Command-line driver: ``ena-kit validate | run | kappa``.

Exit codes: 0 success, 1 I/O failure, 2 schema or validation error,
3 degenerate computation (too few units, zero variance, empty networks).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import re
import sys
import time
from pathlib import Path

from . import __version__
from .accumulation import cumulative_csv, cumulative_vectors, normalize
from .ingest import (
    CodeValueError,
    SchemaError,
    load_config,
    parse_table,
    rater_agreement_table,
    rater_column,
    validate,
)
from .projection import (
    LayoutError,
    fit_space,
    group_mean_network,
    network_csv,
    place_nodes,
    scores_csv,
    space_json,
    subtract_networks,
)
from .render import PlotStyle, render_network, render_scores
from .stats import DegenerateTestError, cohens_kappa, compare_groups, comparison_json, kappa_json

EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2
EXIT_DEGENERATE = 3

log = logging.getLogger("ena_kit")

_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


def _configure_logging() -> None:
    level = _LEVELS.get(os.environ.get("ENA_KIT_LOG", "warn").lower(), logging.WARNING)
    root = logging.getLogger("ena_kit")
    root.setLevel(level)
    if not root.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        root.addHandler(handler)


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", label).strip("_") or "group"


class _Artifacts:
    """Writes output files and remembers their digests for the manifest."""

    def __init__(self, root: Path):
        self.root = root
        self.entries: list[dict] = []

    def write(self, rel: str, text: str) -> None:
        data = text.encode("utf-8")
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        self.entries.append({"path": rel, "sha256": _sha256(data), "bytes": len(data)})
        log.info("wrote %s", path)


def _report(diags) -> None:
    for d in diags:
        print(d.format(), file=sys.stderr)


def _load_inputs(config_path: str, data_path: str):
    """Returns (config, config bytes, data bytes, table) or raises."""
    config_bytes = Path(config_path).read_bytes()
    data_bytes = Path(data_path).read_bytes()
    config = load_config(config_path)
    table = parse_table(data_bytes, config)
    return config, config_bytes, data_bytes, table


def cmd_validate(args) -> int:
    try:
        config, _, _, table = _load_inputs(args.config, args.data)
    except OSError as exc:
        print(f"error\trow -\t{exc}", file=sys.stderr)
        return EXIT_IO
    except (SchemaError, CodeValueError) as exc:
        print(f"error\trow {getattr(exc, 'row', '-')}\t{exc}", file=sys.stderr)
        return EXIT_INVALID
    diags = validate(table, config)
    _report(diags)
    return EXIT_INVALID if diags.has_errors else EXIT_OK


def cmd_run(args) -> int:
    started = time.perf_counter()
    try:
        config, config_bytes, data_bytes, table = _load_inputs(args.config, args.data)
    except OSError as exc:
        print(f"error\trow -\t{exc}", file=sys.stderr)
        return EXIT_IO
    except (SchemaError, CodeValueError) as exc:
        print(f"error\trow {getattr(exc, 'row', '-')}\t{exc}", file=sys.stderr)
        return EXIT_INVALID

    diags = validate(table, config)
    _report(diags)
    if diags.has_errors:
        return EXIT_INVALID
    try:
        style = PlotStyle.from_mapping(config.style)
    except (TypeError, ValueError) as exc:
        print(f"error\trow -\tstyle: {exc}", file=sys.stderr)
        return EXIT_INVALID

    out = _Artifacts(Path(args.out or config.out_dir))
    status = {"code": EXIT_OK, "message": "ok"}
    try:
        _run_pipeline(config, table, style, diags, out, status)
        manifest = {
            "tool": "ena-kit",
            "version": __version__,
            "config_sha256": _sha256(config_bytes),
            "data_sha256": _sha256(data_bytes),
            "status": status["message"],
            "exit_code": status["code"],
            "artifacts": out.entries,
            "elapsed_seconds": round(time.perf_counter() - started, 3),
        }
        path = out.root / "manifest.json"
        path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        print(f"error\trow -\tcannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    if status["code"] != EXIT_OK:
        print(f"error\trow -\t{status['message']}", file=sys.stderr)
    return status["code"]


def _degenerate(status: dict, message: str) -> None:
    status["code"] = EXIT_DEGENERATE
    status["message"] = f"degenerate: {message}"


def _run_pipeline(config, table, style, diags, out: _Artifacts, status: dict) -> None:
    book = table.codebook
    groups = list(config.groups)
    out.write("diagnostics.jsonl", diags.to_jsonl())

    cumulative = cumulative_vectors(table)
    out.write("cumulative.csv", cumulative_csv(cumulative, book))
    vectors = [normalize(c) for c in cumulative]

    nets = {g: group_mean_network(vectors, g, book) for g in groups}
    for g, net in nets.items():
        out.write(f"networks/{_slug(g)}.csv", network_csv(net))
    subtraction = subtract_networks(nets[groups[0]], nets[groups[1]])
    out.write("networks/subtraction.csv", network_csv(subtraction))

    n_units = len(vectors)
    if n_units < 2:
        _degenerate(status, f"{n_units} unit(s); at least 2 are needed to fit a space")
        return
    d = min(config.dimensions, n_units - 1, book.n_pairs)
    if d < config.dimensions:
        log.warning("only %d unit(s): projecting onto %d dimension(s) instead of %d", n_units, d, config.dimensions)
    space, scores = fit_space(vectors, d)
    out.write("scores.csv", scores_csv(scores))

    try:
        layout = place_nodes(space, scores, vectors, book.codes)
    except LayoutError as exc:
        out.write("space.json", space_json(space))
        _degenerate(status, str(exc))
        return
    out.write("space.json", space_json(space, layout))

    for g, net in nets.items():
        out.write(f"figures/{_slug(g)}.svg", render_network(layout, net, style, groups))
    out.write("figures/subtraction.svg", render_network(layout, subtraction, style, groups))
    if d == 2:
        selected = [s for s in scores if s.group in groups]
        out.write("figures/scores.svg", render_scores(selected, None, style, space.variance_fraction, groups))
    else:
        log.warning("score plot skipped: it needs 2 dimensions, the space has %d", d)

    if config.rater_columns:
        col_a, col_b = config.rater_columns
        try:
            counts = rater_agreement_table(rater_column(table, col_a), rater_column(table, col_b))
        except CodeValueError as exc:
            log.error("kappa skipped: %s", exc)
        else:
            out.write("kappa.json", kappa_json(cohens_kappa(counts)))

    try:
        comparisons = compare_groups(scores, groups)
    except DegenerateTestError as exc:
        _degenerate(status, str(exc))
        return
    out.write("comparison.json", comparison_json(comparisons))


def _read_ratings(path: str) -> list[str]:
    text = Path(path).read_text(encoding="utf-8")
    return [tok for tok in re.split(r"[\s,;]+", text) if tok]


def cmd_kappa(args) -> int:
    try:
        a = _read_ratings(args.ratings_a)
        b = _read_ratings(args.ratings_b)
    except (OSError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        result = cohens_kappa(rater_agreement_table(a, b))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(kappa_json(result), encoding="utf-8")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"kappa={result.kappa:.6g} agreement={result.percent_agreement:.6g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ena-kit", description="Epistemic network analysis of coded utterances.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a coded table against a config")
    p.add_argument("--config", required=True)
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="run the full pipeline and write all artifacts")
    p.add_argument("--config", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", help="output directory (overrides out_dir in the config)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("kappa", help="Cohen's kappa for two binary rating files")
    p.add_argument("--ratings-a", required=True)
    p.add_argument("--ratings-b", required=True)
    p.add_argument("--out", default="kappa.json")
    p.set_defaults(func=cmd_kappa)
    return parser


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

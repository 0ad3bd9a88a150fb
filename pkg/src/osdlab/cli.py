"""Command line entry point: ``sim run|list-sizes|analyze|cost``."""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys

from . import analysis
from .codes import load_code
from .complexity import cost_csv, cost_rows
from .decoders import InfeasibleDecoderError, build_list, default_first_segment, parse_decoder
from .sim import ConfigError, emit, load_config, run

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE = 0, 2, 3

ANALYZE_COLUMNS = ("decoder", "snr_db", "p0", "p1", "p2", "coverage")


def _code(name):
    try:
        return load_code(name)
    except (KeyError, OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _spec(text, code):
    try:
        return parse_decoder(text, code.k, code.dmin)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_run(args) -> int:
    cfg = load_config(args.config).with_overrides(seed=args.seed, workers=args.workers)
    if args.checksum:
        cfg = cfg.with_overrides(checksum=True)
    progress = None
    if args.verbose:
        progress = lambda snr, cells: print(
            f"  {snr:g} dB: " + ", ".join(f"{k}={c.words}/{c.bit_errors}" for k, c in cells.items()),
            file=sys.stderr,
        )
    rows = run(cfg, progress)
    text = emit(rows, args.out, args.format)
    if args.out is None:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_list_sizes(args) -> int:
    code = _code(args.code)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(("decoder", "K", "list_size", "distinct_patterns"))
    for text in args.decoder:
        spec = _spec(text, code)
        if spec.family in ("ml", "hard"):
            raise ConfigError(f"{text} has no test pattern list")
        plist = build_list(spec)
        w.writerow((spec.label, code.k, len(plist), plist.distinct_count))
    return EXIT_OK


def analyze_rows(cfg, tol=analysis.DEFAULT_TOL) -> list[dict]:
    if cfg.channel not in ("awgn", "rayleigh-fast"):
        raise InfeasibleDecoderError(f"no ordered-reliability model for channel {cfg.channel!r}")
    code = cfg.load_code()
    if code.k >= code.n:
        raise InfeasibleDecoderError("analysis needs K < N")
    rows = []
    for spec in cfg.decoder_specs(code):
        if spec.family in ("ml", "hard"):
            continue
        k1 = spec.segments[0][0] if spec.q == 2 else default_first_segment(code.k)
        for snr in cfg.snr_db:
            base = analysis.ReliabilityModel(cfg.channel, snr, code.rate)
            model = analysis.OrderStatModel(code.n, base)
            p0 = analysis.prob_mrip_error(model, code.k, tol=tol)
            p1, p2 = analysis.prob_segment_errors(model, k1, code.k, tol=tol)
            cov = analysis.list_coverage_prob(spec, model, tol=tol)
            rows.append(dict(zip(ANALYZE_COLUMNS, (spec.label, snr, p0, p1, p2, cov))))
    return rows


def cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=ANALYZE_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(analyze_rows(cfg))
    sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_cost(args) -> int:
    code = _code(args.code)
    specs = [_spec(t, code) for t in args.decoder]
    sys.stdout.write(cost_csv(cost_rows(code.n, code.k, specs)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sim", description="Order-statistics list decoding experiments")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="Monte Carlo BER/FER sweep from a config file")
    r.add_argument("config")
    r.add_argument("--seed", type=int)
    r.add_argument("--workers", type=int)
    r.add_argument("--out")
    r.add_argument("--format", choices=("csv", "json"), default="csv")
    r.add_argument("--checksum", action="store_true", help="add the noise checksum column")
    r.set_defaults(func=cmd_run)

    ls = sub.add_parser("list-sizes", help="test list sizes for decoder grammars")
    ls.add_argument("decoder", nargs="+")
    ls.add_argument("--code", required=True)
    ls.set_defaults(func=cmd_list_sizes)

    a = sub.add_parser("analyze", help="ordered-bit error probabilities and list coverage")
    a.add_argument("config")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("cost", help="BOPS/FLOPS cost model")
    c.add_argument("--code", required=True)
    c.add_argument("--decoder", required=True, action="append")
    c.set_defaults(func=cmd_cost)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if not hasattr(args, "verbose"):
        args.verbose = False
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleDecoderError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``mmbeam run | dump-codebook | selfcheck``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from .codebook import build_codebook
from .config import load_config
from .exceptions import ConfigurationError
from .report import write_bundle, write_codebook
from .scenario import run_scenario
from .selfcheck import run_selfcheck

logger = logging.getLogger("mmbeam")


def _threads(n):
    return None if n == 0 else n


def cmd_run(config_path, out_dir, overrides=(), threads=1, dump_codebooks=False):
    cfg = load_config(config_path, overrides)
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigurationError(f"output directory {out} is not writable: {exc}") from exc
    t0 = time.perf_counter()
    logger.info("running %d trials (%s, codebooks %s)", cfg.n_trials, cfg.mode, cfg.codebook_sizes)
    records = run_scenario(cfg, threads=threads)
    logger.info("finished in %.1f s", time.perf_counter() - t0)
    bundle = write_bundle(out, cfg, records, threads)
    if dump_codebooks:
        bs_cb, ue_cb = cfg.codebooks()
        write_codebook(out / "bs_codebook.csv", bs_cb)
        write_codebook(out / "ue_codebook.csv", ue_cb)
    return bundle


def cmd_dump_codebook(config_path, out_path, array="bs", overrides=()):
    cfg = load_config(config_path, overrides)
    ka, ke, ku = cfg.codebook_sizes
    cb = build_codebook(cfg.bs_array, ka, ke) if array == "bs" else build_codebook(cfg.ue_array, ku, 1)
    Path(out_path).parent.mkdir(parents=True, exist_ok=True)
    write_codebook(out_path, cb)
    return cb


def cmd_selfcheck(stream=None):
    stream = sys.stdout if stream is None else stream
    results = run_selfcheck()
    for r in results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.detail}", file=stream)
    return all(r.passed for r in results)


def build_parser():
    parser = argparse.ArgumentParser(prog="mmbeam", description=__doc__)
    parser.add_argument("--quiet", action="store_true", help="only print errors")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte-Carlo scenario and write CSV tables")
    run.add_argument("--config", help="scenario JSON (bundled names such as paper_fig2.json work too)")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                     help="override a config entry, dotted paths allowed; repeatable")
    run.add_argument("--threads", type=int, default=1, help="worker threads, 0 = auto")
    run.add_argument("--dump-codebooks", action="store_true", help="also write both codebooks")
    run.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)

    dump = sub.add_parser("dump-codebook", help="write a codebook as CSV")
    dump.add_argument("--config")
    dump.add_argument("--out", required=True, help="output CSV path")
    dump.add_argument("--array", choices=("bs", "ue"), default="bs")
    dump.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")

    sub.add_parser("selfcheck", help="run the fast invariant checks")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO,
                        format="%(name)s: %(message)s")
    try:
        if args.command == "run":
            bundle = cmd_run(args.config, args.out, args.overrides, _threads(args.threads),
                             args.dump_codebooks)
            logger.info("wrote %s", bundle.rate_curve_csv.parent)
        elif args.command == "dump-codebook":
            cb = cmd_dump_codebook(args.config, args.out, args.array, args.overrides)
            logger.info("wrote %d entries to %s", len(cb), args.out)
        elif args.command == "selfcheck":
            return 0 if cmd_selfcheck() else 1
    except ConfigurationError as exc:
        print(f"mmbeam: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

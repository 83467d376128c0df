"""Command-line front end: ``wildtame analyze|scan|ingest|cache``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .exactalg import FiniteAbelianGroup
from .kernelctl import (
    VERDICTS,
    DataSources,
    Evidence,
    InvariantViolation,
    KernelReport,
    analyze,
    error_report,
    delta_set,
)
from .nfengine.cache import CacheStore
from .nfengine.records import ASSURANCE_ORDER, MAX_DEGREE, RecordError, ingest_record
from .nfengine.sources import RecordSource

EXIT_OK, EXIT_USAGE, EXIT_INTERNAL = 0, 2, 3


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    data_dir: Path | None
    cache_dir: Path | None
    fmt: str = "json"
    assurance_floor: str = "heuristic"
    max_level: int = 1
    jobs: int = 1

    def __post_init__(self):
        if self.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        if self.max_level < 0:
            raise UsageError("--max-level must be non-negative")
        if self.fmt not in ("json", "table"):
            raise UsageError(f"unknown format {self.fmt}")
        if self.data_dir is not None and not self.data_dir.is_dir():
            raise UsageError(f"data directory {self.data_dir} does not exist")

    def cache(self, create: bool = False) -> CacheStore | None:
        if self.cache_dir is None:
            return None
        if not create and not self.cache_dir.is_dir():
            return None
        try:
            return CacheStore(self.cache_dir)
        except OSError as e:
            raise UsageError(f"cache directory {self.cache_dir}: {e}") from None

    def sources(self) -> DataSources:
        dirs = [self.data_dir] if self.data_dir is not None else []
        return DataSources(RecordSource(dirs, self.cache()), max_level=self.max_level)


# ---------------------------------------------------------------------------
# serialization


def _group(G: FiniteAbelianGroup | None):
    return "undetermined" if G is None else [str(d) for d in G.invariant_factors]


def _opt(n: int | None):
    return None if n is None else str(n)


def report_dict(r: KernelReport) -> dict:
    return {
        "delta": str(r.delta),
        "k": dict(r.k),
        "k_prime": None if r.k_prime is None else dict(r.k_prime),
        "local_index": str(r.local_index),
        "v3_order": _opt(r.v3_order),
        "rank3": _opt(r.rank3),
        "wk_structure": _group(r.wk_structure),
        "k2_structure": _group(r.k2_structure),
        "verdict": r.verdict,
        "evidence": [{"rule": e.rule, "anchor": e.anchor, "inputs": dict(e.inputs)} for e in r.evidence],
        "assurance": r.assurance,
        "banner": r.banner,
    }


def to_json(r: KernelReport) -> str:
    return json.dumps(report_dict(r), separators=(",", ":"))


def _short(G: FiniteAbelianGroup | None) -> str:
    if G is None:
        return "?"
    return "+".join(f"Z/{d}" for d in G.invariant_factors) or "0"


TABLE_HEADER = f"{'delta':>7}  {'k_prime':>15}  {'idx':>3}  {'v3':>3}  {'rk3':>3}  {'WK':<12}  {'K2':<12}  " \
               f"{'verdict':<17}  assurance"


def table_row(r: KernelReport) -> str:
    kp = r.k_prime["label"] if r.k_prime else "-"
    v3 = "-" if r.v3_order is None else str(r.v3_order)
    rk = "-" if r.rank3 is None else str(r.rank3)
    return (f"{r.delta:>7}  {kp:>15}  {r.local_index:>3}  {v3:>3}  {rk:>3}  {_short(r.wk_structure):<12}  "
            f"{_short(r.k2_structure):<12}  {r.verdict:<17}  {r.assurance}")


def apply_floor(r: KernelReport, floor: str) -> KernelReport:
    if r.verdict in ("Split", "NonSplit") and ASSURANCE_ORDER[r.assurance] < ASSURANCE_ORDER[floor]:
        r.evidence.append(Evidence("ERR", {"error": f"assurance {r.assurance} below floor {floor}"}))
        r.verdict = "Unknown"
    return r


# ---------------------------------------------------------------------------
# commands


def _parse_int(s: str, what: str) -> int:
    try:
        return int(s, 10)
    except (TypeError, ValueError):
        raise UsageError(f"{what} must be an integer, got {s!r}") from None


def cmd_analyze(args, cfg: CliConfig, out) -> int:
    delta = _parse_int(args.delta, "--delta")
    try:
        r = analyze(delta, cfg.sources())
    except (ValueError, RecordError) as e:
        raise UsageError(str(e)) from None
    r = apply_floor(r, cfg.assurance_floor)
    if cfg.fmt == "json":
        print(to_json(r), file=out)
    else:
        print(TABLE_HEADER, file=out)
        print(table_row(r), file=out)
    return EXIT_OK


_worker_sources: DataSources | None = None


def _init_worker(cfg: CliConfig):
    global _worker_sources
    _worker_sources = cfg.sources()


def _analyze_one(delta: int) -> KernelReport:
    try:
        return analyze(delta, _worker_sources)
    except (RecordError, ValueError, ArithmeticError) as e:
        return error_report(delta, e)


def _footer(counts: dict[str, int]) -> dict:
    return {"summary": {"reports": str(sum(counts.values())), **{v: str(counts[v]) for v in VERDICTS}}}


def cmd_scan(args, cfg: CliConfig, out) -> int:
    lo, hi = _parse_int(args.lo, "--from"), _parse_int(args.hi, "--to")
    if lo > hi:
        raise UsageError(f"empty range: --from {lo} exceeds --to {hi}")
    deltas = delta_set(lo, hi)
    counts = dict.fromkeys(VERDICTS, 0)
    if cfg.fmt == "table":
        print(TABLE_HEADER, file=out)
    if cfg.jobs == 1:
        _init_worker(cfg)
        it = map(_analyze_one, deltas)
        ex = None
    else:
        ex = ProcessPoolExecutor(cfg.jobs, initializer=_init_worker, initargs=(cfg,))
        it = ex.map(_analyze_one, deltas, chunksize=8)
    try:
        for r in it:
            r = apply_floor(r, cfg.assurance_floor)
            counts[r.verdict] += 1
            print(to_json(r) if cfg.fmt == "json" else table_row(r), file=out, flush=True)
    finally:
        if ex is not None:
            ex.shutdown()
    if cfg.fmt == "json":
        print(json.dumps(_footer(counts), separators=(",", ":")), file=out)
    else:
        print(f"# {len(deltas)} reports: " + ", ".join(f"{v}={counts[v]}" for v in VERDICTS), file=out)
    return EXIT_OK


def cmd_ingest(args, cfg: CliConfig, out) -> int:
    path = Path(args.path)
    if path.is_dir():
        files = sorted(path.glob("*.wtrec"))
    elif path.is_file() and os.access(path, os.R_OK):
        files = [path]
    else:
        raise UsageError(f"cannot read {path}")
    cache = cfg.cache(create=True)
    if cache is None:
        raise UsageError("ingest needs a cache directory (--cache-dir or WILDTAME_CACHE)")
    lookup = RecordSource([cfg.data_dir] if cfg.data_dir else [], cache)
    accepted = rejected = 0
    for f in files:
        try:
            rec = ingest_record(f, MAX_DEGREE)
            if rec.norm_to is not None:
                target = lookup.get(rec.norm_to[0])
                if target is not None:
                    rec.validate_norm(target)
            status = cache.put(rec)
        except (RecordError, ValueError, OSError) as e:
            rejected += 1
            print(f"rejected {f}: {e}", file=out)
            continue
        accepted += 1
        print(f"accepted {f}: {rec.label} ({status})", file=out)
    print(f"accepted {accepted}, rejected {rejected}", file=out)
    return EXIT_OK


def cmd_cache(args, cfg: CliConfig, out) -> int:
    cache = cfg.cache(create=args.action == "clear")
    if args.action == "list":
        for lab in (cache.labels() if cache else []):
            print(lab, file=out)
    else:
        n = cache.clear() if cache else 0
        print(f"removed {n} entries", file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--data-dir", default=os.environ.get("WILDTAME_DATA"))
    common.add_argument("--cache-dir", default=os.environ.get("WILDTAME_CACHE"))
    common.add_argument("--format", choices=("json", "table"), default="json")
    common.add_argument("--assurance-floor", choices=tuple(ASSURANCE_ORDER), default="heuristic")
    common.add_argument("--max-level", type=int, default=1)
    common.add_argument("--jobs", type=int, default=1)

    p = _Parser(prog="wildtame", description="3-parts of wild and tame kernels of Q(sqrt(delta)).")
    p.add_argument("--version", action="version", version=f"wildtame {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    a = sub.add_parser("analyze", parents=[common], help="analyze one delta")
    a.add_argument("--delta", required=True)
    s = sub.add_parser("scan", parents=[common], help="analyze every delta in D within a range")
    s.add_argument("--from", dest="lo", required=True)
    s.add_argument("--to", dest="hi", required=True)
    i = sub.add_parser("ingest", parents=[common], help="validate WTREC records and cache them")
    i.add_argument("path")
    c = sub.add_parser("cache", parents=[common], help="inspect or clear the cache")
    c.add_argument("action", choices=("list", "clear"))
    return p


COMMANDS = {"analyze": cmd_analyze, "scan": cmd_scan, "ingest": cmd_ingest, "cache": cmd_cache}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        cfg = CliConfig(Path(args.data_dir) if args.data_dir else None,
                        Path(args.cache_dir) if args.cache_dir else None,
                        args.format, args.assurance_floor, args.max_level, args.jobs)
        return COMMANDS[args.command](args, cfg, out)
    except UsageError as e:
        print(f"wildtame: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (InvariantViolation, AssertionError) as e:
        print(f"wildtame: internal invariant violated: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

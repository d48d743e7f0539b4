"""Command-line entry point: ``spinwitness {table1,table2,witness,minimize,cache}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys

from . import __version__, reference
from .cache import ResultsCache
from .config import DEFAULT_CONFIG, RunConfig
from .eigensolver import SolverError
from .spin import SpinQuantum
from .tables import TableResult, biseparable_record, cached_minimum, compute_table1, compute_table2
from .witness import IntractableSystem, UnphysicalEnergy, WitnessReport, classify, thresholds

log = logging.getLogger("spinwitness")

EXIT_OK, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2

# largest block dimension handed to the self-consistent solver from the CLI
MAX_BLOCK_DIM = 2_000_000


class UsageError(Exception):
    pass


def spin_arg(text: str) -> SpinQuantum:
    try:
        s = SpinQuantum.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if s.two_s == 0:
        raise argparse.ArgumentTypeError("spin must be positive")
    return s


def positive_float(text: str) -> float:
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return x


def positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def g6(x) -> str:
    return "-" if x is None else f"{x:.6g}"


# --- argument parsing -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--z-tol", type=positive_float, default=DEFAULT_CONFIG.z_tol)
    common.add_argument("--dense-threshold", type=positive_int, default=DEFAULT_CONFIG.dense_threshold)
    common.add_argument("--threads", type=positive_int, default=DEFAULT_CONFIG.threads)
    common.add_argument("--seed", type=int, default=DEFAULT_CONFIG.seed)
    common.add_argument("--cache-path", default=None)
    common.add_argument("--no-cache", action="store_true", help="recompute and do not store results")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="spinwitness", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("table1", parents=[common], help="tripartite minima for s = 1/2 ... 5/2")
    t2 = sub.add_parser("table2", parents=[common], help="four- to eight-spin biseparable minima")
    t2.add_argument("--spin", type=spin_arg, action="append", help="restrict to these spins")

    w = sub.add_parser("witness", parents=[common], help="entanglement thresholds for a chain or ring")
    w.add_argument("--spin", type=spin_arg, required=True)
    w.add_argument("--n", type=int, required=True)
    w.add_argument("--topology", choices=("chain", "ring"), default="chain")
    w.add_argument("--energy", type=float, default=None, help="measured <H> to classify")

    m = sub.add_parser("minimize", parents=[common], help="biseparable minimum of an open chain")
    m.add_argument("--spin", type=spin_arg, required=True)
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--partition", type=int, default=None, help="N_A; scan all cuts when omitted")

    c = sub.add_parser("cache", parents=[common], help="inspect or clear the results cache")
    c.add_argument("action", choices=("inspect", "clear"))
    return parser


def config_from_args(args) -> RunConfig:
    return DEFAULT_CONFIG.replace(z_tol=args.z_tol, dense_threshold=args.dense_threshold,
                                  threads=args.threads, seed=args.seed, output_format=args.format)


def open_cache(args) -> ResultsCache | None:
    return None if args.no_cache else ResultsCache(args.cache_path)


def config_dict(config: RunConfig) -> dict:
    d = config.numerics()
    d.update(threads=config.threads, max_full_dim=config.max_full_dim)
    return d


def dump_json(config: RunConfig, results, comparison=None) -> str:
    doc = {"config": config_dict(config), "results": results, "version": __version__}
    if comparison is not None:
        doc["paper_comparison"] = comparison
    return json.dumps(doc, indent=2, sort_keys=True)


def dump_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().rstrip("\n")


# --- tables ---------------------------------------------------------------------

def _comparison(result: TableResult) -> dict:
    return {"ok": result.ok, "max_energy_deviation": result.max_deviation,
            "tolerance": reference.ENERGY_RTOL, "cells": [c.to_dict() for c in result.cells]}


def _cell_csv(result: TableResult) -> str:
    rows = [[c.table, str(SpinQuantum(c.two_s)), c.column, c.computed, c.published, c.deviation,
             "enforced" if c.enforced else "flag", c.ok] for c in result.cells]
    return dump_csv(["table", "s", "column", "computed", "published", "deviation", "kind", "ok"], rows)


def _cell_lines(result: TableResult) -> list[str]:
    lines = [f"max energy deviation {result.max_deviation:.3g} (tolerance {reference.ENERGY_RTOL:g})"]
    for c in result.failures():
        why = c.error or f"deviation {c.deviation:.3g}"
        lines.append(f"  DEVIATION s={SpinQuantum(c.two_s)} {c.column}: computed {g6(c.computed)}, "
                     f"published {c.published} ({why})")
    for c in result.flags():
        lines.append(f"  note s={SpinQuantum(c.two_s)} {c.column}: computed {g6(c.computed)}, "
                     f"published {c.published}" + (f" ({c.error})" if c.error else ""))
    return lines


def render_table1(result: TableResult) -> str:
    lines = [f"{'s':>4}  {'amplitudes a_S (S = 0, 1, ...)':<46} {'steps':<12} {'E_bs^3':>10} "
             f"{'E_12':>10} {'E_23':>10} {'E_0':>10}"]
    for row in result.rows:
        amps = " ".join(f"{x:.4g}" for x in row.get("a", []))
        lines.append(f"{row['s']:>4}  {amps:<46} {row.get('phase_steps', '-'):<12} "
                     f"{g6(row.get('energy')):>10} {g6(row.get('e12')):>10} {g6(row.get('e23')):>10} "
                     f"{g6(row.get('e0')):>10}")
    lines.append("")
    lines += [f"{'':>4}  published"]
    for two_s in sorted({r["two_s"] for r in result.rows}):
        ref = reference.TABLE1[two_s]
        amps = " ".join(f"{x:g}" for x in ref["a"])
        lines.append(f"{str(SpinQuantum(two_s)):>4}  {amps:<46} {'':<12} {ref['energy']:>10} "
                     f"{ref['e12']:>10} {ref['e23']:>10} {ref['e0']:>10}")
    lines.append("")
    return "\n".join(lines + _cell_lines(result))


def render_table2(result: TableResult) -> str:
    sizes = sorted({int(n) for row in result.rows for n in row.get("ebs", {})})
    head = f"{'s':>4}  {'amplitudes a_S':<40} {'E_22^4':>10} {'E_13^4':>10}" + "".join(
        f" {'E_bs^' + str(n):>10}" for n in sizes)
    lines = [head]
    for row in result.rows:
        amps = " ".join(f"{x:.3g}" for x in row.get("a", []))
        lines.append(f"{row['s']:>4}  {amps:<40} {g6(row.get('e22')):>10} {g6(row.get('e13')):>10}"
                     + "".join(f" {g6(row['ebs'].get(str(n))):>10}" for n in sizes))
    lines += ["", f"{'':>4}  published"]
    for row in result.rows:
        ref = reference.TABLE2[row["two_s"]]
        amps = " ".join("<1e-4" if x is None else f"{x:g}" for x in ref["a"])
        lines.append(f"{row['s']:>4}  {amps:<40} {ref['e22']:>10} {ref['e13']:>10}"
                     + "".join(f" {ref['ebs'][n]:>10}" for n in sizes))
    lines.append("")
    for row in result.rows:
        argmin = ", ".join(f"N={n}: N_A={a}" for n, a in row.get("argmin", {}).items())
        lines.append(f"s={row['s']}: 2|2 sectors (2M, 2M') = {tuple(row.get('sector_22', ()))}, "
                     f"1|3 sector 2M = {row.get('sector_13')}, self-consistent 2|2 "
                     f"{g6(row.get('e22_selfconsistent'))}; argmin {argmin}")
    lines.append("")
    return "\n".join(lines + _cell_lines(result))


def cmd_table(args, config: RunConfig) -> int:
    if args.command == "table1":
        result = compute_table1(config, threads=config.threads)
        text = render_table1
    else:
        spins = tuple(sorted({s.two_s for s in args.spin})) if args.spin else reference.SPINS
        unknown = [t for t in spins if t not in reference.TABLE2]
        if unknown:
            raise UsageError(f"no published row for s = {', '.join(str(SpinQuantum(t)) for t in unknown)}")
        result = compute_table2(config, open_cache(args), spins=spins, threads=config.threads)
        text = render_table2
    if args.format == "json":
        print(dump_json(config, result.rows, _comparison(result)))
    elif args.format == "csv":
        print(_cell_csv(result))
    else:
        print(text(result))
    return EXIT_OK if result.ok else EXIT_NUMERICAL


# --- witness ----------------------------------------------------------------------

def _bounded_source(config: RunConfig, cache: ResultsCache | None):
    inner = cached_minimum(config, cache)

    def source(s: SpinQuantum, k: int) -> float:
        if s.dim ** (k - 1) > MAX_BLOCK_DIM:
            raise IntractableSystem(f"a {k - 1}-spin block has dimension {s.dim ** (k - 1)}")
        return inner(s, k)
    return source


def verdict_text(report: WitnessReport) -> str:
    if report.measured_energy is None:
        return ""
    if report.genuine_violated:
        return f"verdict: genuine {report.N}-partite entanglement"
    if report.verdict is not None:
        return f"verdict: {report.verdict}-partite entanglement"
    return "verdict: none certified"


def witness_dict(report: WitnessReport) -> dict:
    return {
        "s": str(report.s), "two_s": report.s.two_s, "N": report.N, "topology": report.topology,
        "ground_energy": report.ground_energy, "genuine_bound": report.genuine_bound,
        "measured_energy": report.measured_energy, "genuine_violated": report.genuine_violated,
        "verdict": report.verdict, "note": report.note,
        "status": {str(k): v for k, v in report.status.items()},
        "thresholds": [{"k": t.k, "n_k": t.n_k, "segment_minimum": t.segment_minimum,
                        "bound": t.bound, "violated": t.violated} for t in report.thresholds],
    }


def witness_comparison(report: WitnessReport) -> list[dict] | None:
    two_s = report.s.two_s
    rows = []
    for t in report.thresholds:
        published = None
        if t.k == 3 and two_s in reference.TABLE1:
            published = reference.TABLE1[two_s]["energy"]
        elif two_s in reference.TABLE2:
            published = reference.TABLE2[two_s]["ebs"].get(t.k)
        if published is not None:
            rows.append({"k": t.k, "computed": t.segment_minimum, "published": published,
                         "deviation": abs(t.segment_minimum - published) / abs(published)})
    return rows or None


def render_witness(report: WitnessReport) -> str:
    lines = [f"Heisenberg {report.topology}, s = {report.s}, N = {report.N}",
             f"ground-state energy E_0 = {g6(report.ground_energy)}", ""]
    has_e = report.measured_energy is not None
    lines.append(f"{'k':>3} {'n_k':>4} {'E_bs^k':>12} {'bound':>12}" + ("  below bound" if has_e else ""))
    for t in report.thresholds:
        flag = ("  yes" if t.violated else "  no") if has_e else ""
        lines.append(f"{t.k:>3} {t.n_k:>4} {g6(t.segment_minimum):>12} {g6(t.bound):>12}{flag}")
    for k, status in sorted(report.status.items()):
        if status != "ok":
            lines.append(f"  k={k}: {status}")
    if report.genuine_bound is not None:
        lines.append(f"genuine {report.N}-partite bound: {g6(report.genuine_bound)}")
    if has_e:
        lines += [f"measured energy: {g6(report.measured_energy)}", verdict_text(report)]
    lines.append(report.note)
    return "\n".join(lines)


def cmd_witness(args, config: RunConfig) -> int:
    if args.n < 2 or (args.topology == "ring" and args.n < 3):
        raise UsageError("need N >= 2 for a chain and N >= 3 for a ring")
    report = thresholds(args.spin, args.n, args.topology, config,
                        minima=_bounded_source(config, open_cache(args)))
    if args.energy is not None:
        report = classify(report, args.energy)
    if args.format == "json":
        print(dump_json(config, witness_dict(report), witness_comparison(report)))
    elif args.format == "csv":
        rows = [[str(report.s), report.N, report.topology, t.k, t.n_k, t.segment_minimum, t.bound,
                 "" if t.violated is None else t.violated] for t in report.thresholds]
        print(dump_csv(["s", "N", "topology", "k", "n_k", "segment_minimum", "bound", "violated"], rows))
    else:
        print(render_witness(report))
    failed = any(v != "ok" for v in report.status.values())
    return EXIT_NUMERICAL if failed else EXIT_OK


# --- minimize ---------------------------------------------------------------------

def render_minimize(s: SpinQuantum, N: int, rec: dict) -> str:
    lines = [f"open chain, s = {s}, N = {N}", "",
             f"{'N_A':>4} {'energy':>12} {'z_A':>10} {'z_B':>10} {'E_A':>12} {'E_B':>12} "
             f"{'sweeps':>7} converged"]
    for p in rec["partitions"]:
        lines.append(f"{p['N_A']:>4} {g6(p['energy']):>12} {g6(p['z_A']):>10} {g6(p['z_B']):>10} "
                     f"{g6(p['energy_A']):>12} {g6(p['energy_B']):>12} {p['iterations']:>7} "
                     f"{'yes' if p['converged'] else 'no'}")
    lines.append(f"minimum E_bs = {g6(rec['energy'])} at N_A = {rec['argmin']}")
    return "\n".join(lines)


def cmd_minimize(args, config: RunConfig) -> int:
    s, N = args.spin, args.n
    if N < 2:
        raise UsageError("need N >= 2")
    if args.partition is not None and not 1 <= args.partition <= N - 1:
        raise UsageError(f"--partition must lie in 1..{N - 1}")
    if s.dim ** (N - 1) > MAX_BLOCK_DIM:
        raise IntractableSystem(f"a {N - 1}-spin block has dimension {s.dim ** (N - 1)}")
    rec = biseparable_record(s, N, config, open_cache(args), args.partition)
    if args.format == "json":
        comparison = None
        published = reference.TABLE2.get(s.two_s, {}).get("ebs", {}).get(N)
        if args.partition is None and published is not None:
            comparison = {"published": published, "computed": rec["energy"],
                          "deviation": abs(rec["energy"] - published) / abs(published)}
        print(dump_json(config, {"s": str(s), "two_s": s.two_s, "N": N, **rec}, comparison))
    elif args.format == "csv":
        rows = [[str(s), N, p["N_A"], p["energy"], p["z_A"], p["z_B"], p["iterations"], p["converged"]]
                for p in rec["partitions"]]
        print(dump_csv(["s", "N", "N_A", "energy", "z_A", "z_B", "sweeps", "converged"], rows))
    else:
        print(render_minimize(s, N, rec))
    return EXIT_OK


# --- cache ------------------------------------------------------------------------

def cmd_cache(args, config: RunConfig) -> int:
    cache = ResultsCache(args.cache_path)
    if args.action == "clear":
        n = cache.clear()
        print(f"removed {n} record(s) from {cache.path}")
        return EXIT_OK
    records = cache.records()
    if args.format == "json":
        print(json.dumps({"path": str(cache.path), "records": records}, indent=2, sort_keys=True))
    elif args.format == "csv":
        print(dump_csv(["key", "energy", "version"],
                       [[k, r["value"].get("energy"), r.get("version")] for k, r in sorted(records.items())]))
    else:
        lines = [f"{cache.path}: {len(records)} record(s)"]
        lines += [f"  {k:<16} {g6(r['value'].get('energy')):>12}  v{r.get('version')}  {r.get('timestamp')}"
                  for k, r in sorted(records.items())]
        print("\n".join(lines))
    return EXIT_OK


COMMANDS = {"table1": cmd_table, "table2": cmd_table, "witness": cmd_witness,
            "minimize": cmd_minimize, "cache": cmd_cache}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        return _run(parser, parser.parse_args(argv))
    except SystemExit as exc:  # argparse reports usage errors this way
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE


def _run(parser: argparse.ArgumentParser, args) -> int:
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s",
                        level=logging.WARNING - 10 * min(args.verbose, 2))
    try:
        config = config_from_args(args)
        return COMMANDS[args.command](args, config)
    except (UsageError, UnphysicalEnergy) as exc:
        parser.error(str(exc))
    except (SolverError, IntractableSystem, ArithmeticError) as exc:
        print(f"spinwitness: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

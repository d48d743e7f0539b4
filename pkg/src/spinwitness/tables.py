"""Recompute the tripartite and N-spin minima tables and compare with published values."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

from . import reference
from .cache import ResultsCache, cache_key
from .config import DEFAULT_CONFIG, RunConfig
from .coupled import minimize_quad_22, minimize_tripartite
from .hamiltonian import ChainSpec
from .selfconsistent import (BiseparableMinimum, PartitionSpec, argmin_partition, min_biseparable,
                             quad_13_minimum, solve_partition)
from .spin import SpinQuantum
from .witness import chain_ground_energy

log = logging.getLogger(__name__)

TABLE2_SIZES = (5, 6, 7, 8)


@dataclass
class Cell:
    """One computed number next to its published counterpart."""

    table: str
    two_s: int
    column: str
    computed: float | None
    published: float | None
    enforced: bool = True
    error: str | None = None

    @property
    def deviation(self) -> float | None:
        if self.computed is None or self.published in (None, 0):
            return None
        return abs(self.computed - self.published) / abs(self.published)

    @property
    def ok(self) -> bool:
        if self.error is not None:
            return False
        if self.published is None or self.computed is None:
            return True
        if self.enforced:
            return self.deviation <= reference.ENERGY_RTOL
        return matches_printed(self.computed, self.published)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(deviation=self.deviation, ok=self.ok)
        return d


def matches_printed(computed: float, published: float) -> bool:
    """Does ``computed`` round to ``published`` at its printed three significant digits?"""
    if published == 0:
        return abs(computed) < 5e-4
    last = 10.0 ** (math.floor(math.log10(abs(published))) - 2)
    return abs(abs(computed) - abs(published)) <= 0.5 * last * (1 + 1e-9) + 1e-12


@dataclass
class TableResult:
    name: str
    rows: list[dict]
    cells: list[Cell] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.cells if c.enforced)

    @property
    def max_deviation(self) -> float:
        devs = [c.deviation for c in self.cells if c.enforced and c.deviation is not None]
        return max(devs, default=0.0)

    def failures(self) -> list[Cell]:
        return [c for c in self.cells if c.enforced and not c.ok]

    def flags(self) -> list[Cell]:
        return [c for c in self.cells if not c.enforced and not c.ok]


def _map_spins(fn, spins, threads: int):
    if threads <= 1:
        return [fn(t) for t in spins]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, spins))


def _amplitude_cells(table: str, two_s: int, amps, published) -> list[Cell]:
    cells = []
    for i, (x, p) in enumerate(zip(amps, published)):
        if p is None:
            continue
        flagged = (table, two_s, i) in reference.AMPLITUDE_ANOMALIES
        cells.append(Cell(table, two_s, f"a{i}", float(x), p, enforced=False,
                          error="published value irregular" if flagged and not matches_printed(x, p) else None))
    return cells


def _phase_label(amps) -> str:
    steps = amps.phase_steps()
    if not len(steps):
        return "-"
    return ",".join("pi" if abs(st - math.pi) < 1e-6 else "0" if min(st, 2 * math.pi - st) < 1e-6
                    else f"{st:.4f}" for st in steps)


# --- three-spin minima ----------------------------------------------------------

def table1_row(two_s: int, config: RunConfig = DEFAULT_CONFIG) -> tuple[dict, list[Cell]]:
    s = SpinQuantum(two_s)
    ref = reference.TABLE1[two_s]
    row: dict = {"s": str(s), "two_s": two_s}
    cells: list[Cell] = []
    try:
        tri = minimize_tripartite(s, config)
    except Exception as exc:
        log.error("tripartite minimum failed for s=%s: %s", s, exc)
        cells += [Cell("table1", two_s, c, None, ref[c], error=str(exc)) for c in ("energy", "e12", "e23")]
    else:
        row.update(two_M=tri.two_M, a=[float(x) for x in tri.amplitudes.a],
                   phase_steps=_phase_label(tri.amplitudes), energy=tri.energy, e12=tri.e12,
                   e23=tri.e23, grad_norm=tri.grad_norm)
        cells += [Cell("table1", two_s, c, row[c], ref[c]) for c in ("energy", "e12", "e23")]
        cells += _amplitude_cells("table1", two_s, tri.amplitudes.a, ref["a"])
    try:
        row["e0"] = chain_ground_energy(ChainSpec(s, 3), config)
        cells.append(Cell("table1", two_s, "e0", row["e0"], ref["e0"]))
    except Exception as exc:
        cells.append(Cell("table1", two_s, "e0", None, ref["e0"], error=str(exc)))
    return row, cells


def compute_table1(config: RunConfig = DEFAULT_CONFIG, spins=reference.SPINS, threads: int = 1) -> TableResult:
    out = _map_spins(lambda t: table1_row(t, config), spins, threads)
    return TableResult("table1", [r for r, _ in out], [c for _, cs in out for c in cs])


# --- four- to eight-spin minima -------------------------------------------------

def _partition_record(r: BiseparableMinimum) -> dict:
    return {"N_A": r.partition.N_A, "energy": float(r.energy), "z_A": float(r.z_A), "z_B": float(r.z_B),
            "energy_A": float(r.energy_A), "energy_B": float(r.energy_B), "converged": bool(r.converged),
            "iterations": int(r.iterations), "start_point": float(r.start_point),
            "sector_A": int(r.sector_A), "sector_B": int(r.sector_B), "degenerate": bool(r.degenerate)}


def biseparable_record(s, N: int, config: RunConfig = DEFAULT_CONFIG, cache: ResultsCache | None = None,
                       partition: int | None = None) -> dict:
    """Cached JSON-ready minimum for one cut, or for the full scan when ``partition`` is None."""
    s = SpinQuantum.parse(s)
    key = cache_key(s.two_s, N, "chain", "min" if partition is None else partition)
    if cache is not None:
        hit = cache.get(key, config)
        if hit is not None:
            log.info("cache hit %s", key)
            return hit
    if partition is None:
        energy, results = min_biseparable(s, N, config)
        value = {"energy": float(energy), "argmin": argmin_partition(results),
                 "partitions": [_partition_record(r) for r in results]}
    else:
        r = solve_partition(PartitionSpec(s, N, partition), config)
        value = {"energy": float(r.energy), "argmin": partition, "partitions": [_partition_record(r)]}
    if cache is not None:
        cache.put(key, value, config)
    return value


def cached_minimum(config: RunConfig = DEFAULT_CONFIG, cache: ResultsCache | None = None):
    """A witness minima source backed by the results cache."""
    def source(s: SpinQuantum, k: int) -> float:
        return biseparable_record(s, k, config, cache)["energy"]
    return source


def table2_row(two_s: int, config: RunConfig = DEFAULT_CONFIG, cache: ResultsCache | None = None,
               sizes=TABLE2_SIZES) -> tuple[dict, list[Cell]]:
    s = SpinQuantum(two_s)
    ref = reference.TABLE2[two_s]
    row: dict = {"s": str(s), "two_s": two_s}
    cells: list[Cell] = []
    try:
        quad = minimize_quad_22(s, config)
    except Exception as exc:
        cells.append(Cell("table2", two_s, "e22", None, ref["e22"], error=str(exc)))
    else:
        row.update(e22=quad.energy, sector_22=[quad.two_M, quad.two_Mp],
                   a=[float(x) for x in quad.amps_a.a], phase_steps=_phase_label(quad.amps_a))
        cells.append(Cell("table2", two_s, "e22", quad.energy, ref["e22"]))
        cells += _amplitude_cells("table2", two_s, quad.amps_a.a, ref["a"])
    try:
        q13 = quad_13_minimum(s, config)
        row.update(e13=q13.energy, sector_13=q13.two_M)
        cells.append(Cell("table2", two_s, "e13", q13.energy, ref["e13"]))
    except Exception as exc:
        cells.append(Cell("table2", two_s, "e13", None, ref["e13"], error=str(exc)))
    try:
        # independent route to the 2|2 value through the self-consistent solver
        row["e22_selfconsistent"] = biseparable_record(s, 4, config, cache, partition=2)["energy"]
    except Exception as exc:
        log.warning("self-consistent 2|2 check failed for s=%s: %s", s, exc)
    row["ebs"], row["argmin"] = {}, {}
    for N in sizes:
        col = f"ebs{N}"
        try:
            rec = biseparable_record(s, N, config, cache)
        except Exception as exc:
            cells.append(Cell("table2", two_s, col, None, ref["ebs"].get(N), error=str(exc)))
            continue
        row["ebs"][str(N)] = rec["energy"]
        row["argmin"][str(N)] = rec["argmin"]
        cells.append(Cell("table2", two_s, col, rec["energy"], ref["ebs"].get(N)))
    return row, cells


def compute_table2(config: RunConfig = DEFAULT_CONFIG, cache: ResultsCache | None = None,
                   spins=reference.SPINS, threads: int = 1, sizes=TABLE2_SIZES) -> TableResult:
    out = _map_spins(lambda t: table2_row(t, config, cache, sizes), spins, threads)
    return TableResult("table2", [r for r, _ in out], [c for _, cs in out for c in cs])


"""Biseparable minima of open chains by self-consistent edge fields.

For a cut between sites ``N_A`` and ``N_A + 1`` the product state
``|psi_A> (x) |psi_B>`` couples to the bond only through the two edge-spin
expectation values. Choosing ``z`` along ``<s_{N_A}>`` leaves two dressed
eigenproblems,

    H_A + z_B s_z(N_A)      and      H_B + z_A s_z(N_A + 1),

whose ground states must reproduce the fields ``z_A >= 0`` and ``z_B <= 0``
that define them. The minimum energy at such a fixed point is
``E_A(z_B) + E_B(z_A) - z_A z_B``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .config import DEFAULT_CONFIG, RunConfig
from .eigensolver import SolverError, ground_state, ground_state_by_sector
from .hamiltonian import ChainSpec, dressed_block, heisenberg, sz_sectors
from .spin import SpinQuantum

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PartitionSpec:
    s: SpinQuantum
    N: int
    N_A: int

    def __post_init__(self):
        object.__setattr__(self, "s", SpinQuantum.parse(self.s))
        if not 1 <= self.N_A <= self.N - 1:
            raise ValueError(f"N_A must lie in 1..{self.N - 1}, got {self.N_A}")

    @property
    def N_B(self) -> int:
        return self.N - self.N_A

    def mirrored(self) -> PartitionSpec:
        return PartitionSpec(self.s, self.N, self.N - self.N_A)


@dataclass(frozen=True)
class FixedPoint:
    start: float
    z_A: float
    z_B: float
    energy: float
    sweeps: int
    converged: bool
    residual: float


@dataclass(frozen=True)
class BiseparableMinimum:
    partition: PartitionSpec
    z_A: float
    z_B: float
    energy: float
    energy_A: float  # E_A^0(z_B), lowest eigenvalue of the dressed block A
    energy_B: float
    start_point: float
    iterations: int
    converged: bool
    sector_A: int  # doubled M of the block ground states
    sector_B: int
    degenerate: bool = False
    fixed_points: tuple[FixedPoint, ...] = field(default=(), compare=False)

    def identity_error(self) -> float:
        return abs(self.energy - (self.energy_A + self.energy_B - self.z_A * self.z_B))

    def mirrored(self) -> BiseparableMinimum:
        """The same minimum seen from the reflected chain."""
        return replace(
            self, partition=self.partition.mirrored(), z_A=-self.z_B, z_B=-self.z_A,
            energy_A=self.energy_B, energy_B=self.energy_A,
            sector_A=-self.sector_B, sector_B=-self.sector_A,
            fixed_points=tuple(replace(fp, z_A=-fp.z_B, z_B=-fp.z_A) for fp in self.fixed_points),
        )


@dataclass(frozen=True)
class BlockSolution:
    energy: float
    expect: float  # <s_z> of the edge spin
    two_M: int
    degenerate: bool
    second_energy: float


class DressedBlock:
    """Ground states of an open block dressed by a field on its edge spin.

    The block is stored with its edge spin at site 0; by reflection symmetry
    the same data serve blocks whose edge sits on the right.

    Sectors are visited in order of the Weyl bound
    ``E_M(z) >= E_M(0) - |z| s`` and skipped once the bound exceeds the
    second-lowest energy found, so the result covers every sector.
    """

    def __init__(self, s: SpinQuantum, n_sites: int, config: RunConfig = DEFAULT_CONFIG):
        self.s = SpinQuantum.parse(s)
        self.n_sites = n_sites
        self.config = config
        spec = ChainSpec(self.s, n_sites)
        decomp = sz_sectors(heisenberg(spec), spec)
        local = self.s.ms()
        # edge spin is site 0, the most significant digit of the product index
        edge_m = np.repeat(local, self.s.dim ** (n_sites - 1))
        self.sectors = [(sec.two_M, sec.block.matrix, edge_m[sec.indices]) for sec in decomp]
        self._base: list[float] | None = None
        self._memo: dict[tuple[float, int], BlockSolution] = {}
        self.solves = 0

    @property
    def dim(self) -> int:
        return self.s.dim ** self.n_sites

    def base_energies(self) -> list[float]:
        if self._base is None:
            self._base = [ground_state(block, self.config).energy for _, block, _ in self.sectors]
        return self._base

    def solve(self, z: float, prefer: int = 1) -> BlockSolution:
        """Lowest state of ``H + z s_z(edge)``; ties resolved towards ``prefer * <s_z>`` maximal."""
        key = (float(z), prefer)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        tol = self.config.degeneracy_tol
        shift = abs(z) * self.s.value
        base = self.base_energies()
        order = sorted(range(len(self.sectors)), key=lambda k: base[k])
        found = []
        best = second = math.inf
        for k in order:
            if base[k] - shift > second + tol:
                break
            two_M, block, diag = self.sectors[k]
            mat = block + sp.diags(z * diag, format="csr") if z != 0 else block
            res = ground_state(mat, self.config, sector_M=two_M)
            self.solves += 1
            found.append((two_M, res, diag))
            for e in (res.energy, res.second_energy):
                if e < best:
                    best, second = e, best
                elif e < second:
                    second = e
        candidates = []
        for two_M, res, diag in found:
            if res.energy - best > tol:
                continue
            values = [float(res.vector ** 2 @ diag)]
            if res.second_vector is not None and res.second_energy - best <= tol:
                # degenerate in-sector pair: extremes of s_z over the 2d eigenspace
                V = np.column_stack([res.vector, res.second_vector])
                values = list(np.linalg.eigvalsh(V.T @ (diag[:, None] * V)))
            for v in values:
                candidates.append((prefer * v, -abs(two_M), two_M, v, res.energy))
        _, _, two_M, expect, energy = max(candidates)
        sol = BlockSolution(best, expect, two_M, len(candidates) > 1 or second - best <= tol, second)
        self._memo[key] = sol
        return sol


_BLOCKS: dict[tuple, DressedBlock] = {}


def dressed_block_solver(s: SpinQuantum, n_sites: int, config: RunConfig = DEFAULT_CONFIG) -> DressedBlock:
    """Shared :class:`DressedBlock` instances, one per (spin, size, numerics)."""
    key = (SpinQuantum.parse(s).two_s, n_sites, tuple(sorted((k, str(v)) for k, v in config.numerics().items())))
    block = _BLOCKS.get(key)
    if block is None:
        block = _BLOCKS[key] = DressedBlock(s, n_sites, config)
    return block


def clear_block_cache() -> None:
    _BLOCKS.clear()


def _iterate(A: DressedBlock, B: DressedBlock, z_B: float, config: RunConfig,
             known: list[FixedPoint], start: float) -> FixedPoint:
    lam = config.damping
    z_A = None
    signs: list[float] = []
    residual = math.inf
    for sweep in range(1, config.max_sweeps + 1):
        za_new = A.solve(z_B, +1).expect
        da = math.inf if z_A is None else za_new - z_A
        z_A = za_new if z_A is None else (1 - lam) * z_A + lam * za_new
        zb_new = B.solve(z_A, -1).expect
        db = zb_new - z_B
        z_B = (1 - lam) * z_B + lam * zb_new
        residual = max(abs(da), abs(db))
        if residual < config.z_tol:
            return _fixed_point(A, B, z_A, z_B, start, sweep, True, residual)
        signs.append(math.copysign(1.0, db) if db else 0.0)
        if len(signs) >= 4 and all(signs[-i] == -signs[-i - 1] != 0 for i in range(1, 4)):
            lam /= 2
            signs.clear()
        for fp in known:
            # rejoin a trajectory that already converged
            if fp.converged and max(abs(fp.z_A - z_A), abs(fp.z_B - z_B)) < 1e3 * config.z_tol:
                return replace(fp, start=start, sweeps=sweep + fp.sweeps)
    return _fixed_point(A, B, z_A, z_B, start, config.max_sweeps, False, residual)


def _fixed_point(A, B, z_A, z_B, start, sweeps, converged, residual) -> FixedPoint:
    energy = A.solve(z_B, +1).energy + B.solve(z_A, -1).energy - z_A * z_B
    return FixedPoint(start, z_A, z_B, energy, sweeps, converged, residual)


def solve_partition(p: PartitionSpec, config: RunConfig = DEFAULT_CONFIG) -> BiseparableMinimum:
    """Lowest self-consistent product-state energy for the cut after site ``N_A``."""
    s = p.s
    A = dressed_block_solver(s, p.N_A, config)
    B = dressed_block_solver(s, p.N_B, config)
    points: list[FixedPoint] = []
    for frac in config.start_fractions:
        fp = _iterate(A, B, -frac * s.value, config, points, -frac * s.value)
        log.debug("N=%d N_A=%d start %.3f -> E=%.12f (%s, %d sweeps)", p.N, p.N_A,
                  fp.start, fp.energy, "converged" if fp.converged else "open", fp.sweeps)
        points.append(fp)
    good = [fp for fp in points if fp.converged]
    if not good:
        best = min(points, key=lambda fp: fp.energy)
        raise SolverError(f"no start converged for N={p.N}, N_A={p.N_A}; best iterate "
                          f"E={best.energy:.10f} (z_A={best.z_A:.3e}, z_B={best.z_B:.3e}, "
                          f"residual {best.residual:.2e})")
    best = min(good, key=lambda fp: fp.energy)
    ra = A.solve(best.z_B, +1)
    rb = B.solve(best.z_A, -1)
    return BiseparableMinimum(
        partition=p, z_A=best.z_A, z_B=best.z_B, energy=best.energy,
        energy_A=ra.energy, energy_B=rb.energy, start_point=best.start,
        iterations=sum(fp.sweeps for fp in points), converged=True,
        sector_A=ra.two_M, sector_B=rb.two_M,
        degenerate=ra.degenerate or rb.degenerate, fixed_points=tuple(points),
    )


def min_biseparable(s, N: int, config: RunConfig = DEFAULT_CONFIG,
                    ) -> tuple[float, list[BiseparableMinimum]]:
    """Scan every consecutive cut of the ``N``-site chain; mirror cuts are reused."""
    s = SpinQuantum.parse(s)
    if N < 2:
        raise ValueError("need at least two sites")
    half = {}
    for n_a in range(1, N // 2 + 1):
        half[n_a] = solve_partition(PartitionSpec(s, N, n_a), config)
    results = []
    for n_a in range(1, N):
        results.append(half[n_a] if n_a in half else half[N - n_a].mirrored())
    return min(r.energy for r in results), results


def argmin_partition(results: list[BiseparableMinimum], tol: float = 1e-12) -> int:
    lowest = min(r.energy for r in results)
    return min(r.partition.N_A for r in results if r.energy - lowest <= tol)


@dataclass(frozen=True)
class Quad13Minimum:
    energy: float
    two_M: int
    sector_energies: dict[int, float]


def quad_13_minimum(s, config: RunConfig = DEFAULT_CONFIG) -> Quad13Minimum:
    """``|psi_1> (x) |psi_234>``: the three-spin block in the field ``-s`` of a stretched spin."""
    s = SpinQuantum.parse(s)
    spec = ChainSpec(s, 3)
    decomp = sz_sectors(dressed_block(spec, 0, -s.value), spec)
    gs, per = ground_state_by_sector(decomp, config)
    return Quad13Minimum(gs.energy, gs.sector_M, {m.two_M: m.energy for m in per})

"""Heisenberg chains and rings, edge-dressed blocks, and total-S_z sectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .spin import SparseOperator, SpinQuantum, embed, exchange, site_two_m, spin_matrix

TOPOLOGIES = ("chain", "ring")


@dataclass(frozen=True)
class ChainSpec:
    """Uniform spin-s chain or ring of N sites with unit antiferromagnetic exchange."""

    s: SpinQuantum
    N: int
    topology: str = "chain"

    def __post_init__(self):
        object.__setattr__(self, "s", SpinQuantum.parse(self.s))
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.topology not in TOPOLOGIES:
            raise ValueError(f"topology must be one of {TOPOLOGIES}")
        if self.topology == "ring" and self.N < 3:
            raise ValueError("a ring needs at least 3 sites")

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.s.dim,) * self.N

    @property
    def dim(self) -> int:
        return self.s.dim ** self.N

    def bonds(self) -> list[tuple[int, int]]:
        pairs = [(i, i + 1) for i in range(self.N - 1)]
        if self.topology == "ring":
            pairs.append((self.N - 1, 0))
        return pairs


def heisenberg(spec: ChainSpec) -> SparseOperator:
    """``H = sum_bonds s_i . s_j`` as a real symmetric sparse matrix."""
    d = spec.s.dim
    n = spec.dim
    H = sp.csr_matrix((n, n))
    pair = exchange(spec.s, spec.s)
    for i, j in spec.bonds():
        if j == i + 1:
            H = H + sp.kron(sp.kron(sp.identity(d ** i, format="csr"), pair),
                            sp.identity(d ** (spec.N - i - 2), format="csr"), format="csr")
        else:
            for a, b, w in (("z", "z", 1.0), ("plus", "minus", 0.5), ("minus", "plus", 0.5)):
                H = H + w * (embed(spin_matrix(spec.s, a), i, spec.dims).matrix
                             @ embed(spin_matrix(spec.s, b), j, spec.dims).matrix)
    H = sp.csr_matrix(H)
    H.eliminate_zeros()
    return SparseOperator(H, spec.dims)


def edge_sz(spec: ChainSpec, site: int) -> SparseOperator:
    return embed(spin_matrix(spec.s, "z"), site, spec.dims)


def dressed_block(spec: ChainSpec, edge_site: int, z: float) -> SparseOperator:
    """``H_block + z * s_z(edge_site)``, the block Hamiltonian seen in a mean field ``z``."""
    if spec.topology != "chain":
        raise ValueError("dressed blocks are open chains")
    if edge_site not in (0, spec.N - 1):
        raise ValueError(f"edge_site {edge_site} is not a boundary site of a {spec.N}-site block")
    return heisenberg(spec) + edge_sz(spec, edge_site) * z


def total_sz(spec: ChainSpec) -> SparseOperator:
    two_m = site_two_m([spec.s.two_s] * spec.N)
    return SparseOperator(sp.diags(two_m / 2.0, format="csr"), spec.dims)


def total_spin_squared(spec: ChainSpec) -> SparseOperator:
    """``S^2 = S_z^2 + (S_+ S_- + S_- S_+)/2`` for the whole chain."""
    sz = total_sz(spec).matrix
    splus = sp.csr_matrix((spec.dim, spec.dim))
    for i in range(spec.N):
        splus = splus + embed(spin_matrix(spec.s, "plus"), i, spec.dims).matrix
    sminus = splus.T.tocsr()
    return SparseOperator(sz @ sz + 0.5 * (splus @ sminus + sminus @ splus), spec.dims)


def neel_state(spec: ChainSpec) -> np.ndarray:
    """Product state ``|s, -s, s, ...>``."""
    d = spec.s.dim
    index = 0
    for i in range(spec.N):
        index = index * d + (0 if i % 2 == 0 else d - 1)
    v = np.zeros(spec.dim)
    v[index] = 1.0
    return v


@dataclass(frozen=True, eq=False)
class Sector:
    two_M: int
    indices: np.ndarray  # positions in the product basis
    block: SparseOperator

    @property
    def M(self) -> float:
        return self.two_M / 2

    @property
    def dim(self) -> int:
        return len(self.indices)


@dataclass(frozen=True, eq=False)
class SectorDecomposition:
    sectors: tuple[Sector, ...]
    full_dim: int

    def __iter__(self):
        return iter(self.sectors)

    def __len__(self):
        return len(self.sectors)

    def by_two_M(self, two_M: int) -> Sector:
        for sec in self.sectors:
            if sec.two_M == two_M:
                return sec
        raise KeyError(two_M)

    def reassemble(self) -> sp.csr_matrix:
        rows, cols, vals = [], [], []
        for sec in self.sectors:
            coo = sec.block.matrix.tocoo()
            rows.append(sec.indices[coo.row])
            cols.append(sec.indices[coo.col])
            vals.append(coo.data)
        return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(self.full_dim, self.full_dim))

    def embed_vector(self, two_M: int, vector: np.ndarray) -> np.ndarray:
        full = np.zeros(self.full_dim, dtype=np.asarray(vector).dtype)
        full[self.by_two_M(two_M).indices] = vector
        return full


class SectorMixingError(ValueError):
    """The operator does not conserve total S_z."""


def sz_sectors(H: SparseOperator, spec: ChainSpec, tol: float = 1e-10) -> SectorDecomposition:
    """Split ``H`` into total-S_z blocks (``M`` descending)."""
    two_m = site_two_m([spec.s.two_s] * spec.N)
    if H.dim != len(two_m):
        raise ValueError("operator dimension does not match the chain")
    coo = H.matrix.tocoo()
    mixing = coo.data[two_m[coo.row] != two_m[coo.col]]
    if mixing.size and float(np.abs(mixing).max()) > tol:
        raise SectorMixingError(f"[H, S_z] has entries up to {np.abs(mixing).max():.3e}")
    order = np.argsort(-two_m, kind="stable")
    permuted = H.matrix[order][:, order].tocsr()
    sorted_m = two_m[order]
    bounds = np.flatnonzero(np.diff(sorted_m)) + 1
    starts = np.concatenate(([0], bounds))
    stops = np.concatenate((bounds, [len(order)]))
    sectors = []
    for a, b in zip(starts, stops):
        block = permuted[a:b, a:b]
        sectors.append(Sector(int(sorted_m[a]), order[a:b], SparseOperator(block, (b - a,))))
    return SectorDecomposition(tuple(sectors), len(two_m))


def sector_dims(spec: ChainSpec) -> dict[int, int]:
    two_m = site_two_m([spec.s.two_s] * spec.N)
    vals, counts = np.unique(two_m, return_counts=True)
    return {int(v): int(c) for v, c in zip(vals[::-1], counts[::-1])}


def lowest_sector(spec: ChainSpec) -> int:
    """Doubled ``M`` of the smallest-|M| sector; it meets every SU(2) multiplet."""
    return (spec.s.two_s * spec.N) % 2


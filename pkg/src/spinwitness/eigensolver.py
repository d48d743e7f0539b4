"""Lowest eigenpairs of real symmetric matrices, whole or sector by sector."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .config import DEFAULT_CONFIG, RunConfig
from .hamiltonian import SectorDecomposition
from .spin import SparseOperator


class SolverError(RuntimeError):
    """An eigenproblem or optimizer failed to reach its tolerance."""


@dataclass(frozen=True, eq=False)
class GroundStateResult:
    energy: float
    vector: np.ndarray
    gap_to_next: float
    degenerate: bool
    sector_M: int | None  # doubled M, None for the unsplit matrix
    iterations: int
    residual: float
    second_energy: float = math.inf
    second_vector: np.ndarray | None = None

    @property
    def sector_label(self) -> str:
        if self.sector_M is None:
            return "full"
        return f"{self.sector_M // 2}" if self.sector_M % 2 == 0 else f"{self.sector_M}/2"


def _as_csr(H) -> sp.csr_matrix:
    if isinstance(H, SparseOperator):
        return H.matrix
    if sp.issparse(H):
        return sp.csr_matrix(H, dtype=float)
    return sp.csr_matrix(np.asarray(H, dtype=float))


def start_vector(n: int, seed: int) -> np.ndarray:
    v = np.random.default_rng(seed).standard_normal(n)
    return v / np.linalg.norm(v)


def _dense_lowest(mat: sp.csr_matrix) -> tuple[np.ndarray, np.ndarray]:
    n = mat.shape[0]
    dense = mat.toarray()
    top = min(1, n - 1)
    vals, vecs = scipy.linalg.eigh(dense, subset_by_index=[0, top])
    return vals, vecs


def _krylov_lowest(mat: sp.csr_matrix, config: RunConfig, v0: np.ndarray | None):
    n = mat.shape[0]
    count = [0]

    def matvec(x):
        count[0] += 1
        return mat @ x

    op = LinearOperator((n, n), matvec=matvec, dtype=float)
    if v0 is None:
        v0 = start_vector(n, config.seed)
    try:
        vals, vecs = eigsh(op, k=2, which="SA", v0=v0, ncv=min(n, 24), tol=1e-13,
                           maxiter=config.max_iter)
    except ArpackNoConvergence as exc:
        res = np.inf
        if len(exc.eigenvalues):
            e, v = exc.eigenvalues[0], exc.eigenvectors[:, 0]
            res = float(np.linalg.norm(mat @ v - e * v))
        raise SolverError(f"Krylov solver did not converge after {config.max_iter} restarts "
                          f"(dimension {n}, best residual {res:.3e})") from exc
    order = np.argsort(vals)
    return vals[order], vecs[:, order], count[0]


def ground_state(H, config: RunConfig = DEFAULT_CONFIG, v0: np.ndarray | None = None,
                 sector_M: int | None = None) -> GroundStateResult:
    """Lowest eigenpair plus the next eigenvalue (for gap and degeneracy)."""
    mat = _as_csr(H)
    n = mat.shape[0]
    if n == 0:
        raise ValueError("empty matrix")
    if n <= config.dense_threshold:
        vals, vecs = _dense_lowest(mat)
        iterations = 0
    else:
        vals, vecs, iterations = _krylov_lowest(mat, config, v0)
    energy = float(vals[0])
    vec = vecs[:, 0]
    vec = vec / np.linalg.norm(vec)
    # fix the overall sign so results are reproducible
    pivot = np.argmax(np.abs(vec))
    if vec[pivot] < 0:
        vec = -vec
    residual = float(np.linalg.norm(mat @ vec - energy * vec))
    if residual > config.eig_tol * max(1.0, abs(energy)):
        raise SolverError(f"eigenpair residual {residual:.3e} exceeds tolerance (dimension {n})")
    if len(vals) > 1:
        second = float(vals[1])
        second_vec = vecs[:, 1]
    else:
        second, second_vec = math.inf, None
    gap = max(0.0, second - energy)
    return GroundStateResult(energy, vec, gap, gap <= config.degeneracy_tol, sector_M,
                             iterations, residual, second, second_vec)


@dataclass(frozen=True)
class SectorMinimum:
    two_M: int
    energy: float
    second_energy: float


def _sector_preference(two_M: int) -> tuple[int, int]:
    return (abs(two_M), -two_M)


def ground_state_by_sector(decomp: SectorDecomposition, config: RunConfig = DEFAULT_CONFIG,
                           ) -> tuple[GroundStateResult, list[SectorMinimum]]:
    """Global ground state over all sectors plus every sector's lowest energy.

    Sectors whose minima agree within ``degeneracy_tol`` are resolved in favour
    of the smallest ``|M|`` (then positive ``M``).
    """
    results = []
    for sec in decomp:
        results.append(ground_state(sec.block, config, sector_M=sec.two_M))
    per_sector = [SectorMinimum(r.sector_M, r.energy, r.second_energy) for r in results]
    lowest = min(r.energy for r in results)
    ties = [r for r in results if r.energy - lowest <= config.degeneracy_tol]
    best = min(ties, key=lambda r: _sector_preference(r.sector_M))
    others = [r.energy for r in results if r is not best] + [best.second_energy]
    second = min(others) if others else math.inf
    gap = max(0.0, second - best.energy)
    full_vec = decomp.embed_vector(best.sector_M, best.vector)
    combined = GroundStateResult(best.energy, full_vec, gap, gap <= config.degeneracy_tol,
                                 best.sector_M, sum(r.iterations for r in results),
                                 best.residual, second, None)
    return combined, per_sector

"""Spin operators, tensor-product embedding and Clebsch-Gordan algebra.

Conventions used throughout the package:

* Half-integers are stored doubled (``two_s``, ``two_m``), never as floats.
* The local basis of a spin ``s`` is ordered by descending ``m``: index ``k``
  carries ``m = s - k``.
* Product bases put site 0 in the most significant position (``kron`` order).
* Clebsch-Gordan coefficients follow the Condon-Shortley phase convention.
* Coupled two-spin bases are ordered M-major: ``M`` descending, then ``S``
  ascending within each ``M`` (see :data:`COUPLED_ORDERING`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

COUPLED_ORDERING = "M descending, S ascending"


@dataclass(frozen=True, order=True)
class SpinQuantum:
    """A spin quantum number stored exactly as ``two_s = 2 s``."""

    two_s: int

    def __post_init__(self):
        if not isinstance(self.two_s, (int, np.integer)) or self.two_s < 0:
            raise ValueError(f"two_s must be a non-negative integer, got {self.two_s!r}")
        object.__setattr__(self, "two_s", int(self.two_s))

    @classmethod
    def parse(cls, text: str | int | SpinQuantum) -> SpinQuantum:
        """Parse ``"p/2"`` or an integer string into a spin value."""
        if isinstance(text, SpinQuantum):
            return text
        if isinstance(text, (int, np.integer)):
            return cls(2 * int(text))
        text = str(text).strip()
        if "/" in text:
            num, den = text.split("/", 1)
            if den.strip() != "2" or not num.strip().isdigit():
                raise ValueError(f"spin must look like 'p/2' or an integer, got {text!r}")
            return cls(int(num))
        if not text.isdigit():
            raise ValueError(f"spin must look like 'p/2' or an integer, got {text!r}")
        return cls(2 * int(text))

    @property
    def value(self) -> float:
        return self.two_s / 2

    @property
    def dim(self) -> int:
        return self.two_s + 1

    def two_ms(self) -> np.ndarray:
        """Doubled magnetic quantum numbers in basis order (descending)."""
        return np.arange(self.two_s, -self.two_s - 1, -2)

    def ms(self) -> np.ndarray:
        return self.two_ms() / 2

    def __str__(self) -> str:
        return f"{self.two_s // 2}" if self.two_s % 2 == 0 else f"{self.two_s}/2"


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """Real sparse matrix acting on a tensor product of spin spaces."""

    matrix: sp.csr_matrix
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        mat = sp.csr_matrix(self.matrix, dtype=float)
        n = math.prod(dims)
        if mat.shape != (n, n):
            raise ValueError(f"matrix shape {mat.shape} does not match dims {dims}")
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def triplets(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        coo = self.matrix.tocoo()
        return coo.row, coo.col, coo.data

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        diff = self.matrix - self.matrix.T
        return diff.nnz == 0 or float(abs(diff).max()) <= tol

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def __add__(self, other: SparseOperator) -> SparseOperator:
        _check_dims(self, other)
        return SparseOperator(self.matrix + other.matrix, self.dims)

    def __sub__(self, other: SparseOperator) -> SparseOperator:
        _check_dims(self, other)
        return SparseOperator(self.matrix - other.matrix, self.dims)

    def __mul__(self, scalar: float) -> SparseOperator:
        return SparseOperator(self.matrix * float(scalar), self.dims)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, SparseOperator):
            _check_dims(self, other)
            return SparseOperator(self.matrix @ other.matrix, self.dims)
        return self.matrix @ other

    def expect(self, vector: np.ndarray) -> float:
        """``<v|O|v>`` for a real or complex vector."""
        v = np.asarray(vector)
        return float(np.real(np.vdot(v, self.matrix @ v)))


def _check_dims(a: SparseOperator, b: SparseOperator) -> None:
    if a.dims != b.dims:
        raise ValueError(f"dimension mismatch: {a.dims} vs {b.dims}")


def spin_matrix(s: SpinQuantum, which: str) -> SparseOperator:
    """Single-spin operator ``which`` in {z, plus, minus, x, iy}.

    ``iy`` is the real antisymmetric matrix ``i s_y = (s_+ - s_-)/2``; ``y`` is
    accepted as an alias since complex ``s_y`` is never built.
    """
    s = SpinQuantum.parse(s)
    n = s.dim
    sval = s.value
    ms = s.ms()
    if which == "z":
        mat = sp.diags(ms, 0, shape=(n, n))
    elif which in ("plus", "minus", "x", "iy", "y"):
        # s_+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>; |m+1> sits one index above |m>
        lower_ms = ms[1:]
        amps = np.sqrt(sval * (sval + 1) - lower_ms * (lower_ms + 1))
        plus = sp.diags(amps, 1, shape=(n, n))
        minus = plus.T
        if which == "plus":
            mat = plus
        elif which == "minus":
            mat = minus
        elif which == "x":
            mat = (plus + minus) / 2
        else:
            mat = (plus - minus) / 2
    elif which == "identity":
        mat = sp.identity(n)
    else:
        raise ValueError(f"unknown spin component {which!r}")
    return SparseOperator(sp.csr_matrix(mat), (n,))


def embed(op: SparseOperator | np.ndarray | sp.spmatrix, site: int, dims: Sequence[int]) -> SparseOperator:
    """Kronecker-embed a single-site operator at ``site`` with identities elsewhere."""
    dims = tuple(int(d) for d in dims)
    mat = op.matrix if isinstance(op, SparseOperator) else sp.csr_matrix(op)
    if not 0 <= site < len(dims):
        raise IndexError(f"site {site} outside chain of {len(dims)} sites")
    if mat.shape != (dims[site], dims[site]):
        raise ValueError(f"operator of shape {mat.shape} cannot act on site of dimension {dims[site]}")
    left = math.prod(dims[:site])
    right = math.prod(dims[site + 1:])
    full = sp.kron(sp.kron(sp.identity(left, format="csr"), mat, format="csr"),
                   sp.identity(right, format="csr"), format="csr")
    return SparseOperator(full, dims)


def exchange(s1: SpinQuantum, s2: SpinQuantum) -> sp.csr_matrix:
    """Two-site ``s1 . s2 = s1z s2z + (s1+ s2- + s1- s2+)/2`` as a real matrix."""
    z1, p1, m1 = (spin_matrix(s1, w).matrix for w in ("z", "plus", "minus"))
    z2, p2, m2 = (spin_matrix(s2, w).matrix for w in ("z", "plus", "minus"))
    return sp.csr_matrix(sp.kron(z1, z2) + 0.5 * (sp.kron(p1, m2) + sp.kron(m1, p2)))


def _check_qn(two_j: int, two_m: int, name: str) -> None:
    if two_j < 0 or abs(two_m) > two_j or (two_j - two_m) % 2:
        raise ValueError(f"invalid quantum numbers for {name}: 2j={two_j}, 2m={two_m}")


@lru_cache(maxsize=None)
def _cg_doubled(tj1: int, tj2: int, tm1: int, tm2: int, tJ: int, tM: int) -> float:
    if tm1 + tm2 != tM:
        return 0.0
    if not abs(tj1 - tj2) <= tJ <= tj1 + tj2 or (tj1 + tj2 + tJ) % 2:
        return 0.0
    f = math.factorial
    # every argument below is an integer once the selection rules hold
    a = (tj1 + tj2 - tJ) // 2
    b = (tj1 - tm1) // 2
    c = (tj2 + tm2) // 2
    d = (tJ - tj2 + tm1) // 2
    e = (tJ - tj1 - tm2) // 2
    pref = Fraction(
        (tJ + 1) * f((tJ + tj1 - tj2) // 2) * f((tJ - tj1 + tj2) // 2) * f(a),
        f((tj1 + tj2 + tJ) // 2 + 1),
    )
    pref *= (f((tJ + tM) // 2) * f((tJ - tM) // 2) * f(b) * f((tj1 + tm1) // 2)
             * f((tj2 - tm2) // 2) * f(c))
    total = Fraction(0)
    for k in range(max(0, -d, -e), min(a, b, c) + 1):
        total += Fraction((-1) ** k, f(k) * f(a - k) * f(b - k) * f(c - k) * f(d + k) * f(e + k))
    if total == 0:
        return 0.0
    return math.copysign(math.sqrt(pref * total * total), total)


def clebsch_gordan(j1, j2, m1, m2, J, M) -> float:
    """``<j1 m1; j2 m2 | J M>`` for quantum numbers given as doubled integers.

    All six arguments are ``2j`` / ``2m`` integers (``SpinQuantum`` is accepted
    for the ``j`` slots). Evaluated with the Racah sum in exact rational
    arithmetic and converted to float once.
    """
    tj1, tj2, tJ = (x.two_s if isinstance(x, SpinQuantum) else int(x) for x in (j1, j2, J))
    tm1, tm2, tM = int(m1), int(m2), int(M)
    _check_qn(tj1, tm1, "j1")
    _check_qn(tj2, tm2, "j2")
    _check_qn(tJ, tM, "J")
    return _cg_doubled(tj1, tj2, tm1, tm2, tJ, tM)


def cg_table(j1: SpinQuantum, j2: SpinQuantum) -> dict[tuple[int, int, int, int], float]:
    """All nonzero coefficients keyed by doubled ``(m1, m2, J, M)``."""
    table = {}
    for tJ in range(abs(j1.two_s - j2.two_s), j1.two_s + j2.two_s + 1, 2):
        for tm1 in j1.two_ms():
            for tm2 in j2.two_ms():
                tM = int(tm1 + tm2)
                if abs(tM) > tJ:
                    continue
                val = _cg_doubled(j1.two_s, j2.two_s, int(tm1), int(tm2), tJ, tM)
                if val != 0.0:
                    table[(int(tm1), int(tm2), tJ, tM)] = val
    return table


def coupled_labels(s1: SpinQuantum, s2: SpinQuantum) -> list[tuple[int, int]]:
    """Doubled ``(S, M)`` labels of the coupled basis in column order."""
    top = s1.two_s + s2.two_s
    labels = []
    for tM in range(top, -top - 1, -2):
        for tS in range(abs(s1.two_s - s2.two_s), top + 1, 2):
            if tS >= abs(tM):
                labels.append((tS, tM))
    return labels


def coupled_transform(s1: SpinQuantum, s2: SpinQuantum) -> SparseOperator:
    """Orthogonal ``U`` with columns ``|S, M>`` expressed in the product basis.

    ``U[:, k] = sum_{m1, m2} <s1 m1; s2 m2 | S M> |m1, m2>`` with ``(S, M)`` the
    ``k``-th entry of :func:`coupled_labels`.
    """
    s1, s2 = SpinQuantum.parse(s1), SpinQuantum.parse(s2)
    labels = coupled_labels(s1, s2)
    col_of = {lab: k for k, lab in enumerate(labels)}
    rows, cols, vals = [], [], []
    for i1, tm1 in enumerate(s1.two_ms()):
        for i2, tm2 in enumerate(s2.two_ms()):
            tM = int(tm1 + tm2)
            for tS in range(max(abs(s1.two_s - s2.two_s), abs(tM)), s1.two_s + s2.two_s + 1, 2):
                c = _cg_doubled(s1.two_s, s2.two_s, int(tm1), int(tm2), tS, tM)
                if c != 0.0:
                    rows.append(i1 * s2.dim + i2)
                    cols.append(col_of[(tS, tM)])
                    vals.append(c)
    n = s1.dim * s2.dim
    return SparseOperator(sp.csr_matrix((vals, (rows, cols)), shape=(n, n)), (s1.dim, s2.dim))


def eta(s: SpinQuantum) -> float:
    """``sqrt(s(s+1)/3)``, the size of ``<1,0| s_z |0,0>`` for two spins ``s``."""
    s = SpinQuantum.parse(s)
    if s.two_s == 0:
        raise ValueError("eta is undefined for s = 0")
    return math.sqrt(s.value * (s.value + 1) / 3)


def site_two_m(dims_two_s: Iterable[int]) -> np.ndarray:
    """Doubled total ``M`` of every product-basis state of a chain."""
    total = np.zeros(1, dtype=np.int64)
    for two_s in dims_two_s:
        local = np.arange(two_s, -two_s - 1, -2, dtype=np.int64)
        total = (total[:, None] + local[None, :]).ravel()
    return total

"""Minimization in the coupled |S, M> basis of a spin pair.

A pair state with fixed total projection ``M`` is written as
``sum_S a_S exp(i alpha_S) |S, M>``. Two functions of these amplitudes carry
the whole energy:

* ``f_M = <s_z>`` of the spin facing the rest of the chain (the *edge* spin),
* ``g_M = <s_edge . s_other>``, diagonal in ``S``.

The edge spin is always coupled second, ``|s_other m_o; s_edge m_e> -> |S, M>``.
With Condon-Shortley coefficients this makes ``<S, M| s_z |S+1, M>`` negative,
so an edge spin pushed towards ``+z`` is reached by amplitudes whose phases
step by pi from one ``S`` to the next.

Every matrix element involved is real, hence optimal amplitudes can be taken
real with signs: the optimizers below work with signed coefficients on the
unit sphere and recover ``alpha_S`` in {0, pi} afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .config import DEFAULT_CONFIG, RunConfig
from .spin import SpinQuantum, _cg_doubled


def pair_labels(s_edge: SpinQuantum, s_other: SpinQuantum, two_M: int) -> tuple[int, ...]:
    """Doubled total spins ``S`` available at projection ``M``, ascending."""
    lo = max(abs(s_edge.two_s - s_other.two_s), abs(two_M))
    hi = s_edge.two_s + s_other.two_s
    if abs(two_M) > hi or (hi - two_M) % 2:
        raise ValueError(f"no pair states with 2M={two_M}")
    return tuple(range(lo, hi + 1, 2))


def pair_projections(s_edge: SpinQuantum, s_other: SpinQuantum) -> tuple[int, ...]:
    top = s_edge.two_s + s_other.two_s
    return tuple(range(top, -top - 1, -2))


@lru_cache(maxsize=None)
def _edge_sz_matrix(te: int, to: int, two_M: int) -> np.ndarray:
    labels = pair_labels(SpinQuantum(te), SpinQuantum(to), two_M)
    n = len(labels)
    Z = np.zeros((n, n))
    for tme in range(-te, te + 1, 2):
        tmo = two_M - tme
        if abs(tmo) > to:
            continue
        col = np.array([_cg_doubled(to, te, tmo, tme, tS, two_M) for tS in labels])
        Z += (tme / 2) * np.outer(col, col)
    Z.setflags(write=False)
    return Z


def edge_sz_matrix(s_edge: SpinQuantum, s_other: SpinQuantum, two_M: int) -> np.ndarray:
    """``<S, M| s_z(edge) |S', M>`` assembled from Clebsch-Gordan sums."""
    return _edge_sz_matrix(s_edge.two_s, s_other.two_s, two_M)


def bond_diagonal(s_edge: SpinQuantum, s_other: SpinQuantum, two_M: int) -> np.ndarray:
    """``[S(S+1) - s_e(s_e+1) - s_o(s_o+1)]/2`` for every ``S`` in the sector."""
    S = np.array(pair_labels(s_edge, s_other, two_M)) / 2
    se, so = s_edge.value, s_other.value
    return (S * (S + 1) - se * (se + 1) - so * (so + 1)) / 2


@dataclass(frozen=True, eq=False)
class CoupledAmplitudes:
    """Magnitudes ``a_S`` and phases ``alpha_S`` of one M-sector pair state."""

    two_M: int
    two_S: tuple[int, ...]
    a: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        alpha = np.mod(np.asarray(self.alpha, dtype=float), 2 * math.pi)
        if a.shape != alpha.shape or a.shape != (len(self.two_S),):
            raise ValueError("amplitude, phase and label lengths differ")
        if np.any(a < 0):
            raise ValueError("magnitudes must be non-negative")
        if abs(float(a @ a) - 1.0) > 1e-12:
            raise ValueError(f"amplitudes not normalized: sum a^2 = {a @ a!r}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "two_S", tuple(int(x) for x in self.two_S))

    @classmethod
    def from_signed(cls, two_M: int, two_S, c: np.ndarray) -> CoupledAmplitudes:
        c = np.asarray(c, dtype=float)
        c = c / np.linalg.norm(c)
        lead = np.flatnonzero(np.abs(c) > 1e-12)
        if lead.size and c[lead[0]] < 0:
            c = -c
        return cls(two_M, tuple(two_S), np.abs(c), np.where(c < 0, math.pi, 0.0))

    @property
    def M(self) -> float:
        return self.two_M / 2

    def complex_coefficients(self) -> np.ndarray:
        return self.a * np.exp(1j * self.alpha)

    def phase_steps(self, floor: float = 1e-8) -> np.ndarray:
        """``alpha_{S+1} - alpha_S`` modulo 2 pi wherever both magnitudes exceed ``floor``."""
        steps = np.mod(np.diff(self.alpha), 2 * math.pi)
        keep = (self.a[:-1] > floor) & (self.a[1:] > floor)
        return steps[keep]

    def by_S(self) -> dict[float, float]:
        return {tS / 2: float(x) for tS, x in zip(self.two_S, self.a)}


def _hermitian_form(amps: CoupledAmplitudes, matrix: np.ndarray) -> float:
    a, alpha = amps.a, amps.alpha
    cosines = np.cos(alpha[:, None] - alpha[None, :])
    return float(np.sum(a[:, None] * a[None, :] * cosines * matrix))


def f_M(amps: CoupledAmplitudes, s: SpinQuantum, s_other: SpinQuantum | None = None) -> float:
    """``<s_z>`` of the edge spin in the pair state ``amps``."""
    s = SpinQuantum.parse(s)
    s_other = s if s_other is None else SpinQuantum.parse(s_other)
    return _hermitian_form(amps, edge_sz_matrix(s, s_other, amps.two_M))


def g_M(amps: CoupledAmplitudes, s: SpinQuantum, s_other: SpinQuantum | None = None) -> float:
    """``<s_edge . s_other>`` in the pair state ``amps``."""
    s = SpinQuantum.parse(s)
    s_other = s if s_other is None else SpinQuantum.parse(s_other)
    return float(amps.a ** 2 @ bond_diagonal(s, s_other, amps.two_M))


def tripartite_form(s: SpinQuantum, two_M: int) -> np.ndarray:
    """Matrix of ``-s f_M + g_M`` in signed coefficients of sector ``M``."""
    return -s.value * edge_sz_matrix(s, s, two_M) + np.diag(bond_diagonal(s, s, two_M))


def tripartite_energy(amps: CoupledAmplitudes, s: SpinQuantum) -> float:
    return -SpinQuantum.parse(s).value * f_M(amps, s) + g_M(amps, s)


# --- conjugate gradient on products of unit spheres --------------------------

@dataclass
class SphereCGResult:
    x: list[np.ndarray]
    value: float
    grad_norm: float
    iterations: int
    converged: bool


def _project(xs, gs):
    return [g - (g @ x) * x for x, g in zip(xs, gs)]


def _dot(us, vs) -> float:
    return float(sum(u @ v for u, v in zip(us, vs)))


def _retract(xs, ps, t):
    out = []
    for x, p in zip(xs, ps):
        y = x + t * p
        out.append(y / np.linalg.norm(y))
    return out


def _line_search(fg, xs, ps, slope0: float) -> float:
    """First stationary point of ``t -> E(retract(x, t p))`` for ``t > 0``."""

    def dphi(t):
        ys = _retract(xs, ps, t)
        _, gs = fg(ys)
        rgs = _project(ys, gs)
        total = 0.0
        for x, p, y, rg in zip(xs, ps, ys, rgs):
            total += (rg @ (p - (y @ p) * y)) / np.linalg.norm(x + t * p)
        return total

    pmax = max(float(np.linalg.norm(p)) for p in ps)
    t_lo, t_hi = 0.0, min(1.0, 0.5 / pmax)
    d_hi = dphi(t_hi)
    while d_hi < 0:
        t_lo, t_hi = t_hi, 2 * t_hi
        if t_hi * pmax > 1e8:
            return t_hi
        d_hi = dphi(t_hi)
    if d_hi == 0:
        return t_hi
    if t_lo == 0.0 and slope0 >= 0:
        return 0.0
    return brentq(dphi, t_lo, t_hi, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200)


def sphere_cg(fg, x0: list[np.ndarray], gtol: float = 1e-10, max_iter: int = 10_000) -> SphereCGResult:
    """Riemannian Polak-Ribiere+ conjugate gradient on a product of unit spheres.

    ``fg(xs) -> (value, [ambient gradients])``. Directions are transported by
    projection onto the new tangent space; the line search locates the first
    zero of the directional derivative along the normalized retraction.
    """
    xs = [np.asarray(x, dtype=float) / np.linalg.norm(x) for x in x0]
    n_free = sum(len(x) - 1 for x in xs)
    value, gs = fg(xs)
    rg = _project(xs, gs)
    gnorm2 = _dot(rg, rg)
    if n_free == 0:
        return SphereCGResult(xs, value, 0.0, 0, True)
    ps = [-r for r in rg]
    it = 0
    stalled = 0
    while it < max_iter:
        if math.sqrt(gnorm2) < gtol:
            break
        slope = _dot(rg, ps)
        if slope >= 0:
            ps = [-r for r in rg]
            slope = -gnorm2
        t = _line_search(fg, xs, ps, slope)
        new_xs = _retract(xs, ps, t)
        new_value, new_gs = fg(new_xs)
        new_rg = _project(new_xs, new_gs)
        new_gnorm2 = _dot(new_rg, new_rg)
        it += 1
        stalled = stalled + 1 if new_value >= value and new_gnorm2 >= gnorm2 else 0
        if stalled >= 5:
            # rounding floor reached: the gradient cannot shrink any further
            break
        transported_rg = _project(new_xs, rg)
        transported_p = _project(new_xs, ps)
        beta = max(0.0, _dot(new_rg, [a - b for a, b in zip(new_rg, transported_rg)]) / gnorm2)
        if it % max(n_free, 1) == 0:
            beta = 0.0
        ps = [-r + beta * p for r, p in zip(new_rg, transported_p)]
        xs, value, rg, gnorm2 = new_xs, new_value, new_rg, new_gnorm2
    gnorm = math.sqrt(gnorm2)
    return SphereCGResult(xs, value, gnorm, it, gnorm < gtol)


def _seed_words(*values: int) -> list[int]:
    return [2 * abs(int(v)) + (v < 0) for v in values]


def _starts(n: int, count: int, *seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(_seed_words(*seed))
    out = []
    for _ in range(count):
        v = rng.standard_normal(n)
        out.append(v / np.linalg.norm(v))
    return out


# --- tripartite problem ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TripartiteMinimum:
    s: SpinQuantum
    energy: float
    two_M: int
    amplitudes: CoupledAmplitudes
    e12: float  # -s f at the optimum
    e23: float  # g at the optimum
    sector_energies: dict[int, float] = field(default_factory=dict)
    certified: bool = True
    grad_norm: float = 0.0


def quadratic_objective(Q):
    """``x -> (x^T Q x, 2 Q x)`` in the list form used by :func:`sphere_cg`."""
    def fg(xs):
        (x,) = xs
        Qx = Q @ x
        return float(x @ Qx), [2 * Qx]
    return fg


def minimize_sector_form(Q: np.ndarray, config: RunConfig = DEFAULT_CONFIG,
                         salt: int = 0) -> SphereCGResult:
    """Multi-start sphere CG minimum of ``x^T Q x`` with ``|x| = 1``."""
    best = None
    for x0 in _starts(Q.shape[0], config.cg_starts, config.seed, salt):
        res = sphere_cg(quadratic_objective(Q), [x0], config.cg_gtol, config.cg_max_iter)
        if best is None or res.value < best.value - 1e-13 or (
                abs(res.value - best.value) <= 1e-13 and res.grad_norm < best.grad_norm):
            best = res
    return best


def minimize_tripartite(s, config: RunConfig = DEFAULT_CONFIG) -> TripartiteMinimum:
    """Lowest ``-s f_M + g_M`` over all sectors ``M`` of the pair (2, 3)."""
    s = SpinQuantum.parse(s)
    if s.two_s == 0:
        raise ValueError("spin must be positive")
    per_sector: dict[int, SphereCGResult] = {}
    for two_M in pair_projections(s, s):
        per_sector[two_M] = minimize_sector_form(tripartite_form(s, two_M), config, salt=two_M)
    lowest = min(r.value for r in per_sector.values())
    ties = [m for m, r in per_sector.items() if r.value - lowest <= config.degeneracy_tol]
    two_M = min(ties, key=lambda m: (abs(m), -m))
    best = per_sector[two_M]
    amps = CoupledAmplitudes.from_signed(two_M, pair_labels(s, s, two_M), best.x[0])
    f = f_M(amps, s)
    g = g_M(amps, s)
    return TripartiteMinimum(s, best.value, two_M, amps, -s.value * f, g,
                             {m: r.value for m, r in per_sector.items()},
                             best.converged, best.grad_norm)


@dataclass(frozen=True)
class ClosedForm:
    energy: float
    a: tuple[float, ...] | None = None


def closed_form_tripartite(s) -> ClosedForm:
    """Analytic tripartite minima, available for s = 1/2 and s = 1."""
    s = SpinQuantum.parse(s)
    if s.two_s == 1:
        r5 = math.sqrt(5)
        return ClosedForm(-(1 + r5) / 4, (math.sqrt(0.5 + 1 / r5), math.sqrt(0.5 - 1 / r5)))
    if s.two_s == 2:
        phi = math.acos(1 / (10 * math.sqrt(10)))
        return ClosedForm(-2 / 3 * (1 + math.sqrt(5 / 2) * (math.cos(phi / 3) + math.sqrt(3) * math.sin(phi / 3))))
    raise ValueError(f"no closed form for s = {s}")


# --- 2|2 quadripartite problem -------------------------------------------------

@dataclass(frozen=True, eq=False)
class QuadMinimum:
    s: SpinQuantum
    energy: float
    two_M: int
    two_Mp: int
    amps_a: CoupledAmplitudes  # pair (1, 2), edge spin 2
    amps_b: CoupledAmplitudes  # pair (4, 3), edge spin 3
    f_a: float
    f_b: float
    pair_energies: dict[tuple[int, int], float] = field(default_factory=dict)
    certified: bool = True
    grad_norm: float = 0.0


def _bilinear_parts(s: SpinQuantum, two_M: int):
    return edge_sz_matrix(s, s, two_M), np.diag(bond_diagonal(s, s, two_M))


def _lowest_vector(mat: np.ndarray) -> np.ndarray:
    _, vecs = np.linalg.eigh(mat)
    return vecs[:, 0]


def quad_22_objective(s: SpinQuantum, two_M: int, two_Mp: int):
    """``(c, d) -> (g(c) + f(c) f(d) + g(d), gradients)`` on signed coefficients."""
    Za, Ga = _bilinear_parts(s, two_M)
    Zb, Gb = _bilinear_parts(s, two_Mp)

    def fg(xs):
        c, d = xs
        fa, fb = c @ Za @ c, d @ Zb @ d
        value = float(c @ Ga @ c + fa * fb + d @ Gb @ d)
        return value, [2 * (Ga @ c) + 2 * fb * (Za @ c), 2 * (Gb @ d) + 2 * fa * (Zb @ d)]
    return fg


def minimize_pair_sectors(s: SpinQuantum, two_M: int, two_Mp: int, config: RunConfig = DEFAULT_CONFIG,
                          max_alternations: int = 500) -> SphereCGResult:
    """Minimum of ``g(c) + f(c) f(d) + g(d)`` for sectors ``(M, M')``."""
    Za, Ga = _bilinear_parts(s, two_M)
    Zb, Gb = _bilinear_parts(s, two_Mp)
    fg = quad_22_objective(s, two_M, two_Mp)

    best = None
    starts = zip(_starts(len(Ga), config.cg_starts, config.seed, two_M, two_Mp, 0),
                 _starts(len(Gb), config.cg_starts, config.seed, two_M, two_Mp, 1))
    for c, d in starts:
        value = fg([c, d])[0]
        for _ in range(max_alternations):
            c = _lowest_vector(Ga + (d @ Zb @ d) * Za)
            d = _lowest_vector(Gb + (c @ Za @ c) * Zb)
            new_value = fg([c, d])[0]
            done = value - new_value <= 1e-15 * max(1.0, abs(new_value))
            value = new_value
            if done:
                break
        res = sphere_cg(fg, [c, d], config.cg_gtol, config.cg_max_iter)
        if best is None or res.value < best.value - 1e-13 or (
                abs(res.value - best.value) <= 1e-13 and res.grad_norm < best.grad_norm):
            best = res
    return best


def minimize_quad_22(s, config: RunConfig = DEFAULT_CONFIG) -> QuadMinimum:
    """Lowest energy of ``|psi_12> (x) |psi_34>`` on the open four-spin chain."""
    s = SpinQuantum.parse(s)
    if s.two_s == 0:
        raise ValueError("spin must be positive")
    results = {}
    for two_M in pair_projections(s, s):
        for two_Mp in pair_projections(s, s):
            key = (two_M, two_Mp)
            # spin flip and block exchange leave the energy unchanged
            twin = next((k for k in ((-two_M, -two_Mp), (two_Mp, two_M), (-two_Mp, -two_M))
                         if k in results), None)
            if twin is not None and twin != key:
                results[key] = None
                continue
            results[key] = minimize_pair_sectors(s, two_M, two_Mp, config)
    # fill symmetric partners with their twin's value
    values = {}
    for key, res in results.items():
        if res is not None:
            values[key] = res.value
    for (m, mp), res in results.items():
        if res is None:
            for k in ((-m, -mp), (mp, m), (-mp, -m)):
                if k in values:
                    values[(m, mp)] = values[k]
                    break
    computed = {k: r for k, r in results.items() if r is not None}
    lowest = min(r.value for r in computed.values())
    ties = [k for k, r in computed.items() if r.value - lowest <= config.degeneracy_tol]
    key = min(ties, key=lambda k: (abs(k[0]) + abs(k[1]), abs(k[0]), -k[0], -k[1]))
    best = computed[key]
    c, d = best.x
    Za, _ = _bilinear_parts(s, key[0])
    Zb, _ = _bilinear_parts(s, key[1])
    if c @ Za @ c < 0:
        # orient the pair so that the edge spin of block A points along +z
        key = (-key[0], -key[1])
        c, d = _flip_sector(s, key[0], c), _flip_sector(s, key[1], d)
        Za, _ = _bilinear_parts(s, key[0])
        Zb, _ = _bilinear_parts(s, key[1])
    amps_a = CoupledAmplitudes.from_signed(key[0], pair_labels(s, s, key[0]), c)
    amps_b = CoupledAmplitudes.from_signed(key[1], pair_labels(s, s, key[1]), d)
    return QuadMinimum(s, best.value, key[0], key[1], amps_a, amps_b,
                       float(c @ Za @ c), float(d @ Zb @ d), values,
                       best.converged, best.grad_norm)


def _flip_sector(s: SpinQuantum, two_M_target: int, c: np.ndarray) -> np.ndarray:
    """Image of the coefficients under flipping both spins (M -> -M).

    Flipping maps ``|S, M>`` to ``(-1)^(2s - S) |S, -M>`` up to a global sign
    for two equal spins; ``s_z`` changes sign while the bond term is untouched.
    """
    labels = pair_labels(s, s, two_M_target)
    signs = np.array([(-1) ** ((2 * s.two_s - tS) // 2) for tS in labels], dtype=float)
    return signs * c

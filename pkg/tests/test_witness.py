import itertools
import math

import numpy as np
import pytest

from spinwitness.hamiltonian import ChainSpec, heisenberg
from spinwitness.selfconsistent import min_biseparable
from spinwitness.spin import SpinQuantum, spin_matrix
from spinwitness.witness import (MIXED_STATE_NOTE, IntractableSystem, UnphysicalEnergy, chain_ground_energy,
                                 classify, decompose, energies, gap_report, product_minimum,
                                 random_biseparable_state, random_biseparable_states, random_product_state,
                                 random_product_states, thresholds)


class TestDecompose:
    def test_chain_of_five(self):
        d = decompose(5, "chain", 3)
        assert d.n == 2
        assert d.segments == ((0, 1, 2), (2, 3, 4))

    def test_ring(self):
        d = decompose(6, "ring", 4)
        assert d.n == 2
        assert d.segments == ((0, 1, 2, 3), (3, 4, 5, 0))

    def test_not_divisible(self):
        assert decompose(5, "chain", 4) is None

    def test_invalid(self):
        with pytest.raises(ValueError):
            decompose(3, "chain", 1)
        with pytest.raises(ValueError):
            decompose(3, "chain", 4)
        with pytest.raises(ValueError):
            decompose(4, "tree", 2)

    @pytest.mark.parametrize("topology", ["chain", "ring"])
    def test_covers_every_bond_once(self, topology):
        for N in range(3, 13):
            bonds = ChainSpec("1/2", N, topology).bonds()
            for k in range(2, N + 1):
                d = decompose(N, topology, k)
                if d is None:
                    continue
                seg_bonds = [tuple(sorted((seg[i], seg[i + 1]))) for seg in d.segments for i in range(k - 1)]
                assert sorted(seg_bonds) == sorted(tuple(sorted(b)) for b in bonds)


def bloch_product_minimum(s: SpinQuantum, n: int = 24) -> float:
    """Brute force over spin-coherent product states on an angular grid."""
    sx, iy, sz = (spin_matrix(s, w).toarray() for w in ("x", "iy", "z"))
    sy = -1j * iy
    H = np.kron(sx, sx) + np.kron(sy, sy).real + np.kron(sz, sz)
    best = math.inf
    thetas = np.linspace(0, math.pi, n + 1)
    for t1, t2 in itertools.product(thetas, thetas):
        # relative azimuth pi is optimal by symmetry; include 0 as a check
        for phi in (0.0, math.pi):
            vecs = []
            for t, p in ((t1, 0.0), (t2, phi)):
                gen = math.cos(p) * sx + math.sin(p) * sy
                w, v = np.linalg.eigh(math.cos(t) * sz + math.sin(t) * gen)
                vecs.append(v[:, -1])
            psi = np.kron(*vecs)
            best = min(best, float(np.real(psi.conj() @ H @ psi)))
    return best


class TestThresholds:
    def test_qubit_chain_five(self):
        rep = thresholds("1/2", 5)
        assert [t.k for t in rep.thresholds] == [2, 3, 5]
        assert rep.bound_for(3) == pytest.approx(-1.61803, abs=1e-5)
        assert rep.bound_for(5) == pytest.approx(-1.780, rel=5e-4)
        assert rep.genuine_bound == rep.bound_for(5)
        assert rep.note == MIXED_STATE_NOTE
        with pytest.raises(KeyError):
            rep.bound_for(4)

    def test_qubit_chain_four(self):
        t = thresholds("1/2", 4).thresholds
        k4 = next(x for x in t if x.k == 4)
        assert k4.n_k == 1 and k4.bound == pytest.approx(-1.5, abs=1e-10)

    @pytest.mark.parametrize("two_s", [1, 2])
    def test_pair_bound_is_product_minimum(self, two_s):
        s = SpinQuantum(two_s)
        rep = thresholds(s, 2)
        assert rep.bound_for(2) == pytest.approx(-s.value ** 2, abs=1e-10)
        assert product_minimum(s) == pytest.approx(bloch_product_minimum(s), abs=1e-9)

    def test_ring_has_no_genuine_bound(self):
        rep = thresholds("1", 6, "ring")
        assert rep.genuine_bound is None
        assert [t.k for t in rep.thresholds] == [2, 3, 4]

    def test_failed_minimum_reported_per_k(self):
        def source(s, k):
            if k == 3:
                raise RuntimeError("boom")
            return min_biseparable(s, k)[0]
        rep = thresholds("1/2", 5, minima=source)
        assert rep.status[3].startswith("failed")
        assert [t.k for t in rep.thresholds] == [2, 5]

    def test_ground_energy_skipped_when_large(self):
        from spinwitness.config import DEFAULT_CONFIG
        rep = thresholds("1/2", 5, config=DEFAULT_CONFIG.replace(max_full_dim=10))
        assert rep.ground_energy is None


class TestClassify:
    def test_tripartite_window(self):
        rep = thresholds("1/2", 3)
        assert classify(rep, -0.95).verdict == 3
        low = classify(rep, -0.5)
        assert low.verdict is None
        assert not next(t for t in low.thresholds if t.k == 3).violated

    def test_genuine_four(self):
        out = classify(thresholds("1", 4), -4.5)
        assert out.genuine_violated and out.verdict == 4

    def test_none_certified(self):
        out = classify(thresholds("1/2", 4), -0.2)
        assert out.verdict is None and not out.genuine_violated

    def test_unphysical(self):
        with pytest.raises(UnphysicalEnergy):
            classify(thresholds("1/2", 3), -1.1)

    def test_verdict_dominates_violations(self):
        rep = thresholds("1/2", 5)
        for e in np.linspace(rep.ground_energy, 0, 25):
            out = classify(rep, e)
            for t in out.thresholds:
                if t.violated:
                    assert out.verdict >= t.k


class TestGapReport:
    def test_qubits_four(self):
        g = gap_report("1/2", 4)
        assert g.ground_energy == pytest.approx(-1.6160, abs=1e-4)
        assert g.biseparable_minimum == pytest.approx(-1.5)
        assert g.gap > 0 and g.holds

    def test_spin1_four(self):
        g = gap_report("1", 4)
        assert abs(g.spin_squared) < 1e-8
        assert not g.degenerate and g.level_gap > 1e-8

    def test_odd_chain_relation(self):
        e0 = chain_ground_energy(ChainSpec("1/2", 3))
        assert e0 == pytest.approx(-1.0)
        assert e0 < min_biseparable("1/2", 3)[0]
        with pytest.raises(ValueError):
            gap_report("1/2", 3)

    def test_intractable(self):
        with pytest.raises(IntractableSystem, match="exceeds"):
            gap_report("5/2", 8)


class TestRandomStates:
    def test_single_and_batched_agree_in_distribution(self):
        spec = ChainSpec("1", 3)
        rng = np.random.default_rng(0)
        psi = random_product_state(spec, rng)
        assert abs(np.linalg.norm(psi) - 1) < 1e-12
        P = random_product_states(spec, 50, rng)
        assert np.allclose(np.linalg.norm(P, axis=0), 1)
        B = random_biseparable_states(spec, 1, 50, rng)
        assert np.allclose(np.linalg.norm(B, axis=0), 1)
        assert abs(np.linalg.norm(random_biseparable_state(spec, 2, rng)) - 1) < 1e-12

    def test_product_states_have_rank_one_cuts(self):
        spec = ChainSpec("1/2", 4)
        P = random_product_states(spec, 5, np.random.default_rng(1))
        for col in P.T:
            sv = np.linalg.svd(col.reshape(2, 8), compute_uv=False)
            assert sv[1] < 1e-12

    def test_energies(self):
        spec = ChainSpec("1/2", 3)
        H = heisenberg(spec)
        P = random_product_states(spec, 4, np.random.default_rng(2))
        direct = [float(np.real(v.conj() @ (H.matrix @ v))) for v in P.T]
        assert np.allclose(energies(H, P), direct)

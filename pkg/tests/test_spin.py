import math

import numpy as np
import pytest
import scipy.sparse as sp
from sympy import S as Sym
from sympy.physics.wigner import clebsch_gordan as sympy_cg

from spinwitness.spin import (SparseOperator, SpinQuantum, cg_table, clebsch_gordan, coupled_labels,
                              coupled_transform, embed, eta, exchange, site_two_m, spin_matrix)

SPINS = [SpinQuantum(t) for t in range(1, 6)]


def dense(s, which):
    return spin_matrix(s, which).toarray()


class TestSpinQuantum:
    @pytest.mark.parametrize("text,two_s", [("1/2", 1), ("1", 2), ("3/2", 3), ("2", 4), ("5/2", 5), ("0", 0), (3, 6)])
    def test_parse(self, text, two_s):
        assert SpinQuantum.parse(text).two_s == two_s

    @pytest.mark.parametrize("bad", ["0.5", "1/3", "-1/2", "x", ""])
    def test_parse_rejects(self, bad):
        with pytest.raises(ValueError):
            SpinQuantum.parse(bad)

    def test_str_roundtrip(self):
        for s in SPINS:
            assert SpinQuantum.parse(str(s)) == s

    def test_ms_descending(self):
        s = SpinQuantum(5)
        assert s.dim == 6
        assert list(s.two_ms()) == [5, 3, 1, -1, -3, -5]


class TestSpinMatrices:
    def test_sz_half(self):
        assert np.allclose(dense(SpinQuantum(1), "z"), np.diag([0.5, -0.5]))

    def test_sz_five_halves(self):
        assert np.allclose(np.diag(dense(SpinQuantum(5), "z")), [2.5, 1.5, 0.5, -0.5, -1.5, -2.5])

    def test_splus_spin1(self):
        p = dense(SpinQuantum(2), "plus")
        # basis is m = +1, 0, -1; s+ raises m, i.e. moves one index up
        expected = np.zeros((3, 3))
        expected[0, 1] = expected[1, 2] = math.sqrt(2)
        assert np.allclose(p, expected)

    @pytest.mark.parametrize("s", SPINS, ids=str)
    def test_commutators(self, s):
        z, p, m = (dense(s, w) for w in ("z", "plus", "minus"))
        assert np.abs(z @ p - p @ z - p).max() < 1e-12
        assert np.abs(z @ m - m @ z + m).max() < 1e-12
        assert np.abs(p @ m - m @ p - 2 * z).max() < 1e-12

    @pytest.mark.parametrize("s", SPINS, ids=str)
    def test_casimir(self, s):
        x, iy, z = (dense(s, w) for w in ("x", "iy", "z"))
        # s_y^2 = -(i s_y)^2 for the real antisymmetric representative
        casimir = x @ x - iy @ iy + z @ z
        assert np.abs(casimir - s.value * (s.value + 1) * np.eye(s.dim)).max() < 1e-12

    def test_iy_is_antisymmetric(self):
        iy = dense(SpinQuantum(3), "iy")
        assert np.allclose(iy, -iy.T)

    def test_unknown_component(self):
        with pytest.raises(ValueError):
            spin_matrix(SpinQuantum(1), "w")


class TestEmbed:
    def test_sz_site0(self):
        op = embed(spin_matrix(SpinQuantum(1), "z"), 0, [2, 2])
        assert np.allclose(op.toarray(), np.diag([0.5, 0.5, -0.5, -0.5]))

    def test_identity(self):
        op = embed(sp.identity(3), 1, [2, 3, 4])
        assert np.allclose(op.toarray(), np.eye(24))

    @pytest.mark.parametrize("s", SPINS, ids=str)
    def test_traceless(self, s):
        dims = [s.dim] * 3
        for site in range(3):
            assert abs(embed(spin_matrix(s, "z"), site, dims).matrix.diagonal().sum()) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            embed(spin_matrix(SpinQuantum(2), "z"), 0, [2, 2])
        with pytest.raises(IndexError):
            embed(spin_matrix(SpinQuantum(1), "z"), 2, [2, 2])

    def test_operator_algebra(self):
        a = embed(spin_matrix(SpinQuantum(1), "z"), 0, [2, 2])
        b = embed(spin_matrix(SpinQuantum(1), "z"), 1, [2, 2])
        total = a + b
        assert np.allclose(total.toarray().diagonal(), [1, 0, 0, -1])
        assert np.allclose((a - a).toarray(), 0)
        assert np.allclose((a * 2).toarray(), 2 * a.toarray())
        assert total.is_symmetric()
        assert isinstance(total, SparseOperator)

    def test_exchange_spectrum(self):
        vals = np.linalg.eigvalsh(exchange(SpinQuantum(1), SpinQuantum(1)).toarray())
        assert np.allclose(vals, [-0.75, 0.25, 0.25, 0.25])


class TestClebschGordan:
    def test_singlet_half(self):
        assert clebsch_gordan(1, 1, 1, -1, 0, 0) == pytest.approx(1 / math.sqrt(2), abs=1e-15)

    def test_singlet_one(self):
        assert clebsch_gordan(2, 2, 2, -2, 0, 0) == pytest.approx(1 / math.sqrt(3), abs=1e-15)

    def test_selection_rules(self):
        assert clebsch_gordan(2, 2, 2, 0, 2, 0) == 0.0  # M != m1 + m2
        assert clebsch_gordan(2, 2, 0, 0, 6, 0) == 0.0  # J > j1 + j2

    @pytest.mark.parametrize("args", [(1, 1, 2, 0, 0, 0), (1, 1, 1, -1, 1, 0), (-1, 1, 1, -1, 0, 0)])
    def test_invalid_quantum_numbers(self, args):
        with pytest.raises(ValueError):
            clebsch_gordan(*args)

    def test_five_halves_against_sympy(self):
        table = cg_table(SpinQuantum(5), SpinQuantum(5))
        worst = 0.0
        for tm1 in range(5, -6, -2):
            for tm2 in range(5, -6, -2):
                for tJ in range(0, 11, 2):
                    tM = tm1 + tm2
                    if abs(tM) > tJ:
                        continue
                    ref = float(sympy_cg(Sym(5) / 2, Sym(5) / 2, Sym(tJ) / 2, Sym(tm1) / 2, Sym(tm2) / 2, Sym(tM) / 2))
                    worst = max(worst, abs(table.get((tm1, tm2, tJ, tM), 0.0) - ref))
        assert worst < 1e-12

    @pytest.mark.parametrize("t1,t2", [(1, 1), (2, 1), (2, 2), (3, 2), (5, 5), (4, 3)])
    def test_orthonormality(self, t1, t2):
        U = coupled_transform(SpinQuantum(t1), SpinQuantum(t2)).toarray()
        n = U.shape[0]
        assert np.abs(U.T @ U - np.eye(n)).max() < 1e-12  # rows of <m1 m2|J M> over (m1, m2)
        assert np.abs(U @ U.T - np.eye(n)).max() < 1e-12  # columns over (J, M)


class TestCoupledTransform:
    def test_qubit_pair(self):
        U = coupled_transform(SpinQuantum(1), SpinQuantum(1)).toarray()
        assert set(np.round(np.abs(U[U != 0]), 12)) <= {1.0, round(1 / math.sqrt(2), 12)}
        labels = coupled_labels(SpinQuantum(1), SpinQuantum(1))
        singlet = U[:, labels.index((0, 0))]
        assert np.allclose(np.abs(singlet), [0, 1 / math.sqrt(2), 1 / math.sqrt(2), 0])
        assert singlet[1] == -singlet[2]

    @pytest.mark.parametrize("s", SPINS, ids=str)
    def test_diagonalizes_exchange(self, s):
        U = coupled_transform(s, s).toarray()
        D = U.T @ exchange(s, s).toarray() @ U
        labels = coupled_labels(s, s)
        expected = [((tS / 2) * (tS / 2 + 1) - 2 * s.value * (s.value + 1)) / 2 for tS, _ in labels]
        assert np.abs(D - np.diag(expected)).max() < 1e-12

    @pytest.mark.parametrize("s", SPINS, ids=str)
    def test_eta_matrix_element(self, s):
        U = coupled_transform(s, s).toarray()
        labels = coupled_labels(s, s)
        sz2 = embed(spin_matrix(s, "z"), 1, [s.dim, s.dim]).toarray()
        elem = U[:, labels.index((2, 0))] @ sz2 @ U[:, labels.index((0, 0))]
        assert abs(abs(elem) - eta(s)) < 1e-12


def test_eta_values():
    assert eta(SpinQuantum(1)) == pytest.approx(0.5)
    assert eta(SpinQuantum(2)) == pytest.approx(math.sqrt(2 / 3))
    with pytest.raises(ValueError):
        eta(SpinQuantum(0))


def test_site_two_m():
    assert list(site_two_m([1, 1])) == [2, 0, 0, -2]

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monodromy.core import (
    GaussRational,
    Matrix,
    MatrixSeries,
    RatFunc,
    arg_p,
    diagonalize,
    make_system,
    parse_scalar,
    serialize_scalar,
)
from monodromy.errors import DimensionMismatch, NotDiagonalizable, PartitionInconsistent

rationals = st.fractions(max_denominator=50)
gauss = st.builds(GaussRational, rationals, rationals)
gauss_nonzero = gauss.filter(bool)


class TestGaussRational:
    @given(gauss, gauss_nonzero)
    @settings(max_examples=200, deadline=None)
    def test_field_identities(self, a, b):
        assert (a + b) - b == a
        assert (a * b) / b == a

    @given(gauss)
    @settings(max_examples=100, deadline=None)
    def test_string_round_trip(self, a):
        assert GaussRational.from_string(str(a)) == a

    def test_parse_forms(self):
        assert GaussRational.from_string("1/2+3/4*i") == GaussRational("1/2", "3/4")
        assert GaussRational.from_string("-2/3-1/5*i") == GaussRational("-2/3", "-1/5")
        assert GaussRational.from_string("5") == GaussRational(5)
        assert parse_scalar("1/2+3/4*i") == GaussRational("1/2", "3/4")
        assert parse_scalar([1.5, -2.0]) == 1.5 - 2.0j

    def test_serialize(self):
        assert serialize_scalar(GaussRational("1/2", "-3/4")) == "1/2-3/4*i"
        assert serialize_scalar(1.0 + 2.0j) == [1.0, 2.0]

    def test_division_by_zero(self):
        with pytest.raises(ZeroDivisionError):
            GaussRational(1) / GaussRational(0)

    def test_pow(self):
        a = GaussRational("1/2", "1/3")
        assert a ** 3 == a * a * a
        assert a ** 0 == GaussRational(1)


class TestRatFunc:
    def test_limit_and_valuation(self):
        e = RatFunc.variable()
        assert ((e * 2 + e * e) / e).limit0() == GaussRational(2)
        assert ((1 + e) / (e * e)).valuation() == -2
        assert ((1 + e) / (e * e)).limit0() is None
        assert (e * e / (e + 1)).limit0() == GaussRational(0)

    @given(rationals, rationals, rationals.filter(lambda x: x != 0))
    @settings(max_examples=50, deadline=None)
    def test_ring_identities(self, a, b, c):
        e = RatFunc.variable()
        f = RatFunc.constant(GaussRational(a)) + e * GaussRational(b)
        g = RatFunc.constant(GaussRational(c)) + e * e
        assert (f + g) - g == f
        assert (f * g) / g == f

    def test_evaluate(self):
        e = RatFunc.variable()
        f = (1 + e * 2) / (1 - e)
        x = GaussRational("1/4")
        assert f(x) == (1 + x * 2) / (1 - x)


class TestMatrix:
    def test_matmul_dimension_check(self):
        A = Matrix([[1.0, 2.0]])
        with pytest.raises(DimensionMismatch):
            A @ A

    def test_exact_matmul(self):
        one = GaussRational(1)
        A = Matrix([[one, one * 2], [one * 3, one * 4]])
        B = A @ A
        assert B[0, 0] == GaussRational(7)
        assert B[1, 1] == GaussRational(22)

    def test_numpy_round_trip(self):
        A = np.array([[1 + 2j, 0.5], [0, -1j]])
        assert np.allclose(Matrix.from_numpy(A).to_numpy(), A)


class TestMatrixSeries:
    @pytest.mark.parametrize("K", range(9))
    def test_truncated_product_matches_convolution(self, K, rng):
        # exhaustive over retained orders for K <= 8
        A = [Matrix.from_numpy(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
             for _ in range(K + 1)]
        B = [Matrix.from_numpy(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
             for _ in range(K + 1)]
        prod = MatrixSeries(A) * MatrixSeries(B)
        assert prod.order == K
        for k in range(K + 1):
            full = sum((A[i].to_numpy() @ B[k - i].to_numpy() for i in range(k + 1)),
                       np.zeros((2, 2), dtype=complex))
            assert np.allclose(prod.coeffs[k].to_numpy(), full, atol=1e-13)

    def test_variable_mismatch(self):
        a = MatrixSeries([Matrix.eye(2)], var="z")
        b = MatrixSeries([Matrix.eye(2)], var="1/z")
        with pytest.raises(ValueError):
            a * b


class TestMakeSystem:
    def test_valid(self):
        s = make_system(3, (0.0, 0.0, 1.0), (2, 1), [np.zeros((3, 3)).tolist()])
        assert s.blocks() == [range(0, 2), range(2, 3)]
        assert s.same_block(0, 1) and not s.same_block(0, 2)

    def test_singleton(self):
        s = make_system(1, (0.0,), (1,), [[[0.3]]])
        assert s.u([0.7])[0] == 0.7

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            make_system(2, (0.0,), (2,), [])

    def test_partition_sum(self):
        with pytest.raises(PartitionInconsistent):
            make_system(2, (0.0, 0.0), (3,), [])

    def test_partition_values_contradict(self):
        with pytest.raises(PartitionInconsistent):
            make_system(2, (0.0, 1.0), (2,), [])
        with pytest.raises(PartitionInconsistent):
            make_system(2, (0.0, 0.0), (1, 1), [])

    def test_coefficient_shape_checked(self):
        with pytest.raises(DimensionMismatch):
            make_system(2, (0.0, 1.0), (1, 1), [[[1.0]]])


class TestDiagonalize:
    def test_frozen_skew_matrix(self):
        c = 1j * math.sqrt(2) / 8
        V0 = [[0, 0, -c], [0, 0, c], [c, -c, 0]]
        w, G, res = diagonalize(V0)
        assert np.allclose(sorted(w.real), [-0.25, 0.0, 0.25], atol=1e-12)
        assert np.allclose(sorted(w.imag), [0, 0, 0], atol=1e-12)
        assert res < 1e-12

    def test_identity(self):
        w, G, res = diagonalize(np.eye(3))
        assert np.allclose(w, 1.0)
        assert res == 0.0

    def test_triangular_2x2(self):
        w, G, res = diagonalize([[1.0, 0.0], [1.0, 2.0]])
        assert np.allclose(sorted(w.real), [1.0, 2.0])
        # characteristic polynomial check
        for lam in w:
            assert abs(lam * lam - 3 * lam + 2) < 1e-12

    def test_defective_rejected(self):
        with pytest.raises(NotDiagonalizable):
            diagonalize([[0.0, 1.0], [0.0, 0.0]], tol=1e-10)

    def test_random_diagonalizable(self, rng):
        # reconstruction identity on 100 random diagonalizable 4x4 matrices
        tol = 1e-10
        for _ in range(100):
            G = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            d = rng.normal(size=4) + 1j * rng.normal(size=4)
            M = G @ np.diag(d) @ np.linalg.inv(G)
            w, V, res = diagonalize(M, tol)
            back = V @ np.diag(w) @ np.linalg.inv(V)
            assert np.max(np.abs(back - M)) <= 10 * tol * np.max(np.abs(M)) + 1e-12


def test_arg_p_principal_range():
    assert arg_p(-1.0) == pytest.approx(math.pi)
    assert arg_p(complex(-1.0, -1e-300)) == pytest.approx(math.pi)
    assert arg_p(1j) == pytest.approx(math.pi / 2)
    assert -math.pi < arg_p(-1 - 1j) <= math.pi

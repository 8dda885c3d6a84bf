"""Unit tests for the quaternion algebra, Wirtinger derivatives,
pair histogram and RNG streams."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from overlap_lab.numcore import (PairHistogram, Quaternion22, RngStream,
                                 SingularQuaternionError, quaternion_inverse,
                                 wirtinger_mixed_derivative)

finite_complex = st.complex_numbers(allow_nan=False, allow_infinity=False,
                                    min_magnitude=0.0, max_magnitude=1e6)


def quat(q11, q1b, qb1, qbb):
    return Quaternion22(q11, q1b, qb1, qbb)


class TestQuaternion22:
    def test_from_zw_is_on_shell(self):
        q = Quaternion22.from_zw(1.5 - 0.25j, 0.125 + 2.0j)
        assert q.is_on_shell()
        assert q.q11 == 1.5 - 0.25j
        assert q.qb1 == 1j * (0.125 + 2.0j)

    def test_matrix_round_trip(self):
        m = np.array([[1.0 + 2j, 3.0], [0.5j, -1.0]])
        q = Quaternion22.from_matrix(m)
        assert np.allclose(q.as_matrix(), m)

    def test_det_matches_numpy(self):
        q = quat(1 + 1j, 2.0, -0.5j, 3 - 1j)
        assert q.det == pytest.approx(np.linalg.det(q.as_matrix()))

    @given(finite_complex, finite_complex, finite_complex, finite_complex)
    @settings(max_examples=50, deadline=None)
    def test_add_sub_scale_componentwise(self, a, b, c, d):
        q = quat(a, b, c, d)
        r = quat(d, c, b, a)
        s = q + r
        assert s.q11 == a + d and s.qbb == d + a
        z = q - q
        assert z.q11 == 0 and z.q1b == 0 and z.qb1 == 0 and z.qbb == 0
        t = q.scale(2.0)
        assert t.q11 == 2.0 * a and t.qbb == 2.0 * d

    @given(st.tuples(*[st.floats(-5, 5) for _ in range(8)]))
    @settings(max_examples=80, deadline=None)
    def test_matmul_matches_matrix_product(self, vals):
        a = quat(vals[0] + 1j * vals[1], vals[2], vals[3], vals[4])
        b = quat(vals[5], vals[6] - 1j * vals[7], vals[1], vals[0])
        assert np.allclose((a @ b).as_matrix(),
                           a.as_matrix() @ b.as_matrix())

    def test_inverse_round_trip(self):
        q = quat(1 + 1j, 0.5, -0.25j, 2.0)
        qi = quaternion_inverse(q)
        assert np.allclose((q @ qi).as_matrix(), np.eye(2), atol=1e-12)
        assert np.allclose((qi @ q).as_matrix(), np.eye(2), atol=1e-12)

    def test_inverse_singular_raises(self):
        with pytest.raises(SingularQuaternionError):
            quaternion_inverse(quat(1.0, 2.0, 2.0, 4.0))

    def test_inverse_relative_threshold(self):
        # tiny but well-conditioned quaternions must invert fine
        q = quat(1e-150, 0.0, 0.0, 1e-150)
        qi = quaternion_inverse(q)
        assert qi.q11 == pytest.approx(1e150)


class TestWirtinger:
    def test_pure_holomorphic_pair(self):
        # f = zbar1 * z2 has mixed derivative exactly 1
        d = wirtinger_mixed_derivative(
            lambda z1, z2: np.conj(z1) * z2, 0.3 + 0.1j, -0.2 + 0.4j)
        assert d == pytest.approx(1.0, abs=1e-9)

    def test_annihilates_wrong_sector(self):
        # f = z1 * zbar2 is killed by d/dzbar1 d/dz2
        d = wirtinger_mixed_derivative(
            lambda z1, z2: z1 * np.conj(z2), 0.3 + 0.1j, -0.2 + 0.4j)
        assert abs(d) < 1e-9

    def test_convention_sign(self):
        # f = |z1|^2 |z2|^2: derivative = z1 * zbar2
        z1, z2 = 0.7 - 0.2j, 0.4 + 0.9j
        d = wirtinger_mixed_derivative(
            lambda a, b: abs(a) ** 2 * abs(b) ** 2, z1, z2)
        assert d == pytest.approx(z1 * np.conj(z2), abs=1e-8)

    def test_richardson_improves_order(self):
        def f(a, b):
            u = np.conj(a) * b + 0.1 * np.conj(a) ** 3 * b ** 2
            return np.exp(u)

        z1, z2 = 0.5 + 0.3j, -0.1 + 0.2j
        a = np.conj(z1)
        du_dz2 = a + 0.2 * a ** 3 * z2
        du_da = z2 + 0.3 * a ** 2 * z2 ** 2
        exact = (1.0 + 0.6 * a ** 2 * z2 + du_dz2 * du_da) * f(z1, z2)
        raw = wirtinger_mixed_derivative(f, z1, z2, h=0.1, richardson=False)
        rich = wirtinger_mixed_derivative(f, z1, z2, h=0.1, richardson=True)
        assert abs(rich - exact) < abs(raw - exact) / 3.0


class TestPairHistogram:
    def edges(self):
        return np.linspace(0.0, 1.0, 5), np.linspace(-1.0, 1.0, 3)

    def test_accumulate_counts_and_weights(self):
        h = PairHistogram(*self.edges())
        h.accumulate([0.1, 0.1, 0.9], [-0.5, 0.5, 0.5],
                     [1.0 + 1j, 2.0, -1j])
        assert h.count.sum() == 3
        assert h.weight[0, 0] == 1.0 + 1j
        assert h.weight[0, 1] == 2.0
        assert h.weight[3, 1] == -1j
        assert h.n_matrices == 1

    def test_merge_associative_and_checked(self):
        e1, e2 = self.edges()
        a = PairHistogram(e1, e2)
        b = PairHistogram(e1, e2)
        a.accumulate([0.1], [0.0], [1.0])
        b.accumulate([0.6], [0.0], [2.0j])
        m = a.merge(b)
        assert m.count.sum() == 2
        assert m.n_matrices == 2
        assert m.weight.sum() == 1.0 + 2.0j
        with pytest.raises(ValueError):
            a.merge(PairHistogram(e1 + 0.5, e2))

    @given(st.lists(st.tuples(st.floats(0.01, 0.99), st.floats(-0.99, 0.99),
                              st.floats(-3, 3)), min_size=1, max_size=30))
    @settings(max_examples=30, deadline=None)
    def test_split_accumulation_equals_bulk(self, triples):
        e1, e2 = self.edges()
        xs = [t[0] for t in triples]
        ys = [t[1] for t in triples]
        ws = [t[2] for t in triples]
        bulk = PairHistogram(e1, e2)
        bulk.accumulate(xs, ys, ws)
        parts = PairHistogram(e1, e2)
        for x, y, w in triples:
            single = PairHistogram(e1, e2)
            single.accumulate([x], [y], [w])
            parts = parts.merge(single)
        assert np.allclose(parts.weight, bulk.weight, atol=1e-9)
        assert np.array_equal(parts.count, bulk.count)

    def test_bin_areas(self):
        h = PairHistogram(*self.edges())
        assert np.allclose(h.bin_areas(), 0.25 * 1.0)

    def test_bad_edges_rejected(self):
        with pytest.raises(ValueError):
            PairHistogram([0.0, 0.0, 1.0], [0.0, 1.0])


class TestRngStream:
    def test_reproducible(self):
        a = RngStream(42, 7).generator().standard_normal(16)
        b = RngStream(42, 7).generator().standard_normal(16)
        assert np.array_equal(a, b)

    def test_streams_differ(self):
        a = RngStream(42, 0).generator().standard_normal(16)
        b = RngStream(42, 1).generator().standard_normal(16)
        c = RngStream(43, 0).generator().standard_normal(16)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_substream_distinct_from_parent(self):
        s = RngStream(1, 5)
        sub = s.substream(1)
        assert sub != s
        a = s.generator().standard_normal(8)
        b = sub.generator().standard_normal(8)
        assert not np.array_equal(a, b)

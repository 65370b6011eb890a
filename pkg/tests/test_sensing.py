import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ompx.linalg import ShapeError, kron, stretch
from ompx.sensing import (
    Dictionary,
    MemoryCapError,
    build_dictionary,
    build_omega,
    dct_matrix,
    gaussian_matrix,
    load_dictionary,
    omega_nbytes,
    sample_separable,
    save_dictionary,
)


def dct_entry(k, j, n):
    scale = math.sqrt(1.0 / n) if k == 0 else math.sqrt(2.0 / n)
    return scale * math.cos(math.pi * (2 * j + 1) * k / (2 * n))


class TestDct:
    def test_order_one(self):
        np.testing.assert_array_equal(dct_matrix(1), [[1.0]])

    def test_order_two_closed_form(self):
        h = math.sqrt(0.5)
        np.testing.assert_allclose(dct_matrix(2), [[h, h], [h, -h]], atol=1e-15)

    def test_against_scalar_formula(self):
        n = 7
        psi = dct_matrix(n)
        ref = np.array([[dct_entry(k, j, n) for j in range(n)] for k in range(n)])
        np.testing.assert_allclose(psi, ref, atol=1e-15)

    @pytest.mark.parametrize("n", [1, 2, 8, 64, 128])
    def test_orthonormal(self, n):
        psi = dct_matrix(n)
        assert np.max(np.abs(psi @ psi.T - np.eye(n))) <= 1e-12

    def test_matches_scipy_orthonormal_dct(self):
        from scipy.fft import dct

        n = 16
        np.testing.assert_allclose(dct_matrix(n), dct(np.eye(n), norm="ortho", axis=0), atol=1e-14)

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            dct_matrix(0)


class TestGaussian:
    def test_shape_and_determinism(self):
        assert gaussian_matrix(3, 5, 7).shape == (3, 5)
        a, b = gaussian_matrix(4, 4, 42), gaussian_matrix(4, 4, 42)
        assert a.tobytes() == b.tobytes()
        assert not np.array_equal(a, gaussian_matrix(4, 4, 43))

    def test_frozen_transform(self):
        # Recompute the first entries from the raw PCG64 stream with scalar math.
        bitgen = np.random.PCG64(np.random.SeedSequence(42))
        raw = [int(x) for x in bitgen.random_raw(4)]
        u = [(r >> 11) * 2.0 ** -53 for r in raw]
        expected = []
        for u1, u2 in ((u[0], u[1]), (u[2], u[3])):
            rad = math.sqrt(-2.0 * math.log(1.0 - u1))
            expected += [rad * math.cos(2 * math.pi * u2), rad * math.sin(2 * math.pi * u2)]
        np.testing.assert_allclose(gaussian_matrix(2, 2, 42).ravel(), expected, rtol=1e-14)

    def test_moments(self):
        x = gaussian_matrix(1000, 1000, 2024)
        assert abs(x.mean()) < 0.01
        assert abs(x.var() - 1.0) < 0.02

    def test_seed_range(self):
        gaussian_matrix(1, 1, 2**64 - 1)
        with pytest.raises(ValueError):
            gaussian_matrix(1, 1, 2**64)
        with pytest.raises(ValueError):
            gaussian_matrix(0, 3, 1)


class TestDictionary:
    def test_identity(self):
        d = build_dictionary(np.eye(3), np.eye(3))
        np.testing.assert_array_equal(d.A, np.eye(3))
        np.testing.assert_array_equal(d.col_norms, np.ones(3))
        np.testing.assert_array_equal(d.atom_norms, np.ones((3, 3)))

    def test_identity_transform(self, rng):
        phi = rng.standard_normal((3, 5))
        assert build_dictionary(phi, np.eye(5)).A.tobytes() == phi.tobytes()

    def test_norms_against_loop(self, rng):
        phi = rng.standard_normal((4, 8))
        d = build_dictionary(phi, dct_matrix(8))
        for i in range(8):
            ss = 0.0
            for r in range(4):
                ss += d.A[r, i] ** 2
            assert d.col_norms[i] == pytest.approx(math.sqrt(ss), rel=1e-14)
        assert np.array_equal(d.atom_norms, np.outer(d.col_norms, d.col_norms))

    def test_read_only(self, rng):
        d = Dictionary.from_matrix(rng.standard_normal((2, 3)))
        with pytest.raises(ValueError):
            d.A[0, 0] = 1.0
        with pytest.raises(ValueError):
            d.atom_norms[0, 0] = 1.0

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            build_dictionary(np.ones((2, 3)), np.eye(4))

    def test_save_load(self, rng, tmp_path):
        d = Dictionary.from_matrix(rng.standard_normal((3, 5)))
        save_dictionary(tmp_path / "A.txt", d)
        back = load_dictionary(tmp_path / "A.txt")
        assert back.A.tobytes() == d.A.tobytes()
        assert back.col_norms.tobytes() == d.col_norms.tobytes()


class TestOmega:
    def test_scalar(self):
        np.testing.assert_array_equal(build_omega(Dictionary.from_matrix([[2.0]])), [[4.0]])

    def test_row(self):
        np.testing.assert_array_equal(build_omega(Dictionary.from_matrix([[1.0, 2.0]])), [[1, 2, 2, 4]])

    def test_columns_are_stretched_atoms(self, small_dict):
        omega = build_omega(small_dict)
        n = small_dict.n
        a = small_dict.A
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                atom = np.outer(a[:, i - 1], a[:, j - 1])
                assert np.array_equal(omega[:, n * (i - 1) + j - 1], stretch(atom))

    def test_memory_cap(self):
        d = Dictionary.from_matrix(np.ones((32, 128)))
        with pytest.raises(MemoryCapError) as info:
            build_omega(d, memory_cap=8 * 32 * 32 * 128 * 128 - 1)
        assert info.value.required == 134_217_728 == omega_nbytes(32, 128)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**32 - 1))
    def test_column_contract_property(self, m, n, seed):
        a = np.random.default_rng(seed).standard_normal((m, n))
        omega = build_omega(Dictionary.from_matrix(a))
        for i in range(n):
            for j in range(n):
                np.testing.assert_array_max_ulp(omega[:, n * i + j], stretch(np.outer(a[:, i], a[:, j])), 1)


class TestSampleSeparable:
    def test_zero(self, small_dict):
        np.testing.assert_array_equal(sample_separable(small_dict, np.zeros((4, 4))), np.zeros((3, 3)))

    def test_single_spike_is_atom(self, small_dict):
        z = np.zeros((4, 4))
        z[1, 3] = 1.0
        a = small_dict.A
        np.testing.assert_allclose(sample_separable(small_dict, z), np.outer(a[:, 1], a[:, 3]), rtol=1e-15)

    def test_shape_mismatch(self, small_dict):
        with pytest.raises(ShapeError):
            sample_separable(small_dict, np.zeros((3, 3)))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**32 - 1))
    def test_kronecker_consistency(self, m, n, seed):
        r = np.random.default_rng(seed)
        d = Dictionary.from_matrix(r.standard_normal((m, n)))
        z = r.standard_normal((n, n))
        y = sample_separable(d, z)
        gap = np.linalg.norm(stretch(y) - kron(d.A, d.A) @ stretch(z))
        assert gap <= 1e-10 * np.linalg.norm(y)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qparadox import linalg
from qparadox.errors import DimensionError, NotNormalError

from conftest import haar_unitary, random_density, seeds

D = np.array([[0, 1], [1, 0]])
R = 1 / math.sqrt(2)


def kron_by_index(a, b):
    """Entry (i*rb + k, j*cb + l) = a[i, j] * b[k, l], written out."""
    a, b = np.asarray(a), np.asarray(b)
    ra, ca = a.shape
    rb, cb = b.shape
    out = np.zeros((ra * rb, ca * cb), dtype=complex)
    for i in range(ra):
        for j in range(ca):
            for k in range(rb):
                for l in range(cb):
                    out[i * rb + k, j * cb + l] = a[i, j] * b[k, l]
    return out


def ptrace_by_kraus(rho, dims, keep):
    """Sum of (I (x) <b|) rho (I (x) |b>) over basis states b of the traced factor."""
    d0, d1 = dims
    out = 0
    if keep == 0:
        for b in range(d1):
            e = np.zeros((d1, 1))
            e[b] = 1
            k = np.kron(np.eye(d0), e)
            out = out + k.conj().T @ rho @ k
    else:
        for b in range(d0):
            e = np.zeros((d0, 1))
            e[b] = 1
            k = np.kron(e, np.eye(d1))
            out = out + k.conj().T @ rho @ k
    return out


class TestTensorProduct:
    def test_identity(self):
        assert np.array_equal(linalg.tensor_product(np.eye(2), np.eye(2)), np.eye(4))

    def test_basis_vectors(self):
        out = linalg.tensor_product([[1], [0]], [[0], [1]])
        assert np.array_equal(out, [[0], [1], [0], [0]])

    def test_dd_on_01(self):
        # |01> -> D|0> (x) D|1> = |10>
        dd = linalg.tensor_product(D, D)
        assert np.array_equal(dd @ np.array([0, 1, 0, 0]), [0, 0, 1, 0])

    @given(st.lists(st.integers(-5, 5), min_size=6, max_size=6), st.lists(st.integers(-5, 5), min_size=6, max_size=6))
    def test_matches_index_formula(self, xa, xb):
        a = np.array(xa).reshape(2, 3)
        b = np.array(xb).reshape(3, 2)
        assert np.array_equal(linalg.tensor_product(a, b), kron_by_index(a, b))

    @given(
        st.lists(st.integers(-4, 4), min_size=4, max_size=4),
        st.lists(st.integers(-4, 4), min_size=2, max_size=2),
        st.lists(st.integers(-4, 4), min_size=6, max_size=6),
    )
    def test_associative_exactly(self, xa, xb, xc):
        a = np.array(xa).reshape(2, 2)
        b = np.array(xb).reshape(1, 2)
        c = np.array(xc).reshape(3, 2)
        left = linalg.tensor_product(linalg.tensor_product(a, b), c)
        right = linalg.tensor_product(a, linalg.tensor_product(b, c))
        assert np.array_equal(left, right)

    def test_result_is_read_only(self):
        out = linalg.tensor_product(np.eye(2), np.eye(2))
        with pytest.raises(ValueError):
            out[0, 0] = 3

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            linalg.tensor_product([[np.nan]], [[1]])


class TestPartialTrace:
    def test_maximally_mixed(self):
        out = linalg.partial_trace(np.eye(4) / 4, (2, 2), 0)
        assert np.allclose(out, np.eye(2) / 2, atol=0)

    def test_product_state(self):
        v = np.array([0, 1, 0, 0])
        out = linalg.partial_trace(np.outer(v, v), (2, 2), 0)
        assert np.array_equal(out, [[1, 0], [0, 0]])

    def test_singlet_projector(self):
        # |psi><psi| = (|01><01| - |01><10| - |10><01| + |10><10|)/2;
        # tracing the second factor keeps |0><0|/2 + |1><1|/2
        psi = np.array([0, 1, -1, 0]) / math.sqrt(2)
        proj = np.outer(psi, psi)
        for keep in (0, 1):
            assert np.allclose(linalg.partial_trace(proj, (2, 2), keep), np.eye(2) / 2, atol=1e-15)

    @settings(max_examples=50)
    @given(seeds, st.sampled_from([(2, 2), (2, 3), (4, 2), (1, 4), (3, 1)]), st.sampled_from([0, 1]))
    def test_matches_kraus_oracle_and_preserves_trace(self, seed, dims, keep):
        rng = np.random.default_rng(seed)
        rho = random_density(dims[0] * dims[1], rng)
        out = linalg.partial_trace(rho, dims, keep)
        assert np.allclose(out, ptrace_by_kraus(rho, dims, keep), atol=1e-13)
        assert abs(np.trace(out) - np.trace(rho)) <= 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            linalg.partial_trace(np.eye(4), (2, 3), 0)

    def test_bad_keep(self):
        with pytest.raises(ValueError):
            linalg.partial_trace(np.eye(4), (2, 2), 2)


class TestIsUnitary:
    def test_not_gate(self):
        assert linalg.is_unitary(D, 1e-12)

    def test_identity(self):
        assert linalg.is_unitary(np.eye(2))

    def test_shear(self):
        # m^dag m = [[1, 1], [1, 2]]
        assert not linalg.is_unitary([[1, 1], [0, 1]])

    def test_non_square(self):
        with pytest.raises(DimensionError):
            linalg.is_unitary(np.ones((2, 3)))

    @settings(max_examples=50)
    @given(seeds, st.sampled_from([2, 4]))
    def test_random_unitaries_closed_under_product(self, seed, n):
        rng = np.random.default_rng(seed)
        u, v = haar_unitary(n, rng), haar_unitary(n, rng)
        assert linalg.is_unitary(u, 1e-10) and linalg.is_unitary(v, 1e-10)
        assert linalg.is_unitary(u @ v, 1e-10)
        assert linalg.is_unitary(u @ u.conj().T, 1e-10)


class TestNullspace:
    def test_fixed_direction_of_d(self):
        (v,) = linalg.nullspace(D - np.eye(2))
        assert np.allclose(v, [R, R], atol=1e-15, rtol=0)

    def test_full_rank(self):
        assert linalg.nullspace(np.eye(2)) == []

    def test_zero_matrix(self):
        basis = linalg.nullspace(np.zeros((2, 2)))
        assert len(basis) == 2
        g = np.array([[np.vdot(a, b) for b in basis] for a in basis])
        assert np.allclose(g, np.eye(2), atol=1e-15)

    def test_phase_convention(self):
        (v,) = linalg.nullspace([[1j, 1]])
        first = v[np.flatnonzero(np.abs(v) > 1e-12)[0]]
        assert first.imag == 0 and first.real > 0

    @settings(max_examples=100)
    @given(seeds, st.sampled_from([2, 3, 4, 8]), st.data())
    def test_rank_deficient_random(self, seed, n, data):
        rank = data.draw(st.integers(0, n))
        rng = np.random.default_rng(seed)
        s = np.concatenate([rng.uniform(0.5, 2.0, rank), np.zeros(n - rank)])
        m = haar_unitary(n, rng) @ np.diag(s) @ haar_unitary(n, rng)
        tol = 1e-9
        basis = linalg.nullspace(m, tol)
        # oracle: SVD rank
        assert len(basis) == n - np.linalg.matrix_rank(m, tol=1e-6)
        if basis:
            b = np.array(basis)
            assert np.allclose(b.conj() @ b.T, np.eye(len(basis)), atol=1e-10)
            for v in basis:
                assert np.linalg.norm(m @ v) <= 10 * tol


class TestEigensystem:
    def test_not_gate(self):
        (l1, v1), (l2, v2) = linalg.eigensystem_2x2(D)
        assert (l1, l2) == (1, -1)
        assert np.allclose(v1, [R, R], atol=1e-12, rtol=0)
        assert np.allclose(v2, [R, -R], atol=1e-12, rtol=0)

    def test_identity(self):
        pairs = linalg.eigensystem_2x2(np.eye(2))
        assert [lam for lam, _ in pairs] == [1, 1]
        b = np.array([v for _, v in pairs])
        assert np.allclose(b.conj() @ b.T, np.eye(2))

    def test_diagonal_imaginary(self):
        (l1, v1), (l2, v2) = linalg.eigensystem_2x2(np.diag([-1j, 1j]))
        assert l1 == pytest.approx(1j) and l2 == pytest.approx(-1j)
        assert np.allclose(v1, [0, 1]) and np.allclose(v2, [1, 0])

    def test_ordering_by_real_part(self):
        lams = [lam for lam, _ in linalg.eigensystem_2x2(np.diag([-2, 3]))]
        assert lams == [pytest.approx(3), pytest.approx(-2)]

    def test_rejects_non_normal(self):
        with pytest.raises(NotNormalError):
            linalg.eigensystem_2x2([[1, 1], [0, 1]])

    def test_rejects_wrong_size(self):
        with pytest.raises(DimensionError):
            linalg.eigensystem_2x2(np.eye(3))

    @settings(max_examples=200)
    @given(seeds, st.booleans())
    def test_reconstruction_of_random_normal(self, seed, degenerate):
        rng = np.random.default_rng(seed)
        lam = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        if degenerate:
            lam[1] = lam[0]
        u = haar_unitary(2, rng)
        m = u @ np.diag(lam) @ u.conj().T
        pairs = linalg.eigensystem_2x2(m, tol=1e-10)
        recon = sum(l * np.outer(v, v.conj()) for l, v in pairs)
        assert np.max(np.abs(recon - m)) <= 1e-10
        (_, v1), (_, v2) = pairs
        assert abs(np.vdot(v1, v2)) <= 1e-12
        for _, v in pairs:
            assert abs(np.linalg.norm(v) - 1) <= 1e-12

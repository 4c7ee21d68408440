import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nmpovm import ContractError, gell_mann_basis, group, build_h_operators
from nmpovm.linalg import (
    herm_eig,
    hs_inner,
    kron,
    random_density,
    trace_norm,
)
from nmpovm.bases import PAULIS


def cubic_eigenvalues(a):
    """Roots of the characteristic polynomial of a 3x3 Hermitian matrix (trigonometric form)."""
    tr = np.trace(a).real
    tr2 = np.trace(a @ a).real
    det = np.linalg.det(a).real
    # lambda^3 - tr lambda^2 + c1 lambda - det = 0
    c1 = 0.5 * (tr * tr - tr2)
    shift = tr / 3
    p = c1 - tr * tr / 3
    q = -2 * tr**3 / 27 + tr * c1 / 3 - det
    if abs(p) < 1e-300:
        return np.array([shift] * 3)
    r = 2 * math.sqrt(-p / 3)
    arg = max(-1.0, min(1.0, 3 * q / (p * r)))
    theta = math.acos(arg) / 3
    roots = [shift + r * math.cos(theta - 2 * math.pi * j / 3) for j in range(3)]
    return np.sort(roots)


finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def hermitian_from(re, im):
    a = re + 1j * im
    return a + a.conj().T


class TestHermEig:
    def test_identity(self):
        np.testing.assert_allclose(herm_eig(np.eye(2)).eigenvalues, [1, 1])

    def test_sigma_z(self):
        np.testing.assert_allclose(herm_eig(np.diag([1.0, -1.0])).eigenvalues, [-1, 1])

    def test_h_operators_d3_against_cubic_oracle(self):
        g = group(gell_mann_basis(3), 8, 1)
        for h in build_h_operators(g).reshape(-1, 3, 3):
            np.testing.assert_allclose(herm_eig(h).eigenvalues, cubic_eigenvalues(h), atol=1e-10)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ContractError, match=r"max\|A - A\^H\|"):
            herm_eig(np.array([[0, 1], [0, 0]]))

    def test_rejects_non_square(self):
        with pytest.raises(ContractError, match="square"):
            herm_eig(np.zeros((2, 3)))

    @settings(max_examples=50, deadline=None)
    @given(arrays(float, (4, 4), elements=finite), arrays(float, (4, 4), elements=finite))
    def test_reconstruction_and_orthonormality(self, re, im):
        a = hermitian_from(re, im)
        vals, vecs = herm_eig(a)
        assert np.all(np.diff(vals) >= 0)
        np.testing.assert_allclose((vecs * vals) @ vecs.conj().T, a, atol=1e-10 * max(1, np.abs(a).max()))
        np.testing.assert_allclose(vecs.conj().T @ vecs, np.eye(4), atol=1e-10)
        np.testing.assert_allclose(a @ vecs, vecs * vals, atol=1e-10 * max(1, np.abs(a).max()))


class TestTraceNorm:
    def test_zero(self):
        assert trace_norm(np.zeros((3, 4))) == 0

    def test_rank_one(self, rng):
        u = rng.normal(size=5)
        v = rng.normal(size=3)
        assert trace_norm(np.outer(u / np.linalg.norm(u), v / np.linalg.norm(v))) == pytest.approx(1)

    def test_product_of_maximally_mixed_qubits(self):
        # constant 6x6 matrix with entries 1/4: a single singular value 6/4
        p = np.full((6, 6), 0.25)
        oracle = np.sum(np.sqrt(np.clip(np.linalg.eigvalsh(p.T @ p), 0, None)))
        assert trace_norm(p) == pytest.approx(1.5, abs=1e-12)
        assert oracle == pytest.approx(1.5, abs=1e-7)

    @settings(max_examples=50, deadline=None)
    @given(arrays(float, (5, 5), elements=finite), st.randoms(use_true_random=False))
    def test_permutation_invariance_and_trace_dominance(self, p, random):
        rows = list(range(5))
        cols = list(range(5))
        random.shuffle(rows)
        random.shuffle(cols)
        value = trace_norm(p)
        assert trace_norm(p[rows][:, cols]) == pytest.approx(value, rel=1e-12, abs=1e-12)
        assert value >= abs(np.trace(p)) - 1e-9


class TestHsInner:
    def test_identity(self):
        assert hs_inner(np.eye(2), np.eye(2)) == 2

    def test_gell_mann_orthogonal(self):
        b = gell_mann_basis(3)
        assert abs(hs_inner(b.ops[0], b.ops[1])) == 0

    def test_dimension_mismatch(self):
        with pytest.raises(ContractError):
            hs_inner(np.eye(2), np.eye(3))

    @settings(max_examples=30, deadline=None)
    @given(arrays(float, (3, 3), elements=finite), arrays(float, (3, 3), elements=finite))
    def test_self_product_real_nonnegative(self, re, im):
        v = hs_inner(re + 1j * im, re + 1j * im)
        assert v.imag == 0 and v.real >= 0


class TestKron:
    def test_identities(self):
        np.testing.assert_array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_diagonal(self):
        np.testing.assert_array_equal(kron(np.diag([1, 0]), np.diag([0, 1])), np.diag([0, 1, 0, 0]))

    def test_pauli_product_spectrum(self):
        # normalized Paulis have eigenvalues +-1/sqrt2, so the product has +-1/2
        vals = np.linalg.eigvals(kron(PAULIS[1], PAULIS[2]))
        np.testing.assert_allclose(np.sort(vals.real), [-0.5, -0.5, 0.5, 0.5], atol=1e-12)


class TestRandomDensity:
    def test_pure_qubit(self):
        rho = random_density(2, 1, seed=3)
        assert np.trace(rho @ rho).real == pytest.approx(1, abs=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_unit_trace(self, d, seed):
        assert np.trace(random_density(d, d, seed)).real == pytest.approx(1, abs=1e-14)

    def test_rank_two_in_d3(self):
        vals = cubic_eigenvalues(random_density(3, 2, seed=7))
        assert abs(vals[0]) <= 1e-12
        assert vals[1] > 1e-6 and vals[2] > 1e-6

    def test_deterministic(self):
        np.testing.assert_array_equal(random_density(4, 2, 11), random_density(4, 2, 11))

    @pytest.mark.parametrize("rank", [0, 4])
    def test_invalid_rank(self, rank):
        with pytest.raises(ContractError):
            random_density(3, rank, 0)


def test_element_self_product_is_x():
    from nmpovm import build
    m = build(3, 4, 3)
    e = m.elements[1, 2]
    assert hs_inner(e, e) == pytest.approx(m.x, abs=1e-12)

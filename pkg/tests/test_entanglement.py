import math

import numpy as np
import pytest

from conftest import classes, measurement
from nmpovm import (
    ContractError,
    bell_state,
    build,
    coincidence_bound,
    correlation_matrix,
    criterion_trace,
    criterion_trace_norm,
    detect,
    index_of_coincidence,
    isotropic,
    probabilities,
    product,
    random_density,
    random_separable,
    threshold_scan,
)
from nmpovm.entanglement import CONSISTENT, NOT_APPLICABLE, random_product
from nmpovm.linalg import trace_norm


def direct_correlation(rho, m_a, m_b):
    ea, eb = m_a.flat_elements(), m_b.flat_elements()
    return np.array([[np.trace(rho @ np.kron(a, b)).real for b in eb] for a in ea])


@pytest.fixture(scope="module")
def mub():
    return build(2, 3, 2)


class TestCorrelationMatrix:
    def test_maximally_mixed_product(self):
        a, b = build(2, 3, 2), build(3, 4, 3)
        p = correlation_matrix(np.eye(6) / 6, a, b)
        assert p.shape == (6, 12)
        np.testing.assert_allclose(p, 1 / 6, atol=1e-15)

    def test_product_state_rank_one(self, rng):
        a, b = build(2, 1, 4), build(3, 2, 5)
        ra, rb = random_density(2, seed=rng), random_density(3, seed=rng)
        p = correlation_matrix(product(ra, rb), a, b)
        np.testing.assert_allclose(p, np.outer(probabilities(a, ra).ravel(), probabilities(b, rb).ravel()), atol=1e-14)

    def test_matches_direct_traces(self, rng):
        a, b = build(3, 8, 2), build(2, 3, 2)
        rho = random_density(6, seed=rng)
        np.testing.assert_allclose(correlation_matrix(rho, a, b), direct_correlation(rho, a, b), atol=1e-14)

    def test_bell_blocks(self, mub):
        p = correlation_matrix(bell_state(2), mub, mub).reshape(3, 2, 3, 2)
        np.testing.assert_allclose(p, direct_correlation(bell_state(2), mub, mub).reshape(3, 2, 3, 2), atol=1e-14)
        sign = np.array([-1, 1])
        for a, c in enumerate((1, -1, 1)):
            np.testing.assert_allclose(p[a, :, a, :], (1 + c * np.outer(sign, sign)) / 4, atol=1e-14)
        for a in range(3):
            for b in range(3):
                assert p[a, :, b, :].sum() == pytest.approx(1)

    def test_dimension_mismatch(self, mub):
        with pytest.raises(ContractError):
            correlation_matrix(np.eye(9) / 9, mub, mub)


class TestCriteria:
    def test_product_identity(self, rng):
        a, b = build(3, 4, 3), build(2, 1, 4)
        for _ in range(20):
            ra, rb = random_density(3, seed=rng), random_density(2, seed=rng)
            p = correlation_matrix(product(ra, rb), a, b)
            ca = index_of_coincidence(probabilities(a, ra))
            cb = index_of_coincidence(probabilities(b, rb))
            res = criterion_trace_norm(p, coincidence_bound(3, 3, a.x), coincidence_bound(2, 4, b.x))
            assert res.value == pytest.approx(math.sqrt(ca * cb), abs=1e-10)
            assert res.verdict == CONSISTENT

    def test_bell_transposed(self, mub):
        p = correlation_matrix(bell_state(2), mub, mub.transposed())
        # independent oracle: eigenvalues of the PSD matrix P
        oracle = np.sum(np.abs(np.linalg.eigvalsh(0.5 * (p + p.T))))
        tn = criterion_trace_norm(p, 2.0, 2.0)
        assert tn.value == pytest.approx(3, abs=1e-12) and oracle == pytest.approx(3, abs=1e-12)
        assert tn.entangled
        tr = criterion_trace(p, 2.0)
        assert tr.value == pytest.approx(3, abs=1e-12)
        assert tr.entangled

    def test_bell_identical_on_boundary(self, mub):
        p = correlation_matrix(bell_state(2), mub, mub)
        tr = criterion_trace(p, coincidence_bound(2, 2, 1.0))
        assert tr.value == pytest.approx(2, abs=1e-12)
        assert tr.verdict == CONSISTENT

    def test_maximally_mixed_trace(self):
        m = build(3, 4, 3)
        tr = criterion_trace(correlation_matrix(np.eye(9) / 9, m, m), coincidence_bound(3, 3, m.x))
        assert tr.value == pytest.approx(4 / 3)

    def test_trace_requires_square(self):
        with pytest.raises(ContractError):
            criterion_trace(np.ones((2, 3)), 1.0)

    def test_detect_mismatched_families(self):
        rep = detect(np.eye(6) / 6, build(2, 3, 2), build(3, 4, 3))
        assert rep.verdict_eq19 == NOT_APPLICABLE and rep.trace_value is None

    def test_random_products_chain(self, rng):
        for d in (2, 3, 4):
            for c in [c for c in classes((d,))]:
                m = measurement(*c)
                cb = coincidence_bound(d, m.M, m.x)
                for _ in range(5):
                    ra, rb = random_density(d, seed=rng), random_density(d, seed=rng)
                    p = correlation_matrix(product(ra, rb), m, m)
                    ca = index_of_coincidence(probabilities(m, ra))
                    cbb = index_of_coincidence(probabilities(m, rb))
                    assert np.trace(p) <= (ca + cbb) / 2 + 1e-12
                    assert (ca + cbb) / 2 <= cb + 1e-10


class TestStates:
    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_isotropic_endpoints(self, d):
        np.testing.assert_allclose(isotropic(d, 0), np.eye(d * d) / d**2)
        np.testing.assert_allclose(isotropic(d, 1), bell_state(d))

    def test_bell_reduced_states(self):
        rho = bell_state(2)
        assert np.trace(rho @ rho).real == pytest.approx(1)
        red = np.einsum("ijkj->ik", rho.reshape(2, 2, 2, 2))
        np.testing.assert_allclose(red, np.eye(2) / 2)

    def test_range(self):
        with pytest.raises(ContractError):
            isotropic(2, 1.5)

    def test_separable_sampler_is_state(self):
        rho = random_separable(2, 3, seed=4)
        assert np.trace(rho).real == pytest.approx(1)
        assert np.linalg.eigvalsh(rho).min() > -1e-12
        np.testing.assert_array_equal(rho, random_separable(2, 3, seed=4))


class TestLinearity:
    def test_convexity_and_linearity(self, rng):
        m = build(3, 4, 3)
        states = [random_density(9, seed=rng) for _ in range(4)]
        q = rng.dirichlet(np.ones(4))
        mix = sum(w * s for w, s in zip(q, states))
        ps = [correlation_matrix(s, m, m) for s in states]
        pm = correlation_matrix(mix, m, m)
        assert trace_norm(pm) <= sum(w * trace_norm(p) for w, p in zip(q, ps)) + 1e-12
        assert np.trace(pm) == pytest.approx(sum(w * np.trace(p) for w, p in zip(q, ps)), abs=1e-13)
        for p in ps:
            assert np.trace(p) <= trace_norm(p) + 1e-12


class TestScan:
    def test_qubit_transposed(self, mub):
        for crit in ("trace", "trace-norm"):
            res = threshold_scan(2, mub, mub.transposed(), crit)
            # both criteria are linear in p here: 3/2 + 3p/2 > 2 iff p > 1/3
            assert res.p_star == pytest.approx(1 / 3, abs=1e-6)
            assert 0 < res.p_star < 1

    def test_never_flags_at_zero_and_monotone(self):
        m = build(3, 4, 3)
        res = threshold_scan(3, m, m.transposed(), "trace", resolution=51)
        flags = [r["value_19"] > r["bound_19"] + 1e-10 for r in res.rows]
        assert not flags[0] and flags[-1]
        first = flags.index(True)
        assert all(flags[first:])
        assert res.rows[first - 1]["p"] <= res.p_star <= res.rows[first]["p"]

    def test_none_when_never_flagged(self):
        sic = build(2, 1, 4)
        res = threshold_scan(2, sic, sic, "trace", resolution=21)
        assert res.p_star is None
        assert threshold_scan(2, sic, sic.transposed(), "trace").p_star == pytest.approx(1 / 3, abs=1e-6)

    def test_trace_rejects_mixed_families(self):
        with pytest.raises(ContractError):
            threshold_scan(2, build(2, 1, 4), build(2, 3, 2), "trace")


@pytest.mark.parametrize("da,db", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_no_false_positives_small(da, db, rng):
    for ca in classes((da,)):
        for cb in classes((db,)):
            ma, mb = measurement(*ca), measurement(*cb)
            for _ in range(20):
                rep = detect(random_separable(da, db, rng), ma, mb)
                assert not rep.entangled
                rep = detect(random_product(da, db, rng), ma, mb.transposed())
                assert not rep.entangled

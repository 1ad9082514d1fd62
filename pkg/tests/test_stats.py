"""Paired t-test against a high-precision oracle."""

import math

import mpmath as mp
import numpy as np
import pytest

from uamsched.stats import mean_std, paired_t_test


def oracle_t_test(deltas):
    """Direct formula with 50-digit arithmetic; p via regularized beta."""
    mp.mp.dps = 50
    n = len(deltas)
    mean = mp.fsum(deltas) / n
    var = mp.fsum([(mp.mpf(d) - mean) ** 2 for d in deltas]) / (n - 1)
    t = mean / mp.sqrt(var / n)
    nu = n - 1
    x = nu / (nu + t * t)
    p = mp.betainc(nu / mp.mpf(2), mp.mpf(1) / 2, 0, x, regularized=True)
    return float(t), float(p)


class TestPairedTTest:
    def test_worked_example(self):
        r = paired_t_test([1.0, 2.0, 3.0, 4.0, 5.0])
        assert r.t == pytest.approx(4.2426406871, abs=1e-9)
        assert r.p == pytest.approx(0.013235599564, abs=1e-9)
        assert r.p == pytest.approx(0.0132, abs=1e-4)
        assert r.dof == 4
        assert r.mean == pytest.approx(3.0)
        assert r.std == pytest.approx(1.5811388301, abs=1e-9)

    def test_all_zero_is_degenerate(self):
        r = paired_t_test([0.0, 0.0, 0.0])
        assert r.degenerate
        assert math.isnan(r.t) and math.isnan(r.p)

    def test_constant_nonzero_is_degenerate(self):
        assert paired_t_test([2.5, 2.5, 2.5, 2.5]).degenerate

    def test_symmetric_deltas_give_p_one(self):
        r = paired_t_test([-3.0, 3.0])
        assert r.t == 0.0
        assert r.p == pytest.approx(1.0)

    def test_matches_oracle_on_random_vectors(self):
        rng = np.random.default_rng(99)
        for _ in range(20):
            n = int(rng.integers(2, 30))
            deltas = (rng.normal(rng.uniform(-5, 5), rng.uniform(0.5, 20), n)).tolist()
            got = paired_t_test(deltas)
            want_t, want_p = oracle_t_test(deltas)
            assert got.t == pytest.approx(want_t, abs=1e-9)
            assert got.p == pytest.approx(want_p, abs=1e-9)

    def test_rejects_short_input(self):
        with pytest.raises(ValueError):
            paired_t_test([1.0])


class TestMeanStd:
    def test_matches_numpy(self):
        rng = np.random.default_rng(1)
        xs = rng.normal(3, 2, 17).tolist()
        mean, std = mean_std(xs)
        assert mean == pytest.approx(float(np.mean(xs)))
        assert std == pytest.approx(float(np.std(xs, ddof=1)))

    def test_small_inputs(self):
        assert mean_std([]) == (0.0, 0.0)
        assert mean_std([4.0]) == (4.0, 0.0)

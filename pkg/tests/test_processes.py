import math

import numpy as np
import pytest
from scipy import stats

from occtime import processes as pr
from occtime._rng import Seed, as_generator

Z = 4.0


def _binom_z(hits, n, p):
    return (hits / n - p) / math.sqrt(p * (1 - p) / n)


class TestPathGrid:
    def test_validation(self):
        with pytest.raises(ValueError):
            pr.PathGrid([0.0, 1.0], [1.0, 2.0])
        with pytest.raises(ValueError):
            pr.PathGrid([0.1, 1.0], [0.0, 2.0])
        with pytest.raises(ValueError):
            pr.PathGrid([0.0, 1.0, 0.5], [0.0, 1.0, 2.0])
        p = pr.PathGrid([0.0, 0.5, 1.0], [[0.0, 1.0, 2.0], [0.0, -1.0, 3.0]])
        assert p.n_paths == 2 and p.horizon == 1.0

    def test_csv(self, tmp_path):
        path = pr.simulate_bm(1.0, 16, seed=5)
        out = tmp_path / "p.csv"
        path.to_csv(out)
        data = np.loadtxt(out, delimiter=",", skiprows=1)
        assert out.read_text().splitlines()[0] == "time,value"
        np.testing.assert_array_equal(data[:, 0], path.times)
        np.testing.assert_array_equal(data[:, 1], path.values)


class TestBrownian:
    def test_start_and_shape(self):
        p = pr.simulate_bm(2.0, 100, seed=1)
        assert p.values[0] == 0 and p.values.shape == (101,)
        assert p.horizon == 2.0

    def test_variance_and_mean(self):
        t, n_paths = 1.5, 10**5
        p = pr.simulate_bm(t, 4, seed=2, paths=n_paths)
        end = p.values[:, -1]
        var = end.var(ddof=1)
        # chi-square standard error of a Gaussian variance estimate
        assert abs(var - t) <= 3 * t * math.sqrt(2 / (n_paths - 1))
        inc = np.diff(p.values, axis=1).ravel()
        assert abs(inc.mean()) <= Z * inc.std() / math.sqrt(inc.size)

    def test_determinism(self):
        a = pr.simulate_bm(1.0, 64, seed=Seed(9, 3), paths=4)
        b = pr.simulate_bm(1.0, 64, seed=Seed(9, 3), paths=4)
        c = pr.simulate_bm(1.0, 64, seed=Seed(9, 4), paths=4)
        np.testing.assert_array_equal(a.values, b.values)
        assert not np.array_equal(a.values, c.values)


class TestStable:
    def test_domain(self):
        with pytest.raises(ValueError):
            pr.simulate_symmetric_stable(2.5, 1.0, 10, seed=1)
        with pytest.raises(ValueError):
            pr.simulate_symmetric_stable(0.0, 1.0, 10, seed=1)

    @pytest.mark.parametrize("alpha", [1.0, 1.5])
    def test_symmetric_positivity(self, alpha):
        n = 10**5
        end = pr.simulate_symmetric_stable(alpha, 1.0, 4, seed=3, paths=n).values[:, -1]
        assert abs(_binom_z(int(np.sum(end > 0)), n, 0.5)) <= 3

    def test_alpha2_is_gaussian_variance_2h(self):
        rng = as_generator(4)
        x = pr.symmetric_stable_variates(2.0, 10**4, rng)
        assert stats.kstest(x, stats.norm(scale=math.sqrt(2)).cdf).statistic < 1.63 / 100

    def test_alpha1_is_cauchy(self):
        x = pr.symmetric_stable_variates(1.0, 10**4, as_generator(5))
        assert stats.kstest(x, stats.cauchy.cdf).statistic < 1.63 / 100

    def test_cms_matches_scipy_levy_stable(self):
        x = pr.symmetric_stable_variates(1.5, 10**4, as_generator(6))
        assert stats.kstest(x, stats.levy_stable(1.5, 0.0).cdf).statistic < 1.63 / 100

    def test_self_similarity(self):
        alpha, n = 1.5, 4 * 10**4
        q = []
        for t in (1.0, 4.0):
            end = pr.simulate_symmetric_stable(alpha, t, 8, seed=int(t) + 10, paths=n).values[:, -1]
            q.append(np.quantile(end / t ** (1 / alpha), [0.25, 0.75]))
        np.testing.assert_allclose(q[0], q[1], atol=0.03)


class TestSubordinator:
    @pytest.mark.parametrize("mu", [0.5, 1.0, 2.0])
    def test_positivity_pins_normalization(self, mu):
        n = 10**5
        x1 = pr.simulate_drifted_half_stable_subordinator(mu, 1.0, 1, seed=int(mu * 10), paths=n).values[:, -1]
        ref = math.erf(math.sqrt(1 / (4 * mu)))
        assert abs(_binom_z(int(np.sum(x1 > 0)), n, ref)) <= Z

    def test_positivity_at_other_times(self):
        # the scale must hold at every t, not just t = 1
        n, mu, t = 10**5, 1.0, 0.3
        xt = pr.simulate_drifted_half_stable_subordinator(mu, t, 3, seed=77, paths=n).values[:, -1]
        assert abs(_binom_z(int(np.sum(xt > 0)), n, math.erf(math.sqrt(t / (4 * mu))))) <= Z

    def test_sigma_monotone_and_shared(self):
        sigma = pr.simulate_half_stable_subordinator(1.0, 50, seed=8, paths=20)
        assert np.all(np.diff(sigma.values, axis=1) >= 0)
        x = pr.simulate_drifted_half_stable_subordinator(0.7, 1.0, 50, seed=8, paths=20)
        np.testing.assert_allclose(x.values + 0.7 * x.times, sigma.values, atol=1e-12)

    def test_laplace_exponent(self):
        # E exp(-lambda sigma_t) = exp(-t sqrt(lambda))
        lam, t = 2.0, 0.5
        s = pr.half_stable_variates(np.full(10**5, t), as_generator(12))
        vals = np.exp(-lam * s)
        assert abs(vals.mean() - math.exp(-t * math.sqrt(lam))) <= Z * vals.std() / math.sqrt(vals.size)

    def test_bad_mu(self):
        with pytest.raises(ValueError):
            pr.simulate_drifted_half_stable_subordinator(0.0, 1.0, 4, seed=1)


class TestBridge:
    def test_endpoints_and_idempotence(self):
        b = pr.simulate_bridge(1.0, 128, seed=1, paths=3)
        assert np.all(b.values[:, 0] == 0) and np.all(b.values[:, -1] == 0)
        np.testing.assert_array_equal(pr.make_bridge(b).values, b.values)

    def test_cauchy_bridge(self):
        b = pr.simulate_bridge(1.0, 64, seed=2, alpha=1.0)
        assert b.values[-1] == 0

    def test_horizon_required(self):
        with pytest.raises(ValueError):
            pr.make_bridge(pr.simulate_bm(2.0, 8, seed=1))

    def test_formula(self):
        path = pr.simulate_bm(1.0, 8, seed=3)
        b = pr.make_bridge(path)
        np.testing.assert_allclose(b.values[:-1], (path.values - path.times * path.values[-1])[:-1])


class TestWalks:
    def test_laplace_symmetry(self):
        n = 10**5
        s = pr.laplace_walk(1, seed=1, size=n).steps[:, 0]
        assert abs(_binom_z(int(np.sum(s > 0)), n, 0.5)) <= 3

    def test_laplace_increment_law(self):
        # sqrt(E) N is Laplace with scale 1/sqrt(2)
        s = pr.laplace_walk(1, seed=2, size=10**4).steps[:, 0]
        assert stats.kstest(s, stats.laplace(scale=1 / math.sqrt(2)).cdf).statistic < 1.63 / 100

    @pytest.mark.parametrize("m,ref", [(1, 1 / 2), (4, 35 / 128)])
    def test_laplace_persistence(self, m, ref):
        n = 10**6
        hits = int(pr.laplace_walk(m, seed=m, size=n).persistent().sum())
        assert abs(_binom_z(hits, n, ref)) <= Z

    @pytest.mark.parametrize("m,ref", [(2, 3 / 8), (3, 5 / 16), (4, 35 / 128)])
    def test_stable_at_poisson_times(self, m, ref):
        n = 4 * 10**5
        hits = int(pr.stable_walk_at_poisson_times(2.0, m, seed=20 + m, size=n).persistent().sum())
        assert abs(_binom_z(hits, n, ref)) <= Z

    def test_weak_vs_strict(self):
        w = pr.WalkSample(np.array([[1.0, 0.0, 2.0]]))
        assert not w.persistent()[0] and w.persistent(strict=False)[0]

    def test_exchangeable_bridge(self):
        xi = pr.exchangeable_bridge_increments(6, seed=1, size=1000)
        assert np.all(np.cumsum(xi, axis=1)[:, -1] == 0)
        assert np.all(np.abs(xi.sum(axis=1)) <= 1e-12)
        with pytest.raises(ValueError):
            pr.exchangeable_bridge_increments(1, seed=1)

    @pytest.mark.parametrize("m", [2, 4, 6])
    def test_bridge_persistence_and_unique_shift(self, m):
        n = 2 * 10**5
        xi = pr.exchangeable_bridge_increments(m, seed=30 + m, size=n)
        hits = int(np.all(np.cumsum(xi, axis=1)[:, : m - 1] > 0, axis=1).sum())
        assert abs(_binom_z(hits, n, 1 / m)) <= Z
        assert np.all(pr.count_positive_shifts(xi[:20000]) == 1)


class TestOccupation:
    def test_trivial(self):
        t = np.linspace(0, 2, 5)
        assert pr.occupation_time_of_path(pr.PathGrid(t, [0, 1, 1, 1, 1])) == 2.0
        assert pr.occupation_time_of_path(pr.PathGrid(t, [0, -1, -1, -1, -1])) == 0.0
        assert pr.occupation_time_of_path(pr.PathGrid(t, [0, 0, 0, 1, 1]), strict=False) == 2.0
        assert pr.occupation_time_of_path(pr.PathGrid(t, [0, 0, 0, 1, 1])) == 1.0

    def test_brownian_mean(self):
        n = 10**5
        p = pr.simulate_bm(1.0, 256, seed=4, paths=n)
        occ = pr.occupation_time_of_path(p)
        assert abs(occ.mean() - 0.5) <= 3 * occ.std() / math.sqrt(n)

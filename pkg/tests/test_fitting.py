import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from benini import Benini, BeniniThree, GenBenini, Pareto
from benini.fitting import (
    DataError,
    Dataset,
    empirical_log_survival,
    fit_log_survival_polynomial,
    fit_model,
    load_csv,
    mle_benini2,
)


def sample(dist, n, seed):
    return Dataset.from_values(dist.sample(n, seed=seed))


class TestDataset:
    def test_rejects_nonpositive(self):
        for bad in ([1.0, 0.0], [1.0, -2.0], [float("inf")], [float("nan")]):
            with pytest.raises(DataError):
                Dataset.from_values(bad)

    def test_frozen(self):
        d = Dataset.from_values([1.0, 2.0])
        with pytest.raises(Exception):
            d.name = "x"


class TestCsv:
    def test_header_and_values(self, tmp_path):
        p = tmp_path / "inc.csv"
        p.write_text("income\n1.5\n2\n\n3e2\n")
        d = load_csv(p)
        assert d.observations == (1.5, 2.0, 300.0) and d.name == "inc"

    def test_no_header(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("1\n2\n")
        assert len(load_csv(p)) == 2

    @pytest.mark.parametrize("text,line", [("income\n1\n-3\n", 3), ("1\nabc\n", 2), ("1\n0\n", 2),
                                           ("1,2\n", 1), ("income\n1\nincome\n", 3)])
    def test_row_numbered_errors(self, tmp_path, text, line):
        p = tmp_path / "bad.csv"
        p.write_text(text)
        with pytest.raises(DataError) as e:
            load_csv(p)
        assert e.value.line == line and f"line {line}" in str(e.value)

    def test_empty(self, tmp_path):
        p = tmp_path / "empty.csv"
        p.write_text("")
        with pytest.raises(DataError):
            load_csv(p)
        p.write_text("income\n")
        with pytest.raises(DataError):
            load_csv(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_csv(tmp_path / "nope.csv")


class TestEmpirical:
    def test_two_points(self):
        pts = empirical_log_survival(Dataset.from_values([3.0, 1.0]))
        assert pts.shape == (1, 2)
        assert pts[0, 0] == pytest.approx(0.0) and pts[0, 1] == pytest.approx(math.log(0.5))

    def test_too_small(self):
        with pytest.raises(DataError):
            empirical_log_survival(Dataset.from_values([1.0]))

    def test_permutation_invariant(self):
        x = Benini(1.0).sample(500, seed=1)
        a = empirical_log_survival(Dataset.from_values(x))
        b = empirical_log_survival(Dataset.from_values(np.random.default_rng(2).permutation(x)))
        assert np.array_equal(a, b)

    def test_nonincreasing(self):
        pts = empirical_log_survival(sample(GenBenini((1.0, 0.5)), 1000, 3))
        assert np.all(np.diff(pts[:, 1]) <= 0)

    def test_pareto_slope(self):
        pts = empirical_log_survival(sample(Pareto(2.0, 1.0), 10_000, 4))
        slope = np.polyfit(pts[:, 0], pts[:, 1], 1)[0]
        assert slope == pytest.approx(-2.0, abs=0.1)


class TestRegression:
    def test_exact_line(self):
        # points placed exactly on ln S = -2 ln x
        n = 50
        i = np.arange(1, n + 1)
        x = np.exp(-np.log1p(-np.minimum(i, n - 1) / n) / 2.0)
        x[-1] = x[-2] * 2
        fit = fit_log_survival_polynomial(Dataset.from_values(x), 1)
        assert fit.rss == pytest.approx(0.0, abs=1e-20)
        assert fit.coefficients[1] == pytest.approx(2.0, rel=1e-12)

    def test_benini_recovery(self):
        fit = fit_log_survival_polynomial(sample(Benini(1.0), 10_000, 10), 2)
        assert fit.coefficients[2] == pytest.approx(1.0, abs=0.15)
        assert fit.coefficients[1] == pytest.approx(0.0, abs=0.3)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 10_000), st.integers(20, 400))
    def test_rss_nested(self, seed, n):
        data = sample(BeniniThree(0.5, 0.7), n, seed)
        rss = [fit_log_survival_polynomial(data, k).rss for k in (1, 2, 3)]
        assert rss[1] <= rss[0] * (1 + 1e-12) + 1e-12
        assert rss[2] <= rss[1] * (1 + 1e-12) + 1e-12

    @pytest.mark.parametrize("dist,truth", [
        (Pareto(2.0), (0.0, 2.0)),
        (Benini(1.0), (0.0, 0.0, 1.0)),
        (BeniniThree(0.5, 1.5), (0.0, 0.5, 1.5)),
        (GenBenini((1.0, 1.0, 0.5)), (0.0, 1.0, 1.0, 0.5)),
    ], ids=["pareto", "benini2", "benini3", "genbenini3"])
    def test_replicate_recovery(self, dist, truth):
        # order-statistic residuals are strongly correlated so OLS standard errors understate
        # the spread; use the spread across seeded replicates instead
        degree = len(truth) - 1
        est = np.array([fit_log_survival_polynomial(sample(dist, 10_000, s), degree).coefficients
                        for s in range(20)])
        sd = est.std(axis=0, ddof=1)
        for j in range(1, degree + 1):
            assert abs(est[0, j] - truth[j]) <= 3 * sd[j] + 1e-9

    def test_rank_deficient(self):
        with pytest.raises(DataError):
            fit_log_survival_polynomial(Dataset.from_values([2.0] * 10), 1)

    def test_too_few(self):
        with pytest.raises(DataError):
            fit_log_survival_polynomial(Dataset.from_values([1.0, 2.0, 3.0]), 2)

    def test_feasibility_flag(self):
        fit = fit_log_survival_polynomial(sample(Pareto(3.0), 2000, 1), 2)
        assert fit.feasible == all(a >= 0 for a in fit.coefficients[1:])

    def test_models(self):
        data = sample(Benini(1.0), 2000, 5)
        assert fit_model(data, "pareto").model == "pareto"
        b2 = fit_model(data, "benini2")
        assert b2.model == "benini2" and b2.coefficients[1] == 0.0
        assert fit_model(data, "benini3").model == "benini3"
        assert fit_model(data, "genbenini", 4).model == "genbenini-4"
        with pytest.raises(ValueError):
            fit_model(data, "genbenini")
        with pytest.raises(ValueError):
            fit_model(data, "lognormal")


class TestMle:
    def test_recovery(self):
        _, beta = mle_benini2(sample(Benini(1.0), 100_000, 12))
        assert beta == pytest.approx(1.0, abs=0.02)

    def test_two_points(self):
        s, b = mle_benini2(Dataset.from_values([3.0, 3.0 * math.e]))
        assert s == 3.0 and b == pytest.approx(2.0, rel=1e-14)

    def test_scale_equivariance(self):
        x = Benini(0.7, 2.0).sample(1000, seed=8)
        s1, b1 = mle_benini2(Dataset.from_values(x))
        s2, b2 = mle_benini2(Dataset.from_values(5.0 * x))
        assert s2 == pytest.approx(5.0 * s1, rel=1e-14)
        assert b2 == pytest.approx(b1, rel=1e-10)

    def test_degenerate(self):
        with pytest.raises(DataError):
            mle_benini2(Dataset.from_values([2.0, 2.0, 2.0]))

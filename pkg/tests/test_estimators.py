import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from dparetogof.bootstrap import BootstrapConfig, bootstrap_test
from dparetogof.distribution import FrequencyTable, compress
from dparetogof.estimators import DParetoGoodnessOfFit, DParetoMLE
from dparetogof.exceptions import DomainError
from dparetogof.special import zeta
from dparetogof.validation import check_counts, check_generator, check_table

EXPELLED = {1: 1999, 2: 33, 3: 2, 4: 1, 5: 1}
SMALL = [1, 1, 1, 2, 1, 3, 1, 1, 2, 7]


class TestValidation:
    def test_accepts_column_and_integral_floats(self):
        out = check_counts(np.array([[1.0], [4.0], [2.0]]))
        assert out.dtype == np.int64 and out.tolist() == [1, 4, 2]

    @pytest.mark.parametrize("bad", [[], [[1, 2], [3, 4]], [1, 0], [1.5], [np.nan], ["a"]])
    def test_rejects(self, bad):
        with pytest.raises(DomainError):
            check_counts(bad)

    def test_table_passthrough(self):
        t = FrequencyTable.from_mapping({1: 3})
        assert check_table(t) is t
        assert check_table({2: 1, 1: 1}).as_dict() == {1: 1, 2: 1}

    def test_generator(self):
        g = np.random.default_rng(1)
        assert check_generator(g) is g
        assert isinstance(check_generator(4), np.random.Generator)
        with pytest.raises(DomainError):
            check_generator(np.random.RandomState(0))


class TestMleEstimator:
    def test_fit(self):
        est = DParetoMLE().fit(EXPELLED)
        assert est.nu_ == pytest.approx(5.89, abs=0.01)
        assert est.n_samples_ == 2036
        assert not est.fit_.degenerate

    def test_column_vector_input(self):
        a = DParetoMLE().fit(np.array(SMALL).reshape(-1, 1)).nu_
        assert a == DParetoMLE().fit(SMALL).nu_

    def test_score_is_mean_log_likelihood(self):
        est = DParetoMLE().fit(SMALL)
        manual = np.mean([-est.nu_ * math.log(x) - math.log(zeta(est.nu_)) for x in SMALL])
        assert est.score(SMALL) == pytest.approx(manual, rel=1e-13)

    def test_mle_maximises_score(self):
        est = DParetoMLE().fit(SMALL)
        t = compress(SMALL)
        for nu in (est.nu_ - 0.05, est.nu_ + 0.05):
            other = -nu * t.mean_log() - math.log(zeta(nu))
            assert est.score(SMALL) > other

    def test_pmf_and_sample(self):
        est = DParetoMLE().fit(SMALL)
        assert est.pmf([1, 2]).shape == (2,)
        draws = est.sample(50, random_state=3)
        assert draws.shape == (50,)
        np.testing.assert_array_equal(draws, est.sample(50, random_state=3))

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            DParetoMLE().pmf([1])


class TestGofEstimator:
    def test_matches_functional_api(self):
        test = DParetoGoodnessOfFit(statistic="T:1", n_bootstrap=30, random_state=9).fit(SMALL)
        report = bootstrap_test(SMALL, "T:1", BootstrapConfig(b=30, master_seed=9))
        assert test.report_ == report
        assert test.pvalue_ == report.p_value
        assert test.reject_ == report.reject
        assert test.bootstrap_distribution_.shape == (30,)

    def test_params_and_clone(self):
        est = DParetoGoodnessOfFit(statistic="CN", n_bootstrap=10, n_jobs=2)
        params = est.get_params()
        assert params == {"statistic": "CN", "n_bootstrap": 10, "alpha": 0.05,
                          "random_state": 0, "n_jobs": 2}
        twin = clone(est)
        assert twin.get_params() == params and twin is not est

    def test_invalid_params_surface_at_fit(self):
        with pytest.raises(DomainError):
            DParetoGoodnessOfFit(alpha=2.0).fit(SMALL)
        with pytest.raises(DomainError):
            DParetoGoodnessOfFit(statistic="nope").fit(SMALL)

"""Estimators, halfwidths, and the verification checks on cheap configs."""

import math

import numpy as np
import pytest

from levymonoid import (
    AdditiveReals,
    EmptyEnsembleError,
    LevyMeasure,
    estimate_laplace,
    hoeffding_halfwidth,
    sample_ensemble,
)
from levymonoid.config import ConfigError, parse_config
from levymonoid.core import CharacterId, NoActionError
from levymonoid.verify import (
    all_passed,
    check_alpha,
    check_bochner,
    check_convolution,
    check_fdd,
    check_invariance,
    check_lk,
    check_martingale,
    check_moments,
    check_sum_criterion,
    check_transience,
    empirical_bernstein_halfwidth,
    run_all,
)

ADD = AdditiveReals()
E1 = CharacterId.base(1)


def make_cfg(**overrides):
    data = {
        "instance": {"kind": "additive"},
        "measure": {"layers": [{"mass": 2.0, "distribution": "exponential", "rate": 1.0}]},
        "path": {"drift": 0.0, "horizon": 2.0},
        "probes": {"characters": [[1]], "times": [1.0]},
        "run": {"replicates": 4000, "seed": 7, "delta": 0.01},
    }
    data.update(overrides)
    return parse_config(data)


class TestHalfwidths:
    def test_hoeffding_formula(self):
        assert hoeffding_halfwidth(100_000, 0.01) == pytest.approx(
            math.sqrt(math.log(200.0) / 200_000.0), abs=1e-15)

    def test_hoeffding_scales_with_range(self):
        assert hoeffding_halfwidth(100, 0.05, value_range=3.0) == pytest.approx(
            3.0 * hoeffding_halfwidth(100, 0.05), abs=1e-15)

    def test_empirical_bernstein_covers_exponential_mean(self):
        rng = np.random.default_rng(3)
        misses = 0
        for _ in range(200):
            samples = rng.exponential(1.0, 2000)
            hw = empirical_bernstein_halfwidth(samples, 0.05)
            if abs(samples.mean() - 1.0) > hw:
                misses += 1
        assert misses <= 20  # nominal rate 5%; generous slack

    def test_needs_samples(self):
        with pytest.raises(EmptyEnsembleError):
            hoeffding_halfwidth(0, 0.01)
        with pytest.raises(EmptyEnsembleError):
            empirical_bernstein_halfwidth(np.array([1.0]), 0.01)


class TestEstimateLaplace:
    def test_pure_drift_is_exact(self):
        ens = sample_ensemble(ADD, LevyMeasure(()), 1.0, 2.0, 5, 50)
        est = estimate_laplace(ADD, ens, E1, 1.0)
        assert est.mean == pytest.approx(math.exp(-1.0), abs=1e-15)

    def test_time_zero_is_one(self):
        ens = sample_ensemble(ADD, make_cfg().measure, 0.0, 1.0, 5, 50)
        assert estimate_laplace(ADD, ens, E1, 0.0).mean == 1.0

    def test_empty_ensemble(self):
        with pytest.raises(EmptyEnsembleError):
            estimate_laplace(ADD, [], E1, 0.5)


class TestChecksPass:
    def test_lk(self):
        assert all_passed(check_lk(make_cfg()))

    def test_lk_reports_are_reproducible(self):
        a = [r.to_json_dict() for r in check_lk(make_cfg())]
        b = [r.to_json_dict() for r in check_lk(make_cfg())]
        assert a == b

    def test_lk_threads_match_serial(self):
        serial = [r.to_json_dict() for r in check_lk(make_cfg())]
        parallel = [r.to_json_dict() for r in check_lk(make_cfg(), threads=2)]
        assert serial == parallel

    def test_fdd(self):
        cfg = make_cfg(probes={"characters": [[1]], "times": [0.5, 1.0]})
        assert all_passed(check_fdd(cfg))

    def test_fdd_idempotent_collapse(self):
        # powers of a {0,1}-valued character collapse, so the closed form is
        # the marginal at the last time
        import math
        cfg = parse_config({
            "instance": {"kind": "max"},
            "measure": {"layers": [{"mass": 1.0, "distribution": "exponential", "rate": 1.0}]},
            "path": {"horizon": 2.0},
            "probes": {"characters": [[1]], "times": [1.0, 2.0]},
            "run": {"replicates": 4000, "seed": 7},
        })
        [row] = check_fdd(cfg)
        assert row.closed_form == pytest.approx(math.exp(-2.0 * math.exp(-1.0)), abs=1e-12)
        assert row.passed

    def test_martingale_grid(self):
        cfg = make_cfg(probes={"characters": [[1]], "times": [0.0, 0.5, 1.0]})
        reports = check_martingale(cfg)
        assert all_passed(reports)
        # t = 0: chi(X_0) = 1 exactly
        assert reports[0].estimate == 1.0

    def test_martingale_pure_drift_exact(self):
        cfg = make_cfg(measure={}, path={"drift": 1.0, "horizon": 2.0})
        for r in check_martingale(cfg):
            assert r.estimate == pytest.approx(1.0, abs=1e-12)

    def test_transience_triggers_on_compound_poisson(self):
        cfg = make_cfg(transience={"horizon": 50.0, "threshold": 1e-3,
                                   "required_fraction": 0.999, "replicates": 500})
        assert all_passed(check_transience(cfg))

    def test_transience_zero_measure_stays_put(self):
        # X = neutral forever: chi = 1, nothing escapes
        cfg = make_cfg(measure={},
                       transience={"horizon": 50.0, "replicates": 100,
                                   "required_fraction": 0.999})
        report = check_transience(cfg)[0]
        assert report.estimate == 0.0
        assert not report.passed

    def test_transience_fraction_grows_with_horizon(self):
        # Psi > 0 on all probes: the escaped fraction tends to 1 in T
        fractions = []
        for horizon in (10.0, 50.0):
            cfg = make_cfg(transience={"horizon": horizon, "threshold": 1e-3,
                                       "required_fraction": 0.0, "replicates": 2000})
            fractions.append(check_transience(cfg)[0].estimate)
        assert fractions[0] <= fractions[1]
        assert fractions[1] >= 0.999

    def test_transience_lattice_absorption(self):
        # coupon-collector oracle on a 16-site box: P(not all sites hit by
        # T) <= 16 exp(-T/16), about 1.3e-3 at T = 150
        cfg = parse_config({
            "instance": {"kind": "lattice-union", "dim": 2, "side": 4},
            "measure": {"layers": [{"mass": 1.0, "distribution": "uniform-singleton"}]},
            "probes": {"characters": [[1]], "times": [1.0]},
            "run": {"replicates": 300, "seed": 5},
            "transience": {"horizon": 150.0, "required_fraction": 0.99},
        })
        report = check_transience(cfg)[0]
        assert report.passed and report.estimate >= 0.99

    def test_convolution(self):
        cfg = make_cfg(convolution={"s": 0.5, "t": 0.5, "replicates": 4000})
        assert all_passed(check_convolution(cfg))

    def test_convolution_zero_times_exact(self):
        cfg = make_cfg(convolution={"s": 0.0, "t": 0.0, "replicates": 50})
        report = check_convolution(cfg)[0]
        assert report.estimate == 1.0 and report.closed_form == 1.0

    def test_moments_on_max(self):
        cfg = parse_config({
            "instance": {"kind": "max"},
            "measure": {"layers": [{"mass": 1.0, "distribution": "exponential", "rate": 1.0}]},
            "path": {"horizon": 1.0},
            "probes": {"characters": [[1]], "times": [1.0]},
            "run": {"replicates": 20_000, "seed": 11},
            "moments": {"q": 1.0, "n_max": 2, "mean_rtol": 0.05, "higher_rtol": 0.1},
        })
        assert all_passed(check_moments(cfg))

    def test_bochner_identity_clock(self):
        cfg = make_cfg(bochner={"drift": 1.0, "replicates": 3000})
        assert all_passed(check_bochner(cfg))

    def test_bochner_drift_clock_scales_exponent(self):
        # drift-2 clock: composed exponent is 2 Psi, so the closed form at
        # t = 1 is exp(-2) for the rate-2 Exp(1) measure (Psi(e_1) = 1)
        import math
        cfg = make_cfg(bochner={"drift": 2.0, "replicates": 3000})
        [row] = check_bochner(cfg)
        assert row.closed_form == pytest.approx(math.exp(-2.0), abs=1e-12)
        assert row.passed

    def test_invariance_additive_constant(self):
        cfg = make_cfg(invariance={
            "distribution": "constant", "value": 1.0,
            "ladder": [10, 100, 1000], "replicates": 200,
            "times": [0.755], "bias_allowance": 0.01,
        })
        reports = check_invariance(cfg)
        assert all_passed(reports)
        assert reports[-1].check == "invariance-limit"
        assert reports[-1].params["strictly_decreasing"]

    def test_invariance_needs_action(self):
        cfg = parse_config({
            "instance": {"kind": "lattice-union", "dim": 1, "side": 4},
            "measure": {"layers": [{"mass": 1.0, "distribution": "uniform-singleton"}]},
            "probes": {"characters": [[1]], "times": [1.0]},
            "run": {"replicates": 10, "seed": 0},
            "invariance": {"distribution": "pareto", "alpha": 1.0, "x_min": 1.0},
        })
        with pytest.raises(NoActionError):
            check_invariance(cfg)

    def test_invariance_ladder_validation(self):
        cfg = make_cfg(invariance={"distribution": "constant", "value": 1.0,
                                   "ladder": [100]})
        with pytest.raises(ConfigError):
            check_invariance(cfg)

    def test_invariance_unregistered_pair(self):
        cfg = make_cfg(invariance={"distribution": "exponential", "rate": 1.0,
                                   "ladder": [10, 100], "replicates": 10})
        with pytest.raises(ConfigError):
            check_invariance(cfg)

    def test_sum_criterion_verdicts(self):
        good = make_cfg(sum_criterion={"kind": "geometric", "ratio": 0.5,
                                       "expect": "converges", "max_terms": 200})
        assert all_passed(check_sum_criterion(good))
        mismatch = make_cfg(sum_criterion={"kind": "harmonic", "expect": "converges",
                                           "max_terms": 5000})
        assert not all_passed(check_sum_criterion(mismatch))

    def test_alpha_additive_and_idempotent(self):
        assert all_passed(check_alpha(make_cfg()))
        cfg = parse_config({
            "instance": {"kind": "max"},
            "probes": {"characters": [[1]], "times": [1.0]},
            "run": {"replicates": 1, "seed": 0},
        })
        reports = check_alpha(cfg)
        assert reports[0].estimate == 0.0 and reports[0].closed_form == 0.0


class TestRunAll:
    def test_sections_control_inclusion(self):
        cfg = make_cfg()
        names = {r.check for r in run_all(cfg)}
        assert names == {"lk", "fdd", "martingale", "alpha"}

    def test_with_optional_sections(self):
        cfg = make_cfg(convolution={"s": 0.25, "t": 0.25, "replicates": 2000},
                       transience={"horizon": 40.0, "replicates": 300})
        names = {r.check for r in run_all(cfg)}
        assert "convolution" in names and "transience" in names


class TestMetaStatistics:
    def test_false_failure_rate_within_budget(self):
        # Hoeffding at delta = 0.01 per probe: over 100 independent master
        # seeds the true identity should essentially never fail (the bound
        # is conservative); allow a generous 5 failures
        failures = 0
        for seed in range(100):
            cfg = make_cfg(run={"replicates": 200, "seed": seed, "delta": 0.01})
            if not all_passed(check_lk(cfg)):
                failures += 1
        assert failures <= 5

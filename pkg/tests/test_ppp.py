"""Point process sampling: laws, determinism, superposition, integrals."""

import math

import numpy as np
import pytest
from scipy import integrate, stats

from levymonoid import (
    AdditiveReals,
    InvalidSpecError,
    LatticeUnion,
    LevyMeasure,
    LevyMeasureLayer,
    MaxReals,
    NoClosedFormError,
    integral_one_minus_chi,
    mark_distribution,
    sample_layer,
    sample_ppp,
    stable_layers,
)
from levymonoid.core import CharacterId
from levymonoid.ppp import sample_marks
from levymonoid.rng import layer_stream

ADD = AdditiveReals()

EXP_LAYER = LevyMeasureLayer(2.0, mark_distribution("exponential", rate=1.0))
EXP_MEASURE = LevyMeasure((EXP_LAYER,))


class TestLayerValidation:
    def test_mass_must_be_positive(self):
        with pytest.raises(InvalidSpecError):
            LevyMeasureLayer(0.0, mark_distribution("exponential", rate=1.0))
        with pytest.raises(InvalidSpecError):
            LevyMeasureLayer(math.inf, mark_distribution("exponential", rate=1.0))

    def test_neutral_constant_rejected(self):
        with pytest.raises(InvalidSpecError):
            LevyMeasureLayer(1.0, mark_distribution("constant", value=0.0))

    def test_unknown_distribution_rejected(self):
        with pytest.raises(InvalidSpecError):
            LevyMeasureLayer(1.0, mark_distribution("cauchy", scale=1.0))

    def test_bad_parameters_rejected(self):
        with pytest.raises(InvalidSpecError):
            LevyMeasureLayer(1.0, mark_distribution("exponential", rate=-1.0))
        with pytest.raises(InvalidSpecError):
            LevyMeasureLayer(1.0, mark_distribution("stable-shell", alpha=1.5, scale=1.0, shell=0))


class TestSampleLayer:
    def test_mean_count(self):
        # Poisson mean oracle: E[N] = mass * T = 6; CLT halfwidth at 99%
        # is 2.576 * sqrt(6 / 1e5) ~ 0.0200
        counts = np.empty(100_000)
        for r in range(len(counts)):
            rng = layer_stream(4242, r, 0)
            counts[r] = len(sample_layer(ADD, EXP_LAYER, 3.0, rng))
        hw = 2.576 * math.sqrt(6.0 / len(counts))
        assert abs(counts.mean() - 6.0) <= hw

    def test_tiny_horizon_void(self):
        rng = layer_stream(7, 0, 0)
        got = sample_layer(ADD, EXP_LAYER, 1e-9, rng)
        assert len(got) == 0

    def test_zero_horizon_empty(self):
        got = sample_layer(ADD, EXP_LAYER, 0.0, layer_stream(7, 0, 0))
        assert len(got) == 0

    def test_deterministic_replay(self):
        a = sample_layer(ADD, EXP_LAYER, 5.0, layer_stream(99, 3, 0))
        b = sample_layer(ADD, EXP_LAYER, 5.0, layer_stream(99, 3, 0))
        assert a == b

    def test_times_sorted_in_half_open_interval(self):
        for r in range(200):
            got = sample_layer(ADD, EXP_LAYER, 2.0, layer_stream(5, r, 0))
            assert all(0.0 < t <= 2.0 for t in got.times)
            assert list(got.times) == sorted(got.times)

    def test_sorted_uniform_minimum_law(self):
        # conditional on N = n, times/T are n sorted uniforms, so the
        # minimum/T has CDF 1 - (1 - u)^n (Kolmogorov-Smirnov oracle)
        target_n, horizon = 2, 1.0
        minima = []
        r = 0
        while len(minima) < 4000:
            got = sample_layer(ADD, EXP_LAYER, horizon, layer_stream(1234, r, 0))
            if len(got) == target_n:
                minima.append(got.times[0] / horizon)
            r += 1
        res = stats.kstest(minima, lambda u: 1.0 - (1.0 - u) ** target_n)
        assert res.pvalue > 0.001  # statistical threshold, not a hard bound


class TestSamplePpp:
    def test_single_layer_matches_layer_stream(self):
        via_ppp = sample_ppp(ADD, EXP_MEASURE, 2.0, seed=31, replicate=4)
        direct = sample_layer(ADD, EXP_LAYER, 2.0, layer_stream(31, 4, 0))
        assert via_ppp.times == direct.times
        assert via_ppp.marks == direct.marks

    def test_empty_measure(self):
        got = sample_ppp(ADD, LevyMeasure(()), 1.0, seed=0)
        assert len(got) == 0

    def test_merge_is_sorted(self):
        measure = LevyMeasure((
            LevyMeasureLayer(1.0, mark_distribution("exponential", rate=1.0)),
            LevyMeasureLayer(2.0, mark_distribution("constant", value=0.5)),
        ))
        for r in range(200):
            got = sample_ppp(ADD, measure, 1.0, seed=8, replicate=r)
            assert list(got.times) == sorted(got.times)

    def test_independent_of_batch_context(self):
        # replicate 5 alone equals replicate 5 inside any sweep
        alone = sample_ppp(ADD, EXP_MEASURE, 1.0, seed=77, replicate=5)
        batch = [sample_ppp(ADD, EXP_MEASURE, 1.0, seed=77, replicate=r) for r in range(10)]
        assert alone == batch[5]

    def test_branches_differ(self):
        a = sample_ppp(ADD, EXP_MEASURE, 1.0, seed=3, replicate=0, branch=0)
        b = sample_ppp(ADD, EXP_MEASURE, 1.0, seed=3, replicate=0, branch=1)
        assert a != b

    def test_superposition_counts(self):
        # merged counts over disjoint windows: Poisson with additive rates,
        # independent across windows (chi-square oracles)
        measure = LevyMeasure((
            LevyMeasureLayer(1.0, mark_distribution("exponential", rate=1.0)),
            LevyMeasureLayer(2.0, mark_distribution("exponential", rate=2.0)),
        ))
        n = 10_000
        first = np.empty(n, dtype=int)
        second = np.empty(n, dtype=int)
        for r in range(n):
            got = sample_ppp(ADD, measure, 1.0, seed=55, replicate=r)
            times = np.asarray(got.times)
            first[r] = int((times <= 0.5).sum())
            second[r] = int((times > 0.5).sum())

        # Poisson superposition oracle: total count mean 3 within the 99%
        # CLT halfwidth 2.576 sqrt(3/n)
        total = first + second
        assert abs(total.mean() - 3.0) <= 2.576 * math.sqrt(3.0 / n)

        rate = 3.0 * 0.5
        for counts in (first, second):
            top = counts.max()
            observed = np.bincount(counts, minlength=top + 1).astype(float)
            expected = np.array([stats.poisson.pmf(k, rate) for k in range(top + 1)]) * n
            # pool the sparse tail so every chi-square cell has mass
            keep = expected >= 5.0
            obs = np.append(observed[keep], observed[~keep].sum())
            exp = np.append(expected[keep], expected[~keep].sum())
            res = stats.chisquare(obs, exp * obs.sum() / exp.sum())
            assert res.pvalue > 0.001

        cap = 6
        table = np.zeros((cap + 1, cap + 1))
        for a, b in zip(np.minimum(first, cap), np.minimum(second, cap)):
            table[a, b] += 1
        table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
        res = stats.chi2_contingency(table)
        assert res.pvalue > 0.001


class TestMarkSamplers:
    def test_pareto_tail(self):
        rng = layer_stream(1, 0, 0)
        marks = sample_marks(ADD, mark_distribution("pareto", alpha=1.0, x_min=1.0), rng, 50_000)
        assert marks.min() >= 1.0
        # P(zeta > 2) = 1/2 within Hoeffding width
        frac = (marks > 2.0).mean()
        assert abs(frac - 0.5) <= math.sqrt(math.log(200) / (2 * len(marks)))

    def test_uniform_singleton_needs_lattice(self):
        with pytest.raises(InvalidSpecError):
            sample_marks(ADD, mark_distribution("uniform-singleton"), layer_stream(1, 0, 0), 3)

    def test_uniform_subset_size(self):
        lat = LatticeUnion(dim=2, side=5)
        marks = sample_marks(lat, mark_distribution("uniform-subset", size=3), layer_stream(1, 0, 0), 100)
        assert all(len(m) == 3 for m in marks)

    def test_stable_shell_ranges(self):
        rng = layer_stream(2, 0, 0)
        outer = sample_marks(ADD, mark_distribution("stable-shell", alpha=0.5, scale=1.0, shell=0), rng, 1000)
        assert outer.min() >= 1.0
        inner = sample_marks(ADD, mark_distribution("stable-shell", alpha=0.5, scale=1.0, shell=3), rng, 1000)
        assert inner.min() > 2.0 ** -3 and inner.max() <= 2.0 ** -2


class TestStableLayers:
    def test_shell_masses_match_quadrature(self):
        alpha, scale = 0.5, 1.0
        measure = stable_layers(alpha, scale, depth=4)
        bounds = [(1.0, np.inf)] + [(2.0 ** -k, 2.0 ** (-k + 1)) for k in range(1, 5)]
        for layer, (lo, hi) in zip(measure.layers, bounds):
            oracle, _ = integrate.quad(lambda x: scale * x ** (-1.0 - alpha), lo, hi)
            assert layer.mass == pytest.approx(oracle, rel=1e-9)

    def test_truncation_exponent_monotone(self):
        # deeper truncation keeps more small jumps, so Psi_eps increases;
        # each shell's contribution checked against quadrature
        alpha, lam = 0.5, 1.0
        shallow = stable_layers(alpha, 1.0, depth=2)
        deep = stable_layers(alpha, 1.0, depth=6)

        def psi_eps(measure):
            total = 0.0
            for j, layer in enumerate(measure.layers):
                val, hw = integral_one_minus_chi(
                    ADD, LevyMeasure((layer,)), CharacterId.base(1),
                    mode="monte-carlo", n=40_000, seed=900 + j)
                total += val
            return total

        shallow_psi, deep_psi = psi_eps(shallow), psi_eps(deep)
        assert deep_psi > shallow_psi
        oracle, _ = integrate.quad(
            lambda x: (1 - math.exp(-lam * x)) * x ** (-1.5), 2.0 ** -6, np.inf)
        assert deep_psi == pytest.approx(oracle, rel=0.05)


class TestIntegral:
    def test_analytic_value(self):
        got, hw = integral_one_minus_chi(ADD, EXP_MEASURE, CharacterId.base(1))
        assert got == 1.0 and hw == 0.0

    def test_monte_carlo_within_halfwidth(self):
        got, hw = integral_one_minus_chi(
            ADD, EXP_MEASURE, CharacterId.base(1), mode="monte-carlo", n=20_000, seed=5)
        assert hw == pytest.approx(2.0 * math.sqrt(math.log(200) / 40_000), abs=1e-12)
        assert abs(got - 1.0) <= hw

    def test_indicator_above_support_is_zero(self):
        measure = LevyMeasure((LevyMeasureLayer(1.0, mark_distribution("constant", value=0.5)),))
        got, _ = integral_one_minus_chi(MaxReals(), measure, CharacterId.base(1))
        assert got == 0.0

    def test_lattice_counting(self):
        lat = LatticeUnion(dim=2, side=10)
        measure = LevyMeasure((LevyMeasureLayer(1.0, mark_distribution("uniform-singleton")),))
        got, _ = integral_one_minus_chi(lat, measure, CharacterId(tuple(range(1, 6))))
        assert got == pytest.approx(0.05, abs=1e-15)

    def test_analytic_unregistered_raises(self):
        measure = stable_layers(0.5, 1.0, 2)
        with pytest.raises(NoClosedFormError):
            integral_one_minus_chi(ADD, measure, CharacterId.base(1))

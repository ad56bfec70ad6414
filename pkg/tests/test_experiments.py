import math

import numpy as np
import pytest

from tempsec.experiments import (
    ConfigError,
    ExperimentConfig,
    aggregate,
    block_feasibility_diagnostic,
    coupled_walk_diagnostic,
    make_instance,
    packing_violation_diagnostic,
    run_trials,
    summary_dict,
    theoretical_bound,
    trials_csv,
)
from tempsec.model import Instance, PackingConstraints
from tempsec.online import AlgorithmParams, EpsilonClampWarning


class TestBounds:
    def test_theorem1(self):
        r = theoretical_bound("theorem1", 1e-4, 1)
        assert r.value == pytest.approx(0.5 * (1 - 0.035 - 0.185 - 0.0001), abs=1e-12)
        assert r.value == pytest.approx(0.38995, abs=1e-9)
        assert r.flags == ()

    def test_theorem1_finite_n(self):
        r = theoretical_bound("theorem1", 1e-4, 1, N_hint=1e6)
        assert r.value == pytest.approx(0.38995 - 1 / (4 * 0.01 * 1e6))

    def test_theorem1_vacuous(self):
        r = theoretical_bound("theorem1", 0.01, 1)
        assert r.value < 0 and "vacuous" in r.flags

    def test_theorem2(self):
        r = theoretical_bound("theorem2", 1e-4, 100)
        assert r.value == pytest.approx(1 - 0.4 - 20.5 * 0.001 - 3e-4)
        assert "asymptotic" in r.flags

    def test_theorem3_pair(self):
        r = theoretical_bound("theorem3", 1e-4, 600, d=1)
        assert r.value == pytest.approx(1 / (1 + 1e-4))
        assert r.error_term == pytest.approx(math.sqrt(6 * (1 + math.log(600)) / 600))
        assert "constant-free" in r.flags

    def test_theorem4(self):
        r = theoretical_bound("theorem4", 1e-4)
        assert r.value == pytest.approx(0.25 - 0.05 - 1.5e-4 * math.log(100), abs=1e-12)
        assert r.value == pytest.approx(0.19931, abs=1e-5)

    def test_variant_alias_and_unknown(self):
        assert theoretical_bound("lengths", 1e-4).theorem == "theorem4"
        with pytest.raises(ValueError):
            theoretical_bound("theorem9", 0.1)


class TestGenerators:
    def test_deterministic_and_frozen(self):
        spec = dict(generator="uniform-values", n=50, gamma=0.1, capacity=1, seed=3)
        np.testing.assert_array_equal(make_instance(spec).values, make_instance(spec).values)

    def test_geometric(self):
        inst = make_instance(dict(generator="geometric-values", n=4, gamma=0.1, capacity=1,
                                  rho=0.5))
        np.testing.assert_array_equal(inst.values, [1, 0.5, 0.25, 0.125])

    def test_planted(self):
        inst = make_instance(dict(generator="planted-heavy", n=100, gamma=0.1, capacity=1,
                                  heavy_count=3, heavy_value=50.0))
        assert (inst.values == 50.0).sum() == 3

    def test_uniform_durations(self):
        inst = make_instance(dict(generator="uniform-values", n=1000, gamma=0.01, capacity=1,
                                  durations="uniform"))
        assert np.all((inst.durations > 0) & (inst.durations <= 0.01))

    def test_packing_capacity_ratio(self):
        from tempsec.model import capacity_ratio, sparsity
        inst = make_instance(dict(generator="packing-random", n=40, gamma=0.1, capacity=8,
                                  rows=3, sparsity=2))
        assert capacity_ratio(inst.constraints) == pytest.approx(8.0)
        assert sparsity(inst.constraints) == 2


def _cfg(inst, variant="cardinality", trials=10, seed=1, oracle="opt_star", **kw):
    return ExperimentConfig(inst, AlgorithmParams(variant, **kw), trials=trials, seed=seed,
                            oracle=oracle)


class TestHarness:
    def test_single_item_ratio(self):
        gamma = 0.01
        inst = Instance.from_arrays([1.0], gamma=gamma, capacity=1)
        res = run_trials(_cfg(inst, trials=10_000, seed=4))
        p = 1 - gamma  # selected iff tau >= gamma / B
        assert res.aggregate.ratio >= 0.5
        assert abs(res.aggregate.ratio - p) <= 4 * math.sqrt(p * (1 - p) / 10_000)

    def test_reproducible_csv(self):
        inst = make_instance(dict(generator="uniform-values", n=300, gamma=0.05, capacity=2))
        a = trials_csv(run_trials(_cfg(inst, trials=1, seed=7)))
        b = trials_csv(run_trials(_cfg(inst, trials=1, seed=7)))
        assert a == b
        assert a.splitlines()[0] == "trial,alg_value,opt_value,variant,gamma,B,d,epsilon,alpha,seed"

    def test_static_oracle_has_zero_stderr(self):
        inst = make_instance(dict(generator="uniform-values", n=300, gamma=0.05, capacity=2))
        agg = run_trials(_cfg(inst, trials=20)).aggregate
        assert agg.stderr_opt == 0.0
        assert agg.mean_alg <= agg.mean_opt

    def test_incompatible_oracle(self):
        inst = make_instance(dict(generator="packing-random", n=20, gamma=0.1, capacity=4))
        with pytest.raises(ConfigError):
            _cfg(inst, "packing", oracle="flow")
        with pytest.raises(ConfigError):
            _cfg(make_instance(dict(generator="uniform-values", n=5, gamma=0.1, capacity=1)),
                 "packing", oracle="lp")

    def test_flow_ratio_dominates_opt_star(self):
        inst = make_instance(dict(generator="uniform-values", n=200, gamma=0.05, capacity=2))
        star = run_trials(_cfg(inst, trials=15)).aggregate
        flow = run_trials(_cfg(inst, trials=15, oracle="flow")).aggregate
        assert flow.ratio >= star.ratio
        assert np.all(flow.opt_values <= star.opt_values + 1e-9)

    def test_doubling_trials_keeps_prefix(self):
        inst = make_instance(dict(generator="uniform-values", n=200, gamma=0.05, capacity=1))
        a = run_trials(_cfg(inst, trials=8, oracle="flow")).aggregate
        b = run_trials(_cfg(inst, trials=16, oracle="flow")).aggregate
        np.testing.assert_array_equal(a.alg_values, b.alg_values[:8])
        np.testing.assert_array_equal(a.opt_values, b.opt_values[:8])

    def test_thread_count_independent(self):
        inst = make_instance(dict(generator="uniform-values", n=500, gamma=0.02, capacity=1))
        one = summary_dict(run_trials(_cfg(inst, trials=12), threads=1))
        three = summary_dict(run_trials(_cfg(inst, trials=12), threads=3))
        assert one == three

    def test_packing_run(self):
        inst = make_instance(dict(generator="packing-random", n=60, gamma=0.2, capacity=8))
        with pytest.warns(EpsilonClampWarning):
            res = run_trials(_cfg(inst, "packing", trials=3, oracle="lp"))
        assert 0 < res.aggregate.ratio <= 1
        assert res.aggregate.violations["capacity_violation_trials"] == 0
        assert res.variant_info["epsilon"] == 0.5

    def test_aggregate_delta_method(self):
        rng = np.random.default_rng(0)
        a, o = rng.random(50), rng.random(50) + 1
        agg = aggregate(a, o)
        R = a.mean() / o.mean()
        cov = np.cov(a, o, ddof=1)
        var = (cov[0, 0] - 2 * R * cov[0, 1] + R * R * cov[1, 1]) / (50 * o.mean() ** 2)
        assert agg.ratio == pytest.approx(R)
        assert agg.ci_high - agg.ratio == pytest.approx(1.959963984540054 * math.sqrt(var))
        assert agg.mean_of_ratios == pytest.approx(np.mean(a / o))


class TestDiagnostics:
    def test_block_rows_and_slack(self):
        gamma = 0.01
        inst = make_instance(dict(generator="uniform-values", n=200, gamma=gamma, capacity=50))
        rows = block_feasibility_diagnostic(inst, trials=5)
        assert len(rows) == math.floor(1 / math.sqrt(gamma))
        assert all(r["ratio"] == 1.0 for r in rows if r["tentative"])
        assert rows[0]["excluded"]

    def test_block_nan_when_empty(self):
        inst = Instance.from_arrays([1.0], gamma=0.25, capacity=1)
        rows = block_feasibility_diagnostic(inst, trials=1)
        assert any(math.isnan(r["ratio"]) and r["tentative"] == 0 for r in rows)

    def test_block_requires_cardinality(self):
        inst = Instance.from_arrays([1.0], gamma=0.25, capacity=1)
        with pytest.raises(ValueError):
            block_feasibility_diagnostic(inst, AlgorithmParams("lengths"), trials=1)

    def test_walk_degenerate(self):
        res = coupled_walk_diagnostic(50, 0.1, 500, trials=20)
        assert np.all(res["q"] == 0)

    def test_walk_block_sum_mean(self):
        res = coupled_walk_diagnostic(10, 0.1, 1000, trials=4000, seed=3)
        # E[sum of previous block] = B, so the mean signed deviation is ~0;
        # |deviation| has mean about sqrt(2 B (1 - p) / pi)
        expect = math.sqrt(2 * 10 * 0.9 / math.pi)
        assert res["mean_boundary_deviation"] == pytest.approx(expect, rel=0.1)

    def test_walk_rejects(self):
        with pytest.raises(ValueError):
            coupled_walk_diagnostic(200, 0.1, 1000, trials=1)
        with pytest.raises(ValueError):
            coupled_walk_diagnostic(2, 0.1, 1005, trials=1)

    def test_violation_zero_with_huge_capacity(self):
        n = 30
        c = PackingConstraints.from_dense(np.ones((1, n)), [1000.0])
        inst = Instance.from_arrays(np.random.default_rng(0).random(n), gamma=0.2,
                                    capacity=1000, constraints=c)
        res = packing_violation_diagnostic(inst, trials=2)
        assert res["max_rate"] == 0.0
        assert res["commit_ratio"] == 1.0

    def test_violation_requires_packing(self):
        inst = Instance.from_arrays([1.0], gamma=0.25, capacity=1)
        with pytest.raises(ValueError):
            packing_violation_diagnostic(inst, AlgorithmParams("cardinality"), trials=1)

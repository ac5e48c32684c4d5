"""Max-min optimality, axiom suite, and exposure probes."""

import math

import numpy as np
import pytest

from qapool import (
    ConfigError,
    RuleSpec,
    aggregator_utility,
    axiom_suite,
    bregman,
    concavity_probe,
    exposure,
    exposure_probe,
    maxmin_verify,
    qa_pool,
    surplus_report,
)

from conftest import CLOSED_RULES, CONVEX_RULES, RULE_IDS, random_instance, random_probs
from oracles import kl_divergence, weighted_arithmetic_mean

QUAD = RuleSpec.quadratic()
QUAD_INSTANCE = [([0.1, 0.9], 0.5), ([0.5, 0.5], 0.5)]


class TestAggregatorUtility:
    def test_reporting_the_single_expert_nets_zero(self, rng):
        p = random_probs(rng, 3, None)
        for j in (1, 2, 3):
            assert aggregator_utility(QUAD, p, [(p, 1.0)], j) == pytest.approx(
                0.0, abs=1e-12
            )

    def test_quadratic_instance_equalizes_at_008(self):
        for j in (1, 2):
            u = aggregator_utility(QUAD, [0.3, 0.7], QUAD_INSTANCE, j)
            assert u == pytest.approx(0.08, abs=1e-12)

    def test_equals_bregman_sum_at_the_pool(self, rng):
        for rule in CONVEX_RULES:
            inputs = random_instance(rng, rule, 3, 3)
            pool = qa_pool(rule, inputs).pooled
            w = np.array([wt for _, wt in inputs])
            w = w / w.sum()
            div_sum = sum(
                wi * bregman(rule, pool, p) for wi, (p, _) in zip(w, inputs)
            )
            for j in (1, 2, 3):
                u = aggregator_utility(rule, pool, inputs, j)
                assert u == pytest.approx(div_sum, abs=1e-8)

    def test_distant_report_hurts_worst_case(self):
        base = min(
            aggregator_utility(QUAD, [0.3, 0.7], QUAD_INSTANCE, j) for j in (1, 2)
        )
        far = min(
            aggregator_utility(QUAD, [0.9, 0.1], QUAD_INSTANCE, j) for j in (1, 2)
        )
        assert far < base


class TestSurplusReport:
    def test_identical_inputs_no_surplus(self, rng):
        p = random_probs(rng, 3, None)
        rep = surplus_report(QUAD, [(p, 0.4), (p, 0.6)])
        assert rep.surplus == pytest.approx(0.0, abs=1e-12)

    def test_quadratic_instance(self):
        rep = surplus_report(QUAD, QUAD_INSTANCE)
        assert rep.surplus == pytest.approx(0.08, abs=1e-12)
        assert rep.equalization_gap <= 1e-12
        assert np.allclose(rep.per_outcome_utility, 0.08, atol=1e-12)

    def test_log_instance_matches_kl_sum(self):
        inputs = [([0.25, 0.75], 0.5), ([0.75, 0.25], 0.5)]
        rep = surplus_report(RuleSpec.logarithmic(), inputs)
        pool = qa_pool(RuleSpec.logarithmic(), inputs).pooled
        assert np.allclose(pool.probs, [0.5, 0.5], atol=1e-12)
        want = 0.5 * kl_divergence(pool.probs, np.array([0.25, 0.75])) + \
            0.5 * kl_divergence(pool.probs, np.array([0.75, 0.25]))
        assert rep.surplus == pytest.approx(want, abs=1e-10)
        assert rep.surplus == pytest.approx(
            0.5 * math.log(2.0) + 0.5 * math.log(2.0 / 3.0), abs=1e-10
        )

    @pytest.mark.parametrize("rule", CONVEX_RULES, ids=RULE_IDS)
    def test_equalization_on_random_instances(self, rule, rng):
        for _ in range(20):
            n, m = int(rng.integers(2, 5)), int(rng.integers(2, 5))
            inputs = random_instance(rng, rule, n, m)
            rep = surplus_report(rule, inputs)
            assert rep.equalization_gap <= 1e-8
            assert rep.surplus >= -1e-12


class TestMaxminVerify:
    @pytest.mark.parametrize("rule", CLOSED_RULES, ids=lambda r: r.label)
    def test_random_challengers_never_beat_pool(self, rule, rng):
        inputs = random_instance(rng, rule, 3, 3)
        assert maxmin_verify(rule, inputs, trials=200, seed=5)

    def test_single_input_pool_is_unbeatable(self, rng):
        p = random_probs(rng, 3, None)
        assert maxmin_verify(QUAD, [(p, 1.0)], trials=100, seed=1)

    def test_small_perturbations_strictly_lose(self, rng):
        inputs = QUAD_INSTANCE
        pool = qa_pool(QUAD, inputs).pooled
        base = min(aggregator_utility(QUAD, pool, inputs, j) for j in (1, 2))
        for _ in range(50):
            d = rng.normal(size=2)
            d -= d.mean()
            d *= 1e-3 / np.linalg.norm(d)
            q = pool.probs + d
            if q.min() < 0:
                continue
            worst = min(aggregator_utility(QUAD, q, inputs, j) for j in (1, 2))
            assert worst < base - 1e-12

    def test_grid_sweep_confirms_argmax(self):
        inputs = QUAD_INSTANCE
        pool = qa_pool(QUAD, inputs).pooled
        base = min(aggregator_utility(QUAD, pool, inputs, j) for j in (1, 2))
        xs = np.arange(1e-3, 1.0, 1e-3)
        best_x, best_val = None, -np.inf
        for x in xs:
            val = min(
                aggregator_utility(QUAD, [x, 1.0 - x], inputs, j) for j in (1, 2)
            )
            if val > best_val:
                best_x, best_val = x, val
        assert best_val <= base + 1e-12
        assert abs(best_x - pool.probs[0]) <= 1e-3


class TestAxiomSuite:
    def test_quadratic_n3_full_pass(self):
        rep = axiom_suite(QUAD, 3, 300, seed=2)
        assert rep.all_passed, [c for c in rep.checks if not c.passed]

    def test_log_n2_monotonicity(self):
        rep = axiom_suite(RuleSpec.logarithmic(), 2, 120, seed=3)
        mono = {c.name: c for c in rep.checks}["monotonicity_n2"]
        assert mono.passed and mono.worst_gap > 0.0

    def test_unit_weight_associativity_triple(self, rng):
        a, b, c = (random_probs(rng, 3, None) for _ in range(3))
        left = qa_pool(QUAD, [(a, 1.0), (b, 1.0)])
        left = qa_pool(QUAD, [(left.pooled, left.total_weight), (c, 1.0)])
        right = qa_pool(QUAD, [(b, 1.0), (c, 1.0)])
        right = qa_pool(QUAD, [(a, 1.0), (right.pooled, right.total_weight)])
        assert np.allclose(left.pooled.probs, right.pooled.probs, atol=1e-9)
        assert left.total_weight == pytest.approx(3.0)

    def test_nonconvex_combination_is_config_error(self):
        with pytest.raises(ConfigError):
            axiom_suite(RuleSpec.tsallis(3.0), 3, 10, seed=0)

    def test_tsallis3_allowed_at_n2(self):
        rep = axiom_suite(RuleSpec.tsallis(3.0), 2, 60, seed=4)
        assert rep.all_passed

    def test_cyclical_monotonicity_reported_for_n3(self):
        rep = axiom_suite(RuleSpec.spherical(2.0), 3, 60, seed=5)
        names = [c.name for c in rep.checks]
        assert "cyclical_monotonicity" in names
        assert "monotonicity_n2" not in names


class TestCyclicalMonotonicity:
    @pytest.mark.parametrize("rule", CONVEX_RULES, ids=RULE_IDS)
    def test_cycle_sums_positive(self, rule, rng):
        for _ in range(30):
            n = int(rng.integers(2, 5))
            k = int(rng.integers(2, 6))
            pts = []
            while len(pts) < k:
                cand = random_probs(rng, n, rule)
                if all(np.linalg.norm(cand - p) >= 1e-3 for p in pts):
                    pts.append(cand)
            total = sum(
                float(np.dot(exposure(rule, pts[i]).coords, pts[i] - pts[i - 1]))
                for i in range(k)
            )
            assert total > 1e-12


class TestExposureProbe:
    def test_tsallis3_detects_canonical_failure(self):
        rep = exposure_probe(RuleSpec.tsallis(3.0), 3, 200, seed=0)
        assert rep.canonical_vertex_failure is True
        assert rep.failures > 0

    def test_spherical_never_fails(self):
        rep = exposure_probe(RuleSpec.spherical(2.0), 4, 500, seed=0)
        assert rep.failures == 0
        assert rep.solver_failures == 0
        assert rep.canonical_vertex_failure is False

    @pytest.mark.parametrize("rule", CONVEX_RULES, ids=RULE_IDS)
    def test_two_outcomes_never_fail(self, rule):
        rep = exposure_probe(rule, 2, 300, seed=1)
        assert rep.failures == 0
        assert rep.failure_rate == 0.0


class TestConcavityProbe:
    def test_worst_gap_nonnegative_for_qa_pooling(self):
        rep = concavity_probe(RuleSpec.spherical(2.0), 3, 400, seed=6)
        assert rep.passed and rep.worst_gap >= -1e-9


class TestReverseBregmanDirection:
    """Minimizing divergences *from* the inputs picks the linear pool."""

    @pytest.mark.parametrize(
        "rule", [QUAD, RuleSpec.logarithmic()], ids=lambda r: r.label
    )
    def test_grid_minimizer_is_weighted_mean(self, rule, rng):
        ps = [random_probs(rng, 2, rule) for _ in range(3)]
        w = rng.dirichlet(np.ones(3))
        mean = weighted_arithmetic_mean(ps, w)

        xs = np.arange(1e-4, 1.0, 1e-4)

        def total(x):
            q = np.array([x, 1.0 - x])
            return sum(wi * bregman(rule, p, q) for wi, p in zip(w, ps))

        vals = np.array([total(x) for x in xs])
        best = xs[int(np.argmin(vals))]
        assert abs(best - mean[0]) <= 1e-4 + 1e-9

import itertools

import numpy as np
import pytest

from modules.core.information import clustering_objective, kl_matrix
from modules.core.types import CodebookSet, DiscretePreference
from modules.designers.clustering import (
    center_update, check_descent, fixed_point_residual, kmeanspp_seed, run_lloyd, seed_indices,
    weighted_centers,
)
from modules.designers.dca import convex_subproblem, dc_objective, dc_transform, dca_gradient, run_dca
from modules.designers.discrete import cluster_kmeanspp, design_dca, design_kmeanspp, round_soft_assignment
from modules.designers.options import DesignOptions
from modules.error_handler.errors import DegenerateSupport, DescentViolation, EmptyCluster

DCA_OPTS = DesignOptions(restarts=2, max_iters=60, seed=3, subproblem_max_iters=400, subproblem_tol=1e-7)


def brute_force_objective(pref: DiscretePreference, K: int) -> float:
    """Best centroid objective over every labeling of the items."""
    best = np.inf
    for labels in itertools.product(range(K), repeat=pref.j):
        owner = np.array(labels)
        centers, masses = weighted_centers(pref.spvs, pref.probs, owner, K)
        centers[masses <= 0] = 1.0 / pref.n
        best = min(best, clustering_objective(pref.spvs, pref.probs, centers, owner=owner))
    return best


def non_increasing(trace, tol=1e-9):
    return all(b <= a + tol * max(1.0, abs(a)) for a, b in zip(trace, trace[1:]))


class TestClustering:
    def test_center_update_is_weighted_mean(self, pref3):
        q = center_update(pref3, [0, 1]).q
        assert np.allclose(q, [0.5, 0.5, 0.0, 0.0])

    def test_center_update_empty(self, pref1):
        with pytest.raises(EmptyCluster):
            center_update(pref1, [2, 3])

    def test_weighted_centers_keep_previous(self, demo_spvs):
        previous = np.full((2, 4), 0.25)
        centers, masses = weighted_centers(demo_spvs, np.full(4, 0.25), np.zeros(4, dtype=int), 2, previous)
        assert masses[1] == 0
        assert np.allclose(centers[1], 0.25)

    def test_seeding_reaches_other_support(self, pref3):
        # the second pick must come from the pair the first cannot encode
        for seed in range(5):
            picks = seed_indices(pref3.spvs, pref3.probs, 2, np.random.default_rng(seed))
            assert {picks[0] // 2, picks[1] // 2} == {0, 1}

    def test_seeding_strict_degenerate(self):
        spvs = np.array([[0.5, 0.5], [0.5, 0.5]])
        with pytest.raises(DegenerateSupport):
            seed_indices(spvs, np.array([0.5, 0.5]), 2, np.random.default_rng(0), strict=True)

    def test_seeding_duplicates_without_strict(self):
        spvs = np.array([[0.5, 0.5], [0.5, 0.5]])
        picks = seed_indices(spvs, np.array([0.5, 0.5]), 3, np.random.default_rng(0))
        assert len(picks) == 3

    def test_kmeanspp_seed_returns_items(self, pref3):
        seeds = kmeanspp_seed(pref3, 2, np.random.default_rng(0))
        assert all(any(np.allclose(q, p) for p in pref3.spvs) for q in seeds.matrix)

    def test_check_descent(self):
        check_descent(1.0, 1.0 + 1e-15, 1e-12, "center", 1)
        with pytest.raises(DescentViolation):
            check_descent(1.0, 1.1, 1e-12, "center", 1)

    def test_lloyd_trace_descends(self, random_pref):
        pref = random_pref(j=30, n=4, seed=2)
        run = run_lloyd(pref.spvs, pref.probs, pref.spvs[:3], max_iters=200)
        assert run.converged
        assert non_increasing(run.trace)
        assert fixed_point_residual(pref.spvs, pref.probs, run.centers, run.owner) < 1e-9

    def test_residual_flags_wrong_owner(self, pref3):
        centers = np.array([[0.5, 0.5, 0.0, 0.0], [0.0, 0.0, 0.5, 0.5]])
        good = fixed_point_residual(pref3.spvs, pref3.probs, centers, np.array([0, 0, 1, 1]))
        bad = fixed_point_residual(pref3.spvs, pref3.probs, centers, np.array([0, 1, 1, 1]))
        assert good == pytest.approx(0.0, abs=1e-12)
        assert bad > 0.1

    def test_seeding_splits_far_clusters(self):
        spvs = np.array([
            [0.90, 0.05, 0.05], [0.88, 0.07, 0.05], [0.90, 0.04, 0.06],
            [0.05, 0.05, 0.90], [0.05, 0.07, 0.88], [0.06, 0.04, 0.90],
        ])
        weights = np.full(6, 1 / 6)
        split = 0
        for seed in range(1000):
            first, second = seed_indices(spvs, weights, 2, np.random.default_rng(seed))
            split += (first < 3) != (second < 3)
        assert split > 900


class TestInvariances:
    def test_scaled_weights_leave_clustering_unchanged(self, random_pref, fast_opts):
        pref = random_pref(j=20, n=4, seed=12)
        base, _ = cluster_kmeanspp(pref.spvs, pref.probs, 3, fast_opts)
        scaled, _ = cluster_kmeanspp(pref.spvs, 4.0 * pref.probs, 3, fast_opts)
        assert np.array_equal(base.owner, scaled.owner)
        assert np.allclose(base.centers, scaled.centers, atol=1e-12)
        assert scaled.objective == pytest.approx(4.0 * base.objective)

    def test_item_order(self, random_pref):
        pref = random_pref(j=15, n=4, seed=13)
        perm = np.random.default_rng(0).permutation(pref.j)
        start = pref.spvs[:3]
        run = run_lloyd(pref.spvs, pref.probs, start, max_iters=200)
        shuffled = run_lloyd(pref.spvs[perm], pref.probs[perm], start, max_iters=200)
        assert np.array_equal(shuffled.owner, run.owner[perm])
        assert np.allclose(shuffled.centers, run.centers, atol=1e-12)
        assert shuffled.objective == pytest.approx(run.objective, abs=1e-12)

    def test_item_order_demo_design(self, demo_spvs, fast_opts):
        perm = [2, 0, 3, 1]
        pref = DiscretePreference(demo_spvs[perm], np.full(4, 0.25))
        assert design_kmeanspp(pref, 2, fast_opts).objective == pytest.approx(0.1887219, abs=1e-7)

    def test_symbol_order(self, random_pref, fast_opts):
        pref = random_pref(j=15, n=4, seed=14)
        sigma = [2, 0, 3, 1]
        base = design_kmeanspp(pref, 3, fast_opts)
        permuted = design_kmeanspp(DiscretePreference(pref.spvs[:, sigma], pref.probs), 3, fast_opts)
        assert np.allclose(permuted.codebooks.matrix, base.codebooks.matrix[:, sigma], atol=1e-12)
        assert np.array_equal(permuted.assignment.owner, base.assignment.owner)
        assert permuted.objective == pytest.approx(base.objective, abs=1e-12)


class TestKmeanspp:
    def test_demo_k2(self, pref3, fast_opts):
        result = design_kmeanspp(pref3, 2, fast_opts)
        rows = sorted(map(tuple, np.round(result.codebooks.matrix, 12)))
        assert rows == [(0.0, 0.0, 0.5, 0.5), (0.5, 0.5, 0.0, 0.0)]
        assert result.objective == pytest.approx(0.1887219, abs=1e-7)

    def test_fixed_point_and_descent(self, random_pref, fast_opts):
        pref = random_pref(j=25, n=4, seed=5)
        result = design_kmeanspp(pref, 3, fast_opts)
        assert non_increasing(result.trace)
        assert result.diagnostics["fixed_point_residual"] < 1e-9

    def test_more_codebooks_never_hurt_much(self, random_pref, fast_opts):
        pref = random_pref(j=25, n=3, seed=6)
        values = [design_kmeanspp(pref, k, fast_opts).objective for k in (1, 2, 3)]
        assert values[1] <= values[0] + 1e-9
        assert values[2] <= values[0] + 1e-9

    def test_deterministic_under_seed(self, random_pref, fast_opts):
        pref = random_pref(j=15, n=4, seed=7)
        a = design_kmeanspp(pref, 3, fast_opts)
        b = design_kmeanspp(pref, 3, fast_opts)
        assert np.array_equal(a.codebooks.matrix, b.codebooks.matrix)

    def test_k1_is_closed_form(self, random_pref, fast_opts):
        pref = random_pref(j=12, n=4, seed=8)
        result = design_kmeanspp(pref, 1, fast_opts)
        assert np.allclose(result.codebooks.matrix[0], pref.probs @ pref.spvs)

    def test_not_below_brute_force(self, random_pref, fast_opts):
        for seed in range(3):
            pref = random_pref(j=6, n=3, seed=seed)
            assert design_kmeanspp(pref, 2, fast_opts).objective >= brute_force_objective(pref, 2) - 1e-12


class TestDcTransform:
    def test_layout_size(self, random_pref):
        pref = random_pref(j=7, n=3, seed=0)
        problem = dc_transform(pref, 2)
        assert problem.M == 2 + 2 * 3 + 2 * 7

    def test_objective_at_hard_assignment(self, random_pref):
        pref = random_pref(j=8, n=3, seed=1)
        owner = np.array([0, 1] * 4)
        problem = dc_transform(pref, 2)
        x = problem.lift([np.eye(2)[owner]])
        centers, _ = weighted_centers(pref.spvs, pref.probs, owner, 2)
        expected = clustering_objective(pref.spvs, pref.probs, centers, owner=owner)
        assert dc_objective(x, problem) == pytest.approx(expected, abs=1e-10)
        assert problem.residual(x) < 1e-12
        assert np.allclose(problem.soft_centers(x), centers)

    def test_gradient_only_on_s(self, random_pref):
        pref = random_pref(j=5, n=3, seed=2)
        problem = dc_transform(pref, 2)
        x = problem.lift([np.full((5, 2), 0.5)])
        y = dca_gradient(x, problem)
        assert np.all(y[problem.layout.t] == 0)
        assert np.all(y[problem.layout.r_block(0)] == 0)

    def test_subproblem_feasible_and_not_worse(self, random_pref):
        pref = random_pref(j=6, n=3, seed=3)
        problem = dc_transform(pref, 2)
        x0 = problem.lift([np.random.default_rng(0).dirichlet(np.ones(2), size=6)])
        sub = convex_subproblem(problem, dca_gradient(x0, problem), 1e-8, x_start=x0, max_iters=500)
        assert problem.residual(sub.x) < 1e-9
        assert dc_objective(sub.x, problem) <= dc_objective(x0, problem) + 1e-12

    def test_subproblem_stays_at_fixed_point(self, pref3):
        problem = dc_transform(pref3, 2)
        x0 = problem.lift([np.eye(2)[[0, 0, 1, 1]]])
        sub = convex_subproblem(problem, dca_gradient(x0, problem), 1e-8, x_start=x0, max_iters=500)
        assert sub.converged
        assert np.allclose(sub.x, x0, atol=1e-12)
        assert dc_objective(sub.x, problem) == pytest.approx(dc_objective(x0, problem), abs=1e-9)
        assert dc_objective(x0, problem) == pytest.approx(0.1887219, abs=1e-7)

    def test_dca_trace_descends(self, random_pref):
        pref = random_pref(j=6, n=3, seed=4)
        problem = dc_transform(pref, 2)
        outcome = run_dca(problem, np.random.default_rng(1), epsilon=1e-8, max_iters=40,
                          subproblem_tol=1e-7, subproblem_max_iters=400)
        assert non_increasing(outcome.trace, tol=1e-12)


class TestDca:
    def test_design_properties(self, random_pref):
        pref = random_pref(j=10, n=3, seed=9)
        result = design_dca(pref, 2, DCA_OPTS)
        assert result.method == "dca"
        assert non_increasing(result.trace)
        assert result.objective <= result.diagnostics["soft_objective"] + 1e-9
        assert result.diagnostics["fixed_point_residual"] < 1e-9
        assert result.objective >= brute_force_objective(pref, 2) - 1e-12

    def test_rounding_never_increases(self, random_pref):
        pref = random_pref(j=8, n=3, seed=10)
        problem = dc_transform(pref, 2)
        outcome = run_dca(problem, np.random.default_rng(2), epsilon=1e-8, max_iters=40,
                          subproblem_tol=1e-7, subproblem_max_iters=400)
        run, diagnostics = round_soft_assignment(
            pref.spvs, pref.probs, outcome.r_blocks(problem)[0], problem.soft_centers(outcome.x),
            outcome.objective, max_iters=100, descent_tol=1e-12,
        )
        assert diagnostics["rounded_argmin_kl"] <= outcome.objective + 1e-9
        assert run.objective <= diagnostics["rounded_argmin_kl"] + 1e-12

    def test_codebooks_are_valid(self, pref3):
        result = design_dca(pref3, 2, DCA_OPTS)
        assert isinstance(result.codebooks, CodebookSet)
        assert np.isfinite(kl_matrix(pref3.spvs, result.codebooks).min(axis=1)).all()

    def test_demo_k2(self, pref3):
        result = design_dca(pref3, 2, DCA_OPTS.with_restarts(5))
        rows = sorted(map(tuple, np.round(result.codebooks.matrix, 12)))
        assert rows == [(0.0, 0.0, 0.5, 0.5), (0.5, 0.5, 0.0, 0.0)]
        assert result.objective == pytest.approx(0.1887219, abs=1e-7)


@pytest.mark.slow
def test_brute_force_equivalence():
    opts = DesignOptions(restarts=10, seed=11, max_iters=200, subproblem_max_iters=1000)
    kmeans_matches = dca_matches = 0
    for seed in range(50):
        rng = np.random.default_rng(100 + seed)
        pref = DiscretePreference(rng.dirichlet(np.ones(3), size=6), np.full(6, 1 / 6))
        best = brute_force_objective(pref, 2)
        kmeans = design_kmeanspp(pref, 2, opts).objective
        dca = design_dca(pref, 2, opts).objective
        assert kmeans >= best - 1e-12 and dca >= best - 1e-12
        kmeans_matches += kmeans <= best + 1e-9
        dca_matches += dca <= best + 1e-9
    assert kmeans_matches >= 40
    assert dca_matches >= 40

import numpy as np
import pytest

from modules.core.types import DiscretePreference
from modules.designers.single import (
    GridSearchSpec, exhaustive_search, grid_size, optimal_single, simplex_grid, single_objective,
)
from modules.error_handler.errors import BudgetExceeded, InvalidDistribution


def test_demo_single_codebook(pref1):
    q = optimal_single(pref1).q
    assert np.allclose(q, [0.5, 0.5, 0.0, 0.0])
    assert single_objective(pref1, q) == pytest.approx(0.1887219, abs=1e-7)


def test_optimum_beats_random_codebooks(random_pref):
    rng = np.random.default_rng(1)
    for seed in range(10):
        pref = random_pref(j=10, n=4, seed=seed)
        best = single_objective(pref, optimal_single(pref))
        for q in rng.dirichlet(np.ones(4), size=200):
            assert best <= single_objective(pref, q) + 1e-12


def test_single_item_is_its_own_codebook():
    pref = DiscretePreference([[0.1, 0.2, 0.7]], [1.0])
    assert np.allclose(optimal_single(pref).q, [0.1, 0.2, 0.7])
    assert single_objective(pref, optimal_single(pref)) == pytest.approx(0.0, abs=1e-15)


class TestGrid:
    def test_grid_size_and_first_row(self):
        grid = simplex_grid(3, 2)
        assert grid.shape == (grid_size(3, 2), 3) == (6, 3)
        assert np.allclose(grid[0], [1.0, 0.0, 0.0])
        assert np.allclose(grid.sum(axis=1), 1.0)

    def test_step_must_divide_one(self):
        with pytest.raises(InvalidDistribution):
            GridSearchSpec(0.3, 1)

    def test_budget_guard(self):
        pref = DiscretePreference([[0.2, 0.3, 0.5]], [1.0])
        # 1326 grid points cubed is far above the default budget
        with pytest.raises(BudgetExceeded):
            exhaustive_search(pref, GridSearchSpec(0.02, 3))

    def test_k1_matches_closed_form(self, pref1):
        codebooks, value = exhaustive_search(pref1, GridSearchSpec(0.25, 1))
        assert np.allclose(codebooks.matrix[0], [0.5, 0.5, 0.0, 0.0])
        assert value == pytest.approx(single_objective(pref1, optimal_single(pref1)))

    def test_k2_demo(self, pref3):
        codebooks, value = exhaustive_search(pref3, GridSearchSpec(0.25, 2))
        rows = sorted(map(tuple, np.round(codebooks.matrix, 12)))
        assert rows == [(0.0, 0.0, 0.5, 0.5), (0.5, 0.5, 0.0, 0.0)]
        assert value == pytest.approx(0.1887219, abs=1e-7)

    def test_grid_optimum_close_to_closed_form(self, random_pref):
        pref = random_pref(j=6, n=3, seed=3)
        _, value = exhaustive_search(pref, GridSearchSpec(0.02, 1))
        exact = single_objective(pref, optimal_single(pref))
        assert exact <= value + 1e-12
        assert value - exact < 0.01

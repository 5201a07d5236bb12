"""Closed-form single-codebook optimum and the exhaustive grid baseline."""
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from config.settings import settings
from modules.core.information import kl_matrix
from modules.core.types import Codebook, CodebookSet, DiscretePreference
from modules.error_handler.errors import BudgetExceeded, InvalidDistribution


@dataclass(frozen=True)
class GridSearchSpec:
    step: float
    K: int

    def __post_init__(self):
        if not 0 < self.step <= 0.5:
            raise InvalidDistribution(f"grid step must lie in (0, 0.5], got {self.step}")
        if self.K < 1:
            raise InvalidDistribution(f"K must be positive, got {self.K}")
        if abs(self.divisions * self.step - 1.0) > 1e-9:
            raise InvalidDistribution(f"grid step {self.step} does not divide 1")

    @property
    def divisions(self) -> int:
        return int(round(1.0 / self.step))


def optimal_single(pref: DiscretePreference) -> Codebook:
    """The f-weighted mean SPV, which minimizes Σ_j f_j D(p_j||q)."""
    q = pref.probs @ pref.spvs
    return Codebook(q / q.sum())


def single_objective(pref: DiscretePreference, q) -> float:
    """Σ_j f_j D(p_j||q) in bits/symbol."""
    q = q.q if isinstance(q, Codebook) else np.asarray(q, dtype=float)
    divs = kl_matrix(pref.spvs, q)[:, 0]
    used = pref.probs > 0
    return float(np.dot(pref.probs[used], divs[used]))


def grid_size(n: int, divisions: int) -> int:
    return int(comb(divisions + n - 1, n - 1, exact=True))


def simplex_grid(n: int, divisions: int) -> np.ndarray:
    """All points of the simplex whose coordinates are multiples of 1/divisions.

    Rows are integer compositions scaled by 1/divisions; the first row is the vertex e_1.
    """
    rows = []
    for bars in itertools.combinations(range(divisions + n - 1), n - 1):
        edges = (-1,) + bars + (divisions + n - 1,)
        rows.append([edges[i + 1] - edges[i] - 1 for i in range(n)])
    return np.array(rows, dtype=float)[::-1] / divisions


def exhaustive_search(pref: DiscretePreference, spec: GridSearchSpec,
                      budget: int | None = None, weights=None, logger=None
                      ) -> tuple[CodebookSet, float]:
    """Best unordered K-subset of grid codebooks.

    Ties go to the lexicographically smallest subset of grid indices.
    `weights` overrides pref.probs (used for sample sets).
    """
    budget = settings.grid_budget if budget is None else budget
    points = grid_size(pref.n, spec.divisions)
    if points ** spec.K > budget:
        raise BudgetExceeded(
            f"exhaustive search over {points} grid points with K={spec.K} exceeds budget {budget}",
            grid_points=points, K=spec.K,
        )

    grid = simplex_grid(pref.n, spec.divisions)
    w = pref.probs if weights is None else np.asarray(weights, dtype=float)
    used = w > 0
    w = w[used]
    divs = kl_matrix(pref.spvs[used], grid)
    k = min(spec.K, grid.shape[0])

    if logger:
        logger.log_info("Exhaustive Search", f"grid points: {points}, K: {spec.K}")

    best_value = math.inf
    best_subset: tuple[int, ...] = tuple(range(k))

    for head in itertools.combinations(range(grid.shape[0]), k - 1):
        start = head[-1] + 1 if head else 0
        if start >= grid.shape[0]:
            continue
        partial = divs[:, list(head)].min(axis=1) if head else np.full(w.shape[0], math.inf)
        tails = np.minimum(partial[:, None], divs[:, start:])
        values = w @ tails
        i = int(np.argmin(values))
        if values[i] < best_value:
            best_value = float(values[i])
            best_subset = head + (start + i,)

    return CodebookSet(grid[list(best_subset)]), best_value

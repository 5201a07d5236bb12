"""Weighted KL clustering: centroid updates, k-means++ seeding, Lloyd iterations.

The functions here work on raw (J, N) SPV matrices and nonnegative weight
vectors that need not sum to one, so that every designer (single-user,
sampled continuous preferences, per-user marginals of the two-user case)
shares one engine.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from modules.core.information import assign, kl_matrix
from modules.core.types import Codebook, CodebookSet, DiscretePreference
from modules.error_handler.errors import DegenerateSupport, DescentViolation, EmptyCluster

__all__ = [
    "LloydResult",
    "weighted_centers",
    "center_update",
    "seed_indices",
    "kmeanspp_seed",
    "run_lloyd",
    "weighted_objective",
    "check_descent",
    "fixed_point_residual",
]


@dataclass
class LloydResult:
    centers: np.ndarray
    owner: np.ndarray
    objective: float
    iterations: int
    trace: list[float] = field(default_factory=list)
    converged: bool = True
    reseeds: int = 0


def weighted_centers(spvs: np.ndarray, weights: np.ndarray, owner: np.ndarray, k: int,
                     previous: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Weighted mean SPV of every cluster and the cluster masses.

    Clusters with zero mass keep their `previous` row (NaN when absent).
    """
    masses = np.bincount(owner, weights=weights, minlength=k)
    sums = np.zeros((k, spvs.shape[1]))
    np.add.at(sums, owner, weights[:, None] * spvs)

    centers = np.full_like(sums, np.nan) if previous is None else np.array(previous, dtype=float)
    filled = masses > 0
    centers[filled] = sums[filled] / sums[filled].sum(axis=1, keepdims=True)
    return centers, masses


def center_update(pref: DiscretePreference, members) -> Codebook:
    """f-weighted mean of the member SPVs."""
    members = np.asarray(members, dtype=np.int64)
    weights = pref.probs[members]
    mass = weights.sum()
    if members.size == 0 or mass <= 0:
        raise EmptyCluster("cluster has no request mass")
    q = weights @ pref.spvs[members]
    return Codebook(q / q.sum())


def weighted_objective(weights: np.ndarray, mins: np.ndarray) -> float:
    used = weights > 0
    return float(np.dot(weights[used], mins[used]))


# ─── Seeding ───────────────────────────────────────────────────────

def _seeding_scores(weights: np.ndarray, nearest: np.ndarray | None) -> np.ndarray:
    if nearest is None:
        return weights.copy()
    unreachable = np.isinf(nearest) & (weights > 0)
    if np.any(unreachable):
        # items no chosen center can encode dominate every finite score
        return np.where(unreachable, weights, 0.0)
    with np.errstate(invalid="ignore"):
        return np.where(weights > 0, weights * nearest ** 2, 0.0)


def seed_indices(spvs: np.ndarray, weights: np.ndarray, k: int, rng: np.random.Generator,
                 base: np.ndarray | None = None, strict: bool = False, logger=None) -> list[int]:
    """k-means++ picks: first ∝ w_j, then ∝ w_j·G_j² with G_j the KL distance
    to the nearest center chosen so far (including any `base` centers).

    When no item has positive score left, the heaviest item is duplicated,
    or DegenerateSupport is raised with strict=True.
    """
    chosen: list[int] = []
    nearest = None
    if base is not None and len(base):
        nearest = kl_matrix(spvs, base).min(axis=1)

    for _ in range(k):
        scores = _seeding_scores(weights, nearest)
        total = scores.sum()
        if total > 0 and math.isfinite(total):
            pick = int(rng.choice(scores.shape[0], p=scores / total))
        else:
            if strict:
                raise DegenerateSupport(
                    f"only {len(chosen)} distinct seeds available for {k} codebooks"
                )
            pick = chosen[0] if chosen else int(np.argmax(weights))
            if logger:
                logger.log_warning(
                    "Degenerate Support",
                    f"Duplicating center at item {pick} ({len(chosen)} of {k} seeded)"
                )
        chosen.append(pick)
        d = kl_matrix(spvs, spvs[pick])[:, 0]
        nearest = d if nearest is None else np.minimum(nearest, d)
    return chosen


def kmeanspp_seed(pref: DiscretePreference, K: int, rng: np.random.Generator,
                  strict: bool = False, logger=None) -> CodebookSet:
    picks = seed_indices(pref.spvs, pref.probs, K, rng, strict=strict, logger=logger)
    return CodebookSet(pref.spvs[picks])


# ─── Lloyd iterations ──────────────────────────────────────────────

def check_descent(before: float, after: float, tol: float, step: str, iteration: int):
    if math.isinf(before):
        return
    if after > before + tol * max(1.0, abs(before)):
        raise DescentViolation(
            f"{step} step increased the objective at iteration {iteration}: {before!r} -> {after!r}",
            before=before, after=after,
        )


def _reseed_empty(spvs, weights, centers, own, masses, logger=None) -> int:
    """Move every empty center onto the item with the largest w_j·G_j,
    G_j being the divergence to the item's current codebook."""
    empty = np.flatnonzero(masses <= 0)
    if empty.size == 0:
        return 0
    with np.errstate(invalid="ignore"):
        scores = np.where(weights > 0, weights * own, -1.0)
    moved = 0
    for k in empty:
        j = int(np.argmax(scores))
        if scores[j] <= 0:
            break
        centers[k] = spvs[j]
        scores[j] = -1.0
        moved += 1
    if moved and logger:
        logger.log_warning("Empty Cluster", f"Reseeded {moved} empty codebook(s) at farthest items")
    return moved


def run_lloyd(spvs: np.ndarray, weights: np.ndarray, centers: np.ndarray, *,
              max_iters: int, descent_tol: float = 1e-12, center_tol: float | None = None,
              logger=None) -> LloydResult:
    """Alternate centroid and argmin-KL assignment steps until a fixed point.

    Stops when the assignment no longer changes or, with center_tol, when no
    center moves by more than center_tol in any coordinate. Raises
    DescentViolation if either step increases the objective.
    """
    weights = np.asarray(weights, dtype=float)
    centers = np.array(centers, dtype=float)
    k = centers.shape[0]
    owner, mins = assign(spvs, centers, allow_infinite=True)
    objective = weighted_objective(weights, mins)
    trace: list[float] = []
    reseeds = 0
    converged = False

    iteration = 0
    for iteration in range(1, max_iters + 1):
        new_centers, masses = weighted_centers(spvs, weights, owner, k, previous=centers)
        own = kl_matrix(spvs, new_centers)[np.arange(owner.shape[0]), owner]
        centered = weighted_objective(weights, own)
        check_descent(objective, centered, descent_tol, "center", iteration)

        moved = _reseed_empty(spvs, weights, new_centers, own, masses, logger)
        reseeds += moved

        new_owner, mins = assign(spvs, new_centers, allow_infinite=True)
        assigned = weighted_objective(weights, mins)
        check_descent(centered, assigned, descent_tol, "assignment", iteration)
        trace.append(assigned)

        shift = float(np.max(np.abs(new_centers - centers)))
        stable = not moved and np.array_equal(new_owner, owner)
        centers, owner, objective = new_centers, new_owner, assigned

        if stable or (center_tol is not None and not moved and shift <= center_tol):
            converged = True
            break

    if not converged and logger:
        logger.log_warning("Max Iterations", f"Lloyd iterations stopped after {max_iters} rounds")

    return LloydResult(centers, owner, objective, iteration, trace, converged, reseeds)


def fixed_point_residual(spvs: np.ndarray, weights: np.ndarray, centers: np.ndarray,
                         owner: np.ndarray) -> float:
    """Largest violation of the centroid condition or of argmin ownership.

    Zero-mass clusters are exempt from the centroid condition and
    zero-weight items from the ownership condition.
    """
    weights = np.asarray(weights, dtype=float)
    k = centers.shape[0]
    means, masses = weighted_centers(spvs, weights, owner, k, previous=centers)
    centroid_gap = float(np.max(np.abs(means - centers))) if np.any(masses > 0) else 0.0

    divs = kl_matrix(spvs, centers)
    used = weights > 0
    own = divs[np.arange(owner.shape[0]), owner][used]
    best = divs.min(axis=1)[used]
    with np.errstate(invalid="ignore"):
        gaps = np.where(np.isinf(own) & np.isinf(best), 0.0, own - best)
    assign_gap = float(np.max(gaps)) if gaps.size else 0.0
    return max(centroid_gap, assign_gap)

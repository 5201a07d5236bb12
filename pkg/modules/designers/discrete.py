"""Codebook design for discrete preferences: KL k-means++ and the DCA pipeline."""
import numpy as np

from modules.core.information import assign, kl_matrix
from modules.core.types import CodebookSet, DesignResult, DiscretePreference, PartitionAssignment
from modules.error_handler.errors import DescentViolation
from modules.error_handler.recovery import RestartSupervisor
from modules.utils.rng import make_rng, restart_seeds
from .clustering import (
    LloydResult, fixed_point_residual, run_lloyd, seed_indices, weighted_centers, weighted_objective,
)
from .dca import DcProblem, dc_transform, run_dca
from .options import DesignOptions

FIXED_POINT_TOL = 1e-9
ROUNDING_TOL = 1e-9


def cluster_kmeanspp(spvs: np.ndarray, weights: np.ndarray, K: int, opts: DesignOptions,
                     center_tol: float | None = None, logger=None) -> tuple[LloydResult, int]:
    """Best of opts.restarts seeded k-means++ runs on raw weights.

    Weights need not be normalized; scaling them leaves the result unchanged.
    Returns the winning run and its restart index.
    """
    spvs = np.asarray(spvs, dtype=float)
    weights = np.asarray(weights, dtype=float)
    supervisor = RestartSupervisor("kmeanspp", logger)

    def attempt(index, seed):
        rng = make_rng(seed)
        picks = seed_indices(spvs, weights, K, rng, logger=logger)
        run = run_lloyd(spvs, weights, spvs[picks], max_iters=opts.max_iters,
                        descent_tol=opts.descent_tol, center_tol=center_tol, logger=logger)
        return index, run

    index, best = supervisor.run(attempt, restart_seeds(opts.seed, opts.restarts),
                                 lambda pair: pair[1].objective)
    return best, index


def _result(pref: DiscretePreference, run: LloydResult, method: str, trace,
            diagnostics: dict, iterations: int | None = None, logger=None) -> DesignResult:
    residual = fixed_point_residual(pref.spvs, pref.probs, run.centers, run.owner)
    diagnostics = {**diagnostics, "fixed_point_residual": residual, "converged": run.converged}
    if residual >= FIXED_POINT_TOL and logger:
        logger.log_warning("Fixed Point", f"{method}: residual {residual:.3e} after {run.iterations} iterations")

    result = DesignResult(
        codebooks=CodebookSet(run.centers),
        assignment=PartitionAssignment(run.owner, run.centers.shape[0]),
        objective=run.objective,
        iterations=run.iterations if iterations is None else iterations,
        trace=tuple(trace),
        method=method,
        diagnostics=diagnostics,
    )
    if logger:
        logger.log_design_result({
            "method": method, "k": result.k, "n": result.n,
            "objective": result.objective, "iterations": result.iterations,
        })
    return result


def design_kmeanspp(pref: DiscretePreference, K: int, opts: DesignOptions | None = None,
                    logger=None) -> DesignResult:
    """KL k-means++: seed ∝ f_j·G_j², then alternate argmin-KL assignment and
    centroid updates to a fixed point; best of opts.restarts runs."""
    opts = opts or DesignOptions()
    run, restart = cluster_kmeanspp(pref.spvs, pref.probs, K, opts, logger=logger)
    return _result(pref, run, "kmeanspp", run.trace, {"restart": restart}, logger=logger)


# ─── DCA ───────────────────────────────────────────────────────────

def fill_empty_centers(centers: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    centers = centers.copy()
    empty = np.isnan(centers).any(axis=1)
    centers[empty] = fallback
    return centers


def round_soft_assignment(spvs: np.ndarray, weights: np.ndarray, r: np.ndarray,
                          soft_centers: np.ndarray, soft_objective: float, *,
                          max_iters: int, descent_tol: float, logger=None
                          ) -> tuple[LloydResult, dict]:
    """Turn a soft clustering into a deterministic fixed point.

    Two roundings are polished with Lloyd steps and the better one kept:
    each row to its largest weight, and each row to its argmin-KL soft
    center. The second never exceeds the soft objective; a violation raises
    DescentViolation.
    """
    k = r.shape[1]
    mean = weights @ spvs / max(weights.sum(), 1e-300)
    soft_centers = fill_empty_centers(soft_centers, mean / mean.sum())

    by_weight = np.argmax(r, axis=1)
    by_divergence, _ = assign(spvs, soft_centers, allow_infinite=True)

    candidates = []
    for label, owner in (("argmax", by_weight), ("argmin_kl", by_divergence)):
        centers, _ = weighted_centers(spvs, weights, owner, k, previous=soft_centers)
        rounded = weighted_objective(weights, _own_divergence(spvs, centers, owner))
        if label == "argmin_kl" and rounded > soft_objective + ROUNDING_TOL * max(1.0, abs(soft_objective)):
            raise DescentViolation(
                f"hard rounding raised the objective from {soft_objective!r} to {rounded!r}",
                soft=soft_objective, rounded=rounded,
            )
        run = run_lloyd(spvs, weights, centers, max_iters=max_iters,
                        descent_tol=descent_tol, logger=logger)
        candidates.append((run.objective, label, rounded, run))

    objective, label, _, run = min(candidates, key=lambda c: (c[0], c[1] != "argmax"))
    diagnostics = {
        "soft_objective": soft_objective,
        "rounded_argmax": candidates[0][2],
        "rounded_argmin_kl": candidates[1][2],
        "rounding": label,
    }
    return run, diagnostics


def _own_divergence(spvs, centers, owner) -> np.ndarray:
    return kl_matrix(spvs, centers)[np.arange(owner.shape[0]), owner]


def design_dca(pref: DiscretePreference, K: int, opts: DesignOptions | None = None,
               logger=None, problem: DcProblem | None = None) -> DesignResult:
    """DCA on the soft clustering problem, then hard rounding and polishing;
    best of opts.restarts runs."""
    opts = opts or DesignOptions()
    problem = problem or dc_transform(pref, K)
    supervisor = RestartSupervisor("dca", logger)

    def attempt(index, seed):
        outcome = run_dca(problem, make_rng(seed), epsilon=opts.epsilon, max_iters=opts.max_iters,
                          subproblem_tol=opts.subproblem_tol,
                          subproblem_max_iters=opts.subproblem_max_iters, logger=logger)
        r = outcome.r_blocks(problem)[0]
        run, diagnostics = round_soft_assignment(
            pref.spvs, pref.probs, r, problem.soft_centers(outcome.x), outcome.objective,
            max_iters=opts.max_iters, descent_tol=opts.descent_tol, logger=logger,
        )
        diagnostics.update(restart=index, dca_iterations=outcome.iterations,
                           capped_subproblems=outcome.capped_subproblems)
        return outcome, run, diagnostics

    outcome, run, diagnostics = supervisor.run(
        attempt, restart_seeds(opts.seed, opts.restarts), lambda triple: triple[1].objective,
    )
    trace = list(outcome.trace) + [run.objective]
    return _result(pref, run, "dca", trace, diagnostics, iterations=outcome.iterations, logger=logger)

"""Two-user design with common (multicast) and exclusive codebooks.

Rows of the joint preference F index user 1's request, columns user 2's.
Three request streams share the codebook slots:

    multicast  weight f_jj        slots: common
    user 1     w1_j = Σ_{i≠j} f_ji  slots: common + exclusive-1
    user 2     w2_j = Σ_{i≠j} f_ij  slots: common + exclusive-2

Slots are numbered common first, then exclusive-1, then exclusive-2. With
K0 = 0 nothing can be multicast and the users are designed independently on
their marginals.
"""
from dataclasses import dataclass, field

import numpy as np

from config.settings import settings
from modules.codec.baseline import self_decodable_bits
from modules.core.information import entropies, kl_matrix
from modules.core.types import NEG_TOL, SUM_TOL, CodebookSet, DiscretePreference, validate_simplex_rows
from modules.error_handler.errors import (
    AllInfinite, ConfigError, DescentViolation, DimensionMismatch, InvalidDistribution,
)
from modules.error_handler.recovery import RestartSupervisor
from modules.utils.rng import make_rng, restart_seeds
from .clustering import check_descent, seed_indices, weighted_centers, weighted_objective
from .dca import ClusterBlock, build_dc_problem, run_dca
from .discrete import ROUNDING_TOL, design_dca, design_kmeanspp, fill_empty_centers
from .options import DesignOptions

__all__ = [
    "JointPreference",
    "TwoUserBudget",
    "TwoUserDesign",
    "TwoUserSoftAssignment",
    "TwoUserResult",
    "joint_pref_alpha",
    "two_user_cost",
    "twouser_self_decodable_bits",
    "twouser_streams",
    "run_stream_lloyd",
    "design_twouser_kmeanspp",
    "design_twouser_dca",
]

K0_TIE_TOL = 1e-12


# ─── Types ─────────────────────────────────────────────────────────

@dataclass(frozen=True)
class JointPreference:
    F: np.ndarray

    def __post_init__(self):
        F = np.array(self.F, dtype=float)
        if F.ndim != 2 or F.shape[0] != F.shape[1] or F.shape[0] == 0:
            raise DimensionMismatch(f"joint preference must be a non-empty square matrix, got {F.shape}")
        if not np.all(np.isfinite(F)) or np.any(F < -NEG_TOL):
            raise InvalidDistribution("joint preference entries must be finite and nonnegative")
        F = np.clip(F, 0.0, None)
        if abs(F.sum() - 1.0) > SUM_TOL:
            raise InvalidDistribution(f"joint preference sums to {F.sum()!r}, expected 1")
        F.setflags(write=False)
        object.__setattr__(self, "F", F)

    @classmethod
    def ingest(cls, matrix) -> "JointPreference":
        F = np.array(matrix, dtype=float)
        total = F.sum()
        if not total > 0:
            raise InvalidDistribution("joint preference has zero total mass")
        return cls(F / total)

    @property
    def j(self) -> int:
        return self.F.shape[0]

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.F).copy()

    @property
    def w1(self) -> np.ndarray:
        return np.clip(self.F.sum(axis=1) - np.diag(self.F), 0.0, None)

    @property
    def w2(self) -> np.ndarray:
        return np.clip(self.F.sum(axis=0) - np.diag(self.F), 0.0, None)

    @property
    def marginal1(self) -> np.ndarray:
        return self.F.sum(axis=1)

    @property
    def marginal2(self) -> np.ndarray:
        return self.F.sum(axis=0)

    @property
    def trace(self) -> float:
        return float(np.trace(self.F))


@dataclass(frozen=True)
class TwoUserBudget:
    k1_total: int
    k2_total: int

    def __post_init__(self):
        if self.k1_total < 1 or self.k2_total < 1:
            raise ConfigError(f"codebook budgets must be positive, got ({self.k1_total}, {self.k2_total})")

    @property
    def max_common(self) -> int:
        return min(self.k1_total, self.k2_total)

    def split(self, k0: int) -> tuple[int, int, int]:
        return k0, self.k1_total - k0, self.k2_total - k0


def _rows(values, n: int | None) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.size == 0:
        return np.empty((0, n or 0))
    return arr.reshape(-1, arr.shape[-1])


@dataclass(frozen=True)
class TwoUserDesign:
    common: np.ndarray
    excl1: np.ndarray
    excl2: np.ndarray

    def __post_init__(self):
        sizes = {np.asarray(a).shape[-1] for a in (self.common, self.excl1, self.excl2) if np.asarray(a).size}
        if len(sizes) != 1:
            raise DimensionMismatch("all two-user codebooks must share one non-empty alphabet")
        n = sizes.pop()
        for name in ("common", "excl1", "excl2"):
            rows = _rows(getattr(self, name), n)
            if rows.shape[0]:
                rows = np.array(CodebookSet(rows).matrix)
            rows.setflags(write=False)
            object.__setattr__(self, name, rows)
        if self.k0 + self.k1 == 0 or self.k0 + self.k2 == 0:
            raise InvalidDistribution("each user needs at least one codebook")

    @classmethod
    def from_slots(cls, centers: np.ndarray, k0: int, k1: int, k2: int) -> "TwoUserDesign":
        return cls(centers[:k0], centers[k0:k0 + k1], centers[k0 + k1:k0 + k1 + k2])

    @property
    def n(self) -> int:
        return self.common.shape[1]

    @property
    def k0(self) -> int:
        return self.common.shape[0]

    @property
    def k1(self) -> int:
        return self.excl1.shape[0]

    @property
    def k2(self) -> int:
        return self.excl2.shape[0]

    def user_codebooks(self, user: int) -> CodebookSet:
        """Everything cached at one user: common codebooks first."""
        excl = self.excl1 if user == 1 else self.excl2
        return CodebookSet(np.vstack([self.common, excl]))

    def satisfies(self, budget: TwoUserBudget) -> bool:
        return self.k0 + self.k1 == budget.k1_total and self.k0 + self.k2 == budget.k2_total


@dataclass(frozen=True)
class TwoUserSoftAssignment:
    """Soft routing of multicast (r0) and per-user (r1, r2) requests."""
    r0: np.ndarray
    r1: np.ndarray
    r2: np.ndarray

    def __post_init__(self):
        for name in ("r0", "r1", "r2"):
            r = np.array(getattr(self, name), dtype=float)
            if r.ndim != 2:
                raise DimensionMismatch(f"{name} must be a matrix")
            if r.shape[1] and (np.any(r < -NEG_TOL) or np.any(np.abs(r.sum(axis=1) - 1.0) > SUM_TOL)):
                raise InvalidDistribution(f"{name} rows must lie on the simplex")
            r = np.clip(r, 0.0, None)
            r.setflags(write=False)
            object.__setattr__(self, name, r)


@dataclass(frozen=True)
class TwoUserResult:
    """Best design over K0; unpacks as (design, bits)."""
    design: TwoUserDesign
    bits: float
    costs_by_k0: dict[int, float]
    objective: float
    method: str
    soft: TwoUserSoftAssignment | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def k0(self) -> int:
        return self.design.k0

    def __iter__(self):
        yield self.design
        yield self.bits


def joint_pref_alpha(J: int, alpha: float) -> JointPreference:
    """alpha/J on the diagonal, the rest spread evenly off it."""
    if J < 2:
        raise InvalidDistribution(f"the similarity family needs J >= 2, got {J}")
    if not 0.0 <= alpha <= 1.0:
        raise InvalidDistribution(f"alpha must lie in [0, 1], got {alpha}")
    F = np.full((J, J), (1.0 - alpha) / (J * (J - 1)))
    np.fill_diagonal(F, alpha / J)
    return JointPreference(F)


# ─── Cost ──────────────────────────────────────────────────────────

def _as_joint(F) -> JointPreference:
    return F if isinstance(F, JointPreference) else JointPreference(F)


def _cost_streams(joint: JointPreference, design: TwoUserDesign):
    if design.k0:
        return [(joint.diagonal, design.common),
                (joint.w1, design.user_codebooks(1).matrix),
                (joint.w2, design.user_codebooks(2).matrix)]
    return [(joint.marginal1, design.excl1), (joint.marginal2, design.excl2)]


def two_user_terms(spvs, F, design: TwoUserDesign) -> tuple[float, float]:
    """(entropy part, divergence part) of the per-symbol cost, in bits."""
    spvs = validate_simplex_rows(spvs, "SPV")
    joint = _as_joint(F)
    if joint.j != spvs.shape[0]:
        raise DimensionMismatch(f"{spvs.shape[0]} SPVs but a {joint.j}x{joint.j} joint preference")
    if design.n != spvs.shape[1]:
        raise DimensionMismatch(f"SPVs have N={spvs.shape[1]}, codebooks have N={design.n}")

    h = entropies(spvs)
    entropy_part = divergence_part = 0.0
    for weights, books in _cost_streams(joint, design):
        mins = kl_matrix(spvs, books).min(axis=1)
        used = weights > 0
        if np.any(np.isinf(mins[used])):
            bad = int(np.flatnonzero(used & np.isinf(mins))[0])
            raise AllInfinite(f"item {bad} is not encodable by its user's codebooks", item=bad)
        entropy_part += float(np.dot(weights[used], h[used]))
        divergence_part += float(np.dot(weights[used], mins[used]))
    return entropy_part, divergence_part


def two_user_cost(spvs, F, design: TwoUserDesign, L: int) -> float:
    """Expected bits sent per request pair.

    With K0 >= 1 a shared request is multicast once with the best common
    codebook; otherwise each user is served from its own cache. With K0 = 0
    every request, shared or not, is sent to each user separately.
    """
    entropy_part, divergence_part = two_user_terms(spvs, F, design)
    return L * (entropy_part + divergence_part)


def twouser_self_decodable_bits(spvs, F, L: int, integer: bool = False) -> float:
    """Self-decodable baseline: a shared request goes out once, other
    requests once per user."""
    spvs = validate_simplex_rows(spvs, "SPV")
    joint = _as_joint(F)
    weights = joint.diagonal + joint.w1 + joint.w2
    total = 0.0
    for j in np.flatnonzero(weights > 0):
        total += weights[j] * self_decodable_bits(spvs[j], L, integer=integer)
    return float(total)


# ─── Stream clustering ─────────────────────────────────────────────

def twouser_streams(joint: JointPreference, k0: int, k1: int, k2: int) -> list[ClusterBlock]:
    common = np.arange(k0)
    excl1 = np.arange(k0, k0 + k1)
    excl2 = np.arange(k0 + k1, k0 + k1 + k2)
    return [
        ClusterBlock(joint.diagonal, common),
        ClusterBlock(joint.w1, np.concatenate([common, excl1])),
        ClusterBlock(joint.w2, np.concatenate([common, excl2])),
    ]


@dataclass
class StreamLloydResult:
    centers: np.ndarray
    owners: list[np.ndarray]
    objective: float
    iterations: int
    trace: list[float] = field(default_factory=list)
    converged: bool = True


def _stream_owners(divs: np.ndarray, streams) -> list[np.ndarray]:
    # slots list common codebooks first, so argmin ties go to them
    return [block.slots[np.argmin(divs[:, block.slots], axis=1)] for block in streams]


def _stream_objective(divs: np.ndarray, streams, owners) -> float:
    rows = np.arange(divs.shape[0])
    return sum(weighted_objective(block.weights, divs[rows, own]) for block, own in zip(streams, owners))


def _stream_centers(spvs, streams, owners, previous):
    stacked = np.vstack([spvs] * len(streams))
    weights = np.concatenate([block.weights for block in streams])
    centers, _ = weighted_centers(stacked, weights, np.concatenate(owners), previous.shape[0], previous=previous)
    return centers


def run_stream_lloyd(spvs: np.ndarray, streams, centers: np.ndarray, *, max_iters: int,
                     descent_tol: float = 1e-12, logger=None) -> StreamLloydResult:
    """Alternate per-stream argmin-KL routing and pooled centroid updates.

    A slot's new codebook is the weighted mean of every SPV routed to it by
    any stream; slots that receive no mass keep their codebook.
    """
    centers = np.array(centers, dtype=float)
    divs = kl_matrix(spvs, centers)
    owners = _stream_owners(divs, streams)
    objective = _stream_objective(divs, streams, owners)
    trace: list[float] = []
    converged = False

    iteration = 0
    for iteration in range(1, max_iters + 1):
        new_centers = _stream_centers(spvs, streams, owners, centers)
        divs = kl_matrix(spvs, new_centers)
        centered = _stream_objective(divs, streams, owners)
        check_descent(objective, centered, descent_tol, "center", iteration)

        new_owners = _stream_owners(divs, streams)
        assigned = _stream_objective(divs, streams, new_owners)
        check_descent(centered, assigned, descent_tol, "assignment", iteration)
        trace.append(assigned)

        stable = all(np.array_equal(a, b) for a, b in zip(new_owners, owners))
        centers, owners, objective = new_centers, new_owners, assigned
        if stable:
            converged = True
            break

    if not converged and logger:
        logger.log_warning("Max Iterations", f"two-user iterations stopped after {max_iters} rounds")
    return StreamLloydResult(centers, owners, objective, iteration, trace, converged)


def _seed_centers(spvs, joint: JointPreference, k0: int, k1: int, k2: int,
                  rng: np.random.Generator, logger=None) -> np.ndarray:
    """Common seeds ∝ (f_jj + w1_j + w2_j)·G², then each user's exclusives
    ∝ w·G² with G measured from the common seeds onward."""
    combined = joint.diagonal + joint.w1 + joint.w2
    common = spvs[seed_indices(spvs, combined, k0, rng, logger=logger)]
    parts = [common]
    for weights, k in ((joint.w1, k1), (joint.w2, k2)):
        if k == 0:
            continue
        if weights.sum() <= 0:
            # never routed to; park on a common codebook
            parts.append(np.repeat(common[:1], k, axis=0))
            continue
        parts.append(spvs[seed_indices(spvs, weights, k, rng, base=common, logger=logger)])
    return np.vstack(parts)


# ─── Designers ─────────────────────────────────────────────────────

def _prepare(spvs, F, budget):
    spvs = validate_simplex_rows(spvs, "SPV")
    joint = _as_joint(F)
    if joint.j != spvs.shape[0]:
        raise DimensionMismatch(f"{spvs.shape[0]} SPVs but a {joint.j}x{joint.j} joint preference")
    if not isinstance(budget, TwoUserBudget):
        budget = TwoUserBudget(*budget)
    return spvs, joint, budget


def _independent_design(spvs, joint: JointPreference, budget: TwoUserBudget, designer,
                        opts: DesignOptions, logger=None) -> tuple[TwoUserDesign, dict]:
    first = designer(DiscretePreference(spvs, joint.marginal1), budget.k1_total, opts, logger=logger)
    second = designer(DiscretePreference(spvs, joint.marginal2), budget.k2_total, opts, logger=logger)
    design = TwoUserDesign(np.empty((0, spvs.shape[1])), first.codebooks.matrix, second.codebooks.matrix)
    return design, {"user1_objective": first.objective, "user2_objective": second.objective}


def _search_k0(spvs, joint, budget, L, method, independent, shared, logger=None) -> TwoUserResult:
    costs: dict[int, float] = {}
    best = None
    for k0 in range(budget.max_common + 1):
        if k0 == 0:
            design, diagnostics = independent()
            soft = None
        else:
            design, soft, diagnostics = shared(k0)
        bits = two_user_cost(spvs, joint, design, L)
        costs[k0] = bits
        if logger:
            logger.log_info("Two-User K0", f"{method}: K0={k0} costs {bits:.6f} bits")
        if best is None or bits < best[1] - K0_TIE_TOL * max(1.0, best[1]):
            best = (design, bits, soft, diagnostics)

    design, bits, soft, diagnostics = best
    _, divergence = two_user_terms(spvs, joint, design)
    result = TwoUserResult(design, bits, costs, divergence, method, soft, diagnostics)
    if logger:
        logger.log_design_result({
            "method": method, "k": f"{design.k0}+{design.k1}+{design.k2}", "n": design.n,
            "objective": divergence, "expected_bits": bits,
        })
    return result


def design_twouser_kmeanspp(spvs, F, budget, opts: DesignOptions | None = None,
                            L: int | None = None, logger=None) -> TwoUserResult:
    """k-means++ seeding and stream Lloyd iterations for every K0 in
    0..min(budget); the cheapest K0 wins, ties to the smaller K0."""
    opts = opts or DesignOptions.for_twouser()
    L = settings.symbols_per_item if L is None else L
    spvs, joint, budget = _prepare(spvs, F, budget)

    def independent():
        return _independent_design(spvs, joint, budget, design_kmeanspp, opts, logger)

    def shared(k0):
        _, k1, k2 = budget.split(k0)
        streams = twouser_streams(joint, k0, k1, k2)
        supervisor = RestartSupervisor(f"twouser_kmeanspp[k0={k0}]", logger)

        def attempt(index, seed):
            centers = _seed_centers(spvs, joint, k0, k1, k2, make_rng(seed), logger)
            run = run_stream_lloyd(spvs, streams, centers, max_iters=opts.max_iters,
                                   descent_tol=opts.descent_tol, logger=logger)
            return index, run

        index, run = supervisor.run(attempt, restart_seeds(opts.seed, opts.restarts),
                                    lambda pair: pair[1].objective)
        diagnostics = {"restart": index, "iterations": run.iterations,
                       "converged": run.converged, "trace": run.trace}
        return TwoUserDesign.from_slots(run.centers, k0, k1, k2), None, diagnostics

    return _search_k0(spvs, joint, budget, L, "kmeanspp2u", independent, shared, logger)


def _round_streams(spvs, streams, r_blocks, soft_centers, soft_objective, *, max_iters,
                   descent_tol, logger=None) -> tuple[StreamLloydResult, dict]:
    """Two hard roundings (largest weight, argmin-KL soft center), each
    recentered and polished; the cheaper one wins, ties to largest weight."""
    total = sum(block.weights for block in streams)
    mean = total @ spvs / max(total.sum(), 1e-300)
    soft_centers = fill_empty_centers(soft_centers, mean / mean.sum())

    by_weight = [block.slots[np.argmax(r, axis=1)] for block, r in zip(streams, r_blocks)]
    by_divergence = _stream_owners(kl_matrix(spvs, soft_centers), streams)

    candidates = []
    for label, owners in (("argmax", by_weight), ("argmin_kl", by_divergence)):
        centers = _stream_centers(spvs, streams, owners, soft_centers)
        rounded = _stream_objective(kl_matrix(spvs, centers), streams, owners)
        if label == "argmin_kl" and rounded > soft_objective + ROUNDING_TOL * max(1.0, abs(soft_objective)):
            raise DescentViolation(
                f"hard rounding raised the objective from {soft_objective!r} to {rounded!r}",
                soft=soft_objective, rounded=rounded,
            )
        run = run_stream_lloyd(spvs, streams, centers, max_iters=max_iters,
                               descent_tol=descent_tol, logger=logger)
        candidates.append((run.objective, label, rounded, run))

    objective, label, _, run = min(candidates, key=lambda c: (c[0], c[1] != "argmax"))
    return run, {
        "soft_objective": soft_objective,
        "rounded_argmax": candidates[0][2],
        "rounded_argmin_kl": candidates[1][2],
        "rounding": label,
    }


def design_twouser_dca(spvs, F, budget, opts: DesignOptions | None = None,
                       L: int | None = None, logger=None) -> TwoUserResult:
    """DCA on the three-stream soft clustering for every K0, rounded and
    polished; the K0 = 0 branch runs single-user DCA per marginal."""
    opts = opts or DesignOptions.for_twouser()
    L = settings.symbols_per_item if L is None else L
    spvs, joint, budget = _prepare(spvs, F, budget)

    def independent():
        return _independent_design(spvs, joint, budget, design_dca, opts, logger)

    def shared(k0):
        _, k1, k2 = budget.split(k0)
        streams = twouser_streams(joint, k0, k1, k2)
        problem = build_dc_problem(spvs, streams, k0 + k1 + k2)
        supervisor = RestartSupervisor(f"twouser_dca[k0={k0}]", logger)

        def attempt(index, seed):
            outcome = run_dca(problem, make_rng(seed), epsilon=opts.epsilon, max_iters=opts.max_iters,
                              subproblem_tol=opts.subproblem_tol,
                              subproblem_max_iters=opts.subproblem_max_iters, logger=logger)
            run, diagnostics = _round_streams(
                spvs, streams, outcome.r_blocks(problem), problem.soft_centers(outcome.x),
                outcome.objective, max_iters=opts.max_iters, descent_tol=opts.descent_tol, logger=logger,
            )
            diagnostics.update(restart=index, dca_iterations=outcome.iterations,
                               capped_subproblems=outcome.capped_subproblems,
                               trace=list(outcome.trace) + [run.objective])
            return outcome, run, diagnostics

        outcome, run, diagnostics = supervisor.run(
            attempt, restart_seeds(opts.seed, opts.restarts), lambda triple: triple[1].objective,
        )
        soft = TwoUserSoftAssignment(*outcome.r_blocks(problem))
        return TwoUserDesign.from_slots(run.centers, k0, k1, k2), soft, diagnostics

    return _search_k0(spvs, joint, budget, L, "dca2u", independent, shared, logger)

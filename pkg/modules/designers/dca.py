"""Difference-of-convex formulation of probabilistic KL clustering.

The decision vector is x = [t | s | r]:

    t_c      total request mass routed to codebook slot c
    s_{c,n}  mass of symbol n routed to slot c
    r        soft assignments, one row-stochastic block per request stream

A request stream (ClusterBlock) is a weight per item plus the codebook slots
it may use. The single-user problem has one stream over K slots; the
two-user problem has three (multicast, user 1, user 2) that share the
common slots.

The objective Σ t ln t − Σ s ln s equals Σ_j Σ_k w_j r_jk CE(p_j, s_k/t_k),
a cross entropy, so subtracting the constant Σ_j w_j H(p_j) leaves the
divergence objective of the clustering. Internally everything is in nats;
values are reported in bits.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import brentq
from scipy.special import xlogy

from modules.core.information import LN2, entropies
from modules.core.types import DiscretePreference
from modules.error_handler.errors import DimensionMismatch

__all__ = [
    "X_FLOOR",
    "ClusterBlock",
    "DcLayout",
    "DcProblem",
    "SubproblemResult",
    "DcaOutcome",
    "build_dc_problem",
    "dc_transform",
    "dc_objective",
    "dca_gradient",
    "convex_subproblem",
    "run_dca",
]

X_FLOOR = 1e-300


def _xlogx(x: np.ndarray) -> np.ndarray:
    return xlogy(x, np.maximum(x, X_FLOOR))


@dataclass(frozen=True)
class ClusterBlock:
    """One request stream: item weights and the slots it may be routed to."""
    weights: np.ndarray
    slots: np.ndarray

    @property
    def width(self) -> int:
        return self.slots.shape[0]


@dataclass(frozen=True)
class DcLayout:
    n_slots: int
    n_symbols: int
    n_items: int
    r_offsets: tuple[int, ...]
    r_widths: tuple[int, ...]

    @property
    def t(self) -> slice:
        return slice(0, self.n_slots)

    @property
    def s(self) -> slice:
        return slice(self.n_slots, self.n_slots * (self.n_symbols + 1))

    def s_index(self, c: int, n: int) -> int:
        return self.n_slots + c * self.n_symbols + n

    def r_block(self, b: int) -> slice:
        start = self.r_offsets[b]
        return slice(start, start + self.n_items * self.r_widths[b])

    def r_index(self, b: int, j: int, i: int) -> int:
        return self.r_offsets[b] + j * self.r_widths[b] + i

    @property
    def size(self) -> int:
        return self.r_offsets[-1] + self.n_items * self.r_widths[-1] if self.r_offsets \
            else self.n_slots * (self.n_symbols + 1)


@dataclass(frozen=True)
class DcProblem:
    spvs: np.ndarray
    blocks: tuple[ClusterBlock, ...]
    layout: DcLayout
    A: sparse.csr_matrix
    b: np.ndarray
    lambda1: np.ndarray
    lambda2: np.ndarray
    offset: float  # Σ_j w_j H(p_j) over all streams, bits

    @property
    def M(self) -> int:
        return self.layout.size

    @property
    def n_slots(self) -> int:
        return self.layout.n_slots

    def symbol_mass(self, r_blocks) -> np.ndarray:
        """s as an (n_slots, N) matrix for the given soft assignments."""
        s = np.zeros((self.layout.n_slots, self.layout.n_symbols))
        for block, r in zip(self.blocks, r_blocks):
            s[block.slots] += (block.weights[:, None] * r).T @ self.spvs
        return s

    def lift(self, r_blocks) -> np.ndarray:
        """Feasible x for the given soft assignments."""
        s = self.symbol_mass(r_blocks)
        x = np.empty(self.M)
        x[self.layout.t] = s.sum(axis=1)
        x[self.layout.s] = s.ravel()
        for b, r in enumerate(r_blocks):
            x[self.layout.r_block(b)] = np.asarray(r, dtype=float).ravel()
        return x

    def split(self, x: np.ndarray):
        lay = self.layout
        t = x[lay.t]
        s = x[lay.s].reshape(lay.n_slots, lay.n_symbols)
        r_blocks = [x[lay.r_block(b)].reshape(lay.n_items, lay.r_widths[b])
                    for b in range(len(self.blocks))]
        return t, s, r_blocks

    def soft_centers(self, x: np.ndarray) -> np.ndarray:
        """s_c / t_c per slot; NaN rows for slots without mass."""
        t, s, _ = self.split(x)
        centers = np.full_like(s, np.nan)
        filled = t > X_FLOOR
        centers[filled] = s[filled] / s[filled].sum(axis=1, keepdims=True)
        return centers

    def residual(self, x: np.ndarray) -> float:
        return float(np.max(np.abs(self.A @ x - self.b))) if self.A.shape[0] else 0.0


def build_dc_problem(spvs: np.ndarray, blocks, n_slots: int) -> DcProblem:
    spvs = np.asarray(spvs, dtype=float)
    j, n = spvs.shape
    blocks = tuple(
        ClusterBlock(np.asarray(b.weights, dtype=float), np.asarray(b.slots, dtype=np.int64))
        for b in blocks if len(b.slots)
    )
    for block in blocks:
        if block.weights.shape[0] != j:
            raise DimensionMismatch("every stream needs one weight per item")

    offsets, widths = [], []
    cursor = n_slots * (n + 1)
    for block in blocks:
        offsets.append(cursor)
        widths.append(block.width)
        cursor += j * block.width
    layout = DcLayout(n_slots, n, j, tuple(offsets), tuple(widths))
    M = layout.size

    rows, cols, vals = [], [], []
    row = 0
    # t_c - Σ_n s_{c,n} = 0
    for c in range(n_slots):
        rows.append(row); cols.append(c); vals.append(1.0)
        for sym in range(n):
            rows.append(row); cols.append(layout.s_index(c, sym)); vals.append(-1.0)
        row += 1
    # s_{c,n} - Σ_streams Σ_j w_j p_{j,n} r_{j,c} = 0
    s_rows = row
    for c in range(n_slots):
        for sym in range(n):
            rows.append(s_rows + c * n + sym); cols.append(layout.s_index(c, sym)); vals.append(1.0)
    for b, block in enumerate(blocks):
        for i, c in enumerate(block.slots):
            for jj in np.flatnonzero(block.weights > 0):
                for sym in np.flatnonzero(spvs[jj] > 0):
                    rows.append(s_rows + int(c) * n + int(sym))
                    cols.append(layout.r_index(b, int(jj), i))
                    vals.append(-block.weights[jj] * spvs[jj, sym])
    row = s_rows + n_slots * n
    # Σ_i r_{j,i} = 1 per stream and item
    for b, block in enumerate(blocks):
        for jj in range(j):
            for i in range(block.width):
                rows.append(row); cols.append(layout.r_index(b, jj, i)); vals.append(1.0)
            row += 1

    A = sparse.csr_matrix((vals, (rows, cols)), shape=(row, M))
    rhs = np.zeros(row)
    rhs[s_rows + n_slots * n:] = 1.0

    lambda1 = np.zeros(M)
    lambda1[layout.t] = 1.0
    lambda2 = np.zeros(M)
    lambda2[layout.s] = 1.0

    h = entropies(spvs)
    offset = float(sum(np.dot(block.weights, h) for block in blocks))
    return DcProblem(spvs, blocks, layout, A, rhs, lambda1, lambda2, offset)


def dc_transform(pref: DiscretePreference, K: int) -> DcProblem:
    """Single-user DC problem: one stream over K slots, M = K + KN + KJ."""
    block = ClusterBlock(pref.probs, np.arange(K))
    return build_dc_problem(pref.spvs, [block], K)


def _raw_nats(problem: DcProblem, x: np.ndarray) -> float:
    lay = problem.layout
    return float(_xlogx(x[lay.t]).sum() - _xlogx(x[lay.s]).sum())


def dc_objective(x: np.ndarray, problem: DcProblem) -> float:
    """Σ t log2 t − Σ s log2 s minus the entropy constant: the soft
    clustering's divergence objective in bits/symbol."""
    return _raw_nats(problem, x) / LN2 - problem.offset


def dca_gradient(x: np.ndarray, problem: DcProblem) -> np.ndarray:
    """y = λ2 ∘ (1 + ln x), the gradient of the subtracted convex part."""
    return problem.lambda2 * (1.0 + np.log(np.maximum(x, X_FLOOR)))


# ─── Convex subproblem ─────────────────────────────────────────────

@dataclass
class SubproblemResult:
    x: np.ndarray
    objective: float  # nats
    iterations: int
    gap: float
    converged: bool


def _subproblem_value(t: np.ndarray, s: np.ndarray, Y: np.ndarray) -> float:
    return float(_xlogx(t).sum() - (Y * s).sum())


def convex_subproblem(problem: DcProblem, y_old: np.ndarray, tol: float,
                      x_start: np.ndarray | None = None, max_iters: int = 10_000,
                      logger=None) -> SubproblemResult:
    """Minimize Σ t ln t − y_oldᵀx over the feasible set by conditional gradient.

    Works in r-space (t and s are linear images of r). Each step moves toward
    the vertex that routes every item to its smallest-gradient slot, with the
    step length from an exact line search. Stops when the duality gap or the
    relative objective change drops below tol.
    """
    lay = problem.layout
    spvs = problem.spvs
    Y = y_old[lay.s].reshape(lay.n_slots, lay.n_symbols)
    mass = spvs.sum(axis=1)
    linear = [spvs @ Y[block.slots].T for block in problem.blocks]

    if x_start is None:
        r_blocks = [np.full((lay.n_items, block.width), 1.0 / block.width) for block in problem.blocks]
    else:
        r_blocks = [r.copy() for r in problem.split(x_start)[2]]
    s = problem.symbol_mass(r_blocks)
    t = s.sum(axis=1)
    value = _subproblem_value(t, s, Y)

    gap = math.inf
    converged = False
    iteration = 0
    for iteration in range(1, max_iters + 1):
        log_t = np.log(np.maximum(t, X_FLOOR))
        vertices, gap = [], 0.0
        for block, r, lin in zip(problem.blocks, r_blocks, linear):
            grad = block.weights[:, None] * (mass[:, None] * (1.0 + log_t[block.slots])[None, :] - lin)
            pick = np.argmin(grad, axis=1)
            vertex = np.zeros_like(r)
            vertex[np.arange(r.shape[0]), pick] = 1.0
            gap += float((grad * (r - vertex)).sum())
            vertices.append(vertex)

        if gap <= tol * max(1.0, abs(value)):
            converged = True
            break

        directions = [v - r for v, r in zip(vertices, r_blocks)]
        ds = problem.symbol_mass(directions)
        dt = ds.sum(axis=1)
        slope_linear = float((Y * ds).sum())

        def slope(gamma: float) -> float:
            return float(np.dot(dt, 1.0 + np.log(np.maximum(t + gamma * dt, X_FLOOR)))) - slope_linear

        if slope(0.0) >= 0:
            converged = True
            break
        gamma = 1.0 if slope(1.0) <= 0 else brentq(slope, 0.0, 1.0, xtol=1e-14)

        new_r = [r + gamma * d for r, d in zip(r_blocks, directions)]
        new_s = s + gamma * ds
        new_t = new_s.sum(axis=1)
        new_value = _subproblem_value(new_t, new_s, Y)
        if new_value > value:
            converged = True
            break

        change = abs(value - new_value) / max(1.0, abs(value))
        r_blocks, s, t, value = new_r, new_s, new_t, new_value
        if change < tol:
            converged = True
            break

    if not converged and logger:
        logger.log_warning(
            "Subproblem Iteration Cap",
            f"Conditional gradient stopped after {max_iters} iterations (gap {gap:.3e})"
        )

    for r in r_blocks:
        np.clip(r, 0.0, None, out=r)
        r /= r.sum(axis=1, keepdims=True)
    x = problem.lift(r_blocks)
    return SubproblemResult(x, value, iteration, gap, converged)


# ─── DCA outer loop ────────────────────────────────────────────────

@dataclass
class DcaOutcome:
    x: np.ndarray
    objective: float  # bits/symbol, soft
    iterations: int
    trace: list[float] = field(default_factory=list)
    capped_subproblems: int = 0

    def r_blocks(self, problem: DcProblem):
        return problem.split(self.x)[2]


def random_start(problem: DcProblem, rng: np.random.Generator) -> np.ndarray:
    """Rows of every r block drawn from the flat Dirichlet."""
    r_blocks = [rng.dirichlet(np.ones(block.width), size=problem.layout.n_items)
                for block in problem.blocks]
    return problem.lift(r_blocks)


def run_dca(problem: DcProblem, rng: np.random.Generator, *, epsilon: float,
            max_iters: int, subproblem_tol: float, subproblem_max_iters: int,
            x_start: np.ndarray | None = None, logger=None) -> DcaOutcome:
    """Linearize −Σ s ln s at the current point, solve the convex rest, repeat
    until the objective moves by at most epsilon."""
    x = random_start(problem, rng) if x_start is None else np.array(x_start, dtype=float)
    value = dc_objective(x, problem)
    trace = [value]
    capped = 0

    iteration = 0
    for iteration in range(1, max_iters + 1):
        y = dca_gradient(x, problem)
        sub = convex_subproblem(problem, y, subproblem_tol, x_start=x,
                                max_iters=subproblem_max_iters, logger=logger)
        capped += 0 if sub.converged else 1
        new_value = dc_objective(sub.x, problem)
        if new_value > value:
            break
        x = sub.x
        trace.append(new_value)
        done = abs(value - new_value) <= epsilon
        value = new_value
        if done:
            break

    return DcaOutcome(x, value, iteration, trace, capped)

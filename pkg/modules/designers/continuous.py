"""Codebook design under continuous preferences over the simplex.

Preferences are sampled (flat Dirichlet, general Dirichlet, or rejection
sampling against the uniform proposal), and designs run on the empirical
measure of a fixed sample.
"""
import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from config.settings import settings
from modules.core.information import entropies, kl_matrix
from modules.core.types import CodebookSet, DesignResult, DiscretePreference, PartitionAssignment
from modules.error_handler.errors import InvalidDistribution, RejectionStall
from modules.utils.rng import STREAM_EVAL, STREAM_SAMPLE, chunk_rngs, stream_rng
from .clustering import fixed_point_residual
from .discrete import cluster_kmeanspp, design_dca, design_kmeanspp
from .options import DesignOptions

__all__ = [
    "PreferenceSpec",
    "SampleSet",
    "sample_preference",
    "sample_uniform_simplex",
    "evaluation_sample",
    "design_sampling",
    "design_continuous_saa",
    "evaluate_expected_bits",
]

Kind = Literal["uniform", "dirichlet", "radial", "custom"]


@dataclass(frozen=True)
class PreferenceSpec:
    kind: Kind
    n: int
    alpha: tuple[float, ...] | None = None
    center: tuple[float, ...] | None = None
    density: Callable[[np.ndarray], np.ndarray] | None = None
    bound: float | None = None

    def __post_init__(self):
        if self.n < 2:
            raise InvalidDistribution(f"alphabet size must be at least 2, got {self.n}")
        if self.kind == "dirichlet":
            if self.alpha is None or len(self.alpha) != self.n or min(self.alpha) <= 0:
                raise InvalidDistribution("dirichlet preference needs n positive concentrations")
        elif self.kind == "radial":
            center = self.center if self.center is not None else (1.0 / self.n,) * self.n
            if len(center) != self.n or abs(sum(center) - 1.0) > 1e-9 or min(center) < 0:
                raise InvalidDistribution("radial center must be an SPV of length n")
            object.__setattr__(self, "center", tuple(float(c) for c in center))
            if self.bound is None:
                object.__setattr__(self, "bound", self.radial_bound(self.center))
        elif self.kind == "custom":
            if self.density is None or self.bound is None or self.bound <= 0:
                raise InvalidDistribution("custom preference needs a density and a positive bound")
        elif self.kind != "uniform":
            raise InvalidDistribution(f"unknown preference kind {self.kind!r}")

    @classmethod
    def uniform(cls, n: int) -> "PreferenceSpec":
        return cls("uniform", n)

    @classmethod
    def dirichlet(cls, alpha) -> "PreferenceSpec":
        alpha = tuple(float(a) for a in alpha)
        return cls("dirichlet", len(alpha), alpha=alpha)

    @classmethod
    def radial(cls, n: int = 3, center=None) -> "PreferenceSpec":
        return cls("radial", n, center=None if center is None else tuple(center))

    @classmethod
    def custom(cls, n: int, density, bound: float) -> "PreferenceSpec":
        return cls("custom", n, density=density, bound=float(bound))

    @staticmethod
    def radial_bound(center) -> float:
        """max_v ||v - p0||_2 over the simplex vertices; the convex distance
        attains its maximum over the simplex at a vertex."""
        center = np.asarray(center, dtype=float)
        return float(np.linalg.norm(np.eye(center.shape[0]) - center, axis=1).max())

    def unnormalized_density(self, points: np.ndarray) -> np.ndarray:
        if self.kind == "radial":
            return np.linalg.norm(points - np.asarray(self.center), axis=1)
        if self.kind == "custom":
            return np.asarray(self.density(points), dtype=float)
        return np.ones(points.shape[0])


@dataclass(frozen=True)
class SampleSet:
    """S points with equal weights 1/S."""
    points: np.ndarray

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.size, 1.0 / self.size)

    def to_preference(self) -> DiscretePreference:
        return DiscretePreference(self.points, self.weights)


def sample_uniform_simplex(rng: np.random.Generator, S: int, n: int) -> np.ndarray:
    """Flat Dirichlet draws via normalized unit-rate exponentials."""
    e = rng.exponential(size=(S, n))
    return e / e.sum(axis=1, keepdims=True)


def _rejection_sample(spec: PreferenceSpec, S: int, rng: np.random.Generator,
                      min_rate: float, window: int, logger=None) -> np.ndarray:
    accepted: list[np.ndarray] = []
    count = proposals = 0
    while count < S:
        batch = max(1024, 2 * (S - count))
        candidates = sample_uniform_simplex(rng, batch, spec.n)
        ratio = spec.unnormalized_density(candidates) / spec.bound
        if np.any(ratio > 1.0 + 1e-12) and logger:
            logger.log_warning("Density Bound", f"density exceeds the bound {spec.bound}; clipping")
        keep = rng.random(batch) < np.clip(ratio, 0.0, 1.0)
        proposals += batch
        accepted.append(candidates[keep])
        count += int(keep.sum())
        if proposals >= window and count / proposals < min_rate:
            raise RejectionStall(
                f"acceptance rate {count / proposals:.2e} below {min_rate:.0e} "
                f"after {proposals} proposals",
                proposals=proposals, accepted=count,
            )
    return np.vstack(accepted)[:S]


def sample_preference(spec: PreferenceSpec, S: int, rng: np.random.Generator,
                      min_rate: float | None = None, window: int | None = None,
                      logger=None) -> SampleSet:
    """S i.i.d. draws from the normalized preference density."""
    if S < 1:
        raise InvalidDistribution(f"sample size must be positive, got {S}")
    if spec.kind == "uniform":
        points = sample_uniform_simplex(rng, S, spec.n)
    elif spec.kind == "dirichlet":
        points = rng.dirichlet(np.asarray(spec.alpha), size=S)
        points = points / points.sum(axis=1, keepdims=True)
    else:
        points = _rejection_sample(
            spec, S, rng,
            settings.rejection_min_rate if min_rate is None else min_rate,
            settings.rejection_window if window is None else window,
            logger,
        )
    return SampleSet(points)


def evaluation_sample(spec: PreferenceSpec, S: int, seed: int,
                      chunk_size: int | None = None, logger=None) -> SampleSet:
    """Held-out sample for scoring designs.

    Drawn from the evaluation stream, or, with chunk_size, as independent
    chunks from the chunk streams so that chunks can be drawn in any order.
    """
    if chunk_size is None:
        return sample_preference(spec, S, stream_rng(seed, STREAM_EVAL), logger=logger)
    sizes = [min(chunk_size, S - lo) for lo in range(0, S, chunk_size)]
    parts = [sample_preference(spec, size, rng, logger=logger).points
             for size, rng in zip(sizes, chunk_rngs(seed, len(sizes)))]
    return SampleSet(np.vstack(parts))


def _design_sample(spec: PreferenceSpec, S: int, opts: DesignOptions,
                   sample: SampleSet | None, logger=None) -> SampleSet:
    if sample is not None:
        return sample
    return sample_preference(spec, S, stream_rng(opts.seed, STREAM_SAMPLE), logger=logger)


def design_sampling(spec: PreferenceSpec, K: int, S: int | None = None,
                    method: Literal["kmeanspp", "dca"] = "kmeanspp",
                    opts: DesignOptions | None = None, sample: SampleSet | None = None,
                    logger=None) -> DesignResult:
    """Draw S points, weight each 1/S, and run a discrete designer on them."""
    opts = opts or DesignOptions()
    S = settings.sample_size if S is None else S
    sample = _design_sample(spec, S, opts, sample, logger)
    pref = sample.to_preference()
    if method == "kmeanspp":
        result = design_kmeanspp(pref, K, opts, logger=logger)
    elif method == "dca":
        result = design_dca(pref, K, opts, logger=logger)
    else:
        raise InvalidDistribution(f"unknown design method {method!r}")
    return DesignResult(
        codebooks=result.codebooks,
        assignment=result.assignment,
        objective=result.objective,
        iterations=result.iterations,
        trace=result.trace,
        method=f"sampling_{method}",
        diagnostics={**result.diagnostics, "sample_size": sample.size},
    )


def design_continuous_saa(spec: PreferenceSpec, K: int, S_int: int | None = None,
                          opts: DesignOptions | None = None, sample: SampleSet | None = None,
                          logger=None) -> DesignResult:
    """Iterative continuous design with every integral replaced by an average
    over one fixed sample. Stops when no center coordinate moves by more than
    opts.epsilon."""
    opts = opts or DesignOptions()
    S_int = settings.sample_size if S_int is None else S_int
    sample = _design_sample(spec, S_int, opts, sample, logger)
    weights = sample.weights
    run, restart = cluster_kmeanspp(sample.points, weights, K, opts,
                                    center_tol=opts.epsilon, logger=logger)
    residual = fixed_point_residual(sample.points, weights, run.centers, run.owner)
    return DesignResult(
        codebooks=CodebookSet(run.centers),
        assignment=PartitionAssignment(run.owner, K),
        objective=run.objective,
        iterations=run.iterations,
        trace=tuple(run.trace),
        method="saa",
        diagnostics={"restart": restart, "sample_size": sample.size,
                     "fixed_point_residual": residual, "converged": run.converged},
    )


def evaluate_expected_bits(codebooks: CodebookSet, sample: SampleSet, L: int) -> float:
    """L·mean(H(p) + min_k D(p||q_k)) over the sample points."""
    divs = kl_matrix(sample.points, codebooks).min(axis=1)
    if np.any(np.isinf(divs)):
        return math.inf
    return float(L * np.mean(entropies(sample.points) + divs))

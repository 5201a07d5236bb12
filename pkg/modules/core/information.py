"""Information-theoretic primitives in bits.

Conventions: 0·log 0 = 0, and p_n > 0 with q_n = 0 yields +inf rather than
an error so that minima over codebooks stay well defined.
"""
import math

import numpy as np
from scipy.special import entr, rel_entr

from modules.error_handler.errors import AllInfinite, DimensionMismatch
from .types import Codebook, CodebookSet, DiscretePreference, PartitionAssignment, Spv

__all__ = [
    "LN2",
    "entropy",
    "entropies",
    "kl_divergence",
    "kl_matrix",
    "code_cost",
    "best_codebook",
    "assign",
    "expected_cost",
    "clustering_objective",
    "kraft_check",
]

LN2 = math.log(2.0)
KRAFT_TOL = 1e-9

# rel_entr broadcasts J x K x N; keep the temporary below this many cells
_CHUNK_CELLS = 4_000_000


def _vector(x) -> np.ndarray:
    if isinstance(x, Spv):
        return x.probs
    if isinstance(x, Codebook):
        return x.q
    return np.asarray(x, dtype=float)


def _matrix(x) -> np.ndarray:
    if isinstance(x, CodebookSet):
        return x.matrix
    arr = np.asarray(x, dtype=float)
    return arr[None, :] if arr.ndim == 1 else arr


def entropy(p) -> float:
    """H(p) in bits/symbol."""
    return float(entr(_vector(p)).sum() / LN2)


def entropies(spvs) -> np.ndarray:
    """Row-wise entropies of a (J, N) matrix, in bits."""
    return entr(_matrix(spvs)).sum(axis=1) / LN2


def kl_divergence(p, q) -> float:
    """D(p||q) in bits; +inf when p puts mass where q has none."""
    p, q = _vector(p), _vector(q)
    if p.shape != q.shape:
        raise DimensionMismatch(f"SPV has N={p.shape[0]}, codebook has N={q.shape[0]}")
    return float(rel_entr(p, q).sum() / LN2)


def kl_matrix(spvs, codebooks) -> np.ndarray:
    """D(p_j||q_k) for every row pair, shape (J, K), in bits."""
    p, q = _matrix(spvs), _matrix(codebooks)
    if p.shape[1] != q.shape[1]:
        raise DimensionMismatch(f"SPVs have N={p.shape[1]}, codebooks have N={q.shape[1]}")
    j, k, n = p.shape[0], q.shape[0], p.shape[1]
    step = max(1, _CHUNK_CELLS // max(1, k * n))
    out = np.empty((j, k))
    for lo in range(0, j, step):
        block = p[lo:lo + step, None, :]
        out[lo:lo + step] = rel_entr(block, q[None, :, :]).sum(axis=2)
    return out / LN2


def code_cost(p, q, L: int) -> float:
    """L·Σ p_n(-log2 q_n) = L·(H(p) + D(p||q)) bits."""
    p, q = _vector(p), _vector(q)
    if p.shape != q.shape:
        raise DimensionMismatch(f"SPV has N={p.shape[0]}, codebook has N={q.shape[0]}")
    used = p > 0
    if np.any(q[used] <= 0):
        return math.inf
    return float(L * -(p[used] * np.log2(q[used])).sum())


def best_codebook(p, codebooks) -> tuple[int, float]:
    """Lowest index minimizing D(p||q_k), with that minimum."""
    divs = kl_matrix(_vector(p), codebooks)[0]
    k = int(np.argmin(divs))
    if math.isinf(divs[k]):
        raise AllInfinite("no codebook can encode this SPV")
    return k, float(divs[k])


def assign(spvs, codebooks, allow_infinite: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Argmin-KL owner per row (ties to the lowest index) and the minima."""
    divs = kl_matrix(spvs, codebooks)
    owner = np.argmin(divs, axis=1)
    mins = divs[np.arange(divs.shape[0]), owner]
    if not allow_infinite and np.any(np.isinf(mins)):
        bad = int(np.flatnonzero(np.isinf(mins))[0])
        raise AllInfinite(f"item {bad} is not encodable by any codebook", item=bad)
    return owner, mins


def clustering_objective(spvs, weights, codebooks, owner=None) -> float:
    """Σ_j w_j D(p_j||q_owner(j)); argmin owners when none are given."""
    weights = np.asarray(weights, dtype=float)
    if owner is None:
        _, mins = assign(spvs, codebooks, allow_infinite=True)
    else:
        divs = kl_matrix(spvs, codebooks)
        mins = divs[np.arange(divs.shape[0]), np.asarray(owner)]
    used = weights > 0
    return float(np.dot(weights[used], mins[used]))


def expected_cost(pref: DiscretePreference, codebooks: CodebookSet, L: int
                  ) -> tuple[float, PartitionAssignment]:
    """L·Σ_j f_j (H(p_j) + min_k D(p_j||q_k)) and the argmin partition.

    Items never requested (f_j = 0) are assigned but need not be encodable.
    """
    owner, mins = assign(pref.spvs, codebooks, allow_infinite=True)
    used = pref.probs > 0
    if np.any(np.isinf(mins[used])):
        bad = int(np.flatnonzero(used & np.isinf(mins))[0])
        raise AllInfinite(f"item {bad} is not encodable by any codebook", item=bad)
    terms = entropies(pref.spvs[used]) + mins[used]
    bits = L * float(np.dot(pref.probs[used], terms))
    return bits, PartitionAssignment(owner, codebooks.k)


def kraft_check(q) -> bool:
    return bool(_vector(q).sum() <= 1.0 + KRAFT_TOL)

"""Per-feature log-likelihood of a cluster configuration on a correlation matrix.

A configuration assigns each of the N objects (time periods) a cluster label.
Its score is the sum over non-singleton clusters of

    0.5 * [ log(n_s / c_s) + (n_s - 1) * log((n_s^2 - n_s) / (n_s^2 - c_s)) ]

where n_s is the cluster size and c_s the sum of all pairwise correlations
inside the cluster (diagonal included). Uncorrelated or anti-correlated
clusters contribute exactly 0, so the all-singleton configuration scores 0
and the optimizer maximizes this value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Relative clamp that keeps the second log finite as a cluster approaches
# perfect internal correlation (c_s -> n_s^2).
PERFECT_CORR_CLAMP = 1e-9


def canonicalize(labels) -> np.ndarray:
    """Relabel clusters by order of first occurrence so labels form a prefix 1..K.

    Idempotent; removes the label-permutation redundancy of a configuration.
    """
    labels = np.asarray(labels, dtype=np.int64)
    uniq, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(len(uniq), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(uniq))
    return rank[inverse.ravel()] + 1


@dataclass
class ClusterStats:
    """Per-cluster member counts, internal correlation sums and couplings.

    Arrays are indexed by canonical cluster label minus 1.
    """

    n: np.ndarray  # member counts
    c: np.ndarray  # internal correlation sums, diagonal included
    g: np.ndarray  # intra-cluster coupling, in [0, 1)

    @property
    def k(self) -> int:
        return len(self.n)


def coupling(n, c):
    """Maximum-likelihood intra-cluster coupling g_s = sqrt((c-n)/(n^2-n)).

    Total after clamping: 0 for n <= 1 or c <= n, and c capped just below n^2
    so the result stays strictly below 1. Accepts scalars or arrays.
    """
    n = np.asarray(n, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    cc = np.minimum(c, n * n * (1.0 - PERFECT_CORR_CLAMP))
    denom = np.where(n > 1, n * n - n, 1.0)
    ratio = np.clip((cc - n) / denom, 0.0, None)
    g = np.where(n > 1, np.sqrt(ratio), 0.0)
    return float(g) if g.ndim == 0 else g


def cluster_stats(C, labels) -> ClusterStats:
    """Member counts and internal correlation sums per canonical cluster.

    c_s includes the diagonal, so c_s = n_s + 2 * sum_{i<j in s} C_ij when
    the diagonal of C is 1.
    """
    C = np.asarray(C, dtype=np.float64)
    labels = canonicalize(labels)
    n_obj = len(labels)
    if C.shape != (n_obj, n_obj):
        raise ValueError(
            f"correlation matrix is {C.shape}, configuration has {n_obj} objects"
        )
    zero = labels - 1
    k = int(zero.max()) + 1
    n = np.bincount(zero, minlength=k).astype(np.float64)
    # within-cluster row sums via a stable grouping of columns
    order = np.argsort(zero, kind="stable")
    starts = np.zeros(k, dtype=np.int64)
    starts[1:] = np.cumsum(n.astype(np.int64))[:-1]
    grouped = np.add.reduceat(C[:, order], starts, axis=1)  # (N, K)
    t = grouped[np.arange(n_obj), zero]
    c = np.bincount(zero, weights=t, minlength=k)
    return ClusterStats(n=n, c=c, g=coupling(n, c))


def _contributions(n, c) -> np.ndarray:
    """Per-cluster likelihood terms with the clamping conventions applied."""
    n = np.asarray(n, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    active = (n > 1) & (c > n)
    ns = np.where(active, n, 2.0)
    cs = np.where(active, np.minimum(c, n * n * (1.0 - PERFECT_CORR_CLAMP)), 3.0)
    n2 = ns * ns
    term = 0.5 * (np.log(ns / cs) + (ns - 1.0) * np.log((n2 - ns) / (n2 - cs)))
    return np.where(active, term, 0.0)


def log_likelihood_from_stats(n, c) -> float:
    """Configuration log-likelihood from precomputed per-cluster (n_s, c_s)."""
    return float(np.sum(_contributions(n, c)))


def log_likelihood(C, labels) -> float:
    """Log-likelihood of a configuration; higher means more structure.

    Canonicalizes first, so the result is bit-identical under any relabeling
    of the clusters.
    """
    stats = cluster_stats(C, labels)
    return log_likelihood_from_stats(stats.n, stats.c)


def move_object(C, labels, stats: ClusterStats, index: int, new_label: int):
    """Incrementally update stats for moving one object to another cluster.

    `labels` must be canonical and `stats` consistent with them. `new_label`
    may be k+1 to split the object into a fresh singleton. Returns
    (labels, stats) without recanonicalizing; vacated clusters keep n = 0.
    """
    C = np.asarray(C, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64).copy()
    old = int(labels[index])
    new = int(new_label)
    k = stats.k
    if not 1 <= new <= k + 1:
        raise ValueError(f"new label {new} outside 1..{k + 1}")
    n = stats.n.copy()
    c = stats.c.copy()
    if new > k:
        n = np.append(n, 0.0)
        c = np.append(c, 0.0)
    if new == old:
        return labels, ClusterStats(n=n, c=c, g=coupling(n, c))
    row = C[index]
    old_members = labels == old
    old_members[index] = False
    n[old - 1] -= 1.0
    c[old - 1] -= 2.0 * float(row[old_members].sum()) + float(C[index, index])
    new_members = labels == new
    n[new - 1] += 1.0
    c[new - 1] += 2.0 * float(row[new_members].sum()) + float(C[index, index])
    labels[index] = new
    return labels, ClusterStats(n=n, c=c, g=coupling(n, c))

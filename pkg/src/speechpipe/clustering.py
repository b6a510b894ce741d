"""Numerical clustering of speaker embeddings.

PCA, centroid-linkage agglomerative clustering under a cosine-distance
threshold, k-means with silhouette-based speaker-count estimation,
diagonal-covariance Gaussian mixtures fit by EM with AIC/BIC model
selection, and temporal label smoothing.

All stochastic routines take explicit seeds; there is no hidden RNG state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

VARIANCE_FLOOR = 1e-6


# ---------------------------------------------------------------------------
# Distances

def cosine_distance_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise cosine distances between rows of `a` and rows of `b`.

    Zero-norm rows are treated as equidistant (distance 1) from everything.
    """
    norms_a = np.linalg.norm(a, axis=1)
    norms_b = np.linalg.norm(b, axis=1)
    safe_a = np.where(norms_a > 0, norms_a, 1.0)
    safe_b = np.where(norms_b > 0, norms_b, 1.0)
    sim = (a / safe_a[:, None]) @ (b / safe_b[:, None]).T
    sim[norms_a == 0, :] = 0.0
    sim[:, norms_b == 0] = 0.0
    return 1.0 - sim


# ---------------------------------------------------------------------------
# PCA

@dataclass
class PcaBasis:
    mean: np.ndarray
    components: np.ndarray       # (n_components, D), orthonormal rows
    eigenvalues: np.ndarray      # variance captured per component, descending
    total_variance: float

    @property
    def explained_variance_ratio(self) -> np.ndarray:
        if self.total_variance <= 0:
            return np.zeros_like(self.eigenvalues)
        return self.eigenvalues / self.total_variance


def pca_fit(x: np.ndarray, components: int) -> PcaBasis:
    """Principal directions of the sample covariance, descending eigenvalue order.

    Sign convention: each direction's largest-magnitude coordinate is positive,
    so the basis is deterministic.
    """
    x = np.asarray(x, dtype=np.float64)
    n, d = x.shape
    if n < 2:
        raise ParameterError("pca_fit needs at least 2 samples")
    if not (1 <= components <= min(n, d)):
        raise ParameterError(
            f"components must be in [1, min(N, D)] = [1, {min(n, d)}], got {components}"
        )
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (n - 1)
    eigenvalues, eigenvectors = np.linalg.eigh(cov)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = np.maximum(eigenvalues[order], 0.0)
    directions = eigenvectors[:, order].T[:components].copy()
    for row in directions:
        pivot = np.argmax(np.abs(row))
        if row[pivot] < 0:
            row *= -1.0
    return PcaBasis(mean, directions, eigenvalues[:components], float(eigenvalues.sum()))


def pca_transform(basis: PcaBasis, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[1] != basis.mean.shape[0]:
        raise ParameterError(
            f"dimension mismatch: basis is {basis.mean.shape[0]}-d, data is {x.shape[1]}-d"
        )
    return (x - basis.mean) @ basis.components.T


def pca_inverse_transform(basis: PcaBasis, z: np.ndarray) -> np.ndarray:
    return np.asarray(z, dtype=np.float64) @ basis.components + basis.mean


# ---------------------------------------------------------------------------
# Cluster result container

@dataclass
class ClusterResult:
    labels: np.ndarray
    k: int
    centroids: np.ndarray
    method: str
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "k": self.k,
            "labels": [int(v) for v in self.labels],
            "centroids": [[float(v) for v in row] for row in self.centroids],
            "diagnostics": self.diagnostics,
        }


def _relabel_by_first_appearance(labels: np.ndarray) -> np.ndarray:
    mapping: dict[int, int] = {}
    out = np.empty_like(labels)
    for i, lab in enumerate(labels):
        if lab not in mapping:
            mapping[lab] = len(mapping)
        out[i] = mapping[lab]
    return out


def _centroids_for(x: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    return np.stack([x[labels == j].mean(axis=0) for j in range(k)])


# ---------------------------------------------------------------------------
# Agglomerative clustering, centroid linkage

def ahc_centroid(vectors: np.ndarray, tau: float, min_cluster_size: int = 1) -> ClusterResult:
    """Merge the closest centroid pair (cosine distance) while below `tau`.

    After merging terminates, clusters smaller than `min_cluster_size` are
    dissolved and their members reassigned to the nearest surviving centroid;
    if nothing survives, the largest cluster is kept. Labels are renumbered
    by first appearance in time order.
    """
    if tau <= 0:
        raise ParameterError(f"tau must be positive, got {tau}")
    x = np.asarray(vectors, dtype=np.float64)
    n = len(x)
    if n == 0:
        return ClusterResult(np.empty(0, dtype=int), 0, np.empty((0, 0)), "ahc-centroid")

    members: list[list[int] | None] = [[i] for i in range(n)]
    centroids = x.copy()
    active = list(range(n))
    dist = cosine_distance_matrix(centroids, centroids)
    np.fill_diagonal(dist, np.inf)
    merge_count = 0

    while len(active) > 1:
        best = (np.inf, -1, -1)
        for ai in range(len(active)):
            for bi in range(ai + 1, len(active)):
                a, b = active[ai], active[bi]
                if dist[a, b] < best[0]:
                    best = (dist[a, b], a, b)
        d, a, b = best
        if d >= tau:
            break
        members[a] = members[a] + members[b]  # type: ignore[operator]
        members[b] = None
        centroids[a] = x[members[a]].mean(axis=0)
        active.remove(b)
        merge_count += 1
        row = cosine_distance_matrix(centroids[a : a + 1], centroids[active]).ravel()
        for j, other in enumerate(active):
            dist[a, other] = dist[other, a] = row[j] if other != a else np.inf

    clusters = [members[a] for a in active]
    sizes = [len(c) for c in clusters]
    survivors = [c for c in clusters if len(c) >= min_cluster_size]
    dissolved = 0
    if not survivors:
        largest = max(range(len(clusters)), key=lambda i: (sizes[i], -min(clusters[i])))
        survivors = [clusters[largest]]
    if len(survivors) < len(clusters):
        surviving_centroids = np.stack([x[c].mean(axis=0) for c in survivors])
        strays = sorted(set(range(n)) - {i for c in survivors for i in c})
        dissolved = len(strays)
        if strays:
            d_stray = cosine_distance_matrix(x[strays], surviving_centroids)
            nearest = np.argmin(d_stray, axis=1)
            for idx, target in zip(strays, nearest):
                survivors[target].append(idx)

    labels = np.empty(n, dtype=int)
    for j, cluster in enumerate(survivors):
        labels[cluster] = j
    labels = _relabel_by_first_appearance(labels)
    k = len(survivors)
    result_centroids = _centroids_for(x, labels, k)
    return ClusterResult(
        labels,
        k,
        result_centroids,
        "ahc-centroid",
        {"merges": merge_count, "dissolved_points": dissolved, "tau": tau},
    )


# ---------------------------------------------------------------------------
# k-means

def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(x)
    centers = np.empty((k, x.shape[1]))
    first = int(rng.integers(n))
    centers[0] = x[first]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(n))  # duplicates everywhere: any point works
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[j] = x[idx]
        d2 = np.minimum(d2, np.sum((x - centers[j]) ** 2, axis=1))
    return centers


def kmeans(x: np.ndarray, k: int, seed: int, max_iter: int = 300, tol: float = 1e-6) -> ClusterResult:
    """Lloyd's algorithm with k-means++ initialization; deterministic given `seed`."""
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    if not (1 <= k <= n):
        raise ParameterError(f"k must be in [1, N] = [1, {n}], got {k}")
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_init(x, k, rng)
    labels = np.zeros(n, dtype=int)
    inertia_trace: list[float] = []
    for _ in range(max_iter):
        d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = np.argmin(d2, axis=1)
        costs = d2[np.arange(n), labels]
        inertia_trace.append(float(costs.sum()))
        new_centers = centers.copy()
        empty = []
        for j in range(k):
            mask = labels == j
            if mask.any():
                new_centers[j] = x[mask].mean(axis=0)
            else:
                empty.append(j)
        if empty:
            # Re-seat empty clusters on the worst-fit points.
            order = np.argsort(-costs)
            for slot, j in enumerate(empty):
                new_centers[j] = x[order[slot]]
        shift = float(np.max(np.linalg.norm(new_centers - centers, axis=1)))
        centers = new_centers
        if shift < tol:
            break
    d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(n), labels].sum())
    occupied = np.unique(labels)
    if len(occupied) < k:
        # Degenerate inputs (mass duplicates) can strand a cluster; compact
        # so every reported cluster is non-empty.
        remap = {int(old): new for new, old in enumerate(occupied)}
        labels = np.array([remap[int(lab)] for lab in labels])
        k = len(occupied)
    centers = np.stack([x[labels == j].mean(axis=0) for j in range(k)])
    return ClusterResult(
        labels,
        k,
        centers,
        "kmeans",
        {"inertia": inertia, "iterations": len(inertia_trace), "inertia_trace": inertia_trace, "seed": seed},
    )


# ---------------------------------------------------------------------------
# Silhouette

def silhouette_score(x: np.ndarray, labels: np.ndarray) -> float:
    """Mean cosine-distance silhouette; singleton points contribute 0."""
    x = np.asarray(x, dtype=np.float64)
    labels = np.asarray(labels)
    unique = np.unique(labels)
    if len(unique) < 2:
        raise ParameterError("silhouette needs at least 2 clusters")
    dist = cosine_distance_matrix(x, x)
    n = len(x)
    scores = np.zeros(n)
    masks = {lab: labels == lab for lab in unique}
    for i in range(n):
        own = masks[labels[i]]
        own_size = own.sum()
        if own_size <= 1:
            continue  # singleton contributes 0
        a = dist[i, own].sum() / (own_size - 1)
        b = min(dist[i, masks[lab]].mean() for lab in unique if lab != labels[i])
        denom = max(a, b)
        scores[i] = 0.0 if denom == 0 else (b - a) / denom
    return float(scores.mean())


def estimate_k_silhouette(x: np.ndarray, k_min: int, k_max: int, seed: int) -> int:
    """Sweep k over [k_min, k_max] with k-means; argmax silhouette, ties to smaller k."""
    n = len(x)
    if not (2 <= k_min <= k_max <= n - 1):
        raise ParameterError(
            f"need 2 <= k_min <= k_max <= N-1 = {n - 1}, got [{k_min}, {k_max}]"
        )
    best_k = k_min
    best_score = -np.inf
    for k in range(k_min, k_max + 1):
        labels = kmeans(x, k, seed).labels
        if len(np.unique(labels)) < 2:
            continue
        score = silhouette_score(x, labels)
        if score > best_score:
            best_score = score
            best_k = k
    return best_k


# ---------------------------------------------------------------------------
# Diagonal-covariance GMM

@dataclass
class GmmModel:
    weights: np.ndarray      # (k,), sums to 1
    means: np.ndarray        # (k, D)
    variances: np.ndarray    # (k, D), diagonal, floored
    log_likelihood: float
    param_count: int
    converged: bool = True
    iterations: int = 0
    ll_trace: list[float] = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.weights)

    def aic(self) -> float:
        return 2.0 * self.param_count - 2.0 * self.log_likelihood

    def bic(self, n: int) -> float:
        return self.param_count * math.log(n) - 2.0 * self.log_likelihood

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.argmax(self._log_joint(np.asarray(x, dtype=np.float64)), axis=1)

    def _log_joint(self, x: np.ndarray) -> np.ndarray:
        d = x.shape[1]
        out = np.empty((len(x), self.k))
        for j in range(self.k):
            var = self.variances[j]
            diff2 = (x - self.means[j]) ** 2 / var
            out[:, j] = (
                math.log(self.weights[j])
                - 0.5 * (d * math.log(2 * math.pi) + np.log(var).sum() + diff2.sum(axis=1))
            )
        return out

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "weights": [float(v) for v in self.weights],
            "means": [[float(v) for v in row] for row in self.means],
            "variances": [[float(v) for v in row] for row in self.variances],
            "log_likelihood": self.log_likelihood,
            "param_count": self.param_count,
            "converged": self.converged,
            "iterations": self.iterations,
        }


def _gmm_em_once(x: np.ndarray, k: int, seed: int, max_iter: int, tol: float) -> GmmModel:
    n, d = x.shape
    init = kmeans(x, k, seed)
    weights = np.array([(init.labels == j).mean() for j in range(k)])
    weights = np.maximum(weights, 1.0 / (10.0 * n))
    weights /= weights.sum()
    means = init.centroids.copy()
    global_var = np.maximum(x.var(axis=0), VARIANCE_FLOOR)
    variances = np.empty((k, d))
    for j in range(k):
        mask = init.labels == j
        variances[j] = np.maximum(x[mask].var(axis=0), VARIANCE_FLOOR) if mask.sum() > 1 else global_var

    model = GmmModel(weights, means, variances, -np.inf, k * 2 * d + (k - 1))
    trace: list[float] = []
    previous = -np.inf
    converged = False
    for iteration in range(max_iter):
        log_joint = model._log_joint(x)
        log_norm = np.logaddexp.reduce(log_joint, axis=1)
        ll = float(log_norm.sum())
        trace.append(ll)
        resp = np.exp(log_joint - log_norm[:, None])

        nk = resp.sum(axis=0)
        nk = np.maximum(nk, 1e-12)
        model.weights = nk / n
        model.means = (resp.T @ x) / nk[:, None]
        for j in range(k):
            diff2 = (x - model.means[j]) ** 2
            model.variances[j] = np.maximum((resp[:, j] @ diff2) / nk[j], VARIANCE_FLOOR)

        if ll - previous < tol and iteration > 0:
            converged = True
            previous = ll
            break
        previous = ll

    log_joint = model._log_joint(x)
    final_ll = float(np.logaddexp.reduce(log_joint, axis=1).sum())
    trace.append(final_ll)
    model.log_likelihood = final_ll
    model.converged = converged
    model.iterations = len(trace) - 1
    model.ll_trace = trace
    return model


def gmm_fit(x: np.ndarray, k: int, seed: int, restarts: int = 1,
            max_iter: int = 200, tol: float = 1e-6) -> GmmModel:
    """Diagonal-covariance EM initialized from k-means; best of `restarts` by log-likelihood.

    The winner is selected by (log_likelihood, -restart_seed), so the outcome
    is independent of any parallel execution order of the restarts.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if not (1 <= k <= n):
        raise ParameterError(f"k must be in [1, N] = [1, {n}], got {k}")
    if restarts < 1:
        raise ParameterError("restarts must be >= 1")
    best: GmmModel | None = None
    best_key: tuple[float, int] | None = None
    for r in range(restarts):
        model = _gmm_em_once(x, k, seed + r, max_iter, tol)
        key = (model.log_likelihood, -(seed + r))
        if best_key is None or key > best_key:
            best, best_key = model, key
    assert best is not None
    return best


def select_k_gmm(
    x: np.ndarray, k_range: tuple[int, int], criterion: str = "AIC",
    seed: int = 0, restarts: int = 1,
) -> tuple[int, GmmModel]:
    """Fit over k_range and return the argmin-criterion model, ties toward smaller k."""
    criterion = criterion.upper()
    if criterion not in ("AIC", "BIC"):
        raise ParameterError(f"criterion must be AIC or BIC, got {criterion!r}")
    k_min, k_max = k_range
    x = np.asarray(x, dtype=np.float64)
    if not (1 <= k_min <= k_max <= len(x)):
        raise ParameterError(f"invalid k_range {k_range} for N={len(x)}")
    best_k, best_model, best_value = k_min, None, np.inf
    for k in range(k_min, k_max + 1):
        model = gmm_fit(x, k, seed, restarts)
        value = model.aic() if criterion == "AIC" else model.bic(len(x))
        if value < best_value:
            best_k, best_model, best_value = k, model, value
    assert best_model is not None
    return best_k, best_model


def overcluster_smooth(x: np.ndarray, seed: int, k: int = 25, window: int = 5) -> np.ndarray:
    """Over-clustering preset: fixed-k diagonal GMM, then temporal smoothing.

    Deliberately fits more components than plausible speakers and repairs the
    label sequence with a majority-vote pass.
    """
    x = np.asarray(x, dtype=np.float64)
    model = gmm_fit(x, min(k, len(x)), seed)
    labels = model.predict(x)
    return np.asarray(smooth_labels_temporal(list(labels), window))


# ---------------------------------------------------------------------------
# Temporal smoothing

def smooth_labels_temporal(labels, window: int) -> list:
    """Sequential sliding majority vote over a time-ordered label sequence.

    Already-smoothed values feed later votes, so an isolated flicker inside a
    stable run is absorbed. Ties keep the position's current label; edge
    positions use truncated windows.
    """
    if window < 1 or window % 2 == 0:
        raise ParameterError(f"window must be odd and >= 1, got {window}")
    out = list(labels)
    if window == 1:
        return out
    half = window // 2
    for i in range(len(out)):
        lo = max(0, i - half)
        hi = min(len(out), i + half + 1)
        votes: dict = {}
        for value in out[lo:hi]:
            votes[value] = votes.get(value, 0) + 1
        best_count = max(votes.values())
        winners = [value for value, count in votes.items() if count == best_count]
        if out[i] not in winners:
            # Deterministic pick: first winner in window order.
            for value in out[lo:hi]:
                if value in winners:
                    out[i] = value
                    break
    return out

"""Point orderings: greedy nearest-neighbour paths, pairings, smoothness.

Points are the *rows* of a 2-D float array ``(m, n)`` (m points of
dimension n).  The distance used throughout is the squared Euclidean
distance unless a Python callable is supplied as ``metric``.

Nearest-neighbour search never builds the full ``m x m`` matrix when
``m > dense_cap``.  In that regime each point carries a short list of
candidate neighbours (found with blocked matrix products) together with a
radius below which the list is known to be complete; a step is resolved
from the list when the best unvisited candidate lies strictly inside that
radius, and by an exact scan over the unvisited points otherwise.  Every
decision is made on distances computed by the same exact kernel, so the
result is bit-identical to the dense path.

Ties are broken by lowest index.  Indices are 0-based.
"""
import math

import numpy as np
from numba import njit

DENSE_CAP = 4096
N_CANDIDATES = 32


class ParityError(ValueError):
    pass


@njit(cache=True, inline="always")
def _sqdist(X, i, j):
    s = 0.0
    for t in range(X.shape[1]):
        diff = X[i, t] - X[j, t]
        s += diff * diff
    return s


@njit(cache=True, inline="always")
def _sqdist_bounded(X, i, j, bound):
    # Same summation order as _sqdist; bails out once the partial sum
    # exceeds bound, returning that partial sum (still > bound).
    s = 0.0
    n = X.shape[1]
    t = 0
    while t < n:
        stop = min(t + 8, n)
        while t < stop:
            diff = X[i, t] - X[j, t]
            s += diff * diff
            t += 1
        if s > bound:
            return s
    return s


@njit(cache=True, nogil=True)
def _pairwise_exact(X):
    m = X.shape[0]
    W = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            d = _sqdist(X, i, j)
            W[i, j] = d
            W[j, i] = d
    return W


@njit(cache=True, inline="always")
def _better(d, j, bd, bj):
    return d < bd or (d == bd and j < bj)


@njit(cache=True, inline="always")
def _choose(b1d, b1j, b2d, b2j, u, epsilon, randomized):
    if not randomized or b2j < 0:
        return b1j
    # p(nearest) = e^{-d1/eps} / (e^{-d1/eps} + e^{-d2/eps})
    p1 = 1.0 / (1.0 + math.exp(-(b2d - b1d) / epsilon))
    if u < p1:
        return b1j
    return b2j


@njit(cache=True, nogil=True)
def _walk_dense(W, start, uniforms, epsilon, randomized):
    m = W.shape[0]
    order = np.empty(m, dtype=np.int64)
    visited = np.zeros(m, dtype=np.bool_)
    order[0] = start
    visited[start] = True
    for step in range(1, m):
        cur = order[step - 1]
        b1d = np.inf
        b1j = -1
        b2d = np.inf
        b2j = -1
        for j in range(m):
            if visited[j]:
                continue
            d = W[cur, j]
            if b1j < 0 or _better(d, j, b1d, b1j):
                b2d, b2j = b1d, b1j
                b1d, b1j = d, j
            elif b2j < 0 or _better(d, j, b2d, b2j):
                b2d, b2j = d, j
        nxt = _choose(b1d, b1j, b2d, b2j, uniforms[step], epsilon, randomized)
        order[step] = nxt
        visited[nxt] = True
    return order


@njit(cache=True, nogil=True)
def _smallest_k(D, out):
    # per row: indices of the k smallest entries into out, returns the k-th value
    b, m = D.shape
    k = out.shape[1]
    kth = np.empty(b)
    vals = np.empty(k)
    for i in range(b):
        for t in range(k):
            vals[t] = np.inf
            out[i, t] = -1
        worst = np.inf
        for j in range(m):
            v = D[i, j]
            if v < worst:
                t = k - 1
                while t > 0 and vals[t - 1] > v:
                    vals[t] = vals[t - 1]
                    out[i, t] = out[i, t - 1]
                    t -= 1
                vals[t] = v
                out[i, t] = j
                worst = vals[k - 1]
        kth[i] = vals[k - 1]
    return kth


@njit(cache=True, inline="always")
def _remove(remaining, where, Zrem, nrem, j):
    # swap-remove j from the unvisited set; Zrem mirrors remaining
    pos = where[j]
    last = remaining[nrem - 1]
    remaining[pos] = last
    where[last] = pos
    for t in range(Zrem.shape[1]):
        Zrem[pos, t] = Zrem[nrem - 1, t]
    return nrem - 1


@njit(cache=True, nogil=True)
def _walk_stream(X, start, cand, radius, Z, slack, uniforms, epsilon, randomized):
    m = X.shape[0]
    k = cand.shape[1]
    r = Z.shape[1]
    order = np.empty(m, dtype=np.int64)
    visited = np.zeros(m, dtype=np.bool_)
    remaining = np.arange(m)
    where = np.arange(m)
    Zrem = Z.copy()
    nrem = m

    order[0] = start
    visited[start] = True
    nrem = _remove(remaining, where, Zrem, nrem, start)

    for step in range(1, m):
        cur = order[step - 1]
        b1d = np.inf
        b1j = -1
        b2d = np.inf
        b2j = -1
        for t in range(k):
            j = cand[cur, t]
            if visited[j]:
                continue
            d = _sqdist(X, cur, j)
            if b1j < 0 or _better(d, j, b1d, b1j):
                b2d, b2j = b1d, b1j
                b1d, b1j = d, j
            elif b2j < 0 or _better(d, j, b2d, b2j):
                b2d, b2j = d, j
        complete = b1j >= 0 and b1d < radius[cur]
        if randomized and nrem > 1:
            complete = complete and b2j >= 0 and b2d < radius[cur]
        if not complete:
            # exact scan seeded with the candidates; projected distances are
            # lower bounds and prune points that cannot enter the top two
            for q in range(nrem):
                bound = b2d if randomized else b1d
                lb = 0.0
                for t in range(r):
                    diff = Zrem[q, t] - Z[cur, t]
                    lb += diff * diff
                if lb > bound + slack[cur]:
                    continue
                j = remaining[q]
                if j == b1j or j == b2j:
                    continue
                d = _sqdist_bounded(X, cur, j, bound)
                if d > bound:
                    continue
                if b1j < 0 or _better(d, j, b1d, b1j):
                    b2d, b2j = b1d, b1j
                    b1d, b1j = d, j
                elif b2j < 0 or _better(d, j, b2d, b2j):
                    b2d, b2j = d, j
        nxt = _choose(b1d, b1j, b2d, b2j, uniforms[step], epsilon, randomized)
        order[step] = nxt
        visited[nxt] = True
        nrem = _remove(remaining, where, Zrem, nrem, nxt)
    return order


@njit(cache=True, nogil=True)
def _pair_scan(W, X, use_matrix, uniforms, forced):
    m = W.shape[0] if use_matrix else X.shape[0]
    order = np.empty(m, dtype=np.int64)
    claimed = np.zeros(m, dtype=np.bool_)
    nfree = m
    for s in range(m // 2):
        if s < forced.shape[0]:
            first = forced[s]
        else:
            r = int(uniforms[s] * nfree)
            if r >= nfree:
                r = nfree - 1
            first = -1
            for j in range(m):
                if not claimed[j]:
                    if r == 0:
                        first = j
                        break
                    r -= 1
        claimed[first] = True
        bd = np.inf
        bj = -1
        for j in range(m):
            if claimed[j]:
                continue
            d = W[first, j] if use_matrix else _sqdist(X, first, j)
            if bj < 0 or _better(d, j, bd, bj):
                bd, bj = d, j
        claimed[bj] = True
        order[2 * s] = first
        order[2 * s + 1] = bj
        nfree -= 2
    return order


def as_points(points):
    """Return points as a C-contiguous float64 ``(m, n)`` array.

    A 1-D input is read as m scalar points.
    """
    X = np.asarray(points, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError(f"expected a non-empty (m, n) point array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("points contain non-finite values")
    return np.ascontiguousarray(X)


def squared_euclidean(u, v):
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape[0]} vs {v.shape[0]}")
    return float(_sqdist(np.stack([u, v]), 0, 1))


def pairwise_distances(points, metric=None):
    """Dense ``m x m`` distance matrix (exact kernel)."""
    X = as_points(points)
    if metric is None:
        return _pairwise_exact(X)
    m = X.shape[0]
    W = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            W[i, j] = W[j, i] = metric(X[i], X[j])
    return W


class NeighborIndex:
    """Candidate-neighbour lists with a per-point completeness radius.

    ``cand[i]`` holds the ``k`` points closest to ``i`` (excluding ``i``)
    and every point outside the list has exact distance ``>= radius[i]``.
    Candidates come from blocked single-precision products on centred data
    (memory ``O(block * m)``); ``radius`` is shrunk by a rigorous bound on
    that rounding error.  ``proj`` holds the leading principal coordinates,
    whose distances lower-bound the true ones and prune exhaustive scans.
    """

    def __init__(self, points, k=N_CANDIDATES, n_proj=8, block_elems=1 << 23):
        X = as_points(points)
        m, n = X.shape
        k = max(1, min(k, m - 1)) if m > 1 else 0
        Xc = X - X.mean(axis=0)
        sq = np.einsum("ij,ij->i", Xc, Xc)
        f32 = np.finfo(np.float32).eps
        approx_slack = 8.0 * (n + 4) * f32 * (sq + sq.max()) + 1e-30
        # rounding allowance for exact / projected distances in float64
        self.slack = 8.0 * (n + 4) * np.finfo(np.float64).eps * (sq + sq.max()) + 1e-300

        cand = np.zeros((m, k), dtype=np.int64)
        radius = np.full(m, np.inf)
        if k and k < m - 1:
            X32 = Xc.astype(np.float32)
            sq32 = np.einsum("ij,ij->i", X32, X32)
            block = max(1, min(m, block_elems // m))
            for s in range(0, m, block):
                e = min(m, s + block)
                D = X32[s:e] @ X32.T
                D *= -2.0
                D += sq32[s:e, None]
                D += sq32[None, :]
                D[np.arange(e - s), np.arange(s, e)] = np.inf
                kth = _smallest_k(D, cand[s:e])
                radius[s:e] = kth - approx_slack[s:e]
        elif k:
            cand[:] = [[j for j in range(m) if j != i] for i in range(m)]

        n_proj = min(n_proj, n)
        cov = Xc.T @ Xc
        _, vecs = np.linalg.eigh(cov)
        self.proj = np.ascontiguousarray(Xc @ vecs[:, ::-1][:, :n_proj])
        self.points = X
        self.cand = cand
        self.radius = radius


def _walk(points, start, uniforms, epsilon, randomized, metric, dense_cap, index):
    X = as_points(points)
    m = X.shape[0]
    if not 0 <= start < m:
        raise IndexError(f"start {start} outside 0..{m - 1}")
    if m == 1:
        return np.zeros(1, dtype=np.int64)
    if metric is not None:
        return _walk_callable(X, start, uniforms, epsilon, randomized, metric)
    if m <= dense_cap and index is None:
        return _walk_dense(_pairwise_exact(X), start, uniforms, epsilon, randomized)
    if index is None:
        index = NeighborIndex(X)
    elif index.points.shape != X.shape:
        raise ValueError("neighbour index was built for a different point set")
    return _walk_stream(X, start, index.cand, index.radius, index.proj, index.slack,
                        uniforms, epsilon, randomized)


def _walk_callable(X, start, uniforms, epsilon, randomized, metric):
    m = X.shape[0]
    unvisited = np.ones(m, dtype=bool)
    order = [start]
    unvisited[start] = False
    for step in range(1, m):
        cur = order[-1]
        idx = np.flatnonzero(unvisited)
        d = np.array([metric(X[cur], X[j]) for j in idx])
        rank = np.lexsort((idx, d))
        b1 = idx[rank[0]]
        nxt = b1
        if randomized and len(idx) > 1:
            b2 = idx[rank[1]]
            p1 = 1.0 / (1.0 + math.exp(-(d[rank[1]] - d[rank[0]]) / epsilon))
            nxt = b1 if uniforms[step] < p1 else b2
        order.append(int(nxt))
        unvisited[nxt] = False
    return np.array(order, dtype=np.int64)


def greedy_path(points, start=0, metric=None, *, dense_cap=DENSE_CAP, index=None):
    """Nearest-neighbour path through ``points`` beginning at ``start``.

    Each step moves to the closest unvisited point (lowest index on ties).
    """
    m = as_points(points).shape[0]
    return _walk(points, start, np.zeros(m), 1.0, False, metric, dense_cap, index)


def randomized_path(points, rng, epsilon=0.1, metric=None, *, dense_cap=DENSE_CAP,
                    index=None):
    """Randomised nearest-neighbour path.

    The first point is uniform.  Each later step goes to the nearest or
    second-nearest unvisited point with probabilities proportional to
    ``exp(-d / epsilon)``, ``d`` being the (squared) distance.  One uniform
    draw is consumed per step, so the result depends only on the seed.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    m = as_points(points).shape[0]
    start = int(rng.integers(m))
    uniforms = rng.random(m)
    return _walk(points, start, uniforms, float(epsilon), True, metric, dense_cap, index)


def pair_points(points, rng=None, metric=None, *, first=None, dense_cap=DENSE_CAP):
    """Group points into consecutive nearest-unclaimed pairs.

    The first member of every pair is a uniformly random unclaimed point
    (or taken from ``first`` while it lasts); the second is its nearest
    unclaimed neighbour.
    """
    X = as_points(points)
    m = X.shape[0]
    if m % 2:
        raise ParityError(f"cannot pair an odd number of points ({m})")
    forced = np.asarray([] if first is None else list(first), dtype=np.int64)
    if forced.size > m // 2:
        raise ValueError("more forced picks than pairs")
    if rng is None:
        rng = np.random.default_rng(0)
    uniforms = rng.random(m // 2)
    if metric is not None or m <= dense_cap:
        W = pairwise_distances(X, metric)
        order = _pair_scan(W, X, True, uniforms, forced)
    else:
        order = _pair_scan(np.zeros((1, 1)), X, False, uniforms, forced)
    if np.unique(order).size != m:
        raise ValueError("forced picks must be distinct and unclaimed")
    return order


def is_permutation(order, m=None):
    order = np.asarray(order)
    m = len(order) if m is None else m
    if order.ndim != 1 or len(order) != m:
        return False
    counts = np.bincount(order.clip(0, m), minlength=m + 1)
    return bool(order.min(initial=0) >= 0 and np.all(counts[:m] == 1))


def total_variation(y):
    y = np.asarray(y, dtype=np.float64)
    if y.size < 1:
        raise ValueError("empty signal")
    return float(np.abs(np.diff(y)).sum())


def path_smoothness(points, order, metric=None):
    """Sum of distances between consecutive points of the ordered path."""
    X = as_points(points)
    order = np.asarray(order, dtype=np.int64)
    if not is_permutation(order, X.shape[0]):
        raise ValueError("order is not a permutation of the points")
    if metric is None:
        diff = X[order[1:]] - X[order[:-1]]
        return float(np.einsum("ij,ij->", diff, diff))
    return float(sum(metric(X[a], X[b]) for a, b in zip(order[:-1], order[1:])))

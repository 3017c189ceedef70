"""Data-adaptive tree plans: per-level permutations of the point cloud.

A plan stores, finest level first, the permutation applied to the level's
approximation coefficients before filtering.  Coarse feature points are
produced by the same lowpass analysis step the transform uses, so the
level lengths of plan and coefficients always agree.
"""
import json
from dataclasses import dataclass, field

import numpy as np

from .filters import analyze_lowpass, as_filter_set
from .ordering import (
    DENSE_CAP,
    NeighborIndex,
    as_points,
    greedy_path,
    is_permutation,
    pair_points,
    path_smoothness,
    randomized_path,
)

PLAN_FORMAT = "gtbwt-plan"
PLAN_VERSION = 1


class PlanError(ValueError):
    pass


@dataclass(eq=False)
class TreePlan:
    filter_name: str
    leaf_count: int
    perms: list
    points: list = field(default=None, repr=False)

    def __post_init__(self):
        self.perms = [np.asarray(p, dtype=np.int64) for p in self.perms]
        if not self.perms:
            raise PlanError("a plan needs at least one level")
        fs = as_filter_set(self.filter_name)
        n = self.leaf_count
        for lvl, p in enumerate(self.perms):
            if not is_permutation(p, n):
                raise PlanError(f"level {lvl}: not a permutation of length {n}")
            n = fs.coeff_length(n)

    @property
    def depth(self):
        return len(self.perms)

    @property
    def lengths(self):
        """Lengths of every level, finest first, including the coarsest."""
        fs = as_filter_set(self.filter_name)
        out = [self.leaf_count]
        for _ in self.perms:
            out.append(fs.coeff_length(out[-1]))
        return out

    def smoothness(self):
        """Path smoothness of each level (needs retained points)."""
        if self.points is None:
            raise PlanError("plan was built without retaining its points")
        return [path_smoothness(c, p) for c, p in zip(self.points, self.perms)]

    def __eq__(self, other):
        if not isinstance(other, TreePlan):
            return NotImplemented
        return (
            self.filter_name == other.filter_name
            and self.leaf_count == other.leaf_count
            and self.depth == other.depth
            and all(np.array_equal(a, b) for a, b in zip(self.perms, other.perms))
        )


def _coarsen(C, perm, fs):
    return np.ascontiguousarray(analyze_lowpass(C[perm].T, fs).T)


def build_generalized_tree(points, fs, metric=None, *, start=0, rng=None,
                           epsilon=None, max_depth=None, min_length=None,
                           keep_points=False, leaf_index=None,
                           dense_cap=DENSE_CAP):
    """Build a plan by ordering each level along a nearest-neighbour path.

    With ``epsilon`` unset every level uses the deterministic greedy path
    (starting at ``start`` on the finest level, and at a point drawn from
    ``rng`` on coarser levels when ``rng`` is given).  With ``epsilon`` set,
    levels use the randomised two-candidate path drawn from ``rng``.

    Levels are added while the current length is at least ``min_length``
    (the filter length by default, 2 for Haar), at least one level is
    always built.
    """
    fs = as_filter_set(fs)
    X = as_points(points)
    N = X.shape[0]
    if N < 2:
        raise PlanError(f"need at least 2 points, got {N}")
    if epsilon is not None and rng is None:
        raise ValueError("the randomised path needs an rng")
    stop = fs.length if min_length is None else min_length
    perms, kept = [], []
    C = X
    while True:
        m = C.shape[0]
        index = leaf_index if (not perms and m > dense_cap) else None
        if epsilon is not None:
            perm = randomized_path(C, rng, epsilon, metric, dense_cap=dense_cap, index=index)
        else:
            s = start if not perms or rng is None else int(rng.integers(m))
            perm = greedy_path(C, s, metric, dense_cap=dense_cap, index=index)
        perms.append(perm)
        if keep_points:
            kept.append(C)
        C = _coarsen(C, perm, fs)
        if C.shape[0] < max(stop, 2):
            break
        if max_depth is not None and len(perms) >= max_depth:
            break
    return TreePlan(fs.name, N, perms, kept if keep_points else None)


def build_binary_tree(points, rng=None, metric=None, *, first=None, keep_points=False):
    """Complete full binary (Haar) tree by nearest-unclaimed pairing.

    ``first`` optionally forces, per level, the sequence of first pair
    members.
    """
    X = as_points(points)
    N = X.shape[0]
    if N < 2 or N & (N - 1):
        raise PlanError(f"binary tree needs a power-of-two point count >= 2, got {N}")
    fs = as_filter_set("db1")
    if rng is None:
        rng = np.random.default_rng(0)
    perms, kept = [], []
    C = X
    lvl = 0
    while C.shape[0] > 1:
        picks = None if first is None or lvl >= len(first) else first[lvl]
        perm = pair_points(C, rng, metric, first=picks)
        perms.append(perm)
        if keep_points:
            kept.append(C)
        C = _coarsen(C, perm, fs)
        lvl += 1
    if keep_points:
        kept.append(C)
    return TreePlan("db1", N, perms, kept if keep_points else None)


def leaf_order(plan):
    """Composite leaf ordering of a Haar plan built from pairings.

    Position ``q`` of the result is the leaf visited ``q``-th when the
    pairs of every level are expanded in order.
    """
    if plan.filter_name != "db1" or plan.lengths[-1] != 1:
        raise PlanError("leaf order is defined for complete Haar plans only")
    orders = level_orders(plan)
    return orders[0]


def level_orders(plan):
    """Composite order of the points of every level (finest first)."""
    order = np.zeros(1, dtype=np.int64)
    out = [order]
    for perm in reversed(plan.perms):
        order = np.stack([perm[2 * order], perm[2 * order + 1]], axis=1).ravel()
        out.append(order)
    return out[::-1]


def save_plan(plan, path):
    doc = {
        "format": PLAN_FORMAT,
        "version": PLAN_VERSION,
        "filter": plan.filter_name,
        "leaf_count": int(plan.leaf_count),
        "levels": [
            {"length": int(len(p)), "perm": (p + 1).tolist()} for p in plan.perms
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, separators=(",", ":"))
        fh.write("\n")


def load_plan(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise PlanError(f"{path}: not a plan file ({exc})") from exc
    if not isinstance(doc, dict) or doc.get("format") != PLAN_FORMAT:
        raise PlanError(f"{path}: not a plan file")
    if doc.get("version") != PLAN_VERSION:
        raise PlanError(f"{path}: unsupported plan version {doc.get('version')!r}")
    try:
        perms = []
        for lvl in doc["levels"]:
            p = np.asarray(lvl["perm"], dtype=np.int64) - 1
            if len(p) != lvl["length"]:
                raise PlanError(f"{path}: level length does not match its permutation")
            perms.append(p)
        return TreePlan(doc["filter"], int(doc["leaf_count"]), perms)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, PlanError):
            raise
        raise PlanError(f"{path}: malformed plan ({exc})") from exc

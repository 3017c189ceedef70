"""Generalized tree-based wavelet transform and its m-term machinery.

Coefficient bands are numbered the way the tree levels are: band 0 is
the coarsest approximation and bands ``1 .. depth`` are the details from
coarsest to finest.  Signals may carry leading batch axes; the transform
acts on the last axis.
"""
import csv
from dataclasses import dataclass

import numpy as np

from .filters import analyze_level, as_filter_set, synthesize_level
from .tree import TreePlan


class PlanMismatchError(ValueError):
    pass


@dataclass(eq=False)
class Coefficients:
    approx: np.ndarray
    details: list
    filter_name: str
    leaf_count: int

    @property
    def bands(self):
        return [self.approx] + list(self.details)

    def flatten(self):
        """All coefficients as one vector, coarse bands first."""
        return np.concatenate(self.bands, axis=-1)

    @classmethod
    def from_flat(cls, flat, like):
        sizes = np.cumsum([b.shape[-1] for b in like.bands])[:-1]
        parts = np.split(np.asarray(flat, dtype=np.float64), sizes, axis=-1)
        return cls(parts[0], parts[1:], like.filter_name, like.leaf_count)

    def copy(self):
        return Coefficients(self.approx.copy(), [d.copy() for d in self.details],
                            self.filter_name, self.leaf_count)

    def count(self):
        return sum(b.shape[-1] for b in self.bands)

    def energy(self):
        return float(sum(np.sum(b ** 2) for b in self.bands))


def _resolve(plan, fs):
    if fs is None:
        return as_filter_set(plan.filter_name)
    fs = as_filter_set(fs)
    if fs.name != plan.filter_name:
        raise PlanMismatchError(
            f"filter {fs.name!r} does not match plan filter {plan.filter_name!r}"
        )
    return fs


def decompose(f, plan, fs=None):
    fs = _resolve(plan, fs)
    a = np.asarray(f, dtype=np.float64)
    if a.shape[-1] != plan.leaf_count:
        raise PlanMismatchError(
            f"signal length {a.shape[-1]} does not match plan leaf count {plan.leaf_count}"
        )
    details = []
    for perm in plan.perms:
        a, d = analyze_level(a[..., perm], fs)
        details.append(d)
    return Coefficients(a, details[::-1], fs.name, plan.leaf_count)


def reconstruct(c, plan, fs=None):
    fs = _resolve(plan, fs)
    if c.leaf_count != plan.leaf_count or len(c.details) != plan.depth:
        raise PlanMismatchError("coefficients were not produced with this plan")
    lengths = plan.lengths
    if c.approx.shape[-1] != lengths[-1]:
        raise PlanMismatchError("approximation band has the wrong length")
    a = c.approx
    for lvl in range(plan.depth - 1, -1, -1):
        d = c.details[plan.depth - 1 - lvl]
        if d.shape != a.shape:
            raise PlanMismatchError(f"detail band {plan.depth - lvl} has the wrong shape")
        ap = synthesize_level(a, d, fs, lengths[lvl])
        a = np.empty_like(ap)
        a[..., plan.perms[lvl]] = ap
    return a


def zeros_like_plan(plan, fs=None):
    fs = _resolve(plan, fs)
    lengths = plan.lengths
    details = [np.zeros(n) for n in lengths[1:][::-1]]
    return Coefficients(np.zeros(lengths[-1]), details, fs.name, plan.leaf_count)


def basis_element(plan, fs, level, position):
    """Inverse transform of a single unit coefficient.

    ``level`` 0 addresses the approximation band, ``1 .. depth`` the
    detail bands from coarsest to finest.
    """
    c = zeros_like_plan(plan, fs)
    bands = c.bands
    if not 0 <= level < len(bands):
        raise IndexError(f"level {level} outside 0..{len(bands) - 1}")
    if not 0 <= position < len(bands[level]):
        raise IndexError(f"position {position} outside band {level} of length {len(bands[level])}")
    bands[level][position] = 1.0
    return reconstruct(c, plan, fs)


def keep_largest(flat, m):
    """Mask of the ``m`` largest magnitudes; ties go to earlier entries."""
    flat = np.asarray(flat)
    keep = np.zeros(flat.shape, dtype=bool)
    if m > 0:
        order = np.argsort(-np.abs(flat), kind="stable")
        keep[order[:m]] = True
    return keep


def m_term_approx(f, plan, fs=None, m=1):
    """Approximate ``f`` from its ``m`` largest coefficients.

    Approximation and detail coefficients compete in one pool.  Returns
    ``(f_hat, kept)``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    c = decompose(f, plan, fs)
    flat = c.flatten()
    keep = keep_largest(flat, m)
    kept = int(keep.sum())
    f_hat = reconstruct(Coefficients.from_flat(np.where(keep, flat, 0.0), c), plan, fs)
    return f_hat, kept


def identity_plan(n, fs, min_length=None, max_depth=None):
    """Plan without reordering: the common 1D orthogonal DWT."""
    fs = as_filter_set(fs)
    stop = max(fs.length if min_length is None else min_length, 2)
    perms = []
    m = n
    while True:
        perms.append(np.arange(m))
        m = fs.coeff_length(m)
        if m < stop or (max_depth is not None and len(perms) >= max_depth):
            break
    return TreePlan(fs.name, n, perms)


def export_coefficients(c, path):
    """Write ``level,index,value`` rows (band 0 is the approximation)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["level", "index", "value"])
        for lvl, band in enumerate(c.bands):
            for i, v in enumerate(np.ravel(band)):
                w.writerow([lvl, i, repr(float(v))])


def import_coefficients(path, plan):
    c = zeros_like_plan(plan)
    bands = c.bands
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            bands[int(row["level"])][int(row["index"])] = float(row["value"])
    return c


# -- separable 2-D DWT, used as a baseline ---------------------------------

def max_level_2d(shape, fs):
    """Conventional depth limit ``floor(log2(min_side / (fl - 1)))``."""
    fs = as_filter_set(fs)
    side = min(shape)
    if side < fs.length - 1:
        return 1
    return max(1, int(np.floor(np.log2(side / (fs.length - 1)))))


def dwt2(image, fs, levels=None):
    """Multilevel separable 2-D DWT with the same boundary rule.

    Returns ``(approx, [(lh, hl, hh), ...], shapes)`` with the detail
    triples ordered coarsest first and ``shapes`` the input shape of each
    level (finest first).  Depth defaults to :func:`max_level_2d`.
    """
    fs = as_filter_set(fs)
    a = np.asarray(image, dtype=np.float64)
    if levels is None:
        levels = max_level_2d(a.shape, fs)
    bands, shapes = [], []
    for _ in range(levels):
        if min(a.shape) < 2:
            break
        shapes.append(a.shape)
        lo, hi = analyze_level(a, fs)  # along axis 1
        ll, lh = analyze_level(lo.T, fs)
        hl, hh = analyze_level(hi.T, fs)
        bands.append((lh.T, hl.T, hh.T))
        a = ll.T
    return a, bands[::-1], shapes


def idwt2(approx, levels, shapes, fs):
    fs = as_filter_set(fs)
    a = approx
    for (lh, hl, hh), shape in zip(levels, shapes[::-1]):
        lo = synthesize_level(a.T, lh.T, fs, shape[0]).T
        hi = synthesize_level(hl.T, hh.T, fs, shape[0]).T
        a = synthesize_level(lo, hi, fs, shape[1])
    return a


def m_term_approx_2d(image, fs, m):
    approx, levels, shapes = dwt2(image, fs)
    parts = [approx] + [b for trip in levels for b in trip]
    flat = np.concatenate([p.ravel() for p in parts])
    keep = keep_largest(flat, m)
    flat = np.where(keep, flat, 0.0)
    out, pos = [], 0
    for p in parts:
        out.append(flat[pos:pos + p.size].reshape(p.shape))
        pos += p.size
    approx = out[0]
    levels = [tuple(out[1 + 3 * i:4 + 3 * i]) for i in range(len(levels))]
    return idwt2(approx, levels, shapes, fs), int(keep.sum())

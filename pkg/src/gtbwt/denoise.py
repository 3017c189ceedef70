"""Image denoising with randomized tree transforms.

Every pipeline here is an instance of one engine: build ``num_trees``
randomised plans from patch features, transform a stack of signals with
each plan, hard-threshold the detail bands, invert, map the cleaned
signals back to pixels and average.  Without subimage averaging the
stack is the single centre-pixel signal; with it, it is every row of the
interior patch matrix (one subimage per in-patch offset).
"""
import csv
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import imaging
from .filters import as_filter_set
from .ordering import NeighborIndex, DENSE_CAP
from .transform import Coefficients, decompose, reconstruct
from .tree import build_generalized_tree


@dataclass
class DenoiseParams:
    sigma: float = 25.0
    threshold: float = None
    filter_name: str = "sym8"
    patch_side: int = 9
    num_trees: int = 10
    epsilon: float = 0.1
    seed: int = 0
    iterations: int = 1
    oracle_patch_source: np.ndarray = field(default=None, repr=False)
    threads: int = 1

    def __post_init__(self):
        if self.threshold is None:
            self.threshold = 3.0 * self.sigma
        if not self.threshold > 0:
            raise ValueError("threshold must be positive (set it explicitly when sigma is 0)")
        if self.patch_side < 1 or self.patch_side % 2 == 0:
            raise ValueError("patch side must be a positive odd integer")
        if self.num_trees < 1:
            raise ValueError("num_trees must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.iterations not in (1, 2):
            raise ValueError("iterations must be 1 or 2")
        as_filter_set(self.filter_name)


@dataclass
class DenoiseReport:
    stages: list = field(default_factory=list)

    def add(self, stage, psnr_db, mean_nonzeros, seconds):
        self.stages.append({
            "stage": stage,
            "psnr_db": psnr_db,
            "mean_nonzeros": mean_nonzeros,
            "seconds": seconds,
        })

    @property
    def psnr(self):
        return self.stages[-1]["psnr_db"]

    @property
    def mean_nonzeros(self):
        return self.stages[-1]["mean_nonzeros"]

    def to_csv(self, path, include_time=True):
        cols = ["stage", "psnr_db", "mean_nonzeros"] + (["seconds"] if include_time else [])
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for s in self.stages:
                w.writerow([s["stage"], _fmt(s["psnr_db"]), _fmt(s["mean_nonzeros"])]
                           + ([_fmt(s["seconds"])] if include_time else []))


def _fmt(v):
    return "" if v is None else f"{v:.6f}"


def hard_threshold(c, T):
    """Zero detail coefficients with magnitude below ``T``; the approximation band is kept."""
    details = [np.where(np.abs(d) < T, 0.0, d) for d in c.details]
    return Coefficients(c.approx.copy(), details, c.filter_name, c.leaf_count)


def nonzero_count(c):
    """Non-zero coefficients per signal (leading axes preserved)."""
    return sum(np.count_nonzero(b, axis=-1) for b in c.bands)


def tree_rng(seed, tree_index):
    """Generator for one cycle-spinning tree (PCG64 seeded by (seed, index))."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, tree_index])))


class _Problem:
    """Features, signals and the pixel mapping for one denoising pass."""

    def __init__(self, noisy, patch_source, side, subimages):
        noisy = np.asarray(noisy, dtype=np.float64)
        source = noisy if patch_source is None else np.asarray(patch_source, dtype=np.float64)
        if source.shape != noisy.shape:
            raise ValueError(f"patch source {source.shape} does not match image {noisy.shape}")
        self.shape = noisy.shape
        self.side = side
        self.subimages = subimages
        feats = imaging.normalized(source)
        if subimages:
            self.features = imaging.extract_patches(feats, side, "interior")
            self.signals = imaging.extract_patches(noisy, side, "interior").T.copy()
            self.sub_shape = imaging.subimage_shape(noisy.shape, side)
            counts = np.zeros(noisy.shape)
            for r, c in imaging.subimage_offsets(side):
                counts[r:r + self.sub_shape[0], c:c + self.sub_shape[1]] += 1.0
            self.counts = counts
        else:
            self.features = imaging.extract_patches(feats, side, "per-pixel")
            self.signals = imaging.column_stack(noisy)[None, :]
        self._index = None

    @property
    def leaf_index(self):
        if self._index is None and self.features.shape[0] > DENSE_CAP:
            self._index = NeighborIndex(self.features)
        return self._index

    def to_image(self, rows):
        if not self.subimages:
            return imaging.from_column_stack(rows[0], self.shape)
        acc = np.zeros(self.shape)
        h, w = self.sub_shape
        for k, (r, c) in enumerate(imaging.subimage_offsets(self.side)):
            acc[r:r + h, c:c + w] += imaging.from_column_stack(rows[k], self.sub_shape)
        return acc / self.counts


def _one_tree(problem, p, t, thresholds):
    rng = tree_rng(p.seed, t)
    plan = build_generalized_tree(problem.features, p.filter_name, rng=rng,
                                  epsilon=p.epsilon, leaf_index=problem.leaf_index)
    coeffs = decompose(problem.signals, plan)
    images, counts = [], []
    for T in thresholds:
        ct = hard_threshold(coeffs, T)
        counts.append(float(np.mean(nonzero_count(ct))))
        images.append(problem.to_image(reconstruct(ct, plan)))
    return images, counts


def _run(problem, p, thresholds):
    """Average over trees for each threshold; returns (images, mean counts)."""
    problem.leaf_index  # build the shared index before fanning out
    jobs = range(p.num_trees)
    if p.threads > 1 and p.num_trees > 1:
        with ThreadPoolExecutor(max_workers=p.threads) as pool:
            results = list(pool.map(lambda t: _one_tree(problem, p, t, thresholds), jobs))
    else:
        results = [_one_tree(problem, p, t, thresholds) for t in jobs]
    images, counts = [], []
    for k in range(len(thresholds)):
        acc = np.zeros(problem.shape)
        for imgs, _ in results:  # fixed summation order: tree index
            acc += imgs[k]
        images.append(acc / p.num_trees)
        counts.append(float(np.mean([c[k] for _, c in results])))
    return images, counts


def _report(stage, image, reference, count, t0, report=None):
    report = DenoiseReport() if report is None else report
    score = None if reference is None else imaging.psnr(reference, image)
    report.add(stage, score, count, time.perf_counter() - t0)
    return report


def denoise_single_tree(noisy, p, rng):
    """Denoise with one randomised tree drawn from ``rng`` (no averaging)."""
    problem = _Problem(noisy, None, p.patch_side, False)
    plan = build_generalized_tree(problem.features, p.filter_name, rng=rng,
                                  epsilon=p.epsilon, leaf_index=problem.leaf_index)
    ct = hard_threshold(decompose(problem.signals, plan), p.threshold)
    return problem.to_image(reconstruct(ct, plan))


def denoise_cycle_spin(noisy, p, reference=None):
    """Average of ``num_trees`` single-tree results; per-pixel patches."""
    t0 = time.perf_counter()
    problem = _Problem(noisy, None, p.patch_side, False)
    (out,), (count,) = _run(problem, p, [p.threshold])
    return out, _report("cycle_spin", out, reference, count, t0)


def denoise_subimage_avg(noisy, p, reference=None, patch_source=None, stage="subimage_avg"):
    """Cycle spinning with every subimage transformed and overlap-averaged."""
    t0 = time.perf_counter()
    problem = _Problem(noisy, patch_source, p.patch_side, True)
    (out,), (count,) = _run(problem, p, [p.threshold])
    return out, _report(stage, out, reference, count, t0)


def denoise_iterative(noisy, p, reference=None):
    """Subimage averaging, optionally re-run with trees from cleaner patches.

    With ``p.oracle_patch_source`` the trees come from that image.  With
    two iterations the second pass builds its trees from the first pass'
    output while still thresholding the noisy data.
    """
    if p.oracle_patch_source is not None:
        if np.shape(p.oracle_patch_source) != np.shape(noisy):
            raise ValueError("oracle image dimensions differ from the noisy image")
        return denoise_subimage_avg(noisy, p, reference, p.oracle_patch_source, stage="oracle")
    out, report = denoise_subimage_avg(noisy, p, reference, stage="iteration_1")
    if p.iterations == 2:
        out, second = denoise_subimage_avg(noisy, p, reference, patch_source=out,
                                           stage="iteration_2")
        report.stages.extend(second.stages)
    return out, report


def sweep_thresholds(noisy, p, thresholds, subimages=True, patch_source=None):
    """Denoised images for several thresholds sharing the same trees."""
    problem = _Problem(noisy, patch_source, p.patch_side, subimages)
    return _run(problem, p, list(thresholds))


def calibrate_threshold(clean, noisy, p, grid, subimages=True):
    """Pick the threshold in ``grid`` that maximises PSNR against ``clean``.

    Returns ``(best_threshold, {threshold: psnr})``.
    """
    images, _ = sweep_thresholds(noisy, p, grid, subimages)
    scores = {float(T): imaging.psnr(clean, img) for T, img in zip(grid, images)}
    best = max(scores, key=lambda T: (scores[T], -T))
    return best, scores


def with_threshold(p, T):
    return replace(p, threshold=T)

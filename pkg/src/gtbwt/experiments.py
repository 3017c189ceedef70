"""Experiment drivers shared by the CLI and the acceptance suite."""
import numpy as np

from . import imaging
from .filters import as_filter_set
from .transform import (
    basis_element,
    decompose,
    identity_plan,
    m_term_approx,
    m_term_approx_2d,
)
from .tree import build_generalized_tree


def image_tree(image, fs, patch_side=9, seed=0, keep_points=False):
    """Deterministic greedy-path plan over per-pixel patches of ``image``."""
    feats = imaging.extract_patches(imaging.normalized(image), patch_side, "per-pixel")
    rng = np.random.Generator(np.random.PCG64(seed))
    start = int(rng.integers(feats.shape[0]))
    return build_generalized_tree(feats, fs, start=start, rng=rng, keep_points=keep_points)


def m_term_curves(image, fs, ms, patch_side=9, seed=0, plan=None):
    """PSNR of m-term approximations for the three transforms.

    Returns rows ``(m, psnr_gtbwt, psnr_1d, psnr_2d)``; the 1-D baseline
    is the identity-permutation plan on the column-stacked image.
    """
    fs = as_filter_set(fs)
    image = np.asarray(image, dtype=np.float64)
    f = imaging.column_stack(image)
    if plan is None:
        plan = image_tree(image, fs, patch_side, seed)
    flat = identity_plan(f.size, fs)
    rows = []
    for m in ms:
        g, _ = m_term_approx(f, plan, fs, m)
        o, _ = m_term_approx(f, flat, fs, m)
        s, _ = m_term_approx_2d(image, fs, m)
        rows.append((
            int(m),
            imaging.psnr(image, imaging.from_column_stack(g, image.shape)),
            imaging.psnr(image, imaging.from_column_stack(o, image.shape)),
            imaging.psnr(image, s),
        ))
    return rows


def largest_per_level(f, plan, fs, count=2):
    """Addresses ``(level, position)`` of the largest coefficients per band."""
    c = decompose(f, plan, fs)
    out = []
    for lvl, band in enumerate(c.bands):
        order = np.argsort(-np.abs(band), kind="stable")[:count]
        out.extend((lvl, int(i)) for i in order)
    return out


def basis_images(plan, fs, addresses, shape):
    return [imaging.from_column_stack(basis_element(plan, fs, lvl, pos), shape)
            for lvl, pos in addresses]


def contrast_normalize(x):
    """Map to 0..255 with the extremes at the ends (zero stays mid-grey)."""
    x = np.asarray(x, dtype=np.float64)
    peak = np.abs(x).max()
    if peak == 0:
        return np.full(x.shape, 127.5)
    return 127.5 + 127.5 * x / peak

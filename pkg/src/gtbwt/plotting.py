"""Figures written next to the CSV reports."""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .experiments import contrast_normalize  # noqa: E402

LABELS = {"psnr_gtbwt": "generalized tree", "psnr_1d": "common 1D", "psnr_2d": "2D separable"}


def _finite(values, cap=100.0):
    v = np.asarray(values, dtype=float)
    return np.where(np.isfinite(v), v, cap)


def plot_m_term(rows_by_filter, path):
    """One panel per filter with the three m-term PSNR curves, plus an
    overlay of the tree-transform curves of all filters."""
    names = list(rows_by_filter)
    ncols = len(names) + (1 if len(names) > 1 else 0)
    fig, axes = plt.subplots(1, ncols, figsize=(4 * ncols, 3.4), squeeze=False)
    axes = axes[0]
    for ax, name in zip(axes, names):
        rows = np.asarray(rows_by_filter[name], dtype=float)
        for col, key in enumerate(("psnr_gtbwt", "psnr_1d", "psnr_2d"), start=1):
            ax.plot(rows[:, 0], _finite(rows[:, col]), marker="o", ms=3, label=LABELS[key])
        ax.set_title(name)
        ax.set_xlabel("m (kept coefficients)")
        ax.set_ylabel("PSNR [dB]")
        ax.grid(alpha=0.3)
        ax.legend(fontsize=7)
    if len(names) > 1:
        ax = axes[-1]
        for name in names:
            rows = np.asarray(rows_by_filter[name], dtype=float)
            ax.plot(rows[:, 0], _finite(rows[:, 1]), marker="o", ms=3, label=name)
        ax.set_title("generalized tree, all filters")
        ax.set_xlabel("m (kept coefficients)")
        ax.grid(alpha=0.3)
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_images(images, titles, path, ncols=None, normalize=False):
    n = len(images)
    ncols = ncols or min(n, 6)
    nrows = -(-n // ncols)
    fig, axes = plt.subplots(nrows, ncols, figsize=(2.2 * ncols, 2.4 * nrows), squeeze=False)
    for ax in axes.ravel():
        ax.axis("off")
    for ax, img, title in zip(axes.ravel(), images, titles):
        shown = contrast_normalize(img) if normalize else np.clip(img, 0, 255)
        ax.imshow(shown, cmap="gray", vmin=0, vmax=255, interpolation="nearest")
        ax.set_title(title, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)

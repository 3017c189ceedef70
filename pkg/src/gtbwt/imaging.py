"""Grayscale image I/O, patch features, noise and PSNR.

Images are 2-D float64 arrays ``(height, width)`` on the native 0-255
scale.  Vectorisation is column stacking (Fortran order), both for whole
images and for patches.
"""
import os

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from PIL import Image as PILImage

PEAK = 255.0
LOSSLESS_MSE = 1e-20


class ImageFormatError(ValueError):
    pass


def load_image(path):
    """Read an 8-bit grayscale PGM or PNG into a float64 array."""
    try:
        with PILImage.open(path) as im:
            im.load()
            if im.mode != "L":
                raise ImageFormatError(
                    f"{path}: unsupported image mode {im.mode!r}; "
                    "only 8-bit grayscale is accepted"
                )
            return np.asarray(im, dtype=np.float64).copy()
    except (OSError, SyntaxError) as exc:
        if isinstance(exc, FileNotFoundError):
            raise
        raise ImageFormatError(f"{path}: cannot read image ({exc})") from exc


def save_image(image, path):
    """Write as 8-bit grayscale; the format follows the file extension."""
    arr = to_uint8(image)
    ext = os.path.splitext(str(path))[1].lower()
    fmt = {".pgm": "PPM", ".png": "PNG"}.get(ext)
    if fmt is None:
        raise ImageFormatError(f"{path}: unsupported extension {ext!r} (use .pgm or .png)")
    PILImage.fromarray(arr, mode="L").save(path, format=fmt)


def to_uint8(image):
    a = np.asarray(image, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {a.shape}")
    return np.clip(np.rint(a), 0, 255).astype(np.uint8)


def normalized(image):
    """View of the image on the [0, 1] scale."""
    return np.asarray(image, dtype=np.float64) / PEAK


def column_stack(image):
    return np.asarray(image, dtype=np.float64).ravel(order="F")


def from_column_stack(f, shape):
    return np.asarray(f, dtype=np.float64).reshape(shape, order="F")


def center_crop(image, size):
    h, w = image.shape
    if size > h or size > w:
        raise ValueError(f"crop {size} larger than image {image.shape}")
    r, c = (h - size) // 2, (w - size) // 2
    return image[r:r + size, c:c + size].copy()


def _check_side(side):
    if side < 1 or side % 2 == 0:
        raise ValueError(f"patch side must be a positive odd integer, got {side}")


def extract_patches(image, side, mode="per-pixel"):
    """Patch feature matrix, one *row* per point.

    ``per-pixel``: a patch centred on every pixel (symmetric border
    extension), rows in column-stacked pixel order.
    ``interior``: every patch fully inside the image, rows in
    column-stacked order of the patch top-left corner.  The transpose of
    the result is the ``n x (H-s+1)(W-s+1)`` matrix whose row ``r`` is the
    column-stacked subimage at in-patch offset ``r``.
    """
    _check_side(side)
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2 or img.size < 1:
        raise ValueError(f"expected a non-empty 2-D image, got shape {img.shape}")
    if mode == "per-pixel":
        half = side // 2
        img = np.pad(img, half, mode="symmetric")
    elif mode != "interior":
        raise ValueError(f"unknown patch mode {mode!r}")
    elif img.shape[0] < side or img.shape[1] < side:
        raise ValueError(f"image {img.shape} smaller than {side}x{side} patch")
    win = sliding_window_view(img, (side, side))
    # (rows, cols, side, side) -> column-stacked positions and in-patch pixels
    h, w = win.shape[:2]
    feats = win.transpose(1, 0, 3, 2).reshape(h * w, side * side)
    return np.ascontiguousarray(feats)


def subimage_shape(shape, side):
    return shape[0] - side + 1, shape[1] - side + 1


def subimage_offsets(side):
    """In-patch offsets ``(row, col)`` of each feature coordinate."""
    return [(k % side, k // side) for k in range(side * side)]


def add_awgn(image, sigma, seed):
    """Add white Gaussian noise of std ``sigma`` (0-255 scale), no clipping."""
    img = np.asarray(image, dtype=np.float64)
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return img.copy()
    rng = np.random.Generator(np.random.PCG64(seed))
    return img + sigma * rng.standard_normal(img.shape)


def mse(reference, test):
    a = np.asarray(reference, dtype=np.float64)
    b = np.asarray(test, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def psnr(reference, test):
    """PSNR in dB against a fixed peak of 255.

    Errors below ``LOSSLESS_MSE`` (RMS 1e-10 grey levels, i.e. rounding
    noise of a perfect reconstruction) are reported as ``inf``.
    """
    err = mse(reference, test)
    if err <= LOSSLESS_MSE:
        return float("inf")
    return float(10.0 * np.log10(PEAK ** 2 / err))


def rotated_square(size=64, half_diagonal=None, low=0.0, high=255.0):
    """Synthetic image: a 45-degree rotated square centred in the frame."""
    half = size / 4 if half_diagonal is None else half_diagonal
    c = (size - 1) / 2
    yy, xx = np.mgrid[0:size, 0:size]
    inside = np.abs(yy - c) + np.abs(xx - c) <= half
    return np.where(inside, high, low).astype(np.float64)

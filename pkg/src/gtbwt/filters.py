"""Orthogonal wavelet filter banks and single-level analysis / synthesis.

Naming follows the tap-count convention of common wavelet toolboxes:
``dbK`` has ``2K`` taps (db4 is 8 taps), ``symK`` has ``2K`` taps.

All filtering is done as *correlation* with the analysis taps over a
half-sample symmetric extension of the input (``... x1 x0 | x0 x1 ...``)
by ``fl - 1`` samples on each side, keeping every second output.  For an
input of length ``N`` both bands have length ``(N + fl - 1) // 2``.
Synthesis is the adjoint of this map restricted to the central ``N``
samples, which makes it an exact inverse for any length ``N >= 1``.

Functions accept 1-D signals or 2-D arrays; 2-D arrays are filtered
row-wise (along the last axis).
"""
from dataclasses import dataclass

import numpy as np

# Scaling (lowpass) filters, in correlation order.  sym4/sym8 are the
# published tables re-solved in 40-digit arithmetic (orthonormality plus
# vanishing moments); they differ from the tables by < 1e-12 but are exact
# to double precision.  sym2 equals db2 in closed form.
_SCALING = {
    "db1": [0.7071067811865476, 0.7071067811865476],
    "db4": [
        0.2303778133088965, 0.7148465705529157, 0.6308807679298589,
        -0.027983769416859854, -0.18703481171909309, 0.030841381835560764,
        0.0328830116668852, -0.010597401785069032,
    ],
    "db8": [
        0.05441584224310401, 0.31287159091429995, 0.6756307362972898,
        0.5853546836542067, -0.015829105256349306, -0.2840155429615469,
        0.0004724845739132828, 0.12874742662047847, -0.017369301001807547,
        -0.044088253930794755, 0.013981027917398282, 0.008746094047405777,
        -0.004870352993451574, -0.00039174037337694705, 0.0006754494064505693,
        -0.00011747678412476953,
    ],
    "sym2": [
        0.4829629131445341, 0.8365163037378077, 0.2241438680420134,
        -0.12940952255126034,
    ],
    "sym4": [
        0.032223100604051466, -0.012603967262031304, -0.09921954357663353,
        0.29785779560530606, 0.8037387518051321, 0.497618667632775,
        -0.029635527646002493, -0.07576571478950221,
    ],
    "sym8": [
        0.001889950332767689, -0.0003029205147241331, -0.014952258337062199,
        0.0038087520138944896, 0.04913717967373029, -0.027219029917103486,
        -0.0519458381078818, 0.36444189483617895, 0.777185751699628,
        0.4813596512590534, -0.061273359067811076, -0.14329423835127267,
        0.007607487324976609, 0.03169508781152599, -0.0005421323318000107,
        -0.0033824159510050028,
    ],
}
_SCALING["haar"] = _SCALING["db1"]


class UnknownWaveletError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class WaveletFilterSet:
    """The four taps of one orthogonal wavelet family.

    ``dec_lo``/``dec_hi`` are the analysis filters (used by correlation),
    ``rec_lo``/``rec_hi`` the synthesis filters (their time reversals).
    """

    name: str
    dec_lo: np.ndarray
    dec_hi: np.ndarray
    rec_lo: np.ndarray
    rec_hi: np.ndarray

    @property
    def length(self):
        return len(self.dec_lo)

    def coeff_length(self, n):
        """Band length produced by one analysis step on ``n`` samples."""
        return (n + self.length - 1) // 2


def available_filters():
    return sorted(k for k in _SCALING if k != "haar")


def register_filter(name, scaling):
    """Add an orthogonal family given its scaling filter taps."""
    taps = np.asarray(scaling, dtype=np.float64)
    if taps.ndim != 1 or len(taps) < 2 or len(taps) % 2:
        raise ValueError("scaling filter must have an even number of taps >= 2")
    if abs(taps.sum() - np.sqrt(2.0)) > 1e-10:
        raise ValueError("scaling filter taps must sum to sqrt(2)")
    for m in range(len(taps) // 2):
        s = np.dot(taps[:len(taps) - 2 * m], taps[2 * m:])
        if abs(s - (m == 0)) > 1e-10:
            raise ValueError("scaling filter is not orthonormal to its even shifts")
    _SCALING[name] = [float(t) for t in taps]


def filter_set(name):
    try:
        h = np.array(_SCALING[name], dtype=np.float64)
    except KeyError:
        raise UnknownWaveletError(
            f"unknown wavelet family {name!r}; known: {', '.join(available_filters())}"
        ) from None
    fl = len(h)
    signs = np.where(np.arange(fl) % 2 == 0, -1.0, 1.0)
    g = signs * h[::-1]
    name = "db1" if name == "haar" else name
    for arr in (h, g):
        arr.flags.writeable = False
    return WaveletFilterSet(name, h, g, h[::-1].copy(), g[::-1].copy())


def as_filter_set(fs):
    return fs if isinstance(fs, WaveletFilterSet) else filter_set(fs)


def _extend(x, width):
    pad = [(0, 0)] * (x.ndim - 1) + [(width, width)]
    return np.pad(x, pad, mode="symmetric")


def analyze_level(x, fs):
    """One analysis step; returns ``(approx, detail)``."""
    fs = as_filter_set(fs)
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    if n < 2:
        raise ValueError(f"signal too short for analysis: length {n} < 2")
    fl = fs.length
    m = fs.coeff_length(n)
    ext = _extend(x, fl - 1)
    a = np.zeros(x.shape[:-1] + (m,))
    d = np.zeros(x.shape[:-1] + (m,))
    stop = 1 + 2 * m
    for j in range(fl):
        seg = ext[..., 1 + j:stop + j:2]
        a += fs.dec_lo[j] * seg
        d += fs.dec_hi[j] * seg
    return a, d


def analyze_lowpass(x, fs):
    """Approximation band only (what coarse tree levels need)."""
    fs = as_filter_set(fs)
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    if n < 2:
        raise ValueError(f"signal too short for analysis: length {n} < 2")
    fl = fs.length
    m = fs.coeff_length(n)
    ext = _extend(x, fl - 1)
    a = np.zeros(x.shape[:-1] + (m,))
    for j in range(fl):
        a += fs.dec_lo[j] * ext[..., 1 + j:1 + j + 2 * m:2]
    return a


def synthesize_level(a, d, fs, target_len):
    """Invert :func:`analyze_level` for a signal of ``target_len`` samples."""
    fs = as_filter_set(fs)
    a = np.asarray(a, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    if a.shape != d.shape:
        raise ValueError(f"band shapes differ: {a.shape} vs {d.shape}")
    m = a.shape[-1]
    if target_len < 1 or fs.coeff_length(target_len) != m:
        raise ValueError(
            f"target length {target_len} inconsistent with band length {m} "
            f"for a {fs.length}-tap filter"
        )
    fl = fs.length
    y = np.zeros(a.shape[:-1] + (target_len + 2 * (fl - 1),))
    for j in range(fl):
        y[..., 1 + j:1 + j + 2 * m:2] += fs.dec_lo[j] * a + fs.dec_hi[j] * d
    return y[..., fl - 1:fl - 1 + target_len].copy()

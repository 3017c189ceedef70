import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gtbwt.filters import (
    UnknownWaveletError,
    analyze_level,
    available_filters,
    filter_set,
    register_filter,
    synthesize_level,
)

NAMES = ["db1", "db4", "db8", "sym2", "sym4", "sym8"]
S2 = math.sqrt(2.0)


def daubechies_taps(K):
    """Minimum-phase Daubechies scaling filter by spectral factorisation."""
    # P(y) = sum_k C(K-1+k, k) y^k, with y = (2 - z - 1/z) / 4
    coeffs = [math.comb(K - 1 + k, k) for k in range(K)]
    yroots = np.roots(coeffs[::-1]) if K > 1 else []
    zroots = []
    for y in yroots:
        # z^2 - (2 - 4y) z + 1 = 0, keep the root inside the unit circle
        r = np.roots([1.0, -(2.0 - 4.0 * y), 1.0])
        zroots.append(r[np.argmin(np.abs(r))])
    h = np.array([1.0])
    for _ in range(K):
        h = np.convolve(h, [1.0, 1.0])
    for z in zroots:
        h = np.convolve(h, [1.0, -z])
    h = np.real(h)
    return h * S2 / h.sum()


@pytest.mark.parametrize("name", NAMES)
def test_orthonormality_invariants(name):
    fs = filter_set(name)
    h = fs.dec_lo
    assert abs(h.sum() - S2) < 1e-12
    for m in range(len(h) // 2):
        s = float(np.dot(h[: len(h) - 2 * m], h[2 * m:]))
        assert abs(s - (1.0 if m == 0 else 0.0)) < 1e-14
    assert abs(fs.dec_hi.sum()) < 1e-12


@pytest.mark.parametrize("name,K", [("db1", 1), ("db4", 4), ("db8", 8), ("sym2", 2),
                                    ("sym4", 4), ("sym8", 8)])
def test_vanishing_moments_and_length(name, K):
    fs = filter_set(name)
    assert fs.length == 2 * K
    g = fs.dec_hi
    k = np.arange(len(g), dtype=float)
    for p in range(K):
        assert abs(np.sum(k ** p * g)) < 1e-6 * max(1.0, np.sum(np.abs(k ** p * g)))


@pytest.mark.parametrize("name,K", [("db4", 4), ("db8", 8), ("db1", 1)])
def test_daubechies_taps_match_spectral_factorisation(name, K):
    h = filter_set(name).dec_lo
    ref = daubechies_taps(K)
    err = min(np.abs(h - ref).max(), np.abs(h - ref[::-1]).max())
    assert err < 1e-9


def test_db1_taps():
    fs = filter_set("db1")
    np.testing.assert_allclose(fs.dec_lo, [1 / S2, 1 / S2], atol=1e-15)
    np.testing.assert_allclose(fs.dec_hi, [-1 / S2, 1 / S2], atol=1e-15)


def test_unknown_name():
    with pytest.raises(UnknownWaveletError):
        filter_set("coif3")
    assert set(NAMES) <= set(available_filters())


def test_register_filter_validates():
    with pytest.raises(ValueError):
        register_filter("bogus", [1.0, 1.0])
    with pytest.raises(ValueError):
        register_filter("bogus", [1.0, 0.0, 0.0, 0.41421356237309515])
    register_filter("haar_copy", [2 ** -0.5, 2 ** -0.5])
    assert filter_set("haar_copy").length == 2


def test_db1_examples():
    a, d = analyze_level(np.array([1.0, 1.0]), "db1")
    np.testing.assert_allclose(a, [S2], atol=1e-15)
    np.testing.assert_allclose(d, [0.0], atol=1e-15)
    a, d = analyze_level(np.array([1.0, 3.0]), "db1")
    np.testing.assert_allclose(a, [2 * S2], atol=1e-15)
    np.testing.assert_allclose(d, [S2], atol=1e-15)
    np.testing.assert_allclose(synthesize_level(np.array([S2]), np.array([0.0]), "db1", 2),
                               [1, 1], atol=1e-14)
    np.testing.assert_allclose(
        synthesize_level(np.array([2 * S2]), np.array([S2]), "db1", 2), [1, 3], atol=1e-14)


def test_db1_closed_form_even_length():
    x = np.random.default_rng(1).normal(size=64)
    a, d = analyze_level(x, "db1")
    np.testing.assert_allclose(a, (x[0::2] + x[1::2]) / S2, atol=1e-14)
    np.testing.assert_allclose(d, (x[1::2] - x[0::2]) / S2, atol=1e-14)


def test_db4_length_six():
    x = np.random.default_rng(2).normal(size=6)
    a, d = analyze_level(x, "db4")
    assert len(a) == len(d) == 6
    assert np.abs(synthesize_level(a, d, "db4", 6) - x).max() < 1e-9


def test_sym8_length_37():
    x = np.random.default_rng(3).normal(size=37)
    a, d = analyze_level(x, "sym8")
    assert np.abs(synthesize_level(a, d, "sym8", 37) - x).max() < 1e-9


@pytest.mark.parametrize("name", NAMES)
def test_perfect_reconstruction_all_lengths(name):
    rng = np.random.default_rng(4)
    fs = filter_set(name)
    for n in range(2, 257):
        x = rng.normal(size=n)
        a, d = analyze_level(x, fs)
        assert len(a) == (n + fs.length - 1) // 2
        assert np.abs(synthesize_level(a, d, fs, n) - x).max() < 1e-9


def test_db1_parseval():
    x = np.random.default_rng(5).normal(size=256)
    a, d = analyze_level(x, "db1")
    assert abs(np.sum(a ** 2) + np.sum(d ** 2) - np.sum(x ** 2)) < 1e-10


def test_batched_rows_match_single():
    X = np.random.default_rng(6).normal(size=(5, 21))
    A, D = analyze_level(X, "sym4")
    for r in range(5):
        a, d = analyze_level(X[r], "sym4")
        np.testing.assert_array_equal(A[r], a)
        np.testing.assert_array_equal(D[r], d)


def test_errors():
    with pytest.raises(ValueError):
        analyze_level(np.array([1.0]), "db1")
    with pytest.raises(ValueError):
        synthesize_level(np.zeros(3), np.zeros(2), "db1", 4)
    with pytest.raises(ValueError):
        synthesize_level(np.zeros(3), np.zeros(3), "db1", 10)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 80), name=st.sampled_from(NAMES), seed=st.integers(0, 2 ** 31))
def test_round_trip_property(n, name, seed):
    x = np.random.default_rng(seed).uniform(-100, 100, size=n)
    a, d = analyze_level(x, name)
    assert np.abs(synthesize_level(a, d, name, n) - x).max() < 1e-9


def test_sym2_is_db2_closed_form():
    r3 = np.sqrt(3.0)
    exact = np.array([1 + r3, 3 + r3, 3 - r3, 1 - r3]) / (4 * S2)
    np.testing.assert_allclose(filter_set("sym2").dec_lo, exact, rtol=0, atol=1e-15)

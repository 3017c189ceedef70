import math
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from gtbwt import imaging
from gtbwt.imaging import ImageFormatError

DATA = Path(__file__).parent / "data"


@pytest.mark.parametrize("ext", [".pgm", ".png"])
def test_round_trip(tmp_path, ext):
    img = np.random.default_rng(0).integers(0, 256, size=(17, 23)).astype(float)
    path = tmp_path / f"x{ext}"
    imaging.save_image(img, path)
    np.testing.assert_array_equal(imaging.load_image(path), img)


def test_pgm_is_p5(tmp_path):
    imaging.save_image(np.zeros((3, 4)), tmp_path / "z.pgm")
    assert (tmp_path / "z.pgm").read_bytes()[:2] == b"P5"


def test_one_by_one(tmp_path):
    imaging.save_image(np.array([[200.0]]), tmp_path / "p.png")
    assert imaging.load_image(tmp_path / "p.png").tolist() == [[200.0]]
    assert imaging.extract_patches(np.array([[5.0]]), 3).tolist() == [[5.0] * 9]


def test_rejects_16_bit_and_colour(tmp_path):
    Image.fromarray(np.full((4, 4), 40000, dtype=np.uint16)).save(tmp_path / "d.png")
    with pytest.raises(ImageFormatError):
        imaging.load_image(tmp_path / "d.png")
    Image.new("RGB", (4, 4)).save(tmp_path / "c.png")
    with pytest.raises(ImageFormatError):
        imaging.load_image(tmp_path / "c.png")
    (tmp_path / "junk.png").write_bytes(b"not an image")
    with pytest.raises(ImageFormatError):
        imaging.load_image(tmp_path / "junk.png")
    with pytest.raises(ImageFormatError):
        imaging.save_image(np.zeros((2, 2)), tmp_path / "x.bmp")


def test_test_images_present():
    for name, mean in (("lena512.png", 124.05), ("barbara512.png", 117.39)):
        img = imaging.load_image(DATA / name)
        assert img.shape == (512, 512)
        assert abs(img.mean() - mean) < 0.01


def test_patches_side_one():
    img = np.arange(9.0).reshape(3, 3)
    X = imaging.extract_patches(img, 1)
    np.testing.assert_array_equal(X[:, 0], imaging.column_stack(img))


def test_interior_patch_count():
    X = imaging.extract_patches(np.zeros((128, 128)), 9, "interior")
    assert X.shape == (14400, 81)
    with pytest.raises(ValueError):
        imaging.extract_patches(np.zeros((5, 8)), 7, "interior")
    with pytest.raises(ValueError):
        imaging.extract_patches(np.zeros((5, 8)), 4)


def test_constant_image_patches_identical():
    X = imaging.extract_patches(np.full((10, 7), 3.0), 5)
    assert np.all(X == 3.0)


def test_center_row_is_column_stacked_image():
    img = np.random.default_rng(1).normal(size=(13, 9))
    for side in (1, 3, 9):
        X = imaging.extract_patches(img, side)
        np.testing.assert_array_equal(X[:, side * side // 2], imaging.column_stack(img))


def test_patch_layout_matches_naive_loop():
    img = np.random.default_rng(2).normal(size=(7, 6))
    side = 3
    X = imaging.extract_patches(img, side, "interior")
    rows = []
    for c in range(6 - side + 1):
        for r in range(7 - side + 1):
            rows.append(img[r:r + side, c:c + side].ravel(order="F"))
    np.testing.assert_array_equal(X, np.array(rows))
    # row k of X.T is the subimage at offset subimage_offsets[k]
    h, w = imaging.subimage_shape(img.shape, side)
    for k, (r, c) in enumerate(imaging.subimage_offsets(side)):
        sub = imaging.from_column_stack(X[:, k], (h, w))
        np.testing.assert_array_equal(sub, img[r:r + h, c:c + w])


def test_per_pixel_border_is_symmetric():
    img = np.arange(12.0).reshape(3, 4)
    X = imaging.extract_patches(img, 3)
    patch = imaging.from_column_stack(X[0], (3, 3))  # pixel (0, 0)
    np.testing.assert_array_equal(patch, [[0, 0, 1], [0, 0, 1], [4, 4, 5]])


def test_awgn():
    img = np.full((512, 512), 128.0)
    assert np.array_equal(imaging.add_awgn(img, 0, 3), img)
    noisy = imaging.add_awgn(img, 25, 1)
    assert abs(imaging.psnr(img, noisy) - 20.17) < 0.05
    assert np.array_equal(noisy, imaging.add_awgn(img, 25, 1))
    big = imaging.add_awgn(np.zeros((1000, 1000)), 25, 2)
    assert abs(big.var() / 625 - 1) < 0.01
    assert big.min() < 0  # no clipping


def test_psnr():
    a = np.random.default_rng(3).uniform(0, 255, (8, 8))
    assert imaging.psnr(a, a) == math.inf
    assert abs(imaging.psnr(np.zeros((4, 4)), np.full((4, 4), 255.0))) < 1e-12
    with pytest.raises(ValueError):
        imaging.psnr(np.zeros((2, 2)), np.zeros((2, 3)))


def test_crop_and_stacking():
    img = np.arange(36.0).reshape(6, 6)
    np.testing.assert_array_equal(imaging.center_crop(img, 2), img[2:4, 2:4])
    f = imaging.column_stack(img)
    assert f[1] == img[1, 0]
    np.testing.assert_array_equal(imaging.from_column_stack(f, img.shape), img)
    with pytest.raises(ValueError):
        imaging.center_crop(img, 7)


def test_rotated_square():
    sq = imaging.rotated_square(64)
    assert sq.shape == (64, 64) and set(np.unique(sq)) == {0.0, 255.0}
    np.testing.assert_array_equal(sq, sq.T)


def test_psnr_lossless_floor():
    a = np.full((4, 4), 100.0)
    assert imaging.psnr(a, a + 1e-12) == math.inf
    assert math.isfinite(imaging.psnr(a, a + 1e-6))

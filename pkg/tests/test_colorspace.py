import numpy as np

from ctrack.colorspace import hsv_to_rgb, rgb_to_hsv, rgb_to_lab


def test_primary_colors():
    hsv = rgb_to_hsv(np.array([[255, 0, 0], [0, 255, 0], [0, 0, 255]],
                              dtype=np.uint8))
    np.testing.assert_allclose(hsv[0], [0.0, 255.0, 255.0])
    np.testing.assert_allclose(hsv[1], [120.0, 255.0, 255.0])
    np.testing.assert_allclose(hsv[2], [240.0, 255.0, 255.0])


def test_black_and_gray_conventions():
    hsv = rgb_to_hsv(np.array([[0, 0, 0], [128, 128, 128]], dtype=np.uint8))
    np.testing.assert_allclose(hsv[0], [0.0, 0.0, 0.0])
    np.testing.assert_allclose(hsv[1], [0.0, 0.0, 128.0])


def test_roundtrip_random_sample_exact():
    rng = np.random.default_rng(0)
    rgb = rng.integers(0, 256, size=(64, 64, 3), dtype=np.uint8)
    back = hsv_to_rgb(rgb_to_hsv(rgb))
    np.testing.assert_array_equal(back, rgb)


def test_roundtrip_near_boundaries_exact():
    vals = np.array([0, 1, 2, 127, 128, 253, 254, 255], dtype=np.uint8)
    r, g, b = np.meshgrid(vals, vals, vals, indexing="ij")
    rgb = np.stack([r, g, b], axis=-1).reshape(-1, 8, 3)
    back = hsv_to_rgb(rgb_to_hsv(rgb))
    np.testing.assert_array_equal(back, rgb)


def test_lab_red_is_strongly_positive_a():
    lab = rgb_to_lab(np.array([[255, 0, 0], [128, 128, 128], [0, 0, 255]],
                              dtype=np.uint8))
    assert lab[0, 1] > 60 and lab[0, 2] > 40      # red: large a*, b*
    assert abs(lab[1, 1]) < 1 and abs(lab[1, 2]) < 1  # gray: achromatic
    assert lab[2, 2] < -60                         # blue: negative b*
    # white point sanity
    white = rgb_to_lab(np.array([255, 255, 255], dtype=np.uint8))
    np.testing.assert_allclose(white, [100.0, 0.0, 0.0], atol=0.01)

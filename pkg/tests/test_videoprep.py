import numpy as np
import pytest

from ctrack import (MarkerSpec, insert_marker, pad_video, rebalance_colors,
                    truncate_video, unit_to_video, video_to_unit)
from ctrack.colorspace import rgb_to_hsv
from ctrack.errors import InvalidArgumentError


def gray_video(f=3, h=16, w=16, level=180):
    return np.full((f, h, w, 3), level, dtype=np.uint8)


# ---------------------------------------------------------------------------
# unit scaling

def test_unit_roundtrip_exact():
    rng = np.random.default_rng(0)
    video = rng.integers(0, 256, size=(2, 8, 8, 3), dtype=np.uint8)
    np.testing.assert_array_equal(unit_to_video(video_to_unit(video)), video)


def test_unit_clips_out_of_range():
    x = np.array([[[[-3.0, 3.0, 0.0]]]])
    out = unit_to_video(x)
    np.testing.assert_array_equal(out[0, 0, 0], [0, 255, 128])


# ---------------------------------------------------------------------------
# rebalancing

def test_rebalance_grayscale_unchanged():
    video = gray_video()
    np.testing.assert_array_equal(rebalance_colors(video), video)


def test_rebalance_caps_pure_red():
    video = gray_video()
    video[0, 5, 5] = (255, 0, 0)  # H=0, S=255, V=255: inside the ellipse
    out = rebalance_colors(video)
    h, s, v = rgb_to_hsv(out[0, 5, 5])
    assert h == pytest.approx(0.0)
    assert s == pytest.approx(80.0, abs=1.0)
    assert v == pytest.approx(255.0)


def test_rebalance_leaves_out_of_ellipse_red():
    # (H=0, S=255, V=200): (0/80)^2 + (55/30)^2 > 1 -> untouched
    video = gray_video()
    video[0, 5, 5] = (200, 0, 0)
    hsv = rgb_to_hsv(video[0, 5, 5])
    assert hsv[1] == 255.0 and hsv[2] == 200.0
    out = rebalance_colors(video)
    np.testing.assert_array_equal(out, video)


def test_rebalance_hue_window_wraps():
    video = gray_video()
    video[0, 1, 1] = (255, 0, 25)   # hue ~354, inside [330, 370) wrap
    video[0, 2, 2] = (255, 85, 0)   # hue 20, outside
    out = rebalance_colors(video)
    assert not np.array_equal(out[0, 1, 1], video[0, 1, 1])
    np.testing.assert_array_equal(out[0, 2, 2], video[0, 2, 2])


def test_rebalance_idempotent():
    rng = np.random.default_rng(1)
    video = rng.integers(0, 256, size=(3, 20, 20, 3), dtype=np.uint8)
    video[:, :3, :3] = (255, 20, 20)
    once = rebalance_colors(video)
    twice = rebalance_colors(once)
    np.testing.assert_array_equal(once, twice)


# ---------------------------------------------------------------------------
# marker insertion

def test_marker_disk_is_exactly_13_pixels():
    frame = gray_video(1)[0]
    out = insert_marker(frame, (8, 8), MarkerSpec(radius=2))
    changed = np.argwhere((out != frame).any(axis=-1))
    assert len(changed) == 13
    for v, u in changed:
        assert (u - 8) ** 2 + (v - 8) ** 2 <= 4
        np.testing.assert_array_equal(out[v, u], [255, 0, 0])
    # untouched elsewhere
    mask = np.zeros((16, 16), bool)
    mask[changed[:, 0], changed[:, 1]] = True
    np.testing.assert_array_equal(out[~mask], frame[~mask])


def test_marker_clipped_at_corner():
    frame = np.zeros((2, 2, 3), dtype=np.uint8)
    out = insert_marker(frame, (0, 0), MarkerSpec(radius=1))
    changed = np.argwhere((out != frame).any(axis=-1))
    assert len(changed) == 3  # (0,0), (1,0), (0,1)


def test_marker_outside_frame_rejected():
    frame = gray_video(1)[0]
    with pytest.raises(InvalidArgumentError):
        insert_marker(frame, (20, 3))


def test_marker_blue_variant_same_geometry():
    frame = gray_video(1)[0]
    red = insert_marker(frame, (8, 8), MarkerSpec(hue=0.0, radius=2))
    blue = insert_marker(frame, (8, 8), MarkerSpec(hue=240.0, radius=2))
    np.testing.assert_array_equal((red != frame).any(-1), (blue != frame).any(-1))
    np.testing.assert_array_equal(blue[8, 8], [0, 0, 255])


# ---------------------------------------------------------------------------
# padding

@pytest.mark.parametrize("f,expected", [(49, 49), (50, 53), (1, 1), (2, 5),
                                        (17, 17), (4, 5)])
def test_pad_video_to_4k_plus_1(f, expected):
    video = np.arange(f)[:, None, None, None] * np.ones((1, 2, 2, 3))
    padded, orig = pad_video(video.astype(np.uint8))
    assert padded.shape[0] == expected
    assert orig == f
    assert (padded.shape[0] - 1) % 4 == 0
    # padding repeats the last frame
    for k in range(f, expected):
        np.testing.assert_array_equal(padded[k], padded[f - 1])


def test_pad_then_truncate_is_identity():
    rng = np.random.default_rng(2)
    video = rng.integers(0, 256, size=(6, 4, 4, 3), dtype=np.uint8)
    padded, orig = pad_video(video)
    np.testing.assert_array_equal(truncate_video(padded, orig), video)

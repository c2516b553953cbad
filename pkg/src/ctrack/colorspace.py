"""Color-space conversions used by preprocessing and the tracker.

HSV is the package-wide convention (see kernels for the exact definition);
LAB exists for the tracker's color-space ablation. LAB uses sRGB -> CIE L*a*b*
under D65, computed in numpy (it is not on the default hot path).
"""

from __future__ import annotations

import numpy as np

from . import kernels

__all__ = ["rgb_to_hsv", "hsv_to_rgb", "rgb_to_lab"]


def rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    """uint8 RGB (..., 3) -> float64 (H degrees [0,360), S [0,255], V [0,255]).

    Black maps to (0, 0, 0) and achromatic pixels to H=0 by convention. The
    round trip through hsv_to_rgb is exact for every 8-bit color.
    """
    return kernels.hsv_from_rgb(np.asarray(rgb, dtype=np.uint8))


def hsv_to_rgb(hsv: np.ndarray) -> np.ndarray:
    return kernels.rgb_from_hsv(np.asarray(hsv, dtype=np.float64))


_SRGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
_D65 = np.array([0.95047, 1.0, 1.08883])


def rgb_to_lab(rgb: np.ndarray) -> np.ndarray:
    """uint8 sRGB (..., 3) -> float64 CIE L*a*b* (D65)."""
    c = np.asarray(rgb, dtype=np.float64) / 255.0
    lin = np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)
    xyz = lin @ _SRGB_TO_XYZ.T / _D65
    f = np.where(xyz > (6 / 29) ** 3, np.cbrt(xyz),
                 xyz / (3 * (6 / 29) ** 2) + 4 / 29)
    lab = np.empty_like(f)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab

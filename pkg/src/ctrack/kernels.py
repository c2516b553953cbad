"""Hot per-pixel kernels with numba and pure-numpy implementations.

Every kernel exists twice: a numba @njit loop (suffix _nb) and a vectorized
numpy fallback (suffix _np). The active path is chosen at import time: numba
is used when importable unless the env flag CTRACK_NUMBA is set to 0/false/off.
Both paths compute the same float64 arithmetic; parity is enforced by tests
and compared by benchmarks/bench_kernels.py.

HSV convention (hexcone): H in degrees [0, 360), S and V in [0, 255], all
float64. The u8 round trip rgb -> hsv -> rgb is exact for all 2^24 inputs.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "NUMBA_ACTIVE",
    "active_backend",
    "hsv_from_rgb",
    "rgb_from_hsv",
    "rebalance_frame",
    "detect_in_disk",
    "paint_disk",
    "disk_mask",
]


def _numba_requested() -> bool:
    return os.environ.get("CTRACK_NUMBA", "1").strip().lower() not in (
        "0", "false", "off")


# ---------------------------------------------------------------------------
# pure-numpy implementations

def _hsv_from_rgb_np(img: np.ndarray) -> np.ndarray:
    rgb = img.astype(np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = np.maximum(np.maximum(r, g), b)
    mn = np.minimum(np.minimum(r, g), b)
    c = v - mn
    h = np.zeros_like(v)
    nz = c > 0.0
    is_r = nz & (v == r)
    is_g = nz & ~is_r & (v == g)
    is_b = nz & ~is_r & ~is_g
    h[is_r] = (60.0 * (g[is_r] - b[is_r]) / c[is_r]) % 360.0
    h[is_g] = 60.0 * (b[is_g] - r[is_g]) / c[is_g] + 120.0
    h[is_b] = 60.0 * (r[is_b] - g[is_b]) / c[is_b] + 240.0
    s = np.zeros_like(v)
    pos = v > 0.0
    s[pos] = 255.0 * c[pos] / v[pos]
    return np.stack([h, s, v], axis=-1)


def _rgb_from_hsv_np(hsv: np.ndarray) -> np.ndarray:
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    c = s * v / 255.0
    hp = (h % 360.0) / 60.0
    x = c * (1.0 - np.abs(hp % 2.0 - 1.0))
    sector = np.floor(hp).astype(np.int64) % 6
    z = np.zeros_like(c)
    r1 = np.choose(sector, [c, x, z, z, x, c])
    g1 = np.choose(sector, [x, c, c, x, z, z])
    b1 = np.choose(sector, [z, z, x, c, c, x])
    m = v - c
    rgb = np.stack([r1 + m, g1 + m, b1 + m], axis=-1)
    return np.clip(np.rint(rgb), 0, 255).astype(np.uint8)


def _hue_in_window(h: np.ndarray, lo: float, hi: float) -> np.ndarray:
    # window given in degrees, interpreted modulo 360 (lo may be negative)
    lo_m, hi_m = lo % 360.0, hi % 360.0
    if lo_m <= hi_m:
        return (h >= lo_m) & (h <= hi_m)
    return (h >= lo_m) | (h <= hi_m)


def _rebalance_frame_np(frame: np.ndarray, hue_lo: float, hue_hi: float,
                        sat_axis: float, val_axis: float,
                        sat_cap: float) -> np.ndarray:
    hsv = _hsv_from_rgb_np(frame)
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    in_ellipse = (((s - 255.0) / sat_axis) ** 2
                  + ((v - 255.0) / val_axis) ** 2) <= 1.0
    hit = _hue_in_window(h, hue_lo, hue_hi) & in_ellipse & (s > sat_cap)
    if not hit.any():
        return frame.copy()
    out = frame.copy()
    capped = hsv[hit]
    capped[:, 1] = sat_cap
    out[hit] = _rgb_from_hsv_np(capped)
    return out


def _detect_in_disk_np(frame: np.ndarray, cu: float, cv: float, radius: float,
                       hue_lo: float, hue_hi: float, s_lo: float, s_hi: float,
                       v_lo: float, v_hi: float) -> np.ndarray:
    h_img, w_img = frame.shape[:2]
    u0 = max(0, int(np.floor(cu - radius)))
    u1 = min(w_img - 1, int(np.ceil(cu + radius)))
    v0 = max(0, int(np.floor(cv - radius)))
    v1 = min(h_img - 1, int(np.ceil(cv + radius)))
    if u1 < u0 or v1 < v0:
        return np.empty((0, 2), dtype=np.int64)
    patch = frame[v0:v1 + 1, u0:u1 + 1]
    hsv = _hsv_from_rgb_np(patch)
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    uu, vv = np.meshgrid(np.arange(u0, u1 + 1), np.arange(v0, v1 + 1))
    near = (uu - cu) ** 2 + (vv - cv) ** 2 <= radius ** 2
    hit = (near & _hue_in_window(h, hue_lo, hue_hi)
           & (s >= s_lo) & (s <= s_hi) & (v >= v_lo) & (v <= v_hi))
    vs, us = np.nonzero(hit)
    return np.stack([us + u0, vs + v0], axis=1).astype(np.int64)


def _paint_disk_np(frame: np.ndarray, cu: float, cv: float, radius: float,
                   color) -> np.ndarray:
    out = frame.copy()
    out[disk_mask_np(frame.shape[0], frame.shape[1], cu, cv, radius)] = color
    return out


def disk_mask_np(h: int, w: int, cu: float, cv: float,
                 radius: float) -> np.ndarray:
    uu, vv = np.meshgrid(np.arange(w), np.arange(h))
    return (uu - cu) ** 2 + (vv - cv) ** 2 <= radius ** 2


# ---------------------------------------------------------------------------
# numba implementations

_NUMBA_IMPORTED = False
if _numba_requested():
    try:
        from numba import njit
        _NUMBA_IMPORTED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        pass

if _NUMBA_IMPORTED:

    @njit(cache=True, inline="always")
    def _hsv_px(r, g, b):
        v = max(r, max(g, b))
        mn = min(r, min(g, b))
        c = v - mn
        h = 0.0
        if c > 0.0:
            if v == r:
                h = (60.0 * (g - b) / c) % 360.0
            elif v == g:
                h = 60.0 * (b - r) / c + 120.0
            else:
                h = 60.0 * (r - g) / c + 240.0
        s = 255.0 * c / v if v > 0.0 else 0.0
        return h, s, v

    @njit(cache=True, inline="always")
    def _rgb_px(h, s, v):
        c = s * v / 255.0
        hp = (h % 360.0) / 60.0
        x = c * (1.0 - abs(hp % 2.0 - 1.0))
        sector = int(np.floor(hp)) % 6
        if sector == 0:
            r1, g1, b1 = c, x, 0.0
        elif sector == 1:
            r1, g1, b1 = x, c, 0.0
        elif sector == 2:
            r1, g1, b1 = 0.0, c, x
        elif sector == 3:
            r1, g1, b1 = 0.0, x, c
        elif sector == 4:
            r1, g1, b1 = x, 0.0, c
        else:
            r1, g1, b1 = c, 0.0, x
        m = v - c
        return (min(max(np.rint(r1 + m), 0.0), 255.0),
                min(max(np.rint(g1 + m), 0.0), 255.0),
                min(max(np.rint(b1 + m), 0.0), 255.0))

    @njit(cache=True, inline="always")
    def _hue_in_window_px(h, lo_m, hi_m):
        if lo_m <= hi_m:
            return lo_m <= h <= hi_m
        return h >= lo_m or h <= hi_m

    @njit(cache=True)
    def _hsv_from_rgb_nb(img):
        rows, cols = img.shape[0], img.shape[1]
        out = np.empty((rows, cols, 3), dtype=np.float64)
        for i in range(rows):
            for j in range(cols):
                h, s, v = _hsv_px(float(img[i, j, 0]), float(img[i, j, 1]),
                                  float(img[i, j, 2]))
                out[i, j, 0] = h
                out[i, j, 1] = s
                out[i, j, 2] = v
        return out

    @njit(cache=True)
    def _rgb_from_hsv_nb(hsv):
        rows, cols = hsv.shape[0], hsv.shape[1]
        out = np.empty((rows, cols, 3), dtype=np.uint8)
        for i in range(rows):
            for j in range(cols):
                r, g, b = _rgb_px(hsv[i, j, 0], hsv[i, j, 1], hsv[i, j, 2])
                out[i, j, 0] = np.uint8(r)
                out[i, j, 1] = np.uint8(g)
                out[i, j, 2] = np.uint8(b)
        return out

    @njit(cache=True)
    def _rebalance_frame_nb(frame, hue_lo, hue_hi, sat_axis, val_axis,
                            sat_cap):
        rows, cols = frame.shape[0], frame.shape[1]
        out = frame.copy()
        lo_m, hi_m = hue_lo % 360.0, hue_hi % 360.0
        for i in range(rows):
            for j in range(cols):
                h, s, v = _hsv_px(float(frame[i, j, 0]), float(frame[i, j, 1]),
                                  float(frame[i, j, 2]))
                if s <= sat_cap:
                    continue
                if not _hue_in_window_px(h, lo_m, hi_m):
                    continue
                ds = (s - 255.0) / sat_axis
                dv = (v - 255.0) / val_axis
                if ds * ds + dv * dv > 1.0:
                    continue
                r, g, b = _rgb_px(h, sat_cap, v)
                out[i, j, 0] = np.uint8(r)
                out[i, j, 1] = np.uint8(g)
                out[i, j, 2] = np.uint8(b)
        return out

    @njit(cache=True)
    def _detect_in_disk_nb(frame, cu, cv, radius, hue_lo, hue_hi, s_lo, s_hi,
                           v_lo, v_hi):
        rows, cols = frame.shape[0], frame.shape[1]
        u0 = max(0, int(np.floor(cu - radius)))
        u1 = min(cols - 1, int(np.ceil(cu + radius)))
        v0 = max(0, int(np.floor(cv - radius)))
        v1 = min(rows - 1, int(np.ceil(cv + radius)))
        lo_m, hi_m = hue_lo % 360.0, hue_hi % 360.0
        r2 = radius * radius
        cap = max(0, (u1 - u0 + 1) * (v1 - v0 + 1))
        buf = np.empty((cap, 2), dtype=np.int64)
        n = 0
        for i in range(v0, v1 + 1):
            for j in range(u0, u1 + 1):
                du = j - cu
                dv_ = i - cv
                if du * du + dv_ * dv_ > r2:
                    continue
                h, s, v = _hsv_px(float(frame[i, j, 0]), float(frame[i, j, 1]),
                                  float(frame[i, j, 2]))
                if s < s_lo or s > s_hi or v < v_lo or v > v_hi:
                    continue
                if not _hue_in_window_px(h, lo_m, hi_m):
                    continue
                buf[n, 0] = j
                buf[n, 1] = i
                n += 1
        return buf[:n].copy()

    @njit(cache=True)
    def _paint_disk_nb(frame, cu, cv, radius, r, g, b):
        rows, cols = frame.shape[0], frame.shape[1]
        out = frame.copy()
        r2 = radius * radius
        for i in range(rows):
            for j in range(cols):
                du = j - cu
                dv = i - cv
                if du * du + dv * dv <= r2:
                    out[i, j, 0] = r
                    out[i, j, 1] = g
                    out[i, j, 2] = b
        return out


NUMBA_ACTIVE = _NUMBA_IMPORTED


def active_backend() -> str:
    return "numba" if NUMBA_ACTIVE else "numpy"


# ---------------------------------------------------------------------------
# dispatch

def hsv_from_rgb(img: np.ndarray) -> np.ndarray:
    """(..., 3) uint8 RGB -> float64 HSV with H in degrees, S/V in [0, 255]."""
    img = np.ascontiguousarray(img)
    if NUMBA_ACTIVE and img.ndim == 3:
        return _hsv_from_rgb_nb(img)
    return _hsv_from_rgb_np(img)


def rgb_from_hsv(hsv: np.ndarray) -> np.ndarray:
    """Inverse of hsv_from_rgb; rounds to uint8."""
    hsv = np.ascontiguousarray(hsv, dtype=np.float64)
    if NUMBA_ACTIVE and hsv.ndim == 3:
        return _rgb_from_hsv_nb(hsv)
    return _rgb_from_hsv_np(hsv)


def rebalance_frame(frame: np.ndarray, hue_lo: float, hue_hi: float,
                    sat_axis: float, val_axis: float,
                    sat_cap: float) -> np.ndarray:
    """Cap saturation at sat_cap for pixels whose hue falls in the window and
    whose (S, V) lies inside the ellipse centered at (255, 255)."""
    frame = np.ascontiguousarray(frame)
    if NUMBA_ACTIVE:
        return _rebalance_frame_nb(frame, hue_lo, hue_hi, sat_axis, val_axis,
                                   sat_cap)
    return _rebalance_frame_np(frame, hue_lo, hue_hi, sat_axis, val_axis,
                               sat_cap)


def detect_in_disk(frame: np.ndarray, cu: float, cv: float, radius: float,
                   hue_lo: float, hue_hi: float, s_lo: float, s_hi: float,
                   v_lo: float, v_hi: float) -> np.ndarray:
    """(N, 2) int64 array of (u, v) pixels within `radius` of (cu, cv) whose
    HSV falls in the threshold box; rows in row-major scan order."""
    frame = np.ascontiguousarray(frame)
    if NUMBA_ACTIVE:
        return _detect_in_disk_nb(frame, float(cu), float(cv), float(radius),
                                  hue_lo, hue_hi, s_lo, s_hi, v_lo, v_hi)
    return _detect_in_disk_np(frame, cu, cv, radius, hue_lo, hue_hi, s_lo,
                              s_hi, v_lo, v_hi)


def paint_disk(frame: np.ndarray, cu: float, cv: float, radius: float,
               color) -> np.ndarray:
    """Copy of `frame` with the disk of `radius` around (cu, cv) set to color."""
    frame = np.ascontiguousarray(frame)
    if NUMBA_ACTIVE:
        r, g, b = (np.uint8(color[0]), np.uint8(color[1]), np.uint8(color[2]))
        return _paint_disk_nb(frame, float(cu), float(cv), float(radius),
                              r, g, b)
    return _paint_disk_np(frame, cu, cv, radius, np.asarray(color, np.uint8))


def disk_mask(h: int, w: int, cu: float, cv: float, radius: float) -> np.ndarray:
    """Boolean (h, w) mask of the euclidean disk; kept in numpy (cheap)."""
    return disk_mask_np(h, w, cu, cv, radius)

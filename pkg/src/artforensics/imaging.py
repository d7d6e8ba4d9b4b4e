"""Image decoding, resizing, colour conversion and low-level filters.

Images travel as plain numpy arrays:

* RGB rasters are ``uint8`` arrays of shape ``(height, width, 3)``.
* Gray images are ``float64`` arrays of shape ``(height, width)`` with
  intensities on the 0-255 scale.
* Edge maps are ``bool`` arrays with the shape of their source.
"""

from __future__ import annotations

import io
import os

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

from artforensics.errors import DecodeError, InvalidInput

# BT.601 luma weights.
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

DEFAULT_CANNY_LOW = 50.0
DEFAULT_CANNY_HIGH = 150.0
CANNY_SIGMA = 1.4

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


def decode(data: bytes, path: str | os.PathLike | None = None) -> np.ndarray:
    """Decode a PNG or JPEG byte stream into an 8-bit RGB raster.

    Transparent pixels are composited over white.
    """
    try:
        with Image.open(io.BytesIO(data)) as im:
            if im.format not in ("PNG", "JPEG", "MPO"):
                raise DecodeError(f"unsupported image format {im.format!r}", path)
            im.load()
            if im.mode in ("RGBA", "LA", "PA") or (im.mode == "P" and "transparency" in im.info):
                rgba = im.convert("RGBA")
                background = Image.new("RGBA", rgba.size, (255, 255, 255, 255))
                im = Image.alpha_composite(background, rgba)
            rgb = np.asarray(im.convert("RGB"), dtype=np.uint8)
    except DecodeError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise DecodeError(f"cannot decode image: {exc}", path) from exc
    if rgb.ndim != 3 or rgb.shape[0] == 0 or rgb.shape[1] == 0:
        raise DecodeError("decoded image is empty", path)
    return np.ascontiguousarray(rgb)


def load_image(path: str | os.PathLike) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    return decode(data, path)


def _bilinear_axis(n_in: int, n_out: int):
    # Half-pixel centre alignment, so an n -> n resize is the identity.
    pos = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    pos = np.clip(pos, 0.0, n_in - 1)
    i0 = np.floor(pos).astype(np.int64)
    i1 = np.minimum(i0 + 1, n_in - 1)
    frac = pos - i0
    return i0, i1, frac


def resize_bilinear(img: np.ndarray, side: int = 255) -> np.ndarray:
    """Resize to ``side`` x ``side`` with bilinear interpolation and edge clamping.

    Accepts RGB rasters (returned as ``uint8``) or 2-D float images
    (returned as ``float64``).
    """
    a = np.asarray(img)
    if a.size == 0:
        raise InvalidInput("cannot resize an empty image")
    if side < 1:
        raise InvalidInput(f"resize side must be positive, got {side}")
    h, w = a.shape[:2]
    if (h, w) == (side, side):
        return a.copy()
    y0, y1, fy = _bilinear_axis(h, side)
    x0, x1, fx = _bilinear_axis(w, side)
    f = a.astype(np.float64)
    if f.ndim == 3:
        fy = fy[:, None, None]
        fx = fx[None, :, None]
    else:
        fy = fy[:, None]
        fx = fx[None, :]
    top = f[y0][:, x0] * (1 - fx) + f[y0][:, x1] * fx
    bottom = f[y1][:, x0] * (1 - fx) + f[y1][:, x1] * fx
    out = top * (1 - fy) + bottom * fy
    if a.dtype == np.uint8:
        return np.clip(np.rint(out), 0, 255).astype(np.uint8)
    return out


def to_gray(img: np.ndarray) -> np.ndarray:
    """BT.601 luma of an RGB raster, as float64 on the 0-255 scale."""
    return np.asarray(img, dtype=np.float64) @ LUMA_WEIGHTS


def to_hsv(img: np.ndarray) -> np.ndarray:
    """Hexcone HSV conversion with every channel scaled into [0, 1].

    Hue is degrees / 360; achromatic pixels get hue 0.
    """
    rgb = np.asarray(img, dtype=np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=-1)
    c = v - rgb.min(axis=-1)
    s = np.where(v > 0, c / np.where(v > 0, v, 1.0), 0.0)

    safe_c = np.where(c > 0, c, 1.0)
    h = np.zeros_like(v)
    red_max = (c > 0) & (v == r)
    green_max = (c > 0) & (v == g) & ~red_max
    blue_max = (c > 0) & ~red_max & ~green_max
    h = np.where(red_max, np.mod((g - b) / safe_c, 6.0), h)
    h = np.where(green_max, (b - r) / safe_c + 2.0, h)
    h = np.where(blue_max, (r - g) / safe_c + 4.0, h)
    h = h / 6.0
    h = np.where(h >= 1.0, h - 1.0, h)
    return np.stack([h, s, v], axis=-1)


def median3(g: np.ndarray) -> np.ndarray:
    """3x3 median filter with edge replication."""
    g = np.asarray(g, dtype=np.float64)
    if g.ndim != 2 or g.size == 0:
        raise InvalidInput("median3 expects a non-empty 2-D image")
    return ndimage.median_filter(g, size=3, mode="nearest")


def gaussian_kernel(size: int = 5, sigma: float = CANNY_SIGMA) -> np.ndarray:
    r = size // 2
    y, x = np.mgrid[-r : r + 1, -r : r + 1]
    k = np.exp(-(x * x + y * y) / (2.0 * sigma * sigma))
    return k / k.sum()


_SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
_SOBEL_Y = _SOBEL_X.T


def sobel_gradients(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # ndimage.correlate keeps the kernel orientation as written.
    gx = ndimage.correlate(g, _SOBEL_X, mode="nearest")
    gy = ndimage.correlate(g, _SOBEL_Y, mode="nearest")
    return gx, gy


def non_max_suppression(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Thin gradient ridges to one pixel.

    The gradient direction is quantised to 0, 45, 90 or 135 degrees. A pixel
    survives when it is >= the neighbour behind it and strictly > the one
    ahead of it, so a plateau two pixels wide keeps exactly one pixel.
    Neighbours outside the image count as zero.
    """
    h, w = mag.shape
    p = np.pad(mag, 1, mode="constant")
    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    sector = np.zeros(mag.shape, dtype=np.int64)
    sector[(angle >= 22.5) & (angle < 67.5)] = 1
    sector[(angle >= 67.5) & (angle < 112.5)] = 2
    sector[(angle >= 112.5) & (angle < 157.5)] = 3

    def shifted(dy, dx):
        return p[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]

    # (dy, dx) of the "ahead" neighbour per sector; image rows grow downwards,
    # so a positive gy points down.
    offsets = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}
    keep = np.zeros(mag.shape, dtype=bool)
    for s, (dy, dx) in offsets.items():
        ahead = shifted(dy, dx)
        behind = shifted(-dy, -dx)
        keep |= (sector == s) & (mag >= behind) & (mag > ahead)
    return np.where(keep & (mag > 0), mag, 0.0)


def hysteresis(nms: np.ndarray, low: float, high: float) -> np.ndarray:
    strong = nms >= high
    candidates = nms >= low
    if not strong.any():
        return np.zeros(nms.shape, dtype=bool)
    labels, n = ndimage.label(candidates, structure=np.ones((3, 3), dtype=bool))
    keep = np.zeros(n + 1, dtype=bool)
    keep[np.unique(labels[strong])] = True
    keep[0] = False
    return keep[labels]


def canny(g: np.ndarray, low: float = DEFAULT_CANNY_LOW, high: float = DEFAULT_CANNY_HIGH,
          sigma: float = CANNY_SIGMA) -> np.ndarray:
    """Canny edge map of a gray image.

    Pipeline: 5x5 Gaussian smoothing, Sobel gradients (L2 magnitude),
    non-maximum suppression, double threshold and 8-connected hysteresis.
    Thresholds apply to the Sobel magnitude of 0-255 intensities.
    """
    if not 0 <= low <= high:
        raise InvalidInput(f"canny thresholds need 0 <= low <= high, got {low}, {high}")
    g = np.asarray(g, dtype=np.float64)
    smooth = ndimage.correlate(g, gaussian_kernel(5, sigma), mode="nearest")
    gx, gy = sobel_gradients(smooth)
    mag = np.hypot(gx, gy)
    nms = non_max_suppression(mag, gx, gy)
    return hysteresis(nms, low, high)

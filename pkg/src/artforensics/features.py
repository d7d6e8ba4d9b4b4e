"""The 39 hand-crafted artwork features.

Families: brightness (2), RGB histogram statistics (13), HSV histogram
statistics (10), texture from GLCM (4) and LBP (2), shape from HOG (5) and
Canny edge length (1), and noise (2). :func:`extract_all` resizes the image
and concatenates every family in :data:`FEATURE_NAMES` order.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass

import numpy as np

from artforensics import imaging
from artforensics.errors import InvalidInput
from artforensics.stats import build_histogram, describe, shannon_entropy

FEATURE_NAMES: tuple[str, ...] = (
    "mean_brightness",
    "entropy_brightness",
    "red_mean",
    "green_mean",
    "blue_mean",
    "red_variance",
    "green_variance",
    "blue_variance",
    "red_kurtosis",
    "green_kurtosis",
    "blue_kurtosis",
    "red_skewness",
    "green_skewness",
    "blue_skewness",
    "rgb_entropy",
    "hue_variance",
    "saturation_variance",
    "value_variance",
    "hue_kurtosis",
    "saturation_kurtosis",
    "value_kurtosis",
    "hue_skewness",
    "saturation_skewness",
    "value_skewness",
    "hsv_entropy",
    "contrast",
    "correlation",
    "energy",
    "homogeneity",
    "lbp_entropy",
    "lbp_variance",
    "hog_mean",
    "hog_variance",
    "hog_kurtosis",
    "hog_skewness",
    "hog_entropy",
    "edgelen",
    "noise_entropy",
    "snr",
)

GLCM_LEVELS = 32
HOG_BINS = 9
HOG_CELL = 8
HOG_BLOCK = 2
HOG_EPS = 1e-6
HOG_ENTROPY_BINS = 64
SNR_EPS = 1e-8
SNR_CAP = 1e6


@dataclass(frozen=True)
class ExtractorConfig:
    side: int = 255
    canny_low: float = imaging.DEFAULT_CANNY_LOW
    canny_high: float = imaging.DEFAULT_CANNY_HIGH
    glcm_levels: int = GLCM_LEVELS

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        """Stable short hash identifying this configuration."""
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


# -- brightness ---------------------------------------------------------------

def extract_brightness(g: np.ndarray) -> tuple[float, float]:
    g = np.asarray(g, dtype=np.float64)
    hist = build_histogram(g, 256, (0.0, 256.0))
    return float(g.mean()), shannon_entropy(hist)


# -- colour -------------------------------------------------------------------

def extract_rgb(img: np.ndarray) -> np.ndarray:
    """13 RGB features: per-channel mean, variance, kurtosis, skewness + entropy.

    Moments are taken over pixel values, which equals the count-weighted
    moments of each channel's 256-bin histogram. ``rgb_entropy`` averages
    the three channel-histogram entropies.
    """
    rgb = np.asarray(img)
    stats = [describe(rgb[..., c]) for c in range(3)]
    entropies = [shannon_entropy(build_histogram(rgb[..., c], 256, (0.0, 256.0))) for c in range(3)]
    out = [s.mean for s in stats]
    out += [s.variance for s in stats]
    out += [s.kurtosis for s in stats]
    out += [s.skewness for s in stats]
    out.append(float(np.mean(entropies)))
    return np.array(out)


def extract_hsv(img: np.ndarray) -> np.ndarray:
    """10 HSV features: per-channel variance, kurtosis, skewness + mean entropy."""
    hsv = imaging.to_hsv(img)
    stats = [describe(hsv[..., c]) for c in range(3)]
    entropies = [shannon_entropy(build_histogram(hsv[..., c], 256, (0.0, 1.0))) for c in range(3)]
    out = [s.variance for s in stats]
    out += [s.kurtosis for s in stats]
    out += [s.skewness for s in stats]
    out.append(float(np.mean(entropies)))
    return np.array(out)


# -- texture ------------------------------------------------------------------

def quantize(g: np.ndarray, levels: int = GLCM_LEVELS) -> np.ndarray:
    """Map 0-255 intensities onto ``levels`` equal-width gray levels."""
    q = np.floor(np.asarray(g, dtype=np.float64) * (levels / 256.0)).astype(np.int64)
    return np.clip(q, 0, levels - 1)


def glcm(g: np.ndarray, levels: int = GLCM_LEVELS) -> np.ndarray:
    """Symmetric, normalised co-occurrence matrix at distance 1, angle 0."""
    g = np.asarray(g)
    if g.ndim != 2 or g.shape[1] < 2:
        raise InvalidInput("GLCM needs an image at least 2 pixels wide")
    q = quantize(g, levels)
    left = q[:, :-1].ravel()
    right = q[:, 1:].ravel()
    counts = np.bincount(left * levels + right, minlength=levels * levels).reshape(levels, levels)
    counts = counts + counts.T
    return counts / counts.sum()


def glcm_features(p: np.ndarray) -> tuple[float, float, float, float]:
    """Contrast, correlation, energy and homogeneity of a normalised GLCM.

    Correlation is defined as 1 when either marginal has zero variance.
    """
    p = np.asarray(p, dtype=np.float64)
    n = p.shape[0]
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    contrast = np.sum(p * (i - j) ** 2)
    energy = np.sqrt(np.sum(p * p))
    homogeneity = np.sum(p / (1.0 + np.abs(i - j)))
    mu_i = np.sum(p * i)
    mu_j = np.sum(p * j)
    var_i = np.sum(p * (i - mu_i) ** 2)
    var_j = np.sum(p * (j - mu_j) ** 2)
    if var_i < 1e-15 or var_j < 1e-15:
        correlation = 1.0
    else:
        correlation = np.sum(p * (i - mu_i) * (j - mu_j)) / np.sqrt(var_i * var_j)
    return float(contrast), float(correlation), float(energy), float(homogeneity)


# Clockwise from the top-left neighbour; neighbour k sets bit k.
LBP_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))


def lbp_codes(g: np.ndarray) -> np.ndarray:
    """8-neighbour, radius-1 LBP codes of the interior pixels.

    A neighbour >= the centre sets its bit, so flat regions code as 255.
    """
    g = np.asarray(g, dtype=np.float64)
    if g.ndim != 2 or g.shape[0] < 3 or g.shape[1] < 3:
        raise InvalidInput("LBP needs an image of at least 3x3 pixels")
    h, w = g.shape
    centre = g[1:-1, 1:-1]
    codes = np.zeros(centre.shape, dtype=np.int64)
    for bit, (dy, dx) in enumerate(LBP_OFFSETS):
        neighbour = g[1 + dy : h - 1 + dy, 1 + dx : w - 1 + dx]
        codes |= (neighbour >= centre).astype(np.int64) << bit
    return codes


def lbp_features(g: np.ndarray) -> tuple[float, float]:
    codes = lbp_codes(g)
    entropy = shannon_entropy(np.bincount(codes.ravel(), minlength=256))
    return entropy, describe(codes).variance


# -- shape --------------------------------------------------------------------

def hog_descriptor(g: np.ndarray) -> np.ndarray:
    """Flattened HOG descriptor.

    Centred-difference gradients (zero on the border rows/columns), 9
    unsigned orientation bins centred on 0, 20, ..., 160 degrees with
    linear vote splitting, 8x8 cells, 2x2-cell blocks with stride one cell
    and L2 normalisation. Images with a single cell along an axis use
    one-cell blocks along that axis.
    """
    g = np.asarray(g, dtype=np.float64)
    if g.ndim != 2 or g.shape[0] < HOG_CELL or g.shape[1] < HOG_CELL:
        raise InvalidInput(f"HOG needs an image of at least {HOG_CELL}x{HOG_CELL} pixels")
    gx = np.zeros_like(g)
    gy = np.zeros_like(g)
    gx[:, 1:-1] = g[:, 2:] - g[:, :-2]
    gy[1:-1, :] = g[2:, :] - g[:-2, :]
    mag = np.hypot(gx, gy)
    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0

    width = 180.0 / HOG_BINS
    pos = angle / width
    lo = np.floor(pos).astype(np.int64) % HOG_BINS
    hi = (lo + 1) % HOG_BINS
    frac = pos - np.floor(pos)

    ncy, ncx = g.shape[0] // HOG_CELL, g.shape[1] // HOG_CELL
    h_used, w_used = ncy * HOG_CELL, ncx * HOG_CELL
    cell_row = (np.arange(h_used) // HOG_CELL)[:, None]
    cell_col = (np.arange(w_used) // HOG_CELL)[None, :]
    cell_id = (cell_row * ncx + cell_col).ravel()
    m = mag[:h_used, :w_used].ravel()
    f = frac[:h_used, :w_used].ravel()
    n_cells = ncy * ncx
    hist = np.bincount(cell_id * HOG_BINS + lo[:h_used, :w_used].ravel(), weights=m * (1 - f),
                       minlength=n_cells * HOG_BINS)
    hist += np.bincount(cell_id * HOG_BINS + hi[:h_used, :w_used].ravel(), weights=m * f,
                        minlength=n_cells * HOG_BINS)
    hist = hist.reshape(ncy, ncx, HOG_BINS)

    by, bx = min(HOG_BLOCK, ncy), min(HOG_BLOCK, ncx)
    blocks = []
    for r in range(ncy - by + 1):
        for c in range(ncx - bx + 1):
            v = hist[r : r + by, c : c + bx].ravel()
            blocks.append(v / np.sqrt(np.sum(v * v) + HOG_EPS**2))
    return np.concatenate(blocks)


def hog_features(g: np.ndarray) -> tuple[float, float, float, float, float]:
    """Mean, variance, kurtosis, skewness and entropy of the HOG descriptor."""
    d = hog_descriptor(g)
    s = describe(d)
    entropy = shannon_entropy(build_histogram(d, HOG_ENTROPY_BINS, (0.0, 1.0)))
    return s.mean, s.variance, s.kurtosis, s.skewness, entropy


def edgelen(g: np.ndarray, low: float = imaging.DEFAULT_CANNY_LOW,
            high: float = imaging.DEFAULT_CANNY_HIGH) -> float:
    """Number of Canny edge pixels."""
    return float(np.count_nonzero(imaging.canny(g, low, high)))


# -- noise --------------------------------------------------------------------

def noise_features(g: np.ndarray) -> tuple[float, float]:
    """Entropy of the median-filter residual and a mean/std signal-to-noise ratio."""
    g = np.asarray(g, dtype=np.float64)
    residual = g - imaging.median3(g)
    noise_entropy = shannon_entropy(build_histogram(residual, 511, (-255.0, 255.0)))
    snr = min(g.mean() / (g.std() + SNR_EPS), SNR_CAP)
    return noise_entropy, float(snr)


# -- all ----------------------------------------------------------------------

def extract_family_features(img: np.ndarray, config: ExtractorConfig = ExtractorConfig()) -> np.ndarray:
    """Every family on ``img`` as given (no resize), in canonical order."""
    g = imaging.to_gray(img)
    out = np.concatenate([
        extract_brightness(g),
        extract_rgb(img),
        extract_hsv(img),
        glcm_features(glcm(g, config.glcm_levels)),
        lbp_features(g),
        hog_features(g),
        [edgelen(g, config.canny_low, config.canny_high)],
        noise_features(g),
    ])
    if not np.all(np.isfinite(out)):
        bad = [FEATURE_NAMES[i] for i in np.flatnonzero(~np.isfinite(out))]
        raise InvalidInput(f"non-finite features: {', '.join(bad)}")
    return out


def extract_all(img: np.ndarray, config: ExtractorConfig = ExtractorConfig()) -> np.ndarray:
    """The 39-feature vector of an RGB raster, after resizing to ``config.side``."""
    resized = imaging.resize_bilinear(img, config.side)
    return extract_family_features(resized, config)


def as_dict(vector) -> dict[str, float]:
    return dict(zip(FEATURE_NAMES, (float(v) for v in vector)))

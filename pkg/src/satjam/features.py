"""Spectrogram features for the detectors.

stft slides a window of window_len samples with a fixed hop along the
signal and takes an nfft-point forward FFT per position (no 1/N scaling,
so per window sum|segment|^2 == sum|column|^2 / nfft). to_image converts
log power to a fixed-size block-averaged image, min-max scaled to [0, 1]
per sample. The detectors never equalize; they only ever see this image.
"""

import enum
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import ConfigError, ShapeError
from .validation import check_signal

LOG_EPS = 1e-12
FLOOR_DECADES = 6.0
IMAGE_HW = (96, 96)


class WindowKind(str, enum.Enum):
    RECT = "rect"
    HANN = "hann"


@dataclass(frozen=True)
class StftPlan:
    """Analysis geometry. Default: back-to-back rectangular windows."""

    nfft: int = 1024
    window: WindowKind = WindowKind.RECT
    window_len: int = 1024
    hop: int = 1024

    def __post_init__(self):
        object.__setattr__(self, "window", WindowKind(self.window))
        if not (0 < self.hop <= self.window_len <= self.nfft):
            raise ConfigError(
                f"need 0 < hop <= window_len <= nfft, got "
                f"hop={self.hop} window_len={self.window_len} nfft={self.nfft}")

    def taper(self) -> np.ndarray:
        if self.window is WindowKind.HANN:
            return np.hanning(self.window_len)
        return np.ones(self.window_len)

    def n_columns(self, n_samples: int) -> int:
        if n_samples < self.window_len:
            raise ShapeError(
                f"signal of {n_samples} samples is shorter than the "
                f"{self.window_len}-sample analysis window")
        return (n_samples - self.window_len) // self.hop + 1


@dataclass
class SampleMeta:
    """Scenario tag carried alongside a spectrogram."""

    snr_db: float | None = None
    sjr_db: float | None = None
    attack: str = "none"
    seed: int | None = None
    split: str | None = None


@dataclass
class Spectrogram:
    """Normalized image in [0, 1], float32, plus its scenario tag."""

    pixels: np.ndarray
    meta: SampleMeta | None = None

    def __post_init__(self):
        if self.pixels.ndim != 2:
            raise ShapeError(f"pixels must be 2-D, got shape {self.pixels.shape}")


def stft(sig, plan: StftPlan | None = None) -> np.ndarray:
    """Complex time-frequency matrix, shape (nfft, n_columns)."""
    plan = plan or StftPlan()
    samples = check_signal(sig)
    n_cols = plan.n_columns(len(samples))
    segments = sliding_window_view(samples, plan.window_len)[::plan.hop][:n_cols]
    segments = segments * plan.taper()
    return np.fft.fft(segments, n=plan.nfft, axis=-1).T


def _pool_mean(a: np.ndarray, out_hw: tuple[int, int]) -> np.ndarray:
    """Block-average to out_hw. Blocks are near-equal contiguous runs; when a
    dimension is smaller than the target the nearest entry is replicated."""
    for axis, size in enumerate(out_hw):
        n = a.shape[axis]
        starts = (np.arange(size) * n) // size
        sums = np.add.reduceat(a, starts, axis=axis)
        counts = np.maximum(np.diff(np.append(starts, n)), 1)
        shape = [1, 1]
        shape[axis] = size
        a = sums / counts.reshape(shape)
    return a


def to_image(s: np.ndarray, meta: SampleMeta | None = None,
             out_hw: tuple[int, int] = IMAGE_HW,
             floor_decades: float | None = FLOOR_DECADES) -> Spectrogram:
    """Log power, block-averaged to out_hw, min-max scaled to [0, 1].

    floor_decades clips the log power at (per-sample max - floor_decades)
    before pooling, so the usable range is a fixed number of decades below
    the strongest bin instead of running down to the eps floor. Structural
    nulls in the band otherwise pin the min near log10(eps) and crush the
    in-band contrast the detectors rely on. None disables the clip.

    An all-equal pooled image (min == max) degenerates to all zeros.
    """
    s = np.asarray(s)
    if s.ndim != 2 or s.size == 0:
        raise ShapeError(f"expected a nonempty 2-D matrix, got shape {s.shape}")
    log_power = np.log10(np.abs(s) ** 2 + LOG_EPS)
    if floor_decades is not None:
        if not floor_decades > 0 or not np.isfinite(floor_decades):
            raise ConfigError(f"floor_decades must be finite and > 0, "
                              f"got {floor_decades}")
        np.maximum(log_power, log_power.max() - floor_decades, out=log_power)
    pooled = _pool_mean(log_power, out_hw)
    lo, hi = pooled.min(), pooled.max()
    if lo == hi:
        pixels = np.zeros(out_hw, dtype=np.float32)
    else:
        pixels = np.clip((pooled - lo) / (hi - lo), 0.0, 1.0).astype(np.float32)
    return Spectrogram(pixels, meta)


def write_pgm(image, path) -> None:
    """8-bit binary PGM export of a [0, 1] image."""
    pixels = np.asarray(getattr(image, "pixels", image))
    if pixels.ndim != 2:
        raise ShapeError(f"PGM export needs a 2-D image, got shape {pixels.shape}")
    gray = np.rint(np.clip(pixels, 0.0, 1.0) * 255).astype(np.uint8)
    header = f"P5\n{gray.shape[1]} {gray.shape[0]}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header + gray.tobytes())


class SpectrogramFeaturizer(BaseEstimator, TransformerMixin):
    """Stateless transformer from sample streams to normalized images.

    transform accepts a sequence of 1-D complex sample arrays (or objects
    with a .samples attribute) and returns a float32 batch (n, 96, 96).
    """

    def __init__(self, plan: StftPlan | None = None, out_hw: tuple[int, int] = IMAGE_HW,
                 floor_decades: float | None = FLOOR_DECADES):
        self.plan = plan
        self.out_hw = out_hw
        self.floor_decades = floor_decades

    def fit(self, X=None, y=None):
        return self

    def transform(self, X) -> np.ndarray:
        plan = self.plan or StftPlan()
        images = [to_image(stft(sig, plan), out_hw=self.out_hw,
                           floor_decades=self.floor_decades).pixels for sig in X]
        if not images:
            return np.zeros((0,) + tuple(self.out_hw), dtype=np.float32)
        return np.stack(images)

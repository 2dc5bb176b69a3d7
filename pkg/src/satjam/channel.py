"""Block-fading Rician channel and receiver noise.

Each frame sees one complex gain
    h = sqrt(K/(K+1)) * exp(j*theta) + sqrt(1/(K+1)) * CN(0, 1)
with theta uniform on [0, 2*pi), so E|h|^2 == 1 for every K. Noise is
circularly-symmetric complex Gaussian added on occupied REs only; the
null carriers stay exactly zero through the whole receive chain.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError
from .validation import RngLike, as_rng, check_positive_int
from .waveform import FrameGrid


@dataclass(frozen=True)
class NoiseSpec:
    """Noise level tied to a signal power: sigma_n_sq = P_s / 10^(snr_db/10)."""

    snr_db: float
    sigma_n_sq: float

    @classmethod
    def from_snr(cls, snr_db: float, signal_power: float = 1.0) -> "NoiseSpec":
        if signal_power <= 0 or not np.isfinite(signal_power):
            raise DomainError(f"signal_power must be finite and > 0, got {signal_power}")
        return cls(float(snr_db), signal_power / 10.0 ** (snr_db / 10.0))


@dataclass
class ChannelRealization:
    """One complex gain per frame, plus the K factor that produced it."""

    gains: np.ndarray
    k_factor: float

    def __post_init__(self):
        self.gains = np.atleast_1d(np.asarray(self.gains, dtype=np.complex128))


def draw_rician(k_factor: float, n_frames: int = 1, seed: RngLike = None) -> ChannelRealization:
    """Draw i.i.d. per-frame gains. k_factor is linear; math.inf gives |h| == 1."""
    if not (k_factor >= 0):
        raise DomainError(f"k_factor must be >= 0, got {k_factor}")
    check_positive_int("n_frames", n_frames)
    rng = as_rng(seed)
    theta = rng.uniform(0.0, 2.0 * math.pi, size=n_frames)
    los = np.exp(1j * theta)
    if math.isinf(k_factor):
        return ChannelRealization(los, k_factor)
    scatter = (rng.standard_normal(n_frames) + 1j * rng.standard_normal(n_frames)) / math.sqrt(2)
    gains = math.sqrt(k_factor / (k_factor + 1.0)) * los \
        + math.sqrt(1.0 / (k_factor + 1.0)) * scatter
    return ChannelRealization(gains, k_factor)


def apply_channel(grid: FrameGrid, ch: ChannelRealization) -> FrameGrid:
    """Multiply every RE of frame i by gains[i]."""
    if len(ch.gains) != grid.layout.frames_per_sample:
        raise ShapeError(
            f"{len(ch.gains)} gains for {grid.layout.frames_per_sample} frames")
    return FrameGrid(grid.units * ch.gains[:, None, None], grid.layout)


def add_awgn(grid: FrameGrid, snr_db: float | None, seed: RngLike = None) -> FrameGrid:
    """Add CN(0, sigma_n_sq) on occupied REs, calibrated to the grid at hand.

    sigma_n_sq follows NoiseSpec with P_s measured as the mean occupied-RE
    power of the incoming grid (exactly 1 for a freshly built grid). Passing
    snr_db None or +inf is a no-noise sentinel and returns a copy unchanged.
    """
    out = grid.copy()
    if snr_db is None or snr_db == math.inf:
        return out
    if not np.isfinite(snr_db):
        raise DomainError(f"snr_db must be finite or +inf, got {snr_db}")
    occupied = out.occupied()
    power = float(np.mean(np.abs(occupied) ** 2))
    if power == 0.0:
        raise DomainError("cannot calibrate noise against an all-zero grid")
    spec = NoiseSpec.from_snr(snr_db, power)
    rng = as_rng(seed)
    scale = math.sqrt(spec.sigma_n_sq / 2.0)
    noise = scale * (rng.standard_normal(occupied.shape)
                     + 1j * rng.standard_normal(occupied.shape))
    occupied += noise
    return out

"""OFDM frame-grid synthesis for the simulated telemetry downlink.

A sample is M frames of Q OFDM symbols over N subcarriers. The occupied
band sits in the middle of the grid with the null carriers split across
both edges. Within the occupied band, comb pilots take every l-th
subcarrier at a fixed residue (k mod l == pilot_phase) and carry the
all-ones sequence; the remaining subcarriers carry random BPSK data.
Average occupied-RE power is exactly 1 by construction.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, ShapeError
from .validation import RngLike, as_rng, check_positive_int, check_signal


@dataclass(frozen=True)
class WaveformConfig:
    """Grid geometry. Defaults give the reference parameter set."""

    n_subcarriers: int = 1024
    n_occupied: int = 705
    pilot_interval: int = 8
    pilot_phase: int = 4
    n_pilots: int = 88
    guard_len: int = 64
    symbols_per_frame: int = 60
    frames_per_sample: int = 10
    modulation: str = "bpsk"

    def __post_init__(self):
        for name in ("n_subcarriers", "n_occupied", "pilot_interval",
                     "symbols_per_frame", "frames_per_sample"):
            check_positive_int(name, getattr(self, name))
        if self.guard_len < 0 or self.guard_len > self.n_subcarriers:
            raise ConfigError(f"guard_len must be in [0, n_subcarriers], got {self.guard_len}")
        if self.n_occupied > self.n_subcarriers:
            raise ConfigError("n_occupied cannot exceed n_subcarriers")
        if not 0 <= self.pilot_phase < self.pilot_interval:
            raise ConfigError("pilot_phase must satisfy 0 <= phase < pilot_interval")
        if self.modulation != "bpsk":
            raise ConfigError(f"unsupported modulation {self.modulation!r}")
        n_pilots = len(range(self.pilot_phase, self.n_occupied, self.pilot_interval))
        if n_pilots != self.n_pilots:
            raise ConfigError(
                f"n_pilots={self.n_pilots} inconsistent with comb "
                f"(k mod {self.pilot_interval} == {self.pilot_phase}) over "
                f"{self.n_occupied} occupied subcarriers, which has {n_pilots}")

    @property
    def pilot_positions(self) -> np.ndarray:
        """Occupied-band indices of the pilot comb."""
        return np.arange(self.pilot_phase, self.n_occupied, self.pilot_interval)

    @property
    def null_left(self) -> int:
        """Null carriers left of the occupied band (gets the odd one out)."""
        return (self.n_subcarriers - self.n_occupied + 1) // 2

    @property
    def null_right(self) -> int:
        return self.n_subcarriers - self.n_occupied - self.null_left

    @property
    def occupied_slice(self) -> slice:
        return slice(self.null_left, self.null_left + self.n_occupied)

    @property
    def samples_per_symbol(self) -> int:
        return self.n_subcarriers + self.guard_len

    @property
    def total_symbols(self) -> int:
        return self.frames_per_sample * self.symbols_per_frame

    @property
    def sample_len(self) -> int:
        return self.total_symbols * self.samples_per_symbol

    def with_frames(self, frames_per_sample: int) -> "WaveformConfig":
        return replace(self, frames_per_sample=frames_per_sample)


@dataclass
class FrameGrid:
    """Frequency-domain resource grid, complex units[frame][symbol][subcarrier]."""

    units: np.ndarray
    layout: WaveformConfig = field(default_factory=WaveformConfig)

    def __post_init__(self):
        expected = (self.layout.frames_per_sample,
                    self.layout.symbols_per_frame,
                    self.layout.n_subcarriers)
        if self.units.shape != expected:
            raise ShapeError(f"grid shape {self.units.shape} does not match layout {expected}")

    @property
    def pilot_mask(self) -> np.ndarray:
        """Boolean mask over the occupied band, True at pilot subcarriers."""
        mask = np.zeros(self.layout.n_occupied, dtype=bool)
        mask[self.layout.pilot_positions] = True
        return mask

    def occupied(self) -> np.ndarray:
        """View of the occupied band, shape (frames, symbols, n_occupied)."""
        return self.units[..., self.layout.occupied_slice]

    def copy(self) -> "FrameGrid":
        return FrameGrid(self.units.copy(), self.layout)


@dataclass
class TimeSignal:
    """Baseband sample stream produced from a grid."""

    samples: np.ndarray
    layout: WaveformConfig = field(default_factory=WaveformConfig)

    def __len__(self) -> int:
        return len(self.samples)


def build_grid(cfg: WaveformConfig, seed: RngLike = None) -> FrameGrid:
    """Draw a fresh grid: all-ones pilots, random BPSK data, zero nulls."""
    rng = as_rng(seed)
    m, q = cfg.frames_per_sample, cfg.symbols_per_frame
    occupied = np.empty((m, q, cfg.n_occupied), dtype=np.complex128)
    data_mask = np.ones(cfg.n_occupied, dtype=bool)
    data_mask[cfg.pilot_positions] = False
    bits = rng.integers(0, 2, size=(m, q, int(data_mask.sum())))
    occupied[..., data_mask] = 1.0 - 2.0 * bits
    occupied[..., ~data_mask] = 1.0
    units = np.zeros((m, q, cfg.n_subcarriers), dtype=np.complex128)
    units[..., cfg.occupied_slice] = occupied
    return FrameGrid(units, cfg)


def ofdm_modulate(grid: FrameGrid) -> TimeSignal:
    """Unitary IFFT per symbol, cyclic prefix prepended, symbols concatenated.

    The prefix is a copy of the last guard_len samples of the symbol body,
    so each emitted symbol spans n_subcarriers + guard_len samples.
    """
    cfg = grid.layout
    body = np.fft.ifft(grid.units, axis=-1, norm="ortho")
    prefix = body[..., cfg.n_subcarriers - cfg.guard_len:]
    symbols = np.concatenate([prefix, body], axis=-1)
    return TimeSignal(symbols.reshape(-1), cfg)


def demodulate_grid(sig: TimeSignal | np.ndarray, cfg: WaveformConfig) -> FrameGrid:
    """Strip prefixes and apply the unitary forward FFT per symbol."""
    samples = check_signal(sig)
    if len(samples) != cfg.sample_len:
        raise ShapeError(
            f"signal length {len(samples)} does not match layout length {cfg.sample_len}")
    symbols = samples.reshape(cfg.frames_per_sample, cfg.symbols_per_frame,
                              cfg.samples_per_symbol)
    body = symbols[..., cfg.guard_len:]
    return FrameGrid(np.fft.fft(body, axis=-1, norm="ortho"), cfg)

"""Jamming attacks on the resource grid.

Attacks live in the frequency domain and touch occupied REs only. The
received grid is

    Y = H1 * X + W + H2 * J

where J is nonzero on the attack's active set. Active-set shapes:

* barrage: every occupied RE of every symbol,
* pilot_tone: exactly the pilot comb of every symbol,
* intermittent: subcarriers k with k mod freq_period == freq_phase on
  symbols m with m mod time_period == time_phase, m counted across the
  whole sample.

Jam values are i.i.d. CN(0, sigma_sq) with sigma_sq set so that the mean
active-RE jam power over unit signal power hits the requested SJR.
"""

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, DomainError, ShapeError
from .channel import ChannelRealization
from .validation import RngLike, as_rng
from .waveform import FrameGrid, WaveformConfig


class AttackKind(str, enum.Enum):
    NONE = "none"
    BARRAGE = "barrage"
    PILOT_TONE = "pilot_tone"
    INTERMITTENT = "intermittent"


@dataclass(frozen=True)
class AttackSpec:
    """One attack scenario: what to hit and how hard."""

    kind: AttackKind = AttackKind.NONE
    sjr_db: float = 0.0
    freq_period: int = 8
    freq_phase: int = 4
    time_period: int = 10
    time_phase: int = 5

    def __post_init__(self):
        object.__setattr__(self, "kind", AttackKind(self.kind))
        if self.freq_period <= 0 or not 0 <= self.freq_phase < self.freq_period:
            raise ConfigError("need 0 <= freq_phase < freq_period")
        if self.time_period <= 0 or not 0 <= self.time_phase < self.time_period:
            raise ConfigError("need 0 <= time_phase < time_period")
        if not np.isfinite(self.sjr_db):
            raise ConfigError(f"sjr_db must be finite, got {self.sjr_db}")

    def with_scenario(self, kind, sjr_db: float) -> "AttackSpec":
        return replace(self, kind=AttackKind(kind), sjr_db=float(sjr_db))


@dataclass
class JammingPattern:
    """Active-set mask and drawn jam values over (symbol, occupied subcarrier)."""

    mask: np.ndarray
    values: np.ndarray
    sigma_sq: float

    def __post_init__(self):
        if self.mask.shape != self.values.shape:
            raise ShapeError("mask and values must share a shape")


def build_mask(spec: AttackSpec, cfg: WaveformConfig) -> np.ndarray:
    """Boolean active set, shape (total_symbols, n_occupied)."""
    mask = np.zeros((cfg.total_symbols, cfg.n_occupied), dtype=bool)
    if spec.kind is AttackKind.NONE:
        return mask
    if spec.kind is AttackKind.BARRAGE:
        mask[:] = True
    elif spec.kind is AttackKind.PILOT_TONE:
        mask[:, cfg.pilot_positions] = True
    elif spec.kind is AttackKind.INTERMITTENT:
        subcarriers = np.arange(spec.freq_phase, cfg.n_occupied, spec.freq_period)
        symbols = np.arange(spec.time_phase, cfg.total_symbols, spec.time_period)
        mask[np.ix_(symbols, subcarriers)] = True
    else:  # pragma: no cover - enum is closed
        raise DomainError(f"unknown attack kind {spec.kind!r}")
    return mask


def calibrate_power(mask: np.ndarray, grid_power: float, sjr_db: float) -> float:
    """Per-RE jam variance sigma_sq = grid_power / 10^(sjr_db/10)."""
    if not mask.any():
        raise DomainError("cannot calibrate jam power for an empty active set")
    if grid_power <= 0 or not np.isfinite(grid_power):
        raise DomainError(f"grid_power must be finite and > 0, got {grid_power}")
    if not np.isfinite(sjr_db):
        raise DomainError(f"sjr_db must be finite, got {sjr_db}")
    return grid_power / 10.0 ** (sjr_db / 10.0)


def draw_pattern(spec: AttackSpec, cfg: WaveformConfig, seed: RngLike = None,
                 grid_power: float = 1.0) -> JammingPattern:
    """Build the active set and draw i.i.d. CN(0, sigma_sq) jam values on it."""
    mask = build_mask(spec, cfg)
    values = np.zeros(mask.shape, dtype=np.complex128)
    if spec.kind is AttackKind.NONE:
        return JammingPattern(mask, values, 0.0)
    sigma_sq = calibrate_power(mask, grid_power, spec.sjr_db)
    rng = as_rng(seed)
    count = int(mask.sum())
    scale = math.sqrt(sigma_sq / 2.0)
    values[mask] = scale * (rng.standard_normal(count) + 1j * rng.standard_normal(count))
    return JammingPattern(mask, values, sigma_sq)


def apply_attack(clean: FrameGrid, pattern: JammingPattern,
                 h2: ChannelRealization) -> FrameGrid:
    """Return clean + h2-scaled jam values; off-mask REs are untouched."""
    cfg = clean.layout
    if pattern.mask.shape != (cfg.total_symbols, cfg.n_occupied):
        raise ShapeError(
            f"pattern shape {pattern.mask.shape} does not match grid "
            f"({cfg.total_symbols}, {cfg.n_occupied})")
    if len(h2.gains) != cfg.frames_per_sample:
        raise ShapeError(f"{len(h2.gains)} gains for {cfg.frames_per_sample} frames")
    out = clean.copy()
    jam = pattern.values.reshape(cfg.frames_per_sample, cfg.symbols_per_frame,
                                 cfg.n_occupied)
    out.occupied()[...] += h2.gains[:, None, None] * jam
    return out

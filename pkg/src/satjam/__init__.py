"""satjam: OFDM jamming simulation and learning-driven jammer detection.

The package simulates a pilot-aided OFDM downlink under block Rician
fading, injects frequency-domain jamming attacks (barrage, pilot-tone,
intermittent), turns received samples into normalized spectrogram
images, and trains two detectors on them: a small CNN and a principal
components + linear SVM pipeline, both written from scratch on numpy.
"""

__version__ = "0.1.0"

from .channel import ChannelRealization, NoiseSpec, add_awgn, apply_channel, draw_rician
from .dataset import (ScenarioSpec, SpectrogramDataset, generate, load, save,
                      synthesize_sample)
from .detectors import (CnnArch, CnnDetector, PcaSvmDetector, TrainConfig,
                        load_model, save_model, write_trace_csv)
from .errors import (ConfigError, DomainError, FormatError, SatjamError,
                     ShapeError, TrainingError)
from .features import (SampleMeta, Spectrogram, SpectrogramFeaturizer, StftPlan,
                       WindowKind, stft, to_image, write_pgm)
from .jammer import (AttackKind, AttackSpec, JammingPattern, apply_attack,
                     build_mask, calibrate_power, draw_pattern)
from .waveform import (FrameGrid, TimeSignal, WaveformConfig, build_grid,
                       demodulate_grid, ofdm_modulate)

__all__ = [
    "__version__",
    "ChannelRealization", "NoiseSpec", "add_awgn", "apply_channel", "draw_rician",
    "ScenarioSpec", "SpectrogramDataset", "generate", "load", "save",
    "synthesize_sample",
    "CnnArch", "CnnDetector", "PcaSvmDetector", "TrainConfig",
    "load_model", "save_model", "write_trace_csv",
    "ConfigError", "DomainError", "FormatError", "SatjamError", "ShapeError",
    "TrainingError",
    "SampleMeta", "Spectrogram", "SpectrogramFeaturizer", "StftPlan", "WindowKind",
    "stft", "to_image", "write_pgm",
    "AttackKind", "AttackSpec", "JammingPattern", "apply_attack", "build_mask",
    "calibrate_power", "draw_pattern",
    "FrameGrid", "TimeSignal", "WaveformConfig", "build_grid", "demodulate_grid",
    "ofdm_modulate",
]

"""Labeled spectrogram datasets: generation, file format, splits.

Every sample runs the full chain grid -> fading -> noise -> (optional
attack) -> time signal -> spectrogram. Per-sample randomness comes from
SeedSequence([seed, namespace, index]) with namespace 0 for the train
partition and 1 for test, so the two partitions can never share a stream
and regeneration is byte-identical regardless of worker count.

On disk a dataset is a single "SJD1" file:

    magic "SJD1" | version u8 | n_samples u32 | height u32 | width u32
    | float32 pixel payload (C order) | u8 labels | manifest_len u32
    | manifest JSON | crc32 u32 over all preceding bytes

All integers are little-endian. The manifest carries scenario provenance
and one row per sample (split, label, snr, sjr, attack, seed).
"""

import json
import struct
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .channel import add_awgn, apply_channel, draw_rician
from .errors import ConfigError, FormatError, ShapeError
from .features import (FLOOR_DECADES, IMAGE_HW, LOG_EPS, SampleMeta,
                       Spectrogram, StftPlan, stft, to_image)
from .jammer import AttackKind, AttackSpec, apply_attack, draw_pattern
from .validation import check_positive_int, resolve_n_jobs
from .waveform import WaveformConfig, build_grid, ofdm_modulate

MAGIC = b"SJD1"
VERSION = 1
TRAIN_NAMESPACE = 0
TEST_NAMESPACE = 1
_SPLIT_NAMESPACES = {"train": TRAIN_NAMESPACE, "test": TEST_NAMESPACE}


@dataclass(frozen=True)
class ScenarioSpec:
    """What to generate: SNR/SJR grids, attack mix, partition sizes, seed."""

    snr_levels: tuple = (15.0,)
    sjr_levels: tuple = (-20.0, -15.0, -10.0, -5.0, 0.0)
    attack_kinds: tuple = ("barrage", "pilot_tone", "intermittent")
    n_train: int = 400
    n_test: int = 400
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "snr_levels", tuple(float(v) for v in self.snr_levels))
        object.__setattr__(self, "sjr_levels", tuple(float(v) for v in self.sjr_levels))
        object.__setattr__(self, "attack_kinds",
                           tuple(AttackKind(k) for k in self.attack_kinds))
        check_positive_int("n_train", self.n_train)
        check_positive_int("n_test", self.n_test)
        if not self.snr_levels:
            raise ConfigError("need at least one SNR level")
        if AttackKind.NONE in self.attack_kinds:
            raise ConfigError("attack_kinds lists attacks only; clean samples are implicit")
        jammed_budget = max(self.n_train, self.n_test) // 2
        if jammed_budget > 0 and (not self.attack_kinds or not self.sjr_levels):
            raise ConfigError("jammed samples requested but no attack kinds or SJR levels")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["snr_levels"] = list(self.snr_levels)
        d["sjr_levels"] = list(self.sjr_levels)
        d["attack_kinds"] = [k.value for k in self.attack_kinds]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSpec":
        return cls(**d)


def sample_plan(spec: ScenarioSpec, index: int) -> tuple[int, float, AttackKind, float | None]:
    """Deterministic per-index assignment: (label, snr, kind, sjr).

    Even indices are clean; odd indices cycle over attack_kinds x sjr_levels
    (kind-major), so each cell gets an equal share. SNR cycles by index.
    """
    snr = spec.snr_levels[index % len(spec.snr_levels)]
    if index % 2 == 0:
        return 0, snr, AttackKind.NONE, None
    j = index // 2
    cells = [(k, s) for k in spec.attack_kinds for s in spec.sjr_levels]
    kind, sjr = cells[j % len(cells)]
    return 1, snr, kind, sjr


def derive_sample_seed(root_seed: int, split: str, index: int) -> int:
    """Stable 64-bit stream id recorded in the manifest."""
    ss = np.random.SeedSequence([root_seed, _SPLIT_NAMESPACES[split], index])
    return int(ss.generate_state(1, np.uint64)[0])


def synthesize_sample(wave: WaveformConfig, k_factor: float, snr_db: float,
                      attack: AttackSpec | None, plan: StftPlan,
                      seed_key) -> Spectrogram:
    """Run the full chain for one sample. seed_key feeds a SeedSequence."""
    ss = np.random.SeedSequence(seed_key)
    s_grid, s_h1, s_noise, s_h2, s_jam = ss.spawn(5)
    grid = build_grid(wave, np.random.default_rng(s_grid))
    h1 = draw_rician(k_factor, wave.frames_per_sample, np.random.default_rng(s_h1))
    rx = add_awgn(apply_channel(grid, h1), snr_db, np.random.default_rng(s_noise))
    if attack is not None and attack.kind is not AttackKind.NONE:
        pattern = draw_pattern(attack, wave, np.random.default_rng(s_jam))
        h2 = draw_rician(k_factor, wave.frames_per_sample, np.random.default_rng(s_h2))
        rx = apply_attack(rx, pattern, h2)
    return to_image(stft(ofdm_modulate(rx), plan))


def _build_one(task: tuple) -> np.ndarray:
    wave, k_factor, snr, attack, plan, seed_key = task
    return synthesize_sample(wave, k_factor, snr, attack, plan, seed_key).pixels


class SpectrogramDataset:
    """In-memory dataset: pixel batch, labels, and a provenance manifest."""

    def __init__(self, pixels: np.ndarray, labels: np.ndarray, manifest: dict):
        pixels = np.asarray(pixels, dtype=np.float32)
        labels = np.asarray(labels, dtype=np.uint8)
        if pixels.ndim != 3:
            raise ShapeError(f"pixels must be (n, h, w), got shape {pixels.shape}")
        if labels.shape != (pixels.shape[0],):
            raise ShapeError("one label per sample required")
        rows = manifest.get("samples", [])
        if len(rows) != pixels.shape[0]:
            raise ShapeError(
                f"manifest has {len(rows)} rows for {pixels.shape[0]} samples")
        for row, label in zip(rows, labels):
            if int(row["label"]) != int(label):
                raise ShapeError("manifest labels disagree with the label array")
        self.pixels = pixels
        self.labels = labels
        self.manifest = manifest

    def __len__(self) -> int:
        return self.pixels.shape[0]

    @property
    def samples(self) -> list[dict]:
        return self.manifest.get("samples", [])

    def subset(self, idx) -> "SpectrogramDataset":
        idx = np.asarray(idx, dtype=int)
        manifest = dict(self.manifest)
        manifest["samples"] = [self.samples[i] for i in idx]
        return SpectrogramDataset(self.pixels[idx], self.labels[idx], manifest)

    def split(self, name: str) -> "SpectrogramDataset":
        if name not in _SPLIT_NAMESPACES:
            raise ConfigError(f"unknown split {name!r}")
        idx = [i for i, row in enumerate(self.samples) if row["split"] == name]
        return self.subset(idx)

    def meta(self, i: int) -> SampleMeta:
        row = self.samples[i]
        return SampleMeta(snr_db=row["snr_db"], sjr_db=row["sjr_db"],
                          attack=row["attack"], seed=row["seed"], split=row["split"])


def generate(spec: ScenarioSpec, wave: WaveformConfig | None = None,
             k_factor: float = 5.0, attack_defaults: AttackSpec | None = None,
             plan: StftPlan | None = None, n_jobs: int | None = None) -> SpectrogramDataset:
    """Generate both partitions of a scenario.

    attack_defaults supplies the pattern geometry (periods/phases); its
    kind and sjr_db fields are overridden per sample by the round-robin.
    """
    wave = wave or WaveformConfig()
    plan = plan or StftPlan()
    attack_defaults = attack_defaults or AttackSpec()
    tasks, rows, labels = [], [], []
    for split, count in (("train", spec.n_train), ("test", spec.n_test)):
        for index in range(count):
            label, snr, kind, sjr = sample_plan(spec, index)
            attack = None
            if label:
                attack = attack_defaults.with_scenario(kind, sjr)
            seed_key = [spec.seed, _SPLIT_NAMESPACES[split], index]
            tasks.append((wave, k_factor, snr, attack, plan, seed_key))
            labels.append(label)
            rows.append({
                "index": index,
                "split": split,
                "label": label,
                "snr_db": snr,
                "sjr_db": sjr,
                "attack": kind.value,
                "seed": derive_sample_seed(spec.seed, split, index),
            })
    n_jobs = resolve_n_jobs(n_jobs)
    if n_jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            chunk = max(1, len(tasks) // (4 * n_jobs))
            images = list(pool.map(_build_one, tasks, chunksize=chunk))
    else:
        images = [_build_one(t) for t in tasks]
    pixels = np.stack(images) if images else np.zeros((0,) + IMAGE_HW, np.float32)
    manifest = {
        "scenario": spec.to_dict(),
        "waveform": asdict(wave),
        "k_factor": k_factor,
        "stft": {"nfft": plan.nfft, "window": plan.window.value,
                 "window_len": plan.window_len, "hop": plan.hop},
        "image": {"height": IMAGE_HW[0], "width": IMAGE_HW[1],
                  "log_eps": LOG_EPS, "floor_decades": FLOOR_DECADES},
        "attack_pattern": {"freq_period": attack_defaults.freq_period,
                           "freq_phase": attack_defaults.freq_phase,
                           "time_period": attack_defaults.time_period,
                           "time_phase": attack_defaults.time_phase},
        "samples": rows,
    }
    return SpectrogramDataset(pixels, np.asarray(labels, np.uint8), manifest)


def _canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def save(ds: SpectrogramDataset, path) -> None:
    """Write the SJD1 container. Identical datasets produce identical bytes."""
    n, h, w = ds.pixels.shape
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<B", VERSION)
    blob += struct.pack("<III", n, h, w)
    blob += np.ascontiguousarray(ds.pixels, dtype="<f4").tobytes()
    blob += ds.labels.astype(np.uint8).tobytes()
    manifest = _canonical_json(ds.manifest)
    blob += struct.pack("<I", len(manifest))
    blob += manifest
    blob += struct.pack("<I", zlib.crc32(bytes(blob)) & 0xFFFFFFFF)
    with open(path, "wb") as fh:
        fh.write(bytes(blob))


def _need(data: bytes, offset: int, count: int) -> int:
    if offset + count > len(data):
        raise FormatError(
            f"file truncated: needed {count} bytes", min(len(data), offset))
    return offset + count


def load(path) -> SpectrogramDataset:
    """Read and verify an SJD1 container."""
    with open(path, "rb") as fh:
        data = fh.read()
    _need(data, 0, 4)
    if data[:4] != MAGIC:
        raise FormatError(f"bad magic {data[:4]!r}, expected {MAGIC!r}", 0)
    _need(data, 4, 1)
    version = data[4]
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", 4)
    off = _need(data, 5, 12)
    n, h, w = struct.unpack_from("<III", data, 5)
    pix_off, off = off, _need(data, off, 4 * n * h * w)
    lab_off, off = off, _need(data, off, n)
    len_off, off = off, _need(data, off, 4)
    (manifest_len,) = struct.unpack_from("<I", data, len_off)
    man_off, off = off, _need(data, off, manifest_len)
    crc_off, off = off, _need(data, off, 4)
    if off != len(data):
        raise FormatError(f"{len(data) - off} trailing bytes after checksum", off)
    (stored_crc,) = struct.unpack_from("<I", data, crc_off)
    actual_crc = zlib.crc32(data[:crc_off]) & 0xFFFFFFFF
    if stored_crc != actual_crc:
        raise FormatError(
            f"checksum mismatch: stored {stored_crc:#010x}, computed {actual_crc:#010x}",
            crc_off)
    pixels = np.frombuffer(data, dtype="<f4", count=n * h * w,
                           offset=pix_off).reshape(n, h, w).copy()
    labels = np.frombuffer(data, dtype=np.uint8, count=n, offset=lab_off).copy()
    try:
        manifest = json.loads(data[man_off:man_off + manifest_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"manifest is not valid JSON: {exc}", man_off) from None
    return SpectrogramDataset(pixels, labels, manifest)

"""Command-line front end.

    satjam generate|train|evaluate|export-spectrogram|reproduce
           --config FILE [--full-scale] [--seed N] [--out DIR]

All outputs land under the output directory with the resolved config
snapshot beside them. Reports are byte-deterministic for a given config
and seed; wall-clock timings go to timings.json. SATJAM_THREADS caps
generation parallelism. Exit codes: 0 success, 2 configuration error,
3 file-format error, 4 training error, 1 anything else.
"""

import argparse
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

from . import __version__, dataset as dataset_mod
from .dataset import (ScenarioSpec, SpectrogramDataset,
                      generate as generate_dataset, sample_plan,
                      synthesize_sample)
from .detectors import (CnnArch, CnnDetector, PcaSvmDetector, TrainConfig,
                        load_model, save_model, write_trace_csv)
from .errors import ConfigError, FormatError, SatjamError, TrainingError
from .features import StftPlan, write_pgm
from .jammer import AttackSpec
from .report import (REFERENCE_ACCURACY, REFERENCE_SNRS_DB, build_report,
                     evaluate_detector, format_accuracy_table, save_report)
from .waveform import WaveformConfig

DESK_SCALE = {"n_train": 400, "n_test": 400, "frames_per_sample": 2}
FULL_SCALE = {
    "all_attacks": {"n_train": 6000, "n_test": 9000, "frames_per_sample": 10},
    "intermittent_only": {"n_train": 2000, "n_test": 3000, "frames_per_sample": 10},
}
FAMILY_KINDS = {
    "all_attacks": ("barrage", "pilot_tone", "intermittent"),
    "intermittent_only": ("intermittent",),
}


def _build(cls, section: dict, name: str):
    try:
        return cls(**section)
    except TypeError as exc:
        raise ConfigError(f"bad {name} section: {exc}") from None


class ExperimentConfig:
    """Resolved experiment description, built from a JSON file plus defaults."""

    def __init__(self, raw: dict):
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
        known = {"scenario", "waveform", "k_factor", "attack_pattern", "stft",
                 "detector", "train", "svm", "output_dir", "dataset", "model"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        self.scenario = _build(ScenarioSpec, raw.get("scenario", {}), "scenario")
        self.waveform = _build(WaveformConfig, raw.get("waveform", {}), "waveform")
        self.k_factor = float(raw.get("k_factor", 5.0))
        if not (self.k_factor >= 0):
            raise ConfigError(f"k_factor must be >= 0, got {self.k_factor}")
        self.attack_pattern = _build(AttackSpec, raw.get("attack_pattern", {}),
                                     "attack_pattern")
        self.stft = _build(StftPlan, raw.get("stft", {}), "stft")
        self.detector = raw.get("detector", "cnn")
        if self.detector not in ("cnn", "pca_svm"):
            raise ConfigError(f"detector must be 'cnn' or 'pca_svm', got {self.detector!r}")
        self.train = _build(TrainConfig, raw.get("train", {}), "train")
        svm = dict(raw.get("svm", {}))
        svm_known = {"n_components", "C", "epochs", "seed"}
        if set(svm) - svm_known:
            raise ConfigError(f"unknown svm keys: {sorted(set(svm) - svm_known)}")
        self.svm = {"n_components": int(svm.get("n_components", 45)),
                    "C": float(svm.get("C", 1.0)),
                    "epochs": int(svm.get("epochs", 200)),
                    "seed": int(svm.get("seed", 0))}
        self.output_dir = Path(raw.get("output_dir", "runs/satjam"))
        self.dataset_path = raw.get("dataset")
        self.model_path = raw.get("model")

    def snapshot(self) -> dict:
        return {
            "scenario": self.scenario.to_dict(),
            "waveform": asdict(self.waveform),
            "k_factor": self.k_factor,
            "attack_pattern": {
                "freq_period": self.attack_pattern.freq_period,
                "freq_phase": self.attack_pattern.freq_phase,
                "time_period": self.attack_pattern.time_period,
                "time_phase": self.attack_pattern.time_phase,
            },
            "stft": {"nfft": self.stft.nfft, "window": self.stft.window.value,
                     "window_len": self.stft.window_len, "hop": self.stft.hop},
            "detector": self.detector,
            "train": asdict(self.train),
            "svm": dict(self.svm),
            "output_dir": str(self.output_dir),
        }


def load_config(path: str | None, seed: int | None = None,
                out: str | None = None) -> ExperimentConfig:
    raw = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file {p} does not exist")
        try:
            raw = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {p} is not valid JSON: {exc}") from None
    if seed is not None:
        raw.setdefault("scenario", {})["seed"] = seed
        raw.setdefault("train", {})["seed"] = seed
        raw.setdefault("svm", {})["seed"] = seed
    if out is not None:
        raw["output_dir"] = out
    return ExperimentConfig(raw)


def _prepare_out(cfg: ExperimentConfig) -> Path:
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    with open(cfg.output_dir / "config.json", "w") as fh:
        json.dump(cfg.snapshot(), fh, sort_keys=True, indent=2)
        fh.write("\n")
    return cfg.output_dir


def _write_timings(out: Path, command: str, seconds: dict) -> None:
    path = out / "timings.json"
    merged = {}
    if path.exists():
        try:
            merged = json.loads(path.read_text())
        except json.JSONDecodeError:
            merged = {}
    merged[command] = {k: round(v, 3) for k, v in seconds.items()}
    path.write_text(json.dumps(merged, sort_keys=True, indent=2) + "\n")


def _make_detector(cfg: ExperimentConfig):
    if cfg.detector == "cnn":
        return CnnDetector(arch=CnnArch(), train_config=cfg.train)
    return PcaSvmDetector(n_components=cfg.svm["n_components"], C=cfg.svm["C"],
                          svm_epochs=cfg.svm["epochs"], seed=cfg.svm["seed"])


def cmd_generate(cfg: ExperimentConfig) -> int:
    out = _prepare_out(cfg)
    t0 = time.perf_counter()
    ds = generate_dataset(cfg.scenario, cfg.waveform, cfg.k_factor,
                          cfg.attack_pattern, cfg.stft)
    dataset_mod.save(ds, out / "dataset.sjd")
    _write_timings(out, "generate", {"total_s": time.perf_counter() - t0})
    print(f"wrote {len(ds)} samples "
          f"({len(ds.split('train'))} train, {len(ds.split('test'))} test) "
          f"to {out / 'dataset.sjd'}")
    return 0


def _load_dataset(cfg: ExperimentConfig) -> SpectrogramDataset:
    path = Path(cfg.dataset_path) if cfg.dataset_path else cfg.output_dir / "dataset.sjd"
    if not path.exists():
        raise ConfigError(f"dataset file {path} does not exist; run generate first")
    return dataset_mod.load(path)


def cmd_train(cfg: ExperimentConfig) -> int:
    out = _prepare_out(cfg)
    ds = _load_dataset(cfg).split("train")
    if len(ds) == 0:
        raise TrainingError("train split is empty")
    det = _make_detector(cfg)
    t0 = time.perf_counter()
    det.fit(ds.pixels, ds.labels.astype(int))
    train_s = time.perf_counter() - t0
    save_model(out / "model.sjm", det)
    if cfg.detector == "cnn":
        write_trace_csv(out / "trace.csv", det.trace_)
    _write_timings(out, "train", {"total_s": train_s})
    print(f"trained {cfg.detector} on {len(ds)} samples -> {out / 'model.sjm'}")
    return 0


def cmd_evaluate(cfg: ExperimentConfig) -> int:
    out = _prepare_out(cfg)
    model_path = Path(cfg.model_path) if cfg.model_path else out / "model.sjm"
    if not model_path.exists():
        raise ConfigError(f"model file {model_path} does not exist; run train first")
    det = load_model(model_path)
    test = _load_dataset(cfg).split("test")
    t0 = time.perf_counter()
    results = evaluate_detector(det, test)
    eval_s = time.perf_counter() - t0
    report = build_report(cfg.detector, results, cfg.snapshot())
    save_report(report, out / "report.json")
    _write_timings(out, "evaluate", {"total_s": eval_s})
    acc = results["overall_accuracy"]
    print(f"{cfg.detector}: accuracy {100 * acc:.1f}% on {results['n_samples']} "
          f"test samples -> {out / 'report.json'}")
    return 0


def cmd_export_spectrogram(cfg: ExperimentConfig, index: int) -> int:
    out = _prepare_out(cfg)
    n = cfg.scenario.n_train
    if not 0 <= index < n:
        raise ConfigError(f"index must be in [0, {n}), got {index}")
    label, snr, kind, sjr = sample_plan(cfg.scenario, index)
    seed_key = [cfg.scenario.seed, dataset_mod.TRAIN_NAMESPACE, index]
    written = []
    variants = [("clean", None)]
    if label:
        variants.append((kind.value, cfg.attack_pattern.with_scenario(kind, sjr)))
    for tag, attack in variants:
        image = synthesize_sample(cfg.waveform, cfg.k_factor, snr, attack,
                                  cfg.stft, seed_key)
        path = out / f"sample{index:05d}_{tag}.pgm"
        write_pgm(image, path)
        written.append(path)
    scenario = f"snr {snr:g} dB"
    if label:
        scenario += f", {kind.value} at sjr {sjr:g} dB"
    print(f"sample {index} ({scenario}): " + ", ".join(str(p) for p in written))
    return 0


def cmd_reproduce(cfg: ExperimentConfig, family: str, full_scale: bool) -> int:
    """Regenerate the detector-vs-SNR accuracy comparison for one family."""
    out = _prepare_out(cfg)
    preset = FULL_SCALE[family] if full_scale else DESK_SCALE
    wave = cfg.waveform.with_frames(preset["frames_per_sample"])
    table: dict[str, dict] = {"cnn": {}, "pca_svm": {}}
    timings: dict[str, float] = {}
    for snr in REFERENCE_SNRS_DB:
        scenario = ScenarioSpec(
            snr_levels=(snr,), sjr_levels=cfg.scenario.sjr_levels,
            attack_kinds=FAMILY_KINDS[family], n_train=preset["n_train"],
            n_test=preset["n_test"], seed=cfg.scenario.seed)
        t0 = time.perf_counter()
        ds = generate_dataset(scenario, wave, cfg.k_factor, cfg.attack_pattern,
                              cfg.stft)
        timings[f"generate_snr{snr:g}_s"] = time.perf_counter() - t0
        train, test = ds.split("train"), ds.split("test")
        for name, det in (("cnn", CnnDetector(train_config=cfg.train)),
                          ("pca_svm", PcaSvmDetector(
                              n_components=cfg.svm["n_components"], C=cfg.svm["C"],
                              svm_epochs=cfg.svm["epochs"], seed=cfg.svm["seed"]))):
            t0 = time.perf_counter()
            det.fit(train.pixels, train.labels.astype(int))
            results = evaluate_detector(det, test)
            timings[f"{name}_snr{snr:g}_s"] = time.perf_counter() - t0
            table[name][snr] = results["overall_accuracy"]
    payload = {
        "version": f"satjam-{__version__}",
        "family": family,
        "scale": "full" if full_scale else "desk",
        "config": cfg.snapshot(),
        "accuracy": {det: {f"{snr:g}": acc for snr, acc in cells.items()}
                     for det, cells in table.items()},
        "reference_accuracy": {det: {f"{snr:g}": acc for snr, acc in cells.items()}
                               for det, cells in REFERENCE_ACCURACY[family].items()},
    }
    save_report(payload, out / "reproduce.json")
    _write_timings(out, "reproduce", timings)
    print(f"{family} ({'full' if full_scale else 'desk'} scale):")
    print(format_accuracy_table(table, family=family))
    print(f"table written to {out / 'reproduce.json'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="satjam",
        description="OFDM jamming simulation and learning-driven jammer detection")
    parser.add_argument("--version", action="version", version=f"satjam {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--seed", type=int, help="override scenario and training seeds")
        p.add_argument("--out", help="override the output directory")
        p.add_argument("--full-scale", action="store_true",
                       help="use the full-size scenario preset (long running)")

    for name, doc in (("generate", "synthesize a labeled spectrogram dataset"),
                      ("train", "fit the configured detector on the train split"),
                      ("evaluate", "score a trained model on the test split"),
                      ("export-spectrogram", "write PGM images for one sample"),
                      ("reproduce", "rerun the detector-vs-SNR comparison")):
        p = sub.add_parser(name, help=doc)
        common(p)
        if name == "export-spectrogram":
            p.add_argument("--index", type=int, required=True,
                           help="train-partition sample index to export")
        if name == "reproduce":
            p.add_argument("--family", choices=sorted(FAMILY_KINDS),
                           default="all_attacks",
                           help="attack mix to reproduce (default: all_attacks)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, seed=args.seed, out=args.out)
        if args.command == "generate":
            return cmd_generate(cfg)
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "evaluate":
            return cmd_evaluate(cfg)
        if args.command == "export-spectrogram":
            return cmd_export_spectrogram(cfg, args.index)
        if args.command == "reproduce":
            return cmd_reproduce(cfg, args.family, args.full_scale)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return 3
    except TrainingError as exc:
        print(f"training error: {exc}", file=sys.stderr)
        return 4
    except SatjamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

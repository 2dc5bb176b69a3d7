"""Evaluation reports.

Reports are plain dicts serialized as canonical JSON so that identical
runs produce identical bytes. Accuracies are rounded to 0.1 percentage
point (three decimals as fractions); confusion counts stay exact.
Wall-clock timings never enter a report; they go to a sidecar file.
"""

import json

import numpy as np

from . import __version__
from .dataset import SpectrogramDataset

# published accuracy targets the reproduce command compares against,
# keyed by scenario family -> detector -> SNR in dB
REFERENCE_ACCURACY = {
    "all_attacks": {
        "cnn": {5.0: 0.921, 10.0: 0.995, 15.0: 0.997},
        "pca_svm": {5.0: 0.906, 10.0: 0.913, 15.0: 0.918},
    },
    "intermittent_only": {
        "cnn": {5.0: 0.804, 10.0: 0.888, 15.0: 0.931},
        "pca_svm": {5.0: 0.834, 10.0: 0.847, 15.0: 0.861},
    },
}

REFERENCE_SNRS_DB = (5.0, 10.0, 15.0)


def _round_acc(value: float) -> float:
    return round(float(value), 3)


def evaluate_detector(detector, ds: SpectrogramDataset) -> dict:
    """Accuracy breakdown of a fitted detector on a labeled dataset."""
    preds = np.asarray(detector.predict(ds.pixels))
    labels = ds.labels.astype(int)
    correct = preds == labels
    tn = int(np.sum((labels == 0) & (preds == 0)))
    fp = int(np.sum((labels == 0) & (preds == 1)))
    fn = int(np.sum((labels == 1) & (preds == 0)))
    tp = int(np.sum((labels == 1) & (preds == 1)))
    per_sjr: dict[str, list] = {}
    per_attack: dict[str, list] = {}
    for i, row in enumerate(ds.samples):
        per_attack.setdefault(row["attack"], []).append(correct[i])
        if row["sjr_db"] is not None:
            per_sjr.setdefault(f"{row['sjr_db']:g}", []).append(correct[i])
    return {
        "n_samples": len(ds),
        "overall_accuracy": _round_acc(correct.mean()) if len(ds) else None,
        "confusion_matrix": {"tn": tn, "fp": fp, "fn": fn, "tp": tp},
        "per_sjr_accuracy": {k: _round_acc(np.mean(v))
                             for k, v in sorted(per_sjr.items(), key=lambda kv: float(kv[0]))},
        "per_attack_accuracy": {k: _round_acc(np.mean(v))
                                for k, v in sorted(per_attack.items())},
    }


def build_report(detector_kind: str, results: dict, config_snapshot: dict) -> dict:
    return {
        "version": f"satjam-{__version__}",
        "detector": detector_kind,
        "config": config_snapshot,
        "results": results,
    }


def report_bytes(report: dict) -> bytes:
    return (json.dumps(report, sort_keys=True, indent=2) + "\n").encode("utf-8")


def save_report(report: dict, path) -> None:
    with open(path, "wb") as fh:
        fh.write(report_bytes(report))


def format_accuracy_table(cells: dict, snrs=REFERENCE_SNRS_DB,
                          family: str | None = None) -> str:
    """Human-readable detector x SNR accuracy table.

    cells maps detector name -> {snr: accuracy fraction}. When a family is
    given, a reference row from the published targets is appended.
    """
    lines = []
    header = "detector        " + "".join(f"  SNR {snr:g} dB" for snr in snrs)
    lines.append(header)
    lines.append("-" * len(header))
    for det, accs in cells.items():
        row = f"{det:<16}"
        for snr in snrs:
            acc = accs.get(snr)
            row += f"  {100 * acc:8.1f}%" if acc is not None else "         -"
        lines.append(row)
        if family is not None:
            ref = REFERENCE_ACCURACY.get(family, {}).get(det)
            if ref:
                row = f"{'  (reference)':<16}"
                for snr in snrs:
                    row += f"  {100 * ref[snr]:8.1f}%"
                lines.append(row)
    return "\n".join(lines)

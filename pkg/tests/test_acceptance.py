"""End-to-end acceptance gate.

One test per release criterion, each emitting a single verdict line into
the terminal summary. The desk-scale detector runs (criteria 4 and 5)
train real models and dominate the suite's runtime; each scenario family
is trained once per session and shared.
"""

import json
import os
import time

import numpy as np
import pytest

import satjam.cli as cli
import test_channel
import test_mlcore_layers as lg
from satjam.channel import add_awgn, apply_channel, draw_rician
from satjam.jammer import AttackKind, AttackSpec, build_mask, draw_pattern
from satjam.mlcore import (Adam, BatchNorm, Conv2D, Dense, Dropout, Flatten,
                           MaxPool2x2, PrincipalComponents, ReLU)
from satjam.waveform import WaveformConfig, build_grid, ofdm_modulate

FULL_SCALE_ENV = "SATJAM_FULL_SCALE"


def check(verdict, tag, ok, detail):
    line = f"[{tag}] {'PASS' if ok else 'FAIL'} {detail}"
    verdict(line)
    assert ok, line


def reproduce_family(tmp_path_factory, family):
    out = tmp_path_factory.mktemp(family)
    cfg = cli.load_config(None, out=str(out))
    t0 = time.perf_counter()
    assert cli.cmd_reproduce(cfg, family, full_scale=False) == 0
    elapsed = time.perf_counter() - t0
    payload = json.loads((out / "reproduce.json").read_text())
    acc = {det: {float(snr): val for snr, val in cells.items()}
           for det, cells in payload["accuracy"].items()}
    return acc, elapsed


@pytest.fixture(scope="module")
def desk_all_attacks(tmp_path_factory):
    return reproduce_family(tmp_path_factory, "all_attacks")


@pytest.fixture(scope="module")
def desk_intermittent(tmp_path_factory):
    return reproduce_family(tmp_path_factory, "intermittent_only")


def test_1_structural_exactness(acceptance_verdict):
    t0 = time.perf_counter()
    wave = WaveformConfig()
    pos = wave.pilot_positions
    grid = build_grid(wave, np.random.default_rng(0))
    occupied = grid.occupied()
    mask = build_mask(AttackSpec().with_scenario(AttackKind.INTERMITTENT, -10.0),
                      wave)
    active_symbols = np.flatnonzero(mask.any(axis=1))
    ok = (
        len(pos) == 88
        and bool(np.all(pos % 8 == 4))
        and bool(np.all((0 <= pos) & (pos < 705)))
        and bool(np.all(occupied[:, :, pos] == 1.0))
        and wave.sample_len == 652_800
        and len(ofdm_modulate(grid)) == 652_800
        and mask.shape == (600, 705)
        and int(mask.sum()) == 88 * 60
        and len(active_symbols) == 60
        and bool(np.all(mask[active_symbols].sum(axis=1) == 88))
    )
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 1.0
    check(acceptance_verdict, "1 structural exactness", ok,
          f"pilots {len(pos)} at k%8==4, sample_len {wave.sample_len}, "
          f"intermittent active {int(mask.sum())} ({elapsed:.2f}s, budget 1s)")


def test_2_calibration(acceptance_verdict):
    t0 = time.perf_counter()
    wave = WaveformConfig()
    rng = np.random.default_rng(42)

    snr_errs = []
    for target in (5.0, 10.0, 15.0):
        grid = build_grid(wave, rng)
        faded = apply_channel(grid, draw_rician(5.0, wave.frames_per_sample, rng))
        noisy = add_awgn(faded, target, rng)
        noise = noisy.occupied() - faded.occupied()
        emp = 10 * np.log10(np.mean(np.abs(faded.occupied()) ** 2)
                            / np.mean(np.abs(noise) ** 2))
        snr_errs.append(abs(emp - target))

    sjr_errs = []
    for target in (-20.0, -10.0, 0.0):
        spec = AttackSpec().with_scenario(AttackKind.BARRAGE, target)
        pattern = draw_pattern(spec, wave, rng)
        emp = -10 * np.log10(np.mean(np.abs(pattern.values[pattern.mask]) ** 2))
        sjr_errs.append(abs(emp - target))

    gains = draw_rician(5.0, 100_000, rng).gains
    k_hat = test_channel.k_factor_moment_estimate(gains)

    elapsed = time.perf_counter() - t0
    ok = (max(snr_errs) <= 0.2 and max(sjr_errs) <= 0.15
          and abs(k_hat - 5.0) / 5.0 <= 0.05 and elapsed < 30.0)
    check(acceptance_verdict, "2 calibration", ok,
          f"snr err {max(snr_errs):.3f} dB (tol 0.2), sjr err "
          f"{max(sjr_errs):.3f} dB (tol 0.15), K {k_hat:.3f} over 1e5 draws "
          f"(tol 5%) ({elapsed:.1f}s, budget 30s)")


def test_3_numerical_core(acceptance_verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)

    x_img = rng.normal(size=(2, 2, 4, 4))
    cases = [
        (lg.to_float64(Conv2D(2, 3, seed=1)), x_img, None),
        (lg.to_float64(BatchNorm(2)), x_img, None),
        (ReLU(), np.where(np.abs(x_img) < 0.1, 0.5, x_img), None),
        (MaxPool2x2(), 0.1 * rng.permutation(2 * 2 * 4 * 4).reshape(2, 2, 4, 4)
         .astype(float), None),
        (Dropout(0.5, seed=3), x_img, 3),
        (Flatten(), x_img, None),
        (lg.to_float64(Dense(6, 4, seed=2)), rng.normal(size=(5, 6)), None),
    ]
    for layer, x, reseed in cases:
        lg.check_layer_grads(layer, x, reseed=reseed)  # asserts rel err <= 1e-6

    pca = PrincipalComponents(45).fit(rng.normal(size=(120, 300)))
    gram = pca.components_ @ pca.components_.T
    orth_err = float(np.max(np.abs(gram - np.eye(45))))

    w = rng.normal(size=17)
    g = rng.normal(size=17)
    lr, eps = 1e-3, 1e-8
    expected = w - lr * g / (np.abs(g) + eps)
    actual = w.copy()
    Adam(lr, eps=eps).step([actual], [g.copy()])
    adam_err = float(np.max(np.abs(actual - expected)))

    elapsed = time.perf_counter() - t0
    ok = orth_err <= 1e-8 and adam_err <= 1e-6 and elapsed < 60.0
    check(acceptance_verdict, "3 numerical core", ok,
          f"layer gradients <= 1e-6 rel ({len(cases)} layer kinds), pca orth "
          f"{orth_err:.1e} (tol 1e-8), adam first step {adam_err:.1e} "
          f"(tol 1e-6) ({elapsed:.1f}s, budget 60s)")


def test_4_desk_scale_detector_trends(acceptance_verdict, desk_all_attacks):
    acc, elapsed = desk_all_attacks
    cnn, svm = acc["cnn"], acc["pca_svm"]
    ok = (
        cnn[5.0] <= cnn[10.0] + 0.01
        and cnn[10.0] <= cnn[15.0] + 0.01
        and cnn[10.0] >= svm[10.0]
        and cnn[15.0] >= svm[15.0]
        and cnn[15.0] >= 0.85
        and svm[15.0] >= 0.80
        and elapsed <= 1800.0
    )
    check(acceptance_verdict, "4 desk-scale detector trends", ok,
          f"cnn 5/10/15 dB = {cnn[5.0]:.3f}/{cnn[10.0]:.3f}/{cnn[15.0]:.3f}, "
          f"svm = {svm[5.0]:.3f}/{svm[10.0]:.3f}/{svm[15.0]:.3f} "
          f"({elapsed:.0f}s, budget 1800s)")


def test_5_intermittent_hardness(acceptance_verdict, desk_all_attacks,
                                 desk_intermittent):
    all_acc, _ = desk_all_attacks
    inter_acc, elapsed = desk_intermittent
    gaps = {det: all_acc[det][15.0] - inter_acc[det][15.0]
            for det in ("cnn", "pca_svm")}
    ok = (
        all(inter_acc[det][snr] < all_acc[det][snr]
            for det in ("cnn", "pca_svm") for snr in (5.0, 10.0, 15.0))
        and min(gaps.values()) >= 0.02 - 1e-9
        and elapsed <= 1800.0
    )
    check(acceptance_verdict, "5 intermittent hardness", ok,
          f"15 dB gap cnn {gaps['cnn']:.3f}, svm {gaps['pca_svm']:.3f} "
          f"(>= 0.02), intermittent-only below all-attacks at every SNR "
          f"({elapsed:.0f}s, budget 1800s)")


def test_6_full_scale_reproduction(acceptance_verdict, tmp_path):
    if os.environ.get(FULL_SCALE_ENV) != "1":
        acceptance_verdict(
            f"[6 full-scale reproduction] SKIP set {FULL_SCALE_ENV}=1 to run "
            "(hours of CPU; meant for a nightly job)")
        pytest.skip("full-scale run is opt-in")
    tol = {"cnn": 0.06, "pca_svm": 0.04}
    worst = []
    for family in ("all_attacks", "intermittent_only"):
        out = tmp_path / family
        cfg = cli.load_config(None, out=str(out))
        assert cli.cmd_reproduce(cfg, family, full_scale=True) == 0
        payload = json.loads((out / "reproduce.json").read_text())
        for det, cells in payload["accuracy"].items():
            for snr, val in cells.items():
                ref = cli.REFERENCE_ACCURACY[family][det][float(snr)]
                worst.append((abs(val - ref) - tol[det], family, det, snr))
    margin, family, det, snr = max(worst)
    check(acceptance_verdict, "6 full-scale reproduction", margin <= 0,
          f"worst case {family}/{det}@{snr} dB off by "
          f"{margin + tol[det]:.3f} (tol cnn 0.06, svm 0.04)")


def test_7_determinism(acceptance_verdict, tmp_path):
    raw = {
        "scenario": {"snr_levels": [15.0], "sjr_levels": [-20.0, -10.0],
                     "attack_kinds": ["barrage", "intermittent"],
                     "n_train": 8, "n_test": 6, "seed": 0},
        "waveform": {"frames_per_sample": 1},
        "train": {"epochs": 2, "batch_size": 8},
        "detector": "cnn",
        "output_dir": str(tmp_path / "run"),
    }
    config = tmp_path / "config.json"
    config.write_text(json.dumps(raw))
    names = ("dataset.sjd", "model.sjm", "report.json")
    runs = []
    for _ in range(2):
        assert cli.main(["generate", "--config", str(config)]) == 0
        assert cli.main(["train", "--config", str(config)]) == 0
        assert cli.main(["evaluate", "--config", str(config)]) == 0
        runs.append({n: (tmp_path / "run" / n).read_bytes() for n in names})
    same = {n: runs[0][n] == runs[1][n] for n in names}
    check(acceptance_verdict, "7 determinism", all(same.values()),
          "byte-identical across reruns: " +
          ", ".join(f"{n} {'yes' if same[n] else 'NO'}" for n in names))

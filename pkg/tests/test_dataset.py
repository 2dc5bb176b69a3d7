import json
import struct
import zlib
from collections import Counter

import numpy as np
import numpy.testing as npt
import pytest

from satjam import (AttackKind, AttackSpec, ConfigError, FormatError,
                    ScenarioSpec, ShapeError, SpectrogramDataset,
                    WaveformConfig, generate, load, save, synthesize_sample)
from satjam.dataset import derive_sample_seed, sample_plan
from satjam.features import IMAGE_HW

DESK_WAVE = WaveformConfig().with_frames(2)
TINY = ScenarioSpec(n_train=8, n_test=6, seed=3)


class TestScenarioSpec:
    def test_defaults(self):
        spec = ScenarioSpec()
        assert spec.snr_levels == (15.0,)
        assert spec.sjr_levels == (-20.0, -15.0, -10.0, -5.0, 0.0)
        assert spec.attack_kinds == (AttackKind.BARRAGE, AttackKind.PILOT_TONE,
                                     AttackKind.INTERMITTENT)

    def test_coercion(self):
        spec = ScenarioSpec(snr_levels=[5], attack_kinds=["barrage"])
        assert spec.snr_levels == (5.0,)
        assert spec.attack_kinds == (AttackKind.BARRAGE,)

    def test_rejects_none_kind(self):
        with pytest.raises(ConfigError):
            ScenarioSpec(attack_kinds=("none",))

    def test_rejects_empty_levels(self):
        with pytest.raises(ConfigError):
            ScenarioSpec(snr_levels=())
        with pytest.raises(ConfigError):
            ScenarioSpec(sjr_levels=())

    def test_rejects_bad_counts(self):
        with pytest.raises(ConfigError):
            ScenarioSpec(n_train=0)
        with pytest.raises(ConfigError):
            ScenarioSpec(seed=-1)

    def test_dict_roundtrip(self):
        spec = ScenarioSpec(snr_levels=(5.0, 10.0), n_train=20, seed=9)
        assert ScenarioSpec.from_dict(spec.to_dict()) == spec


class TestSamplePlan:
    def test_even_indices_are_clean(self):
        for index in range(0, 40, 2):
            label, _, kind, sjr = sample_plan(TINY, index)
            assert (label, kind, sjr) == (0, AttackKind.NONE, None)

    def test_round_robin_is_balanced(self):
        spec = ScenarioSpec(n_train=2000, n_test=3000,
                            attack_kinds=("intermittent",))
        cells = Counter()
        for index in range(1, spec.n_train, 2):
            _, _, kind, sjr = sample_plan(spec, index)
            cells[(kind, sjr)] += 1
        assert len(cells) == 5
        assert set(cells.values()) == {200}

    def test_full_grid_counts(self):
        spec = ScenarioSpec(n_train=6000, n_test=9000)
        cells = Counter(sample_plan(spec, i)[2:] for i in range(1, 6000, 2))
        assert len(cells) == 15
        assert set(cells.values()) == {200}

    def test_snr_cycles_by_index(self):
        spec = ScenarioSpec(snr_levels=(5.0, 10.0, 15.0), n_train=30, n_test=30)
        snrs = [sample_plan(spec, i)[1] for i in range(6)]
        assert snrs == [5.0, 10.0, 15.0, 5.0, 10.0, 15.0]


class TestSeeding:
    def test_partitions_never_share_streams(self):
        train = {derive_sample_seed(0, "train", i) for i in range(50)}
        test = {derive_sample_seed(0, "test", i) for i in range(50)}
        assert not train & test

    def test_distinct_across_indices_and_seeds(self):
        seeds = {derive_sample_seed(s, "train", i) for s in range(3) for i in range(20)}
        assert len(seeds) == 60

    def test_matches_seed_sequence(self):
        expected = np.random.SeedSequence([7, 1, 4]).generate_state(1, np.uint64)[0]
        assert derive_sample_seed(7, "test", 4) == int(expected)


class TestSynthesizeSample:
    def test_clean_sample_shape_and_range(self):
        img = synthesize_sample(DESK_WAVE, 5.0, 15.0, None, None, [0, 0, 0])
        assert img.pixels.shape == IMAGE_HW
        assert img.pixels.dtype == np.float32
        assert img.pixels.min() >= 0.0 and img.pixels.max() <= 1.0

    def test_deterministic(self):
        a = synthesize_sample(DESK_WAVE, 5.0, 15.0, None, None, [1, 0, 2])
        b = synthesize_sample(DESK_WAVE, 5.0, 15.0, None, None, [1, 0, 2])
        npt.assert_array_equal(a.pixels, b.pixels)

    def test_attack_changes_the_image(self):
        attack = AttackSpec("barrage", -20.0)
        clean = synthesize_sample(DESK_WAVE, 5.0, 15.0, None, None, [2, 0, 5])
        jam = synthesize_sample(DESK_WAVE, 5.0, 15.0, attack, None, [2, 0, 5])
        assert not np.array_equal(clean.pixels, jam.pixels)


@pytest.fixture(scope="module")
def tiny_ds():
    return generate(TINY, DESK_WAVE)


@pytest.fixture(scope="module")
def small_ds():
    return generate(ScenarioSpec(n_train=4, n_test=2, seed=1), DESK_WAVE)


class TestGenerate:
    @pytest.fixture
    def ds(self, tiny_ds):
        return tiny_ds

    def test_sizes_and_splits(self, ds):
        assert len(ds) == 14
        assert len(ds.split("train")) == 8
        assert len(ds.split("test")) == 6

    def test_labels_follow_parity(self, ds):
        for row, label in zip(ds.samples, ds.labels):
            assert row["label"] == int(label) == row["index"] % 2

    def test_manifest_provenance(self, ds):
        assert ScenarioSpec.from_dict(ds.manifest["scenario"]) == TINY
        assert ds.manifest["waveform"]["frames_per_sample"] == 2
        assert ds.manifest["k_factor"] == 5.0
        assert ds.manifest["image"]["floor_decades"] == 6.0
        for row in ds.samples:
            assert row["seed"] == derive_sample_seed(TINY.seed, row["split"],
                                                     row["index"])

    def test_pixels_match_direct_synthesis(self, ds):
        row = ds.samples[3]
        assert row["label"] == 1
        attack = AttackSpec(row["attack"], row["sjr_db"])
        key = [TINY.seed, 0, row["index"]]
        img = synthesize_sample(DESK_WAVE, 5.0, row["snr_db"], attack, None, key)
        npt.assert_array_equal(ds.pixels[3], img.pixels)

    def test_worker_count_is_invisible(self, ds):
        par = generate(TINY, DESK_WAVE, n_jobs=2)
        npt.assert_array_equal(par.pixels, ds.pixels)
        assert par.manifest == ds.manifest

    def test_meta_accessor(self, ds):
        meta = ds.meta(3)
        assert meta.split == "train"
        assert meta.attack != "none"

    def test_label_mismatch_rejected(self, ds):
        with pytest.raises(ShapeError):
            SpectrogramDataset(ds.pixels, 1 - ds.labels, ds.manifest)


class TestSaveLoad:
    @pytest.fixture
    def ds(self, small_ds):
        return small_ds

    def test_roundtrip(self, ds, tmp_path):
        path = tmp_path / "d.sjd"
        save(ds, path)
        back = load(path)
        npt.assert_array_equal(back.pixels, ds.pixels)
        npt.assert_array_equal(back.labels, ds.labels)
        assert back.manifest == ds.manifest

    def test_bytes_are_reproducible(self, ds, tmp_path):
        save(ds, tmp_path / "a.sjd")
        save(ds, tmp_path / "b.sjd")
        regen = generate(ScenarioSpec(n_train=4, n_test=2, seed=1), DESK_WAVE)
        save(regen, tmp_path / "c.sjd")
        blobs = [(tmp_path / n).read_bytes() for n in ("a.sjd", "b.sjd", "c.sjd")]
        assert blobs[0] == blobs[1] == blobs[2]

    def test_empty_dataset_roundtrip(self, tmp_path):
        empty = SpectrogramDataset(np.zeros((0,) + IMAGE_HW, np.float32),
                                   np.zeros(0, np.uint8), {"samples": []})
        save(empty, tmp_path / "e.sjd")
        assert len(load(tmp_path / "e.sjd")) == 0

    def test_bad_magic_offset_zero(self, ds, tmp_path):
        path = tmp_path / "m.sjd"
        save(ds, path)
        blob = bytearray(path.read_bytes())
        blob[:4] = b"JUNK"
        path.write_bytes(bytes(blob))
        with pytest.raises(FormatError) as err:
            load(path)
        assert err.value.offset == 0

    def test_bad_version(self, ds, tmp_path):
        path = tmp_path / "v.sjd"
        save(ds, path)
        blob = bytearray(path.read_bytes())
        blob[4] = 99
        path.write_bytes(bytes(blob))
        with pytest.raises(FormatError) as err:
            load(path)
        assert err.value.offset == 4
        assert "byte offset 4" in str(err.value)

    def test_flipped_pixel_fails_checksum(self, ds, tmp_path):
        path = tmp_path / "c.sjd"
        save(ds, path)
        blob = bytearray(path.read_bytes())
        blob[40] ^= 0xFF
        path.write_bytes(bytes(blob))
        with pytest.raises(FormatError, match="checksum"):
            load(path)

    def test_truncation(self, ds, tmp_path):
        path = tmp_path / "t.sjd"
        save(ds, path)
        path.write_bytes(path.read_bytes()[:100])
        with pytest.raises(FormatError, match="truncated"):
            load(path)

    def test_trailing_bytes(self, ds, tmp_path):
        path = tmp_path / "x.sjd"
        save(ds, path)
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(FormatError, match="trailing"):
            load(path)

    def test_corrupt_manifest_json(self, ds, tmp_path):
        path = tmp_path / "j.sjd"
        save(ds, path)
        blob = bytearray(path.read_bytes())
        # break the JSON inside the manifest region, then re-sign the crc
        man_start = blob.rindex(b"{\"", 0, len(blob) - 4)
        blob[man_start] = ord("?")
        crc = zlib.crc32(bytes(blob[:-4])) & 0xFFFFFFFF
        blob[-4:] = struct.pack("<I", crc)
        path.write_bytes(bytes(blob))
        with pytest.raises(FormatError, match="JSON"):
            load(path)

import json
import struct
import zlib
from pathlib import Path

import numpy as np
import pytest

from fcmdetect.alphabet import custom_alphabet, filter_text, preset_alphabet
from fcmdetect.classifier import BinaryClassifier
from fcmdetect.fcm import ContextModel
from fcmdetect.persistence import (
    BadMagicError,
    BundleError,
    ChecksumError,
    ModelFileError,
    UnsupportedVersionError,
    load_bundle,
    load_model,
    save_bundle,
    save_model,
)

from synth import SaladSampler, salad_text

S2 = preset_alphabet("sigma2")


def make_model(seed=1, k=3, n=5000, alphabet=S2):
    sampler = SaladSampler(seed, 1500)
    m = ContextModel(k, alphabet.size)
    m.train(filter_text(salad_text(sampler, n, seed + 1), alphabet))
    return m


def refix_crc(data: bytearray) -> bytes:
    crc = zlib.crc32(bytes(data[:-4]))
    return bytes(data[:-4]) + struct.pack("<I", crc)


class TestModelRoundTrip:
    def test_counts_and_metadata_survive(self, tmp_path):
        m = make_model()
        path = tmp_path / "m.fcm"
        save_model(m, S2, path)
        loaded, alphabet = load_model(path)
        assert alphabet.symbols == S2.symbols
        assert loaded.k == m.k
        assert loaded.alphabet_size == m.alphabet_size
        assert loaded.trained_symbols == m.trained_symbols
        for a, b in zip(m.entry_arrays(), loaded.entry_arrays()):
            assert np.array_equal(a, b)

    def test_code_lengths_bit_exact(self, tmp_path):
        m = make_model(seed=2)
        path = tmp_path / "m.fcm"
        save_model(m, S2, path)
        loaded, _ = load_model(path)
        rng = np.random.default_rng(0)
        for _ in range(100):
            target = rng.integers(0, S2.size, int(rng.integers(10, 200)))
            assert loaded.code_length(target, 0.5) == m.code_length(target, 0.5)

    def test_serialized_bytes_canonical(self, tmp_path):
        # same counts reached through different train-call orders -> same file
        rng = np.random.default_rng(5)
        seqs = [rng.integers(0, 9, 60) for _ in range(8)]
        m1, m2 = ContextModel(2, 9), ContextModel(2, 9)
        for s in seqs:
            m1.train(s)
        for s in reversed(seqs):
            m2.train(s)
        ab = custom_alphabet("abcdefghi")
        save_model(m1, ab, tmp_path / "a.fcm")
        save_model(m2, ab, tmp_path / "b.fcm")
        assert (tmp_path / "a.fcm").read_bytes() == (tmp_path / "b.fcm").read_bytes()

    def test_empty_model(self, tmp_path):
        m = ContextModel(4, S2.size)
        path = tmp_path / "empty.fcm"
        save_model(m, S2, path)
        loaded, _ = load_model(path)
        assert loaded.num_entries == 0
        assert loaded.trained_symbols == 0

    def test_non_ascii_alphabet(self, tmp_path):
        ab = custom_alphabet("abé€")
        m = ContextModel(2, 4)
        m.train([0, 1, 2, 3, 0, 1])
        path = tmp_path / "u.fcm"
        save_model(m, ab, path)
        loaded, alphabet = load_model(path)
        assert alphabet.symbols == ab.symbols
        assert loaded.count([0, 1], 2) == 1

    def test_big_key_model_round_trip(self, tmp_path):
        m = ContextModel(12, 37)
        m.train(np.arange(20) % 37)
        path = tmp_path / "big.fcm"
        save_model(m, S2, path)
        loaded, _ = load_model(path)
        assert loaded.count(list(range(12)), 12) == m.count(list(range(12)), 12)
        assert loaded.trained_symbols == m.trained_symbols

    def test_alphabet_size_mismatch_rejected(self, tmp_path):
        m = ContextModel(2, 5)
        with pytest.raises(ModelFileError, match="alphabet"):
            save_model(m, S2, tmp_path / "x.fcm")

    def test_creates_parent_dirs(self, tmp_path):
        m = make_model(seed=3, n=500)
        path = tmp_path / "deep" / "nested" / "m.fcm"
        save_model(m, S2, path)
        assert path.is_file()


class TestCorruption:
    @pytest.fixture()
    def saved(self, tmp_path):
        m = make_model(seed=4, n=2000)
        path = tmp_path / "m.fcm"
        save_model(m, S2, path)
        return path

    def test_flipped_payload_byte(self, saved):
        data = bytearray(saved.read_bytes())
        data[len(data) // 2] ^= 0xFF
        saved.write_bytes(bytes(data))
        with pytest.raises(ChecksumError):
            load_model(saved)

    def test_truncated_file(self, saved):
        data = saved.read_bytes()
        saved.write_bytes(data[: len(data) - 9])
        with pytest.raises((ChecksumError, ModelFileError)):
            load_model(saved)

    def test_tiny_file(self, saved):
        saved.write_bytes(b"FCM")
        with pytest.raises(ModelFileError):
            load_model(saved)

    def test_bad_magic(self, saved):
        data = bytearray(saved.read_bytes())
        data[:4] = b"NOPE"
        saved.write_bytes(refix_crc(data))
        with pytest.raises(BadMagicError):
            load_model(saved)

    def test_unsupported_version(self, saved):
        data = bytearray(saved.read_bytes())
        data[4:6] = struct.pack("<H", 99)
        saved.write_bytes(refix_crc(data))
        with pytest.raises(UnsupportedVersionError):
            load_model(saved)

    def test_zero_count_entry_rejected(self, tmp_path):
        m = ContextModel(1, 2)
        m.train([0, 1, 0])
        path = tmp_path / "m.fcm"
        save_model(m, custom_alphabet("ab"), path)
        data = bytearray(path.read_bytes())
        # first entry's count u64 sits 9 bytes into the entry block
        header_len = 7 + 2 + 2 + 8
        data[header_len + 9 : header_len + 17] = struct.pack("<Q", 0)
        path.write_bytes(refix_crc(data))
        with pytest.raises(ModelFileError, match="count"):
            load_model(path)

    def test_unsorted_entries_rejected(self, tmp_path):
        m = ContextModel(1, 3)
        m.train([0, 1, 2, 0, 1])
        path = tmp_path / "m.fcm"
        save_model(m, custom_alphabet("abc"), path)
        data = bytearray(path.read_bytes())
        header_len = 7 + 2 + 3 + 8
        entry = 17
        first = bytes(data[header_len : header_len + entry])
        second = bytes(data[header_len + entry : header_len + 2 * entry])
        data[header_len : header_len + entry] = second
        data[header_len + entry : header_len + 2 * entry] = first
        path.write_bytes(refix_crc(data))
        with pytest.raises(ModelFileError, match="sorted"):
            load_model(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_model(tmp_path / "absent.fcm")


class TestBundle:
    @pytest.fixture()
    def classifier(self):
        return BinaryClassifier(
            model_a=make_model(seed=6, n=4000),
            model_b=make_model(seed=7, n=4000),
            label_a="ai",
            label_b="human",
            alphabet=S2,
            alpha=0.5,
        )

    def test_round_trip_decisions(self, tmp_path, classifier):
        manifest = save_bundle(classifier, tmp_path)
        assert manifest.name == "manifest.json"
        loaded = load_bundle(tmp_path)
        text = salad_text(SaladSampler(6, 1500), 400, 9)
        assert loaded.classify(text) == classifier.classify(text)
        assert loaded.labels == classifier.labels
        assert loaded.alpha == classifier.alpha

    def test_load_by_manifest_path(self, tmp_path, classifier):
        manifest = save_bundle(classifier, tmp_path)
        loaded = load_bundle(manifest)
        assert loaded.labels == ("ai", "human")

    def test_manifest_contents(self, tmp_path, classifier):
        manifest = json.loads(save_bundle(classifier, tmp_path).read_text())
        assert manifest["label_a"] == "ai"
        assert manifest["label_b"] == "human"
        assert manifest["alpha"] == 0.5
        assert manifest["lowercase"] is True
        assert (tmp_path / manifest["model_a_path"]).is_file()
        assert (tmp_path / manifest["model_b_path"]).is_file()

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(BundleError, match="manifest"):
            load_bundle(tmp_path)

    def test_manifest_missing_keys(self, tmp_path, classifier):
        path = save_bundle(classifier, tmp_path)
        manifest = json.loads(path.read_text())
        del manifest["alpha"]
        path.write_text(json.dumps(manifest))
        with pytest.raises(BundleError, match="alpha"):
            load_bundle(tmp_path)

    def test_manifest_bad_json(self, tmp_path, classifier):
        path = save_bundle(classifier, tmp_path)
        path.write_text("{not json")
        with pytest.raises(BundleError, match="JSON"):
            load_bundle(tmp_path)

    def test_mismatched_model_alphabets(self, tmp_path, classifier):
        manifest = save_bundle(classifier, tmp_path)
        other = custom_alphabet("abcdefghij")
        m = ContextModel(3, 10)
        m.train([0, 1, 2, 3, 4])
        model_a_path = json.loads(manifest.read_text())["model_a_path"]
        save_model(m, other, tmp_path / model_a_path)
        with pytest.raises(BundleError, match="alphabet"):
            load_bundle(tmp_path)

import numpy as np
import pytest

from padtex.cache import read_feature_cache, write_feature_cache
from padtex.config import (ExperimentConfig, derive_seed, parse_config_text,
                           serialize_sections)
from padtex.errors import CacheError, ConfigError


def test_cache_roundtrip_small_matrix(tmp_path):
    path = tmp_path / "m.fc"
    matrix = np.array([[1.0, -2.5], [3.25, 4.0], [-0.0, 1e-300]])
    write_feature_cache(path, matrix)
    back = read_feature_cache(path)
    np.testing.assert_array_equal(back, matrix)
    assert back.shape == (3, 2)


def test_cache_roundtrip_many_random_vectors(tmp_path):
    rng = np.random.default_rng(100)
    matrix = rng.normal(size=(10_000, 8))
    path = tmp_path / "big.fc"
    write_feature_cache(path, matrix)
    np.testing.assert_array_equal(read_feature_cache(path), matrix)


def test_cache_truncation_detected(tmp_path):
    path = tmp_path / "t.fc"
    write_feature_cache(path, np.ones((4, 4)))
    blob = path.read_bytes()
    path.write_bytes(blob[:-10])
    with pytest.raises(CacheError, match="truncated|checksum"):
        read_feature_cache(path)


def test_cache_corruption_detected(tmp_path):
    path = tmp_path / "c.fc"
    write_feature_cache(path, np.ones((4, 4)))
    blob = bytearray(path.read_bytes())
    blob[20] ^= 0xFF  # flip a payload bit
    path.write_bytes(bytes(blob))
    with pytest.raises(CacheError, match="checksum"):
        read_feature_cache(path)


def test_cache_bad_magic(tmp_path):
    path = tmp_path / "b.fc"
    path.write_bytes(b"WRONG!!\n1 1\n" + b"\x00" * 12)
    with pytest.raises(CacheError, match="magic"):
        read_feature_cache(path)


def test_cache_accepts_vector_list(tmp_path):
    path = tmp_path / "v.fc"
    write_feature_cache(path, [np.array([1.0, 2.0]), np.array([3.0, 4.0])])
    np.testing.assert_array_equal(read_feature_cache(path),
                                  [[1.0, 2.0], [3.0, 4.0]])


# ---------------------------------------------------------------- config

def test_config_roundtrip_lossless():
    cfg = ExperimentConfig(audio_dir="/a", cache_dir="/c", output_dir="/o",
                           train_manifest="/t", eval_manifest="/e",
                           transform="stft", descriptor="lpq", fv_k=128,
                           lpq_rho=0.75, seed=1234)
    text = cfg.to_text()
    back = ExperimentConfig.from_text(text)
    assert back == cfg
    assert back.to_text() == text


def test_config_parser_format():
    sections = parse_config_text("[a]\nx = 1\n\n# comment\n[b]\ny = hello world\n")
    assert sections == {"a": {"x": "1"}, "b": {"y": "hello world"}}
    assert serialize_sections(sections) == "[a]\nx = 1\n\n[b]\ny = hello world\n"


def test_config_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        ExperimentConfig.from_text("[run]\nbogus = 1\n")


def test_config_unknown_section_rejected():
    with pytest.raises(ConfigError, match="unknown section"):
        ExperimentConfig.from_text("[nope]\nx = 1\n")


def test_config_bad_values_rejected():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text("[fv]\nfv_k = many\n")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text("[fv]\nfv_enabled = maybe\n")
    with pytest.raises(ConfigError, match="transform"):
        ExperimentConfig(transform="mel")


def test_config_requires_fv_for_dense_svm():
    with pytest.raises(ConfigError, match="Fisher"):
        ExperimentConfig(fv_enabled=False, descriptor_mode="dense", classifier="svm")


def test_config_llr_requires_cepstral_transform():
    with pytest.raises(ConfigError, match="lfcc or cqcc"):
        ExperimentConfig(classifier="gmm-llr", transform="cqt")
    ExperimentConfig(classifier="gmm-llr", transform="lfcc")  # fine


def test_derive_seed_stable_and_distinct():
    assert derive_seed(42, "gmm") == derive_seed(42, "gmm")
    assert derive_seed(42, "gmm") != derive_seed(42, "svm")
    assert derive_seed(42, "gmm") != derive_seed(43, "gmm")


def test_section_fingerprint_tracks_changes():
    a = ExperimentConfig()
    b = ExperimentConfig(fv_k=128)
    assert a.section_fingerprint("transform", "descriptor") == \
        b.section_fingerprint("transform", "descriptor")
    assert a.section_fingerprint("fv") != b.section_fingerprint("fv")

"""Declarative experiment configuration.

The file format is deliberately plain: "[section]" headers and "key = value"
lines, ASCII, no nesting, '#' starts a comment line. Serialization writes
sections and keys in a canonical order so serialize -> parse round-trips
losslessly.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError

__all__ = ["ExperimentConfig", "parse_config_text", "serialize_sections",
           "derive_seed"]

TRANSFORM_KINDS = ("stft", "lfcc", "cqt", "cqcc")
DESCRIPTOR_KINDS = ("lbp", "mblbp", "lpq", "bsif")
CLASSIFIER_KINDS = ("svm", "gmm-llr")
DESCRIPTOR_MODES = ("dense", "global")


def parse_config_text(text: str) -> dict[str, dict[str, str]]:
    sections: dict[str, dict[str, str]] = {}
    current: dict[str, str] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if not name:
                raise ConfigError(f"line {lineno}: empty section name")
            if name in sections:
                raise ConfigError(f"line {lineno}: duplicate section [{name}]")
            current = sections.setdefault(name, {})
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if current is None:
            raise ConfigError(f"line {lineno}: key outside any [section]")
        key, value = line.split("=", 1)
        key = key.strip()
        if key in current:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        current[key] = value.strip()
    return sections


def serialize_sections(sections: dict[str, dict[str, str]]) -> str:
    chunks = []
    for name, body in sections.items():
        lines = [f"[{name}]"]
        lines.extend(f"{key} = {value}" for key, value in body.items())
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + "\n"


def derive_seed(master_seed: int, stage: str) -> int:
    """Per-stage seed: hash of the stage name mixed with the master seed."""
    digest = hashlib.sha256(f"{master_seed}:{stage}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "little")


def _parse_bool(value: str, key: str) -> bool:
    if value in ("true", "yes", "1", "on"):
        return True
    if value in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {value!r}")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass
class ExperimentConfig:
    """Everything one end-to-end run needs, serializable to the config format."""

    # [paths]
    audio_dir: str = ""
    cache_dir: str = ""
    output_dir: str = ""
    train_manifest: str = ""
    eval_manifest: str = ""
    protocol_format: str = "native"
    asv_scores: str = ""          # optional; enables t-DCF reporting
    bank_path: str = ""           # optional; default bank resolved from data dir

    # [transform]
    transform: str = "cqt"
    stft_window: int = 512
    stft_hop: int = 256
    stft_fft: int = 512
    lfcc_filters: int = 40
    lfcc_coeffs: int = 20
    cqt_fmin: float = 15.625
    cqt_bins_per_octave: int = 96
    cqt_octaves: int = 9
    cqt_hop: int = 256
    cqcc_coeffs: int = 20
    dynamic_range_db: float = 80.0

    # [descriptor]
    descriptor: str = "bsif"
    descriptor_mode: str = "dense"
    block: int = 64
    stride: int = 32
    mblbp_rect: int = 3
    lpq_window: int = 7
    lpq_rho: float = 0.9
    bsif_side: int = 7
    bsif_filters: int = 8

    # [fv]
    fv_enabled: bool = True
    fv_k: int = 64
    fv_power_norm: bool = True
    fv_l2_norm: bool = True
    fv_posterior_floor: float = 1e-8

    # [classifier]
    classifier: str = "svm"
    svm_c: float = 1.0
    svm_epochs: int = 1000
    svm_balanced: bool = True
    llr_gmm_k: int = 2

    # [run]
    seed: int = 42
    jobs: int = 1

    _SCHEMA = {
        "paths": ("audio_dir", "cache_dir", "output_dir", "train_manifest",
                  "eval_manifest", "protocol_format", "asv_scores", "bank_path"),
        "transform": ("transform", "stft_window", "stft_hop", "stft_fft",
                      "lfcc_filters", "lfcc_coeffs", "cqt_fmin",
                      "cqt_bins_per_octave", "cqt_octaves", "cqt_hop",
                      "cqcc_coeffs", "dynamic_range_db"),
        "descriptor": ("descriptor", "descriptor_mode", "block", "stride",
                       "mblbp_rect", "lpq_window", "lpq_rho", "bsif_side",
                       "bsif_filters"),
        "fv": ("fv_enabled", "fv_k", "fv_power_norm", "fv_l2_norm",
               "fv_posterior_floor"),
        "classifier": ("classifier", "svm_c", "svm_epochs", "svm_balanced",
                       "llr_gmm_k"),
        "run": ("seed", "jobs"),
    }

    def __post_init__(self):
        if self.transform not in TRANSFORM_KINDS:
            raise ConfigError(f"unknown transform {self.transform!r}")
        if self.descriptor not in DESCRIPTOR_KINDS:
            raise ConfigError(f"unknown descriptor {self.descriptor!r}")
        if self.classifier not in CLASSIFIER_KINDS:
            raise ConfigError(f"unknown classifier {self.classifier!r}")
        if self.descriptor_mode not in DESCRIPTOR_MODES:
            raise ConfigError(f"unknown descriptor mode {self.descriptor_mode!r}")
        if self.protocol_format not in ("native", "asvspoof2019"):
            raise ConfigError(f"unknown protocol format {self.protocol_format!r}")
        if self.fv_k < 1:
            raise ConfigError("fv_k must be a positive integer")
        if self.classifier == "svm" and self.descriptor_mode == "dense" \
                and not self.fv_enabled:
            raise ConfigError(
                "dense descriptors feed the SVM through the Fisher vector; "
                "enable fv or use descriptor_mode = global"
            )
        if self.classifier == "gmm-llr" and self.transform not in ("lfcc", "cqcc"):
            raise ConfigError("the GMM LLR baseline consumes lfcc or cqcc frames")

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        sections = parse_config_text(text)
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for section, body in sections.items():
            if section not in cls._SCHEMA:
                raise ConfigError(f"unknown section [{section}]")
            for key, value in body.items():
                if key not in cls._SCHEMA[section]:
                    raise ConfigError(f"unknown key {key!r} in section [{section}]")
                kind = types[key]
                try:
                    if kind == "bool":
                        kwargs[key] = _parse_bool(value, key)
                    elif kind == "int":
                        kwargs[key] = int(value)
                    elif kind == "float":
                        kwargs[key] = float(value)
                    else:
                        kwargs[key] = value
                except ValueError as exc:
                    raise ConfigError(f"{key}: bad value {value!r}") from exc
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        return cls.from_text(path.read_text(encoding="utf-8"))

    def to_sections(self) -> dict[str, dict[str, str]]:
        return {section: {key: _fmt(getattr(self, key)) for key in keys}
                for section, keys in self._SCHEMA.items()}

    def to_text(self) -> str:
        return serialize_sections(self.to_sections())

    def save(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="ascii")

    def section_fingerprint(self, *sections: str) -> str:
        parts = []
        full = self.to_sections()
        for name in sections:
            body = full[name]
            parts.append(f"[{name}]" + ";".join(f"{k}={v}" for k, v in body.items()))
        return hashlib.sha256("|".join(parts).encode("ascii")).hexdigest()[:12]

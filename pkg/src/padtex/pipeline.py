"""End-to-end experiment orchestration with on-disk staged caching.

Stages: extract -> gmm-train -> fv-encode -> svm-train -> score ->
evaluate -> report. Every stage writes its outputs under the cache/output
directories keyed by a fingerprint of the configuration it depends on, so
re-running with an unchanged config recomputes nothing, and changing a
parameter invalidates exactly the stages downstream of it. All randomness
derives from the master seed via per-stage hashes; for a fixed seed the
emitted score files are byte-identical across runs, cold or warm cache.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

import numpy as np

from .audio_io import read_wav, peak_normalize
from .cache import read_feature_cache, write_feature_cache
from .classify import gmm_llr_score, load_svm, save_svm, svm_score_batch, svm_train
from .config import ExperimentConfig, derive_seed
from .encoding import fisher_vector, gmm_fit, load_gmm, save_gmm
from .errors import ConfigError, DataError, PadTexError
from .metrics import (ScoreSet, TdcfCosts, bpcer_at_apcer, compute_eer, min_tdcf,
                      read_asv_score_file, read_score_file, write_det_curve,
                      write_score_file)
from .protocol import (format_report_table, parse_protocol, per_pai_report,
                       write_report_csv)
from .texture import (DescriptorConfig, FilterBank, dense_local_descriptors,
                      extract_descriptor, load_filter_bank)
from .timefreq import (cqcc_matrix, cqt_power, lfcc_matrix, render_gray_image,
                       stft_power)

__all__ = ["STAGES", "ExperimentRunner", "run_experiment", "default_bank_path"]

STAGES = ("extract", "gmm-train", "fv-encode", "svm-train", "score",
          "evaluate", "report")


def default_bank_path(side: int, n_filters: int) -> Path:
    """Packaged ICA bank for the given (side, filter count)."""
    root = resources.files("padtex").joinpath("data", "banks")
    path = Path(str(root.joinpath(f"bsif_l{side}_n{n_filters}.bank")))
    if not path.is_file():
        raise ConfigError(
            f"no packaged BSIF bank for l={side}, N={n_filters}; "
            f"generate one with 'padtex learn-bsif' and set bank_path"
        )
    return path


def _stage_error(stage: str, trial_id: str | None, exc: Exception) -> PadTexError:
    where = f"stage {stage}" + (f", trial {trial_id}" if trial_id else "")
    if isinstance(exc, PadTexError):
        return type(exc)(f"[{where}] {exc}")
    return DataError(f"[{where}] {type(exc).__name__}: {exc}")


class ExperimentRunner:
    """Holds parsed manifests, fingerprints and stage implementations."""

    def __init__(self, config: ExperimentConfig, jobs: int | None = None):
        self.config = config
        self.jobs = jobs if jobs is not None else config.jobs
        for name in ("audio_dir", "train_manifest", "eval_manifest"):
            value = getattr(config, name)
            if not value or not Path(value).exists():
                raise ConfigError(f"{name} does not exist: {value!r}")
        if config.asv_scores and not Path(config.asv_scores).is_file():
            raise ConfigError(f"asv_scores does not exist: {config.asv_scores!r}")
        if not config.cache_dir or not config.output_dir:
            raise ConfigError("cache_dir and output_dir must be set")
        self.cache_dir = Path(config.cache_dir)
        self.output_dir = Path(config.output_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self.output_dir.mkdir(parents=True, exist_ok=True)

        self.train_entries = parse_protocol(config.train_manifest,
                                            config.protocol_format, split="train")
        self.eval_entries = parse_protocol(config.eval_manifest,
                                           config.protocol_format, split="eval")

        self._bank: FilterBank | None = None
        if config.descriptor == "bsif" and config.classifier == "svm":
            bank_path = Path(config.bank_path) if config.bank_path else \
                default_bank_path(config.bsif_side, config.bsif_filters)
            self._bank = load_filter_bank(bank_path)

        self._fingerprints = self._compute_fingerprints()
        self.stage_log: dict[str, dict] = {}

    # ---------------------------------------------------------------- setup

    def _descriptor_config(self) -> DescriptorConfig:
        c = self.config
        return DescriptorConfig(kind=c.descriptor, mblbp_rect=c.mblbp_rect,
                                lpq_window=c.lpq_window, lpq_rho=c.lpq_rho,
                                bank=self._bank)

    def _compute_fingerprints(self) -> dict[str, str]:
        c = self.config

        def digest(*parts: str) -> str:
            return hashlib.sha256("|".join(parts).encode()).hexdigest()[:12]

        def file_digest(path) -> str:
            return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:12]

        bank_part = ""
        if self._bank is not None:
            bank_part = hashlib.sha256(self._bank.filters.tobytes()).hexdigest()[:12]
        extract = digest("extract", c.section_fingerprint("transform", "descriptor"),
                         "classifier=" + c.classifier, bank_part)
        train_data = file_digest(c.train_manifest)
        gmm = digest("gmm", extract, train_data, f"k={c.fv_k}",
                     f"llr_k={c.llr_gmm_k}", f"seed={derive_seed(c.seed, 'gmm')}")
        fv = digest("fv", gmm, c.section_fingerprint("fv"))
        svm = digest("svm", fv, c.section_fingerprint("classifier"), train_data,
                     f"seed={derive_seed(c.seed, 'svm')}")
        return {"extract": extract, "gmm": gmm, "fv": fv, "svm": svm}

    # ---------------------------------------------------------------- paths

    def extract_dir(self) -> Path:
        return self.cache_dir / f"extract_{self._fingerprints['extract']}"

    def fv_dir(self) -> Path:
        return self.cache_dir / f"fv_{self._fingerprints['fv']}"

    def gmm_path(self, tag: str = "") -> Path:
        suffix = f"_{tag}" if tag else ""
        return self.cache_dir / f"gmm_{self._fingerprints['gmm']}{suffix}.gmm"

    def svm_path(self) -> Path:
        return self.cache_dir / f"svm_{self._fingerprints['svm']}.svm"

    def score_path(self) -> Path:
        return self.output_dir / "scores_eval.txt"

    def all_entries(self):
        return list(self.train_entries) + list(self.eval_entries)

    # ------------------------------------------------------------- features

    def _transform(self, clip):
        c = self.config
        if c.transform == "stft":
            return stft_power(clip, c.stft_window, c.stft_hop, c.stft_fft)
        if c.transform == "lfcc":
            return lfcc_matrix(clip, c.lfcc_filters, c.lfcc_coeffs, fft_len=c.stft_fft)
        if c.transform == "cqt":
            return cqt_power(clip, c.cqt_fmin, c.cqt_bins_per_octave,
                             c.cqt_octaves, c.cqt_hop)
        return cqcc_matrix(clip, c.cqt_fmin, c.cqt_bins_per_octave, c.cqt_octaves,
                           c.cqt_hop, c.cqcc_coeffs)

    def trial_feature_matrix(self, trial_id: str) -> np.ndarray:
        """Descriptor matrix (rows = local descriptors) for the SVM route, or
        the frame matrix (rows = frames) for the GMM LLR route."""
        c = self.config
        clip = peak_normalize(read_wav(Path(c.audio_dir) / f"{trial_id}.wav"))
        tfm = self._transform(clip)
        if c.classifier == "gmm-llr":
            return tfm.values.T.copy()
        image = render_gray_image(tfm, c.dynamic_range_db)
        dcfg = self._descriptor_config()
        if c.descriptor_mode == "dense":
            descs = dense_local_descriptors(image.pixels, dcfg, c.block, c.stride)
            return np.vstack([d.values for d in descs])
        return extract_descriptor(image.pixels, dcfg).values[None, :]

    def extract_single(self, trial_id: str) -> None:
        path = self.extract_dir() / f"{trial_id}.fc"
        write_feature_cache(path, self.trial_feature_matrix(trial_id))

    def _read_extract(self, trial_id: str) -> np.ndarray:
        return read_feature_cache(self.extract_dir() / f"{trial_id}.fc")

    # --------------------------------------------------------------- stages

    def stage_extract(self) -> None:
        self.extract_dir().mkdir(parents=True, exist_ok=True)
        pending = [e.trial_id for e in self.all_entries()
                   if not (self.extract_dir() / f"{e.trial_id}.fc").is_file()]
        cached = len(self.all_entries()) - len(pending)
        if pending and self.jobs > 1:
            text = self.config.to_text()
            with ProcessPoolExecutor(max_workers=self.jobs) as pool:
                for trial_id, err in pool.map(_extract_worker,
                                              ((text, t) for t in pending)):
                    if err is not None:
                        raise _stage_error("extract", trial_id, DataError(err))
        else:
            for trial_id in pending:
                try:
                    self.extract_single(trial_id)
                except Exception as exc:
                    raise _stage_error("extract", trial_id, exc) from exc
        self.stage_log["extract"] = {"computed": len(pending), "cached": cached}

    def stage_gmm_train(self) -> None:
        c = self.config
        if c.classifier == "gmm-llr":
            done = self.gmm_path("bona").is_file() and self.gmm_path("attack").is_file()
            if not done:
                for tag in ("bona", "attack"):
                    want_bona = tag == "bona"
                    rows = [self._read_extract(e.trial_id) for e in self.train_entries
                            if e.is_bonafide == want_bona]
                    if not rows:
                        raise _stage_error("gmm-train", None,
                                           DataError(f"no {tag} training trials"))
                    data = np.vstack(rows)
                    model = gmm_fit(data, c.llr_gmm_k,
                                    seed=derive_seed(c.seed, f"gmm-{tag}"))
                    save_gmm(self.gmm_path(tag), model)
            self.stage_log["gmm-train"] = {"computed": 0 if done else 2,
                                           "cached": 2 if done else 0}
            return
        if not c.fv_enabled:
            self.stage_log["gmm-train"] = {"skipped": True}
            return
        done = self.gmm_path().is_file()
        if not done:
            data = np.vstack([self._read_extract(e.trial_id)
                              for e in self.train_entries])
            model = gmm_fit(data, c.fv_k, seed=derive_seed(c.seed, "gmm"))
            save_gmm(self.gmm_path(), model)
        self.stage_log["gmm-train"] = {"computed": 0 if done else 1,
                                       "cached": 1 if done else 0}

    def stage_fv_encode(self) -> None:
        c = self.config
        if c.classifier == "gmm-llr" or not c.fv_enabled:
            self.stage_log["fv-encode"] = {"skipped": True}
            return
        self.fv_dir().mkdir(parents=True, exist_ok=True)
        model = load_gmm(self.gmm_path())
        pending = [e.trial_id for e in self.all_entries()
                   if not (self.fv_dir() / f"{e.trial_id}.fc").is_file()]
        cached = len(self.all_entries()) - len(pending)
        for trial_id in pending:
            try:
                fv = fisher_vector(model, self._read_extract(trial_id),
                                   power_norm=c.fv_power_norm,
                                   l2_norm=c.fv_l2_norm,
                                   posterior_floor=c.fv_posterior_floor)
                write_feature_cache(self.fv_dir() / f"{trial_id}.fc", fv.values)
            except Exception as exc:
                raise _stage_error("fv-encode", trial_id, exc) from exc
        self.stage_log["fv-encode"] = {"computed": len(pending), "cached": cached}

    def _classifier_features(self, trial_id: str) -> np.ndarray:
        if self.config.fv_enabled:
            return read_feature_cache(self.fv_dir() / f"{trial_id}.fc")[0]
        return self._read_extract(trial_id)[0]

    def stage_svm_train(self) -> None:
        c = self.config
        if c.classifier == "gmm-llr":
            self.stage_log["svm-train"] = {"skipped": True}
            return
        done = self.svm_path().is_file()
        if not done:
            features = np.vstack([self._classifier_features(e.trial_id)
                                  for e in self.train_entries])
            labels = np.array([1.0 if e.is_bonafide else -1.0
                               for e in self.train_entries])
            model = svm_train(features, labels, c=c.svm_c, epochs=c.svm_epochs,
                              seed=derive_seed(c.seed, "svm"),
                              balanced=c.svm_balanced)
            save_svm(self.svm_path(), model)
        self.stage_log["svm-train"] = {"computed": 0 if done else 1,
                                       "cached": 1 if done else 0}

    def stage_score(self) -> None:
        c = self.config
        trial_ids = [e.trial_id for e in self.eval_entries]
        if c.classifier == "gmm-llr":
            bona_model = load_gmm(self.gmm_path("bona"))
            attack_model = load_gmm(self.gmm_path("attack"))
            values = []
            for trial_id in trial_ids:
                try:
                    frames = self._read_extract(trial_id)
                    values.append(gmm_llr_score(bona_model, attack_model, frames))
                except Exception as exc:
                    raise _stage_error("score", trial_id, exc) from exc
            scores = np.array(values)
        else:
            model = load_svm(self.svm_path())
            try:
                features = np.vstack([self._classifier_features(t) for t in trial_ids])
            except Exception as exc:
                raise _stage_error("score", None, exc) from exc
            scores = svm_score_batch(model, features)
        score_set = ScoreSet(scores=scores,
                             is_bonafide=np.array([e.is_bonafide
                                                   for e in self.eval_entries]),
                             attack_ids=tuple(e.attack_id for e in self.eval_entries),
                             trial_ids=tuple(trial_ids))
        write_score_file(self.score_path(), score_set)
        self.stage_log["score"] = {"computed": len(trial_ids), "cached": 0}

    def stage_evaluate(self) -> dict:
        scores = read_score_file(self.score_path())
        summary = {
            "n_eval": len(scores),
            "d_eer": compute_eer(scores),
            "bpcer10": bpcer_at_apcer(scores, 0.10),
            "bpcer20": bpcer_at_apcer(scores, 0.05),
            "bpcer100": bpcer_at_apcer(scores, 0.01),
        }
        if self.config.asv_scores:
            asv = read_asv_score_file(self.config.asv_scores)
            costs = TdcfCosts()
            summary["min_tdcf"] = min_tdcf(scores, asv, costs)
            summary["tdcf_costs"] = {
                "c_miss_asv": costs.c_miss_asv, "c_fa_asv": costs.c_fa_asv,
                "c_miss_cm": costs.c_miss_cm, "c_fa_cm": costs.c_fa_cm,
                "pi_tar": costs.pi_tar, "pi_non": costs.pi_non,
                "pi_spoof": costs.pi_spoof,
            }
        write_det_curve(self.output_dir / "det_eval.txt", scores)
        with open(self.output_dir / "metrics.json", "w", encoding="ascii") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
        self.stage_log["evaluate"] = {"computed": 1, "cached": 0}
        return summary

    def stage_report(self) -> None:
        scores = read_score_file(self.score_path())
        asv = read_asv_score_file(self.config.asv_scores) if self.config.asv_scores \
            else None
        rows = per_pai_report(scores, self.eval_entries, asv=asv)
        write_report_csv(self.output_dir / "report.csv", rows)
        (self.output_dir / "report.txt").write_text(format_report_table(rows),
                                                    encoding="ascii")
        self.stage_log["report"] = {"computed": len(rows), "cached": 0}

    # ------------------------------------------------------------------ run

    def run(self, stages=None) -> dict:
        chosen = list(stages) if stages else list(STAGES)
        unknown = [s for s in chosen if s not in STAGES]
        if unknown:
            raise ConfigError(f"unknown stage(s): {unknown}")
        summary = {}
        handlers = {
            "extract": self.stage_extract,
            "gmm-train": self.stage_gmm_train,
            "fv-encode": self.stage_fv_encode,
            "svm-train": self.stage_svm_train,
            "score": self.stage_score,
            "evaluate": self.stage_evaluate,
            "report": self.stage_report,
        }
        for stage in STAGES:
            if stage not in chosen:
                continue
            try:
                result = handlers[stage]()
            except PadTexError as exc:
                if str(exc).startswith("[stage "):
                    raise
                raise _stage_error(stage, None, exc) from exc
            except (OSError, ValueError) as exc:
                raise _stage_error(stage, None, exc) from exc
            if stage == "evaluate":
                summary = result
        manifest = {
            "config": self.config.to_sections(),
            "fingerprints": self._fingerprints,
            "seeds": {name: derive_seed(self.config.seed, name)
                      for name in ("gmm", "gmm-bona", "gmm-attack", "svm")},
            "stages": self.stage_log,
            "metrics": summary,
        }
        with open(self.output_dir / "run_manifest.json", "w", encoding="ascii") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return {"metrics": summary, "stages": dict(self.stage_log),
                "fingerprints": dict(self._fingerprints)}


_WORKER_RUNNERS: dict[str, ExperimentRunner] = {}


def _extract_worker(args):
    config_text, trial_id = args
    try:
        runner = _WORKER_RUNNERS.get(config_text)
        if runner is None:
            runner = ExperimentRunner(ExperimentConfig.from_text(config_text), jobs=1)
            _WORKER_RUNNERS[config_text] = runner
        runner.extract_single(trial_id)
        return trial_id, None
    except Exception as exc:  # carried back to the parent as a message
        return trial_id, f"{type(exc).__name__}: {exc}"


def run_experiment(config: ExperimentConfig, stages=None, jobs: int | None = None) -> dict:
    """Execute the staged pipeline; see ExperimentRunner for the mechanics."""
    return ExperimentRunner(config, jobs=jobs).run(stages)

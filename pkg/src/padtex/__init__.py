"""padtex: texture-based presentation attack detection for speech.

Renders utterances as grayscale time-frequency images, extracts classical
texture descriptors (LBP, MB-LBP, LPQ, BSIF), encodes them as Fisher
vectors over a generative Gaussian mixture, scores with a linear
max-margin classifier, and evaluates with the ISO/IEC 30107-3 metric stack
(APCER/BPCER, DET, D-EER, min t-DCF).
"""

from .audio_io import AudioClip, peak_normalize, read_wav, write_wav
from .classify import SvmModel, gmm_llr_score, svm_score, svm_train
from .config import ExperimentConfig
from .encoding import (FisherVector, GmmModel, fisher_vector, gmm_fit,
                       gmm_log_likelihood, gmm_posteriors)
from .metrics import (AsvScores, ScoreSet, TdcfCosts, bpcer_at_apcer,
                      compute_eer, det_curve, min_tdcf)
from .pipeline import run_experiment
from .protocol import ProtocolEntry, parse_protocol, per_pai_report
from .timefreq import (GrayImage, TimeFreqMatrix, cqcc_matrix, cqt_power,
                       lfcc_matrix, render_gray_image, stft_power)

__version__ = "0.1.0"

__all__ = [
    "AudioClip", "peak_normalize", "read_wav", "write_wav",
    "SvmModel", "gmm_llr_score", "svm_score", "svm_train",
    "ExperimentConfig",
    "FisherVector", "GmmModel", "fisher_vector", "gmm_fit",
    "gmm_log_likelihood", "gmm_posteriors",
    "AsvScores", "ScoreSet", "TdcfCosts", "bpcer_at_apcer",
    "compute_eer", "det_curve", "min_tdcf",
    "run_experiment",
    "ProtocolEntry", "parse_protocol", "per_pai_report",
    "GrayImage", "TimeFreqMatrix", "cqcc_matrix", "cqt_power",
    "lfcc_matrix", "render_gray_image", "stft_power",
    "__version__",
]

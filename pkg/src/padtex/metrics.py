"""Presentation attack detection metrics and the tandem detection cost.

Scores are oriented so that higher means more bona fide, and a trial is
accepted as bona fide iff its score is strictly greater than the threshold.
At threshold tau:

    APCER(tau) = #(attack scores  > tau) / #attacks   (attacks accepted)
    BPCER(tau) = #(bona fide scores <= tau) / #bona    (bona fide rejected)

DET curves are evaluated at midpoints between consecutive distinct scores
plus -inf/+inf sentinels, so every achievable operating point appears
exactly once. The tandem cost follows the ASVspoof 2019 convention: the
ASV system is fixed at its EER threshold on target/non-target scores, the
countermeasure threshold is swept, and the cost is normalized by the
default-decision floor.

Score files are ASCII lines "trial_id attack_id label score"; ASV score
files are lines "trial_id kind score" with kind in target/nontarget/spoof.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, NumericError, ProtocolError

__all__ = [
    "ScoreSet",
    "AsvScores",
    "TdcfCosts",
    "det_curve",
    "compute_eer",
    "bpcer_at_apcer",
    "asv_error_rates",
    "tdcf_constants",
    "min_tdcf",
    "write_score_file",
    "read_score_file",
    "write_det_curve",
    "read_asv_score_file",
]

LABEL_BONAFIDE = "bonafide"
LABEL_SPOOF = "spoof"


@dataclass(frozen=True)
class ScoreSet:
    """Per-trial detection scores with labels and attack identifiers."""

    scores: np.ndarray
    is_bonafide: np.ndarray
    attack_ids: tuple
    trial_ids: tuple | None = None

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        labels = np.asarray(self.is_bonafide, dtype=bool)
        if scores.ndim != 1 or scores.size == 0:
            raise DataError("score set must be a non-empty vector")
        if labels.shape != scores.shape or len(self.attack_ids) != scores.size:
            raise DataError("scores, labels and attack ids must align")
        if not np.all(np.isfinite(scores)):
            raise DataError("scores must be finite")
        if self.trial_ids is not None and len(self.trial_ids) != scores.size:
            raise DataError("trial ids must align with scores")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "is_bonafide", labels)
        object.__setattr__(self, "attack_ids", tuple(self.attack_ids))

    def __len__(self) -> int:
        return self.scores.size

    @classmethod
    def from_arrays(cls, bona_scores, attack_scores, attack_id: str = "A") -> "ScoreSet":
        bona = np.asarray(bona_scores, dtype=np.float64)
        attack = np.asarray(attack_scores, dtype=np.float64)
        scores = np.concatenate([bona, attack])
        labels = np.concatenate([np.ones(bona.size, bool), np.zeros(attack.size, bool)])
        ids = ("-",) * bona.size + (attack_id,) * attack.size
        return cls(scores=scores, is_bonafide=labels, attack_ids=ids)

    def bona_scores(self) -> np.ndarray:
        return self.scores[self.is_bonafide]

    def attack_scores(self) -> np.ndarray:
        return self.scores[~self.is_bonafide]

    def select(self, mask: np.ndarray) -> "ScoreSet":
        ids = tuple(a for a, m in zip(self.attack_ids, mask) if m)
        trials = None
        if self.trial_ids is not None:
            trials = tuple(t for t, m in zip(self.trial_ids, mask) if m)
        return ScoreSet(scores=self.scores[mask], is_bonafide=self.is_bonafide[mask],
                        attack_ids=ids, trial_ids=trials)


@dataclass(frozen=True)
class AsvScores:
    """Verification scores of the fixed ASV system, split by trial kind."""

    target: np.ndarray
    nontarget: np.ndarray
    spoof: np.ndarray

    def __post_init__(self):
        for name in ("target", "nontarget", "spoof"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.size == 0:
                raise DataError(f"ASV {name} scores missing")
            if not np.all(np.isfinite(arr)):
                raise DataError(f"ASV {name} scores must be finite")
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class TdcfCosts:
    """Costs and priors of the tandem detection cost function.

    Defaults follow the ASVspoof 2019 evaluation convention: unit miss
    costs, cost 10 for false accepts, priors (0.9405, 0.0095, 0.05).
    """

    c_miss_asv: float = 1.0
    c_fa_asv: float = 10.0
    c_miss_cm: float = 1.0
    c_fa_cm: float = 10.0
    pi_tar: float = 0.9405
    pi_non: float = 0.0095
    pi_spoof: float = 0.05

    def __post_init__(self):
        priors = (self.pi_tar, self.pi_non, self.pi_spoof)
        if any(p < 0 for p in priors) or abs(sum(priors) - 1.0) > 1e-9:
            raise DataError("priors must be non-negative and sum to 1")
        if min(self.c_miss_asv, self.c_fa_asv, self.c_miss_cm, self.c_fa_cm) <= 0:
            raise DataError("costs must be positive")


def _require_both_classes(scores: ScoreSet) -> tuple[np.ndarray, np.ndarray]:
    bona = np.sort(scores.bona_scores())
    attack = np.sort(scores.attack_scores())
    if bona.size == 0 or attack.size == 0:
        raise DataError("need both bona fide and attack trials")
    return bona, attack


def det_curve(scores: ScoreSet) -> np.ndarray:
    """Operating points (tau, APCER, BPCER), one row per threshold.

    Thresholds are midpoints between consecutive distinct scores plus
    -inf/+inf sentinels; APCER is non-increasing and BPCER non-decreasing
    along the rows.
    """
    bona, attack = _require_both_classes(scores)
    distinct = np.unique(scores.scores)
    taus = np.concatenate([[-np.inf], (distinct[:-1] + distinct[1:]) / 2.0, [np.inf]])
    apcer = (attack.size - np.searchsorted(attack, taus, side="right")) / attack.size
    bpcer = np.searchsorted(bona, taus, side="right") / bona.size
    return np.column_stack([taus, apcer, bpcer])


def _eer_crossing(apcer: np.ndarray, bpcer: np.ndarray) -> tuple[int, float]:
    """Index i and interpolation parameter t of the APCER = BPCER crossing
    between rows i-1 and i."""
    diff = apcer - bpcer
    idx = int(np.argmax(diff <= 0.0))
    if idx == 0:
        return 0, 0.0
    denom = diff[idx - 1] - diff[idx]
    t = 0.0 if denom == 0.0 else diff[idx - 1] / denom
    return idx, float(t)


def compute_eer(scores: ScoreSet) -> float:
    """Detection equal error rate: the rate where APCER = BPCER, linearly
    interpolated between the two bracketing DET operating points."""
    det = det_curve(scores)
    apcer, bpcer = det[:, 1], det[:, 2]
    idx, t = _eer_crossing(apcer, bpcer)
    if idx == 0:
        return float(apcer[0])
    return float(apcer[idx - 1] + t * (apcer[idx] - apcer[idx - 1]))


def bpcer_at_apcer(scores: ScoreSet, apcer_target: float) -> float:
    """BPCER at the smallest threshold with APCER <= target (no interpolation)."""
    if not 0.0 < apcer_target < 1.0:
        raise DataError(f"APCER target must be in (0, 1), got {apcer_target}")
    det = det_curve(scores)
    ok = det[:, 1] <= apcer_target
    row = int(np.argmax(ok))  # first row; APCER is non-increasing in tau
    return float(det[row, 2])


def asv_eer_threshold(asv: AsvScores) -> float:
    """Threshold at which the ASV miss and false-accept rates cross."""
    pooled = np.unique(np.concatenate([asv.target, asv.nontarget]))
    if pooled.size < 2:
        raise DataError("degenerate ASV scores: all target/non-target scores identical")
    det = det_curve(ScoreSet.from_arrays(asv.target, asv.nontarget))
    taus, far, frr = det[:, 0], det[:, 1], det[:, 2]
    idx, t = _eer_crossing(far, frr)
    if idx == 0:
        return float(taus[0])
    lo, hi = taus[idx - 1], taus[idx]
    if not np.isfinite(lo):
        return float(hi)
    if not np.isfinite(hi):
        return float(lo)
    return float(lo + t * (hi - lo))


def asv_error_rates(asv: AsvScores) -> tuple[float, float, float]:
    """(P_fa_asv, P_miss_asv, P_miss_spoof_asv) at the ASV EER threshold."""
    tau = asv_eer_threshold(asv)
    p_fa = float(np.mean(asv.nontarget > tau))
    p_miss = float(np.mean(asv.target <= tau))
    p_miss_spoof = float(np.mean(asv.spoof <= tau))
    return p_fa, p_miss, p_miss_spoof


def tdcf_constants(asv: AsvScores, costs: TdcfCosts) -> tuple[float, float]:
    """The two tandem constants weighting CM miss and false-accept rates."""
    p_fa_asv, p_miss_asv, p_miss_spoof_asv = asv_error_rates(asv)
    c1 = (costs.pi_tar * (costs.c_miss_cm - costs.c_miss_asv * p_miss_asv)
          - costs.pi_non * costs.c_fa_asv * p_fa_asv)
    c2 = costs.c_fa_cm * costs.pi_spoof * (1.0 - p_miss_spoof_asv)
    if c1 < 0 or c2 < 0:
        raise NumericError(
            "tandem constants are negative: the ASV operating point is no better "
            "than default decisions under this cost model"
        )
    return float(c1), float(c2)


def min_tdcf(cm_scores: ScoreSet, asv: AsvScores,
             costs: TdcfCosts | None = None) -> float:
    """Minimum normalized tandem detection cost over CM thresholds.

    t-DCF(tau) = C1 * P_miss_cm(tau) + C2 * P_fa_cm(tau), normalized by the
    cheapest default decision min(C1, C2) (by the positive constant when
    one of them is zero).
    """
    costs = costs or TdcfCosts()
    c1, c2 = tdcf_constants(asv, costs)
    positive = [c for c in (c1, c2) if c > 0]
    if not positive:
        raise NumericError("both tandem constants are zero; t-DCF undefined")
    det = det_curve(cm_scores)
    values = c1 * det[:, 2] + c2 * det[:, 1]
    return float(values.min() / min(positive))


def write_score_file(path, scores: ScoreSet) -> None:
    if scores.trial_ids is None:
        raise DataError("score file export requires trial ids")
    with open(path, "w", encoding="ascii") as fh:
        for trial, attack, bona, score in zip(scores.trial_ids, scores.attack_ids,
                                              scores.is_bonafide, scores.scores):
            label = LABEL_BONAFIDE if bona else LABEL_SPOOF
            fh.write(f"{trial} {attack} {label} {float(score)!r}\n")


def read_score_file(path) -> ScoreSet:
    trials, attacks, labels, values = [], [], [], []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ProtocolError(f"{path}:{lineno}: expected 4 fields, got {len(parts)}")
            trial, attack, label, score = parts
            if label not in (LABEL_BONAFIDE, LABEL_SPOOF):
                raise ProtocolError(f"{path}:{lineno}: unknown label {label!r}")
            trials.append(trial)
            attacks.append(attack)
            labels.append(label == LABEL_BONAFIDE)
            try:
                values.append(float(score))
            except ValueError as exc:
                raise ProtocolError(f"{path}:{lineno}: bad score {score!r}") from exc
    if not trials:
        raise ProtocolError(f"{path}: empty score file")
    return ScoreSet(scores=np.array(values), is_bonafide=np.array(labels, bool),
                    attack_ids=tuple(attacks), trial_ids=tuple(trials))


def write_det_curve(path, scores: ScoreSet) -> None:
    """ASCII "tau apcer bpcer" lines for external plotting."""
    det = det_curve(scores)
    with open(path, "w", encoding="ascii") as fh:
        for tau, apcer, bpcer in det:
            fh.write(f"{float(tau)!r} {float(apcer)!r} {float(bpcer)!r}\n")


def read_asv_score_file(path) -> AsvScores:
    buckets = {"target": [], "nontarget": [], "spoof": []}
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ProtocolError(f"{path}:{lineno}: expected 3 fields, got {len(parts)}")
            _, kind, score = parts
            if kind not in buckets:
                raise ProtocolError(f"{path}:{lineno}: unknown trial kind {kind!r}")
            try:
                buckets[kind].append(float(score))
            except ValueError as exc:
                raise ProtocolError(f"{path}:{lineno}: bad score {score!r}") from exc
    return AsvScores(target=np.array(buckets["target"]),
                     nontarget=np.array(buckets["nontarget"]),
                     spoof=np.array(buckets["spoof"]))

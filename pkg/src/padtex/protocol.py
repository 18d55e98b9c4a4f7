"""Trial manifests and per-attack-instrument result tables.

The native manifest format is one ASCII line per trial:

    trial_id label attack_id

with label in {bonafide, spoof} and attack_id "-" for bona fide trials.
The asvspoof2019 adapter maps that corpus's whitespace-separated protocol
columns onto the same entries; the default mapping (trial id from column 2,
attack id from column 4, key from column 5, zero-based 1/3/4) matches the
official cm protocol files and is configurable. For the physical-access
lists, the replay configuration letters already arrive combined in the
attack column; pass two indices as `attack_col` to concatenate columns for
corpora that keep them separate.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ProtocolError
from .metrics import (LABEL_BONAFIDE, LABEL_SPOOF, AsvScores, ScoreSet,
                      TdcfCosts, compute_eer, min_tdcf)

__all__ = ["ProtocolEntry", "parse_protocol", "write_protocol", "PaiRow",
           "per_pai_report", "format_report_table", "write_report_csv",
           "POOLED_ID"]

POOLED_ID = "pooled"


@dataclass(frozen=True)
class ProtocolEntry:
    trial_id: str
    label: str                # "bonafide" | "spoof"
    attack_id: str            # "-" for bona fide
    scenario: str = "-"       # e.g. "LAc" | "PAc"
    split: str = "-"          # e.g. "train" | "dev" | "eval"

    def __post_init__(self):
        if self.label not in (LABEL_BONAFIDE, LABEL_SPOOF):
            raise ProtocolError(f"unknown label {self.label!r}")
        if (self.label == LABEL_BONAFIDE) != (self.attack_id == "-"):
            raise ProtocolError(
                f"{self.trial_id}: bona fide entries must have attack_id '-' "
                f"and attacks must not"
            )

    @property
    def is_bonafide(self) -> bool:
        return self.label == LABEL_BONAFIDE


def _native_fields(parts, path, lineno):
    if len(parts) != 3:
        raise ProtocolError(f"{path}:{lineno}: expected 3 fields, got {len(parts)}")
    return parts[0], parts[1], parts[2]


def parse_protocol(path, format: str = "native", scenario: str = "-",
                   split: str = "-", trial_col: int = 1,
                   attack_col=3, label_col: int = 4,
                   bonafide_token: str = "bonafide") -> list[ProtocolEntry]:
    """Parse a trial manifest; duplicate trial ids are rejected.

    `format` is "native" or "asvspoof2019"; the column arguments apply to
    the adapter only. `attack_col` may be a pair of indices whose tokens
    are concatenated (for corpora that split the attack configuration).
    """
    if format not in ("native", "asvspoof2019"):
        raise ProtocolError(f"unknown protocol format {format!r}")
    path = Path(path)
    entries: list[ProtocolEntry] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if format == "native":
                trial_id, label, attack_id = _native_fields(parts, path, lineno)
                if label not in (LABEL_BONAFIDE, LABEL_SPOOF):
                    raise ProtocolError(f"{path}:{lineno}: unknown label {label!r}")
            else:
                cols = (attack_col,) if isinstance(attack_col, int) else tuple(attack_col)
                needed = max(trial_col, label_col, *cols)
                if len(parts) <= needed:
                    raise ProtocolError(
                        f"{path}:{lineno}: expected at least {needed + 1} columns, "
                        f"got {len(parts)}"
                    )
                trial_id = parts[trial_col]
                key = parts[label_col]
                label = LABEL_BONAFIDE if key == bonafide_token else LABEL_SPOOF
                attack_id = "".join(parts[c] for c in cols)
                if label == LABEL_BONAFIDE:
                    attack_id = "-"
            if trial_id in seen:
                raise ProtocolError(f"{path}:{lineno}: duplicate trial id {trial_id!r}")
            seen.add(trial_id)
            try:
                entries.append(ProtocolEntry(trial_id=trial_id, label=label,
                                             attack_id=attack_id, scenario=scenario,
                                             split=split))
            except ProtocolError as exc:
                raise ProtocolError(f"{path}:{lineno}: {exc}") from exc
    if not entries:
        raise ProtocolError(f"{path}: empty manifest")
    return entries


def write_protocol(path, entries) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for entry in entries:
            fh.write(f"{entry.trial_id} {entry.label} {entry.attack_id}\n")


@dataclass(frozen=True)
class PaiRow:
    """One result row: the PAI's attacks scored against all bona fide trials."""

    attack_id: str
    d_eer: float
    min_tdcf: float     # NaN when no ASV scores were supplied
    n_trials: int       # number of attack trials in the row


def per_pai_report(scores: ScoreSet, entries, asv: AsvScores | None = None,
                   costs: TdcfCosts | None = None) -> list[PaiRow]:
    """Per-attack-id D-EER / min t-DCF rows plus a pooled row (last).

    Every row reuses all bona fide trials; each attack trial contributes to
    exactly one per-PAI row and to the pooled row. Scores are matched to
    entries by trial id.
    """
    if scores.trial_ids is None:
        raise ProtocolError("per-PAI reporting requires trial ids on the score set")
    by_trial = {e.trial_id: e for e in entries}
    if len(by_trial) != len(entries):
        raise ProtocolError("duplicate trial ids in protocol entries")
    score_by_trial = {}
    for trial_id, score in zip(scores.trial_ids, scores.scores):
        if trial_id not in by_trial:
            raise ProtocolError(f"scored trial {trial_id!r} not in the protocol")
        score_by_trial[trial_id] = float(score)
    missing = [e.trial_id for e in entries if e.trial_id not in score_by_trial]
    if missing:
        raise ProtocolError(f"missing scores for {len(missing)} trials "
                            f"(first: {missing[0]!r})")

    bona = np.array([score_by_trial[e.trial_id] for e in entries if e.is_bonafide])
    groups: dict[str, list[float]] = {}
    for e in entries:
        if not e.is_bonafide:
            groups.setdefault(e.attack_id, []).append(score_by_trial[e.trial_id])
    if bona.size == 0 or not groups:
        raise ProtocolError("need both bona fide and attack trials for a report")

    def row(attack_id: str, attack_scores: np.ndarray) -> PaiRow:
        subset = ScoreSet.from_arrays(bona, attack_scores, attack_id=attack_id)
        tdcf = float("nan")
        if asv is not None:
            tdcf = min_tdcf(subset, asv, costs)
        return PaiRow(attack_id=attack_id, d_eer=compute_eer(subset), min_tdcf=tdcf,
                      n_trials=int(attack_scores.size))

    rows = [row(attack_id, np.array(groups[attack_id]))
            for attack_id in sorted(groups)]
    rows.append(row(POOLED_ID, np.concatenate([np.array(groups[a]) for a in sorted(groups)])))
    return rows


def format_report_table(rows) -> str:
    """Aligned ASCII table of the per-PAI rows."""
    header = ("attack_id", "d_eer(%)", "min_tdcf", "n_trials")
    cells = [header]
    for r in rows:
        tdcf = "-" if np.isnan(r.min_tdcf) else f"{r.min_tdcf:.4f}"
        cells.append((r.attack_id, f"{100.0 * r.d_eer:.2f}", tdcf, str(r.n_trials)))
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
             for row in cells]
    return "\n".join(lines) + "\n"


def write_report_csv(path, rows) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("attack_id,d_eer,min_tdcf,n_trials\n")
        for r in rows:
            tdcf = "nan" if np.isnan(r.min_tdcf) else repr(float(r.min_tdcf))
            fh.write(f"{r.attack_id},{float(r.d_eer)!r},{tdcf},{r.n_trials}\n")

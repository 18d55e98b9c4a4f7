import numpy as np
import pytest

from padtex.errors import ProtocolError
from padtex.metrics import AsvScores, ScoreSet, compute_eer
from padtex.protocol import (POOLED_ID, ProtocolEntry, format_report_table,
                             parse_protocol, per_pai_report, write_protocol,
                             write_report_csv)


def test_parse_native_lines(tmp_path):
    path = tmp_path / "p.txt"
    path.write_text("T_0001 bonafide -\nT_0002 spoof A07\n")
    entries = parse_protocol(path)
    assert entries[0].is_bonafide and entries[0].attack_id == "-"
    assert not entries[1].is_bonafide and entries[1].attack_id == "A07"


def test_parse_native_rejects_bad_label(tmp_path):
    path = tmp_path / "p.txt"
    path.write_text("T_0001 bonafide -\nT_0002 genuine -\n")
    with pytest.raises(ProtocolError, match="p.txt:2"):
        parse_protocol(path)


def test_parse_native_rejects_malformed_line_with_number(tmp_path):
    path = tmp_path / "p.txt"
    path.write_text("T_0001 bonafide -\nT_0002 spoof\n")
    with pytest.raises(ProtocolError, match=":2"):
        parse_protocol(path)


def test_parse_rejects_duplicates(tmp_path):
    path = tmp_path / "p.txt"
    path.write_text("T_0001 bonafide -\nT_0001 spoof A01\n")
    with pytest.raises(ProtocolError, match="duplicate"):
        parse_protocol(path)


def test_parse_rejects_inconsistent_attack_id(tmp_path):
    path = tmp_path / "p.txt"
    path.write_text("T_0001 bonafide A01\n")
    with pytest.raises(ProtocolError, match="bona fide"):
        parse_protocol(path)


def test_parse_asvspoof2019_adapter(tmp_path):
    path = tmp_path / "cm.txt"
    path.write_text(
        "LA_0079 LA_T_1138215 - - bonafide\n"
        "LA_0079 LA_T_1007571 - A01 spoof\n"
        "PA_0098 PA_T_0013415 cbb BB spoof\n"
    )
    entries = parse_protocol(path, format="asvspoof2019", scenario="LAc", split="train")
    assert entries[0].trial_id == "LA_T_1138215"
    assert entries[0].is_bonafide
    assert entries[1].attack_id == "A01"
    assert entries[2].attack_id == "BB"
    assert entries[0].scenario == "LAc" and entries[0].split == "train"


def test_parse_asvspoof2019_two_column_attack(tmp_path):
    path = tmp_path / "cm.txt"
    path.write_text("PA_01 PA_T_01 env B C spoof\n")
    entries = parse_protocol(path, format="asvspoof2019", attack_col=(3, 4),
                             label_col=5)
    assert entries[0].attack_id == "BC"


def test_protocol_roundtrip_lossless(tmp_path):
    rng = np.random.default_rng(90)
    entries = []
    for i in range(1000):
        if rng.uniform() < 0.4:
            entries.append(ProtocolEntry(f"T{i:05d}", "bonafide", "-"))
        else:
            entries.append(ProtocolEntry(f"T{i:05d}", "spoof", f"A{rng.integers(1, 8):02d}"))
    path = tmp_path / "p.txt"
    write_protocol(path, entries)
    back = parse_protocol(path)
    assert [(e.trial_id, e.label, e.attack_id) for e in back] == \
        [(e.trial_id, e.label, e.attack_id) for e in entries]


def make_scored(entries, rng):
    scores = []
    for e in entries:
        scores.append(rng.normal(2.0 if e.is_bonafide else 0.0))
    return ScoreSet(scores=np.array(scores),
                    is_bonafide=np.array([e.is_bonafide for e in entries]),
                    attack_ids=tuple(e.attack_id for e in entries),
                    trial_ids=tuple(e.trial_id for e in entries))


def synthetic_entries(rng, n_bona=40, per_attack=25, attack_ids=("P1", "P2", "P3")):
    entries = [ProtocolEntry(f"B{i:03d}", "bonafide", "-") for i in range(n_bona)]
    for a in attack_ids:
        entries += [ProtocolEntry(f"{a}_{i:03d}", "spoof", a) for i in range(per_attack)]
    return entries


def test_per_pai_rows_match_hand_filtered_subsets():
    rng = np.random.default_rng(91)
    entries = synthetic_entries(rng)
    scores = make_scored(entries, rng)
    rows = per_pai_report(scores, entries)
    assert [r.attack_id for r in rows] == ["P1", "P2", "P3", POOLED_ID]
    bona = scores.scores[scores.is_bonafide]
    for row in rows[:-1]:
        mask = np.array([a == row.attack_id for a in scores.attack_ids])
        subset = ScoreSet.from_arrays(bona, scores.scores[mask])
        assert row.d_eer == compute_eer(subset)
        assert row.n_trials == int(mask.sum())
        assert np.isnan(row.min_tdcf)
    pooled = rows[-1]
    attack_all = scores.scores[~scores.is_bonafide]
    assert pooled.n_trials == attack_all.size
    assert pooled.d_eer == compute_eer(ScoreSet.from_arrays(bona, attack_all))


def test_single_pai_row_equals_pooled():
    rng = np.random.default_rng(92)
    entries = synthetic_entries(rng, attack_ids=("RX",))
    scores = make_scored(entries, rng)
    rows = per_pai_report(scores, entries)
    assert len(rows) == 2
    assert rows[0].d_eer == rows[1].d_eer
    assert rows[0].n_trials == rows[1].n_trials


def test_every_attack_counted_once():
    rng = np.random.default_rng(93)
    entries = synthetic_entries(rng)
    scores = make_scored(entries, rng)
    rows = per_pai_report(scores, entries)
    n_attacks = sum(1 for e in entries if not e.is_bonafide)
    assert sum(r.n_trials for r in rows[:-1]) == n_attacks == rows[-1].n_trials


def test_per_pai_with_asv_tdcf():
    rng = np.random.default_rng(94)
    entries = synthetic_entries(rng)
    scores = make_scored(entries, rng)
    asv = AsvScores(target=rng.normal(4.0, 1.0, 200),
                    nontarget=rng.normal(0.0, 1.0, 200),
                    spoof=rng.normal(2.0, 1.0, 200))
    rows = per_pai_report(scores, entries, asv=asv)
    assert all(np.isfinite(r.min_tdcf) for r in rows)


def test_missing_score_detected():
    rng = np.random.default_rng(95)
    entries = synthetic_entries(rng)
    scores = make_scored(entries[:-1], rng)
    with pytest.raises(ProtocolError, match="missing scores"):
        per_pai_report(scores, entries)


def test_unknown_scored_trial_detected():
    rng = np.random.default_rng(96)
    entries = synthetic_entries(rng)
    scores = make_scored(entries + [ProtocolEntry("GHOST", "spoof", "P1")], rng)
    with pytest.raises(ProtocolError, match="not in the protocol"):
        per_pai_report(scores, entries)


def test_report_exports(tmp_path):
    rng = np.random.default_rng(97)
    entries = synthetic_entries(rng)
    scores = make_scored(entries, rng)
    rows = per_pai_report(scores, entries)
    table = format_report_table(rows)
    assert table.splitlines()[0].split() == ["attack_id", "d_eer(%)", "min_tdcf",
                                             "n_trials"]
    assert POOLED_ID in table
    csv_path = tmp_path / "report.csv"
    write_report_csv(csv_path, rows)
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "attack_id,d_eer,min_tdcf,n_trials"
    assert len(lines) == len(rows) + 1
    fields = lines[1].split(",")
    assert fields[0] == "P1"
    assert float(fields[1]) == rows[0].d_eer

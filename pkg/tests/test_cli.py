import json
import subprocess
import sys

import pytest

from abcelect import io as fio
from abcelect.cli import main
from abcelect.election import Election

from conftest import E1_FILE, E3_FILE


def run(args, capsys):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_validate(write_json, capsys):
    assert run(["validate", write_json("e1.json", E1_FILE)], capsys)[0] == 0
    bad = dict(E1_FILE, k=4)
    code, out, _ = run(["validate", write_json("bad.json", bad)], capsys)
    assert code == 1 and "k exceeds candidate count" in out


def test_validate_malformed_json(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"k": 2,\n  "voters": [}')
    code, _, err = run(["validate", path], capsys)
    assert code == 2 and "line 2" in err


def test_run_av_and_mes(write_json, tmp_path, capsys):
    path = write_json("e1.json", E1_FILE)
    out = tmp_path / "out"
    assert run(["run", path, "--rule", "av", "--rule", "mes", "--out", out], capsys)[0] == 0
    av = json.loads((out / "e1.av.committee.json").read_text())
    assert av["committee"] == ["c1", "c2"]
    trace = json.loads((out / "e1.av.trace.json").read_text())
    assert trace["per_round"] == pytest.approx([0.8, 0.3])
    mes = json.loads((out / "e1.mes.trace.json").read_text())
    assert mes["phase"] == ["mes", "completion"]
    assert json.loads((out / "e1.mes.committee.json").read_text())["committee"] == ["c1", "c2"]


def test_run_deterministic_and_round_trip(write_json, tmp_path, capsys):
    path = write_json("e1.json", E1_FILE)
    for d in ("a", "b"):
        run(["run", path, "--rule", "phragmms", "--rule", "seq-phragmen", "--out", tmp_path / d], capsys)
    for name in ("e1.phragmms.trace.json", "e1.seq-phragmen.committee.json", "e1.seq-phragmen.trace.json"):
        first = (tmp_path / "a" / name).read_bytes()
        assert first == (tmp_path / "b" / name).read_bytes()
    e = fio.read_election(path).normalize()
    text = (tmp_path / "a" / "e1.phragmms.trace.json").read_text()
    trace = fio.trace_from_json(json.loads(text), e)
    assert fio.dumps(trace.to_json(e)) == text
    text = (tmp_path / "a" / "e1.seq-phragmen.committee.json").read_text()
    rule, committee = fio.committee_from_json(json.loads(text), e)
    assert fio.dumps(fio.committee_to_json(e, rule, committee)) == text


def test_election_file_round_trip(write_json, tmp_path):
    e = fio.read_election(write_json("e1.json", E1_FILE))
    fio.write_election(tmp_path / "copy.json", e)
    text = (tmp_path / "copy.json").read_text()
    again = fio.read_election(tmp_path / "copy.json")
    assert again.exact_weights == e.exact_weights
    fio.write_election(tmp_path / "copy2.json", again)
    assert (tmp_path / "copy2.json").read_text() == text
    thirds = Election.from_ballots([[0]] * 3, k=1).normalize()
    fio.write_election(tmp_path / "t.json", thirds)
    assert fio.read_election(tmp_path / "t.json").exact_weights == thirds.exact_weights


def test_run_rule_option_mismatch(write_json, capsys):
    code, _, err = run(["run", write_json("e1.json", E1_FILE), "--rule", "av", "--allow-copies"], capsys)
    assert code == 1 and "multi-copy" in err


def test_run_k_override(write_json, capsys):
    code, out, _ = run(["run", write_json("e1.json", E1_FILE), "--rule", "av", "--k", "1"], capsys)
    assert code == 0 and '"committee": [\n    "c1"\n  ]' in out


def test_measure_rows(write_json, tmp_path, capsys):
    path = write_json("e3.json", E3_FILE)
    code, out, _ = run(["measure", path, "--rule", "av", "--metrics", "jr,priceability,minavg",
                        "--l-grid", "1,2"], capsys)
    assert code == 0
    rows = out.strip().splitlines()
    assert rows[0] == "metric,l,value,witness"
    assert "jr,,1,c3" in rows
    assert "gap,,0.25," in rows
    assert "minavg,1,0.0,c3:v2" in rows
    assert "minavg,2,none," in rows


def test_measure_with_committee_file(write_json, tmp_path, capsys):
    path = write_json("e3.json", E3_FILE)
    committee = write_json("c.json", {"rule": "av", "committee": ["c1", "c2"]})
    out = tmp_path / "m"
    code, _, _ = run(["measure", path, "--committee", committee, "--metrics", "mms,stake,subset,variance",
                      "--out", out], capsys)
    assert code == 0
    rows = {(r["metric"], r["l"]): r for r in fio.read_csv(out / "e3.av.measures.csv")}
    assert float(rows[("mms", "")]["value"]) == pytest.approx(0.25)
    assert float(rows[("stake", "2")]["value"]) == pytest.approx(0.5)
    assert float(rows[("subset", "2")]["value"]) == pytest.approx(0.5)


def test_measure_errors(write_json, capsys):
    path = write_json("e3.json", E3_FILE)
    assert run(["measure", path, "--rule", "av", "--metrics", ""], capsys)[0] == 1
    assert run(["measure", path, "--metrics", "jr"], capsys)[0] == 1
    assert run(["measure", path, "--rule", "av", "--metrics", "minavg", "--l-grid", "5"], capsys)[0] == 1
    assert run(["measure", path, "--rule", "av", "--metrics", "nonsense"], capsys)[0] == 1


def test_manifest(write_json, tmp_path, capsys):
    write_json("e1.json", E1_FILE)
    manifest = write_json("manifest.json", {"inputs": ["e1.json"], "rules": ["seq-phragmen"],
                                            "metrics": ["jr", "pav"], "out": "res"})
    assert run(["run", "--manifest", manifest], capsys)[0] == 0
    assert (tmp_path / "res" / "e1.seq-phragmen.trace.json").exists()
    assert run(["measure", "--manifest", manifest], capsys)[0] == 0
    rows = fio.read_csv(tmp_path / "res" / "e1.seq-phragmen.measures.csv")
    assert [r["metric"] for r in rows] == ["jr", "pav"]


def test_dataset_stats(tmp_path, capsys):
    src = tmp_path / "series"
    src.mkdir()
    (src / "a.json").write_text(json.dumps(E1_FILE))
    (src / "b.json").write_text(json.dumps(dict(E1_FILE, meta={"era": 2})))
    out = tmp_path / "stats"
    assert run(["dataset-stats", src, "--out", out, "--rule", "av", "--rule", "mes"], capsys)[0] == 0
    changes = fio.read_csv(out / "changes.csv")
    assert len(changes) == 1
    assert all(float(changes[0][k]) == 0 for k in ("voter_set", "weight", "opinion", "candidate_set"))
    assert fio.read_csv(out / "half_weight.csv")[0]["half_prefix"] == "1"
    overlap = fio.read_csv(out / "overlap.csv")
    assert float(overlap[0]["av"]) == 2.0
    (src / "c.json").write_text(json.dumps(E1_FILE))
    assert run(["dataset-stats", src, "--out", out], capsys)[0] == 1


def test_dataset_stats_single_election(tmp_path, capsys):
    src = tmp_path / "one"
    src.mkdir()
    (src / "a.json").write_text(json.dumps(E1_FILE))
    assert run(["dataset-stats", src, "--out", tmp_path / "o"], capsys)[0] == 0
    assert fio.read_csv(tmp_path / "o" / "changes.csv") == []
    assert len(fio.read_csv(tmp_path / "o" / "order_statistics.csv")) == 6


def test_generate_and_replace_cost(tmp_path, capsys):
    path = tmp_path / "g.json"
    args = ["generate", "--n", "40", "--m", "8", "--k", "3", "--ballot-cap", "3", "--seed", "5", "--out", path]
    assert run(args, capsys)[0] == 0
    first = path.read_bytes()
    assert run(args, capsys)[0] == 0
    assert path.read_bytes() == first
    assert run(["validate", path], capsys)[0] == 0
    code, out, _ = run(["replace-cost", path, "--rule", "seq-phragmen", "--l-grid", "1,3"], capsys)
    assert code == 0 and len(out.strip().splitlines()) == 3


def test_replace_cost_values(write_json, capsys):
    path = write_json("e1.json", E1_FILE)
    code, out, _ = run(["replace-cost", path, "--rule", "seq-phragmen", "--l-grid", "2"], capsys)
    assert code == 0 and out.splitlines()[1].startswith("seq-phragmen,2,1.6,2,")
    assert run(["replace-cost", path, "--rule", "mes"], capsys)[0] == 1


def test_bad_flag_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--bogus"])
    assert exc.value.code == 1


def test_module_entry_point(write_json):
    path = write_json("e1.json", E1_FILE)
    res = subprocess.run([sys.executable, "-m", "abcelect", "validate", str(path)],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "ok" in res.stdout

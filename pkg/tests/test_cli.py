import json

import pytest

from simplexwar.cli import SWEEP_COLUMNS, WALK_COLUMNS, main
from simplexwar.core import SimSummary


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(out):
    lines = out.strip().splitlines()
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


def test_walk_header_is_stable(capsys):
    code, out, _ = run(capsys, "walk", "--n", "4", "--m", "2", "--seed", "1", "--reps", "100")
    assert code == 0
    assert out.splitlines()[0] == WALK_COLUMNS == "n,m,reps,mean,std_error,median,max,lower_bound,upper_bound"


@pytest.mark.parametrize(
    "argv, exact",
    [
        (["--n", "4", "--m", "2"], 4.0),
        (["--n", "6", "--m", "3"], 8.0),
        (["--n", "7", "--m", "2", "--sizes", "3,4"], 12.0),
    ],
)
def test_walk_exact_column(capsys, argv, exact):
    code, out, _ = run(capsys, "walk", *argv, "--seed", "1", "--reps", "2000", "--exact")
    assert code == 0
    (row,) = rows(out)
    assert float(row["exact"]) == pytest.approx(exact, abs=1e-9)
    assert abs(float(row["mean"]) - exact) <= 4 * float(row["std_error"])
    assert float(row["lower_bound"]) <= exact <= float(row["upper_bound"])


def test_walk_rejects_indivisible(capsys):
    code, out, err = run(capsys, "walk", "--n", "7", "--m", "2", "--seed", "1")
    assert code == 2 and out == ""
    assert "divide" in err or "m | n" in err or "7" in err


def test_walk_rejects_bad_sizes(capsys):
    code, _, err = run(capsys, "walk", "--n", "4", "--m", "2", "--sizes", "2,x", "--seed", "1")
    assert code == 2 and err


def test_missing_seed_is_usage_error(capsys):
    assert run(capsys, "walk", "--n", "4", "--m", "2")[0] == 2


def test_sweep_filters_pairs(capsys, caplog):
    code, out, _ = run(
        capsys, "sweep", "--n-list", "8,9", "--m-list", "2,3,8", "--seed", "2", "--reps", "200"
    )
    assert code == 0
    assert out.splitlines()[0] == SWEEP_COLUMNS
    got = [(int(r["n"]), int(r["m"])) for r in rows(out)]
    assert got == [(8, 2), (9, 3)]
    assert sum("skipping" in r.message for r in caplog.records) == 4
    r = rows(out)[0]
    assert float(r["n_sq_over_m_sq"]) == 16.0
    assert float(r["avg_over_n_sq"]) == pytest.approx(float(r["avg"]) / 64)


def test_war_histogram_counts(capsys, tmp_path):
    hist = tmp_path / "h.csv"
    code, out, _ = run(
        capsys, "war", "--players", "4", "--seed", "5", "--reps", "300", "--hist", str(hist)
    )
    assert code == 0
    assert out.splitlines()[0] == ",".join(SimSummary.CSV_FIELDS)
    lines = hist.read_text().splitlines()
    assert lines[0] == "bin_lower,bin_upper,count"
    counts = [int(line.split(",")[2]) for line in lines[1:]]
    assert sum(counts) == 300
    assert all(int(line.split(",")[1]) - int(line.split(",")[0]) == 50 for line in lines[1:])


def test_war_rejects_player_count(capsys):
    assert run(capsys, "war", "--players", "1", "--seed", "1")[0] == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["walk", "--n", "12", "--m", "3"],
        ["pwar", "--n", "8", "--m", "4", "--rule", "highest_card"],
        ["fwar", "--n", "10", "--m", "3"],
        ["war", "--players", "3"],
    ],
)
def test_manifest_replay_is_thread_invariant(capsys, tmp_path, argv):
    man = tmp_path / "run.json"
    code, _, _ = run(capsys, *argv, "--seed", "11", "--reps", "500", "--manifest", str(man))
    assert code == 0
    data = json.loads(man.read_text())
    assert data["config"]["seed"] == 11
    code1, one, _ = run(capsys, "replay", str(man), "--threads", "1", "--check")
    code8, eight, _ = run(capsys, "replay", str(man), "--threads", "8", "--check")
    assert code1 == code8 == 0
    assert one == eight


def test_replay_detects_tampering(capsys, tmp_path):
    man = tmp_path / "run.json"
    run(capsys, "walk", "--n", "8", "--m", "2", "--seed", "3", "--reps", "100", "--manifest", str(man))
    data = json.loads(man.read_text())
    data["summary"]["mean_rounds"] += 1
    man.write_text(json.dumps(data))
    assert run(capsys, "replay", str(man), "--check")[0] == 1


def test_json_output(capsys):
    code, out, _ = run(capsys, "pwar", "--n", "6", "--m", "3", "--seed", "1", "--reps", "100", "--output", "json")
    assert code == 0
    data = json.loads(out)
    assert data["summary"]["replications"] == 100


def test_config_file_and_precedence(capsys, tmp_path):
    cfg = tmp_path / "walk.cfg"
    cfg.write_text("# sticky walk\nn = 6\nm = 3\nseed = 4\nreps = 150\nexact = true\n")
    code, out, _ = run(capsys, "walk", "--config", str(cfg))
    assert code == 0
    (row,) = rows(out)
    assert (row["n"], row["m"], row["reps"]) == ("6", "3", "150")
    assert float(row["exact"]) == pytest.approx(8.0)
    code, out, _ = run(capsys, "walk", "--config", str(cfg), "--reps", "40")
    assert rows(out)[0]["reps"] == "40"


def test_config_file_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n = 6\ncolour = red\n")
    code, _, err = run(capsys, "walk", "--config", str(cfg))
    assert code == 2 and "colour" in err


def test_verify_passes(capsys, tmp_path):
    report = tmp_path / "report.json"
    code, out, _ = run(capsys, "verify", "--max-n", "8", "--max-m", "3", "--reps", "10000", "--report", str(report))
    assert code == 0, out
    assert all(line.startswith("PASS") for line in out.splitlines())
    assert json.loads(report.read_text())["passed"] is True


def test_verify_flags_faulty_rule(capsys, tmp_path):
    rule = tmp_path / "first.py"
    rule.write_text(
        "RULE_ID = 'first_wins'\n"
        "def evaluate(played, remaining):\n"
        "    return [1.0] + [0.0] * (len(played) - 1)\n"
    )
    code, out, _ = run(capsys, "verify", "--max-n", "6", "--max-m", "3", "--reps", "2000", "--rule-file", str(rule))
    assert code == 1
    assert "FAIL rule_axioms[first_wins]" in out
    failed = json.loads(out.strip().splitlines()[-1])["failed"]
    assert [c["name"] for c in failed] == ["rule_axioms[first_wins]"]

import json
import math

import pytest

from pdqpoly.demos import grover_closed_form, grover_samples
from pdqpoly.harness import ExperimentConfig, UsageError, main, run_experiment


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if code in (0, 1) else None), err


def test_protocol_xor_example(capsys):
    code, summary, _ = run_cli(capsys, "protocol", "--n", "2", "--fn", "xor",
                               "--trials", "1000", "--seed", "7")
    assert code == 0
    assert summary["success_rate"] >= 0.99 and summary["wrong_answers"] == 0
    assert summary["meets_accept_threshold"]
    assert summary["fn"] == "6"


def test_grover_example():
    rep = run_experiment(ExperimentConfig("grover", N=64, trials=1000, seed=3))
    s = rep.summary
    p = grover_closed_form(64, 4)
    assert s["probability_closed_form"] == pytest.approx(math.sin(9 * math.asin(1 / 8)) ** 2)
    assert s["probability_deviation"] <= 1e-9
    expected = 1 - (1 - p) ** grover_samples(64)
    assert abs(s["find_rate"] - expected) <= 3 * s["find_rate_sigma"] + 1e-12
    assert rep.ok


def test_pdpp_matches_protocol():
    q = run_experiment(ExperimentConfig("protocol", n=3, trials=300, seed=11))
    c = run_experiment(ExperimentConfig("pdpp", n=3, trials=300, seed=11))
    assert q.ok and c.ok
    strip = lambda recs: [{k: v for k, v in r.items() if k != "mode"} for r in recs]
    assert strip(q.records) == strip(c.records)
    assert c.summary["mode"] == "classical"


def test_mode_classical_flag():
    rep = run_experiment(ExperimentConfig("protocol", n=2, trials=20, mode="classical"))
    assert rep.summary["mode"] == "classical"


def test_replayable_output(tmp_path, capsys):
    paths = [tmp_path / "a.jsonl", tmp_path / "b.jsonl"]
    for p in paths:
        assert main(["protocol", "--n", "3", "--trials", "50", "--seed", "5", "--out", str(p)]) == 0
    capsys.readouterr()
    assert paths[0].read_bytes() == paths[1].read_bytes()
    lines = paths[0].read_text().splitlines()
    assert len(lines) == 50
    assert {"trial", "x", "answer", "branch", "samples_used", "correct"} <= json.loads(lines[0]).keys()


def test_other_seed_differs():
    a = run_experiment(ExperimentConfig("protocol", n=2, trials=30, seed=1))
    b = run_experiment(ExperimentConfig("protocol", n=2, trials=30, seed=2))
    assert a.records != b.records


@pytest.mark.parametrize("argv", [
    ["protocol"],
    ["protocol", "--n", "2", "--trials", "0"],
    ["protocol", "--n", "2", "--fn", "zz"],
    ["protocol", "--n", "2", "--fn", "1f"],
    ["grover", "-N", "12"],
    ["collision", "-N", "7"],
    ["index", "-N", "1"],
    ["protocol", "--n", "2", "--sample-cap", "0"],
])
def test_usage_errors(capsys, argv):
    code, _, err = run_cli(capsys, *argv)
    assert code == 2 and "error" in err


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["teleport"])
    assert exc.value.code == 2


def test_io_error(tmp_path, capsys):
    code, _, err = run_cli(capsys, "protocol", "--n", "2", "--trials", "3",
                           "--out", str(tmp_path / "missing" / "x.jsonl"))
    assert code == 3 and "I/O" in err


def test_violation_exit_code(monkeypatch, capsys):
    import pdqpoly.harness as h
    monkeypatch.setattr(h, "GROVER_TOLERANCE", -1.0)
    code, summary, _ = run_cli(capsys, "grover", "-N", "16", "--trials", "5")
    assert code == 1 and summary["violations"] >= 1


def test_collision_halving():
    rep = run_experiment(ExperimentConfig("collision", N=64, fn="halving", trials=500))
    assert rep.ok and rep.summary["success_rate"] == 1.0
    assert abs(rep.summary["mean_samples"] - 3) < 0.3


def test_index_and_pdqexp():
    rep = run_experiment(ExperimentConfig("index", N=16, trials=100, seed=4))
    assert rep.ok and rep.summary["message_qubits"] == 15
    for post in (False, True):
        rep = run_experiment(ExperimentConfig("pdqexp", n=2, trials=200, postselect=post))
        assert rep.ok and rep.summary["expected_tries"] == 4.0


def test_timeouts_are_not_violations():
    rep = run_experiment(ExperimentConfig("protocol", n=3, fn="and", trials=40, sample_cap=3))
    assert rep.summary["timeout_rate"] > 0
    assert rep.summary["wrong_answers"] == 0


def test_validate_direct():
    with pytest.raises(UsageError):
        ExperimentConfig("protocol", n=None).validate()

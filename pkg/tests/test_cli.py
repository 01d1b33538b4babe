import json

import numpy as np
import pytest

import boxlab as bl
from boxlab.cli import main
from boxlab.protocols import protocol_to_json


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_box_show_pr(capsys):
    payload = run_json(capsys, "box", "show", "--box", "pr")
    assert payload["result"]["x_size"] == 2
    assert payload["config"]["box"] == "pr"
    assert payload["version"] == bl.__version__


def test_box_tv(capsys):
    payload = run_json(capsys, "box", "tv", "--box", "pr",
                       "--other", "local:0,0:0,0")
    assert payload["result"]["tv_closeness"] == 1.0


def test_box_sample_deterministic(capsys):
    argv = ("box", "sample", "--box", "pr", "--x", "0", "--y", "0",
            "--n", "200", "--seed", "5")
    first = run_json(capsys, *argv)
    second = run_json(capsys, *argv)
    assert first == second
    counts = np.array(first["result"]["counts"])
    assert counts.sum() == 200
    assert counts[0, 1] == 0 and counts[1, 0] == 0


def test_box_sample_csv(capsys):
    code, out, _ = run(capsys, "box", "sample", "--box", "pr", "--x", "0",
                       "--y", "0", "--n", "5", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("# config=")
    assert lines[1] == "trial,a,b"
    assert len(lines) == 7


def test_game_eval_and_omega(capsys):
    payload = run_json(capsys, "game", "eval", "--box", "pr", "--p", "0.5")
    assert payload["result"]["win_prob"] == 1.0
    payload = run_json(capsys, "game", "omega", "--p", "0.5")
    assert payload["result"]["omega"] == pytest.approx(0.8535533906)


def test_game_bound_regime_violation_exits_2(capsys):
    code, _, err = run(capsys, "game", "bound", "--p", "0.9", "--q", "0.7")
    assert code == 2
    assert "error:" in err


def test_game_optimize(capsys):
    payload = run_json(capsys, "game", "optimize", "--p", "0.75")
    assert abs(payload["result"]["shortfall"]) <= 1e-6


def test_protocol_run_identity(capsys, tmp_path):
    path = tmp_path / "identity.json"
    path.write_text(protocol_to_json(bl.identity_protocol()))
    payload = run_json(capsys, "protocol", "run", "--protocol", str(path),
                       "--target", "pr", "--source", "pr",
                       "--epsilon", "0.0")
    assert payload["result"]["reduction"]["ok"] is True
    assert payload["result"]["reduction"]["achieved_tv"] == 0.0


def test_protocol_enumerate_count_only(capsys):
    payload = run_json(capsys, "protocol", "enumerate", "--binary",
                       "--k", "1", "--count-only")
    assert payload["result"]["count"] == 4096
    assert payload["result"]["bound"] == 65536


def test_protocol_family_csv(capsys):
    code, out, _ = run(capsys, "protocol", "family", "--target", "pr",
                       "--k", "0", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[1] == "intercept,slope"
    assert len(lines) >= 3


def test_analysis_intersections(capsys):
    # chord through (1/2, omega(1/2)) and (1, 1)
    payload = run_json(capsys, "analysis", "intersections",
                       "--intercept", "0.7071067811865476",
                       "--slope", "0.29289321881345254")
    roots = payload["result"]["roots"]
    assert len(roots) == 2
    assert roots[0] == pytest.approx(0.5, abs=1e-6)
    assert roots[1] == pytest.approx(1.0, abs=1e-6)


def test_analysis_measure(capsys):
    payload = run_json(capsys, "analysis", "measure", "--intercept", "2.0",
                       "--slope", "0.0", "--epsilon", "0.001")
    assert payload["result"]["measure"] == 0.0


def test_analysis_gap_octahedron(capsys):
    payload = run_json(capsys, "analysis", "gap", "--target", "octahedron",
                       "--k", "1")
    assert payload["result"]["gap"] == pytest.approx(np.sqrt(2) / 4 - 0.25,
                                                     abs=1e-9)


def test_analysis_schedule(capsys):
    payload = run_json(capsys, "analysis", "schedule", "--k-max", "2")
    assert payload["result"]["identity_exact"] is True
    assert payload["result"]["bounds"][0] == "65536"


def test_cover_build_and_verify(capsys, tmp_path):
    out = tmp_path / "cover.json"
    code, _, err = run(capsys, "cover", "build", "--epsilon", "0.4",
                       "--out", str(out))
    assert code == 0, err
    stored = json.loads(out.read_text())
    assert stored["result"]["covering_radius"] <= 0.4
    payload = run_json(capsys, "cover", "verify", "--cover", str(out),
                       "--trials", "50", "--seed", "7")
    assert payload["result"]["max_tv"] <= 0.4


def test_cover_box_needs_source(capsys):
    code, _, err = run(capsys, "cover", "box")
    assert code == 2 and "error:" in err


def test_unknown_box_token_exits_2(capsys):
    code, _, err = run(capsys, "box", "show", "--box", "nope")
    assert code == 2 and "error:" in err


def test_missing_file_exits_2(capsys):
    code, _, err = run(capsys, "box", "show", "--box", "file:/no/such.json")
    assert code == 2


def test_schema_flag(capsys):
    code, out, _ = run(capsys, "--schema")
    assert code == 0
    assert "intercept,slope" in out


def test_thread_cap_env(capsys, monkeypatch):
    monkeypatch.setenv("NBL_THREADS", "4")
    payload = run_json(capsys, "game", "omega", "--p", "0.75")
    assert "omega" in payload["result"]
    monkeypatch.setenv("NBL_THREADS", "0")
    code, _, err = run(capsys, "game", "omega", "--p", "0.75")
    assert code == 2


def test_output_file_atomic_write(capsys, tmp_path):
    out = tmp_path / "omega.json"
    code, _, _ = run(capsys, "game", "omega", "--p", "0.5",
                     "--out", str(out))
    assert code == 0
    assert not (tmp_path / "omega.json.tmp").exists()
    assert json.loads(out.read_text())["result"]["omega"] == pytest.approx(
        0.8535533906)


def test_byte_identical_reruns(capsys):
    argv = ("cover", "verify", "--epsilon", "0.5", "--trials", "20")
    _, out1, _ = run(capsys, *argv)
    _, out2, _ = run(capsys, *argv)
    assert out1 == out2

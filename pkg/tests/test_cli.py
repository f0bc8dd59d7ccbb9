import json

import numpy as np
import pytest

from medianorm.bodies import LpBall
from medianorm.cli import main, parse_body
from medianorm.intuition import check_intuitive
from medianorm.median import WeightedPoints
from medianorm.serialize import witness_to_json


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_median_unit_square(capsys):
    code, out, _ = _run(capsys, ["median", "--body", "l1",
                                 "--points", "(0,1);(1,0)", "--weights", "0.5;0.5"])
    assert code == 0
    report = json.loads(out)
    assert report["result"]["value"] == pytest.approx(1.0, abs=1e-12)
    assert report["result"]["status"] == "converged"
    assert report["seed"] == 0
    assert report["version"]


def test_median_fractional_weights(capsys):
    code, out, _ = _run(capsys, ["median", "--body", "lp:2",
                                 "--points", "(0,0,1);(0,1,0);(1,0,0)",
                                 "--weights", "1/3;1/3;1/3"])
    assert code == 0
    assert json.loads(out)["result"]["status"] == "converged"


def test_check_euclidean_triangle(capsys):
    code, out, _ = _run(capsys, ["check", "--body", "lp:2",
                                 "--points", "(0,0,1);(0,1,0);(1,0,0)",
                                 "--weights", "1/3;1/3;1/3"])
    assert code == 0
    assert json.loads(out)["result"]["verdict"] == "intuitive_at_tol"


def test_defect_and_shadow(capsys):
    code, out, _ = _run(capsys, ["defect", "--body", "lp:4",
                                 "--samples", "100", "--seed", "11"])
    assert code == 0
    assert json.loads(out)["result"]["defect"] > 0.5

    code, out, _ = _run(capsys, ["shadow", "--body", "sphere",
                                 "--directions", "4", "--samples", "32"])
    assert code == 0
    assert json.loads(out)["result"]["max_sigma3"] <= 1e-8


def test_shadow_csv(capsys):
    code, out, _ = _run(capsys, ["shadow", "--body", "lp:4", "--directions", "4",
                                 "--samples", "32", "--csv"])
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "direction_x,direction_y,direction_z,sigma3"
    assert len(lines) == 5


def test_input_errors_exit_1(capsys):
    assert _run(capsys, ["median", "--body", "mystery", "--points", "(0,1)"])[0] == 1
    assert _run(capsys, ["median", "--body", "l1", "--points", "(0,1)",
                         "--weights", "0.5;0.5"])[0] == 1
    assert _run(capsys, ["median", "--body", "l1"])[0] == 1
    assert _run(capsys, ["suite", "mystery"])[0] == 1
    assert _run(capsys, ["search", "--body", "lp:4", "--region", "mystery"])[0] == 1


def test_instance_file_and_out_file(tmp_path, capsys):
    inst = tmp_path / "inst.json"
    inst.write_text(json.dumps({"points": [[0.0, 1.0], [1.0, 0.0]],
                                "weights": [0.5, 0.5]}))
    out_file = tmp_path / "report.json"
    code, _, _ = _run(capsys, ["median", "--body", "l1",
                               "--instance", str(inst), "--out", str(out_file)])
    assert code == 0
    assert json.loads(out_file.read_text())["result"]["value"] == pytest.approx(1.0)


def test_search_replay(tmp_path, capsys):
    body = LpBall(1.0, np.ones(3))
    wp = WeightedPoints(np.eye(3), np.full(3, 1 / 3))
    outcome = check_intuitive(body, wp)
    wfile = tmp_path / "witness.json"
    wfile.write_text(json.dumps(witness_to_json(outcome.certificate)))
    code, out, _ = _run(capsys, ["search", "--replay", str(wfile)])
    assert code == 0
    assert json.loads(out)["result"]["replayed"] is True


def test_determinism(capsys):
    argv = ["check", "--body", "ellipsoid:1,2,3", "--points",
            "(0.3,0.1,-0.2);(0.5,-0.4,0.1);(-0.2,0.2,0.6)", "--seed", "5"]
    _, out1, _ = _run(capsys, argv)
    _, out2, _ = _run(capsys, argv)
    a, b = json.loads(out1), json.loads(out2)
    a.pop("wall_time"), b.pop("wall_time")
    assert a == b


def test_presets():
    assert parse_body("sphere").gauge([3.0, 4.0, 0.0]) == pytest.approx(5.0)
    assert parse_body("ellipsoid:1,2,3").gauge([0.0, 2.0, 0.0]) == pytest.approx(1.0)
    assert parse_body("linf", dim=2).gauge([0.3, -0.9]) == pytest.approx(0.9)
    assert parse_body("lp:4").gauge([1.0, 1.0, 0.0]) == pytest.approx(2.0 ** 0.25)

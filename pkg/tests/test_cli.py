import io
import json
from pathlib import Path

import numpy as np
import pytest

from ballmax.cli import boundary_points, main
from ballmax.geometry import BallSystem
from ballmax.serialize import dumps, instance_from_dict, instance_to_dict, strip_timing

DATA = Path(__file__).resolve().parents[1] / "data"
Q3 = str(DATA / "q3_boundary.json")


def run(argv):
    out = io.StringIO()
    code = main(argv, stdout=out)
    return code, out.getvalue()


def run_json(argv):
    code, text = run(argv)
    assert code == 0, text
    return json.loads(text)


def write_instance(tmp_path, name, **over):
    data = json.loads(Path(Q3).read_text()) | over
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


# classify


def test_classify_boundary():
    out = run_json(["classify", Q3])
    assert out["case"] == "boundary"
    assert out["sigma"] == [1, 2] and out["alpha"] == pytest.approx([0.5, 0.5])


@pytest.mark.parametrize("c0, case", [([1.0, 0.5773503], "interior"), ([1.0, -1.0], "outside")])
def test_classify_other_cases(tmp_path, c0, case):
    out = run_json(["classify", write_instance(tmp_path, "i.json", c0=c0)])
    assert out["case"] == case and "sigma" not in out


# solve


def test_solve_boundary():
    out = run_json(["solve", Q3])
    assert out["rstar"] == pytest.approx(0.6633250, abs=1e-7)
    assert out["maximizers"][0] == pytest.approx([1.0, 0.6633250], abs=1e-7)
    assert out["command"] == ["solve", Q3]
    assert out["tolerances"]["bisection"] == 1e-10
    assert "wall_time_s" in out


def test_solve_outside():
    out = run_json(["solve", str(DATA / "q3_outside.json")])
    assert out["case"] == "exterior" and out["rstar"] == pytest.approx(1.6633250, abs=1e-7)


def test_solve_infinite():
    out = run_json(["solve", str(DATA / "q4_boundary.json")])
    assert out["multiplicity"] == "infinite" and len(out["maximizers"]) == 1


def test_solve_interior_flagged_exponential():
    out = run_json(["solve", str(DATA / "q3_interior.json")])
    assert out["multiplicity"] == "finite_list"
    assert any("exponential" in n for n in out["notes"])


def test_solve_with_oracle():
    out = run_json(["solve", Q3, "--oracle", "--seed", "3"])
    assert out["oracle"]["agrees"] and out["oracle"]["seed"] == 3


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("BALLMAX_SEED", "42")
    assert run_json(["solve", Q3, "--oracle"])["oracle"]["seed"] == 42
    assert run_json(["solve", Q3, "--oracle", "--seed", "5"])["oracle"]["seed"] == 5


def test_solve_batch_jobs():
    files = [str(p) for p in sorted(DATA.glob("*.json"))]
    serial = run_json(["solve", *files])
    parallel = run_json(["solve", *files, "--jobs", "2"])
    assert [r["file"] for r in serial["reports"]] == files
    assert strip_timing(serial["reports"]) == strip_timing(parallel["reports"])


def test_solve_deterministic():
    a = strip_timing(run_json(["solve", Q3, "--oracle"]))
    b = strip_timing(run_json(["solve", Q3, "--oracle"]))
    assert dumps(a) == dumps(b)


# validation and exit codes


def test_unknown_field_rejected(tmp_path, capsys):
    code, _ = run(["solve", write_instance(tmp_path, "x.json", extra=1)])
    assert code == 2
    assert json.loads(capsys.readouterr().err)["exit_code"] == 2


def test_m_must_exceed_n(tmp_path):
    path = write_instance(tmp_path, "few.json", centers=[[0, 0], [2, 0]])
    assert run(["classify", path])[0] == 2


def test_wrong_schema_tag(tmp_path):
    assert run(["classify", write_instance(tmp_path, "s.json", schema="ballmax.instance.v0")])[0] == 2


def test_missing_file():
    assert run(["classify", "/nonexistent/instance.json"])[0] == 2


def test_decide_scale_guard():
    code, _ = run(["ssp", "decide", "--s", ",".join(["1"] * 21), "--t", "3", "--beta", "1", "--r", "4"])
    assert code == 3


# ssp


SSP = ["--s", "1,2", "--t", "2", "--beta", "0.8", "--r", "1.5"]


def test_ssp_build():
    g = run_json(["ssp", "build", *SSP])["geometry"]
    assert g["r0"] == pytest.approx(1.3038405, abs=1e-7)
    assert g["cs"] == pytest.approx([0.0, -0.5])


def test_ssp_decide():
    out = run_json(["ssp", "decide", *SSP])
    assert out["max"] == pytest.approx(1.3038405, abs=1e-7)
    assert out["equals_r0"] is True and out["corners"] == [[0, 1]]


def test_ssp_check():
    out = run_json(["ssp", "check", *SSP, "--x", "0,1"])
    assert out["corner"]["is_solution"] and out["corner"]["in_Qr"]
    assert out["caps"]["mismatches"] == 0


def test_ssp_experiment():
    out = run_json(["ssp", "experiment", *SSP, "--eps", "0.01", "--seed", "7", "--rho", "1.3038405"])
    assert out["recovered"] is True
    assert np.isfinite(out["uniform_rho"]["max_delta"])


def test_ssp_invalid_beta():
    assert run(["ssp", "build", "--s", "1,1", "--t", "1", "--beta", "0.5", "--r", "1.4"])[0] == 2


# emit-boundary


def _csv_rows(text):
    lines = text.strip().splitlines()
    return lines[0], [line.split(",") for line in lines[1:]]


def test_emit_boundary_q3_three_arcs():
    code, text = run(["emit-boundary", Q3, "--samples", "720"])
    header, rows = _csv_rows(text)
    assert code == 0 and header == "x1,x2,active_ball_index"
    owners = [int(r[2]) for r in rows]
    assert sorted(set(owners)) == [1, 2, 3]
    # each circle contributes one contiguous arc
    for k in (1, 2, 3):
        idx = [i for i, o in enumerate(owners) if o == k]
        assert idx == list(range(idx[0], idx[-1] + 1))


def test_emit_boundary_empty_q(tmp_path):
    path = write_instance(tmp_path, "e.json", centers=[[0, 0], [5, 0], [2.5, 4]], r=1.0)
    code, text = run(["emit-boundary", path])
    assert code == 0 and text.strip() == "x1,x2,active_ball_index"


def test_emit_boundary_single_ball_full_circle():
    pts, owner = boundary_points(BallSystem([[0.0, 0.0]], 1.0), 100)
    assert len(pts) == 100 and set(owner) == {0}
    assert np.allclose(np.linalg.norm(pts, axis=1), 1.0)


def test_emit_boundary_needs_plane():
    assert run(["emit-boundary", str(DATA / "q4_boundary.json")])[0] == 2


# serialization


def test_round_trip_bit_exact():
    rng = np.random.default_rng(0)
    data = {
        "schema": "ballmax.instance.v1",
        "n": 2,
        "r": float(rng.uniform(1, 2)),
        "centers": rng.normal(size=(4, 2)).tolist(),
        "c0": rng.normal(size=2).tolist(),
    }
    inst = instance_from_dict(data)
    again = instance_from_dict(json.loads(dumps(instance_to_dict(inst))))
    assert np.array_equal(again.system.centers, inst.system.centers)
    assert again.system.radius == inst.system.radius
    assert np.array_equal(again.c0, inst.c0)


def test_report_floats_round_trip():
    out = run_json(["solve", Q3])
    text = dumps(out)
    assert json.loads(text)["rstar"] == out["rstar"]
    assert "0.66332495807107994" in text


def test_dumps_non_finite():
    assert json.loads(dumps({"a": float("inf"), "b": float("nan")})) == {"a": "inf", "b": "nan"}

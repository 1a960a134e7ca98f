import json

import numpy as np
import pytest

from posettrack.cli import main


@pytest.fixture
def scenario(tmp_path):
    out = tmp_path / "gen"
    assert main(["gen", "--seed", "7", "--targets", "3", "--duration", "600", "--out", str(out)]) == 0
    return out / "detections.csv"


def test_gen_deterministic(tmp_path, scenario):
    other = tmp_path / "again"
    main(["gen", "--seed", "7", "--targets", "3", "--duration", "600", "--out", str(other)])
    assert (other / "detections.csv").read_bytes() == scenario.read_bytes()


def test_gen_from_config(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("# scenario\nn_targets = 2\nduration_s = 100\nsample_interval_s = 10\n")
    assert main(["gen", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    assert len((tmp_path / "detections.csv").read_text().splitlines()) == 1 + 22


def test_pipeline(tmp_path, scenario):
    out = tmp_path / "run"
    for cmd in ("track", "kalman"):
        sub = out / cmd
        assert main([cmd, str(scenario), "--out", str(sub)]) == 0
        assert (sub / "tracks.csv").read_text().startswith("track_id,detection_index\n")
        summary = json.loads((sub / "tracks_summary.json").read_text())
        assert summary["detection_count"] == 3 * 61
        assert main(["eval", str(scenario), "--tracks", str(sub / "tracks.csv"), "--out", str(sub)]) == 0
        report = json.loads((sub / "eval.json").read_text())
        assert set(report) >= {"mean_misid", "mean_length_ratio"}
        assert (sub / "misid_hist.csv").exists() and (sub / "length_ratio_hist.csv").exists()


def test_track_options(tmp_path, scenario):
    gates = tmp_path / "g.cfg"
    gates.write_text("dt_max_s = 120\nspeed_max_mps = 280\n")
    mix = tmp_path / "mix.cfg"
    mix.write_text("mix = 1, 1, 1, 2, 1, 1\n")
    argv = ["track", str(scenario), "--gates", str(gates), "--window", "120", "--radii", "10,10,5,1",
            "--weighting", "tailored", "--mix", str(mix), "--m", "1", "--n", "2", "--out", str(tmp_path / "a")]
    assert main(argv) == 0
    argv[-1] = str(tmp_path / "b")
    assert main(argv) == 0
    assert (tmp_path / "a" / "tracks.csv").read_bytes() == (tmp_path / "b" / "tracks.csv").read_bytes()


def test_track_empty_dataset(tmp_path):
    p = tmp_path / "e.csv"
    p.write_text("id,t,x,y,z\n")
    assert main(["track", str(p), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "tracks.csv").read_text() == "track_id,detection_index\n"


def test_eval_missing_index(tmp_path, scenario, capsys):
    bad = tmp_path / "t.csv"
    bad.write_text("track_id,detection_index\n0,0\n0,99999\n")
    assert main(["eval", str(scenario), "--tracks", str(bad), "--out", str(tmp_path)]) == 1
    assert "99999" in capsys.readouterr().err


def test_unknown_flag(scenario, capsys):
    assert main(["track", str(scenario), "--bogus"]) == 1
    assert "usage" in capsys.readouterr().err


def test_missing_file_is_io_error(tmp_path):
    assert main(["track", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]) == 2


def test_width_custody_separability(tmp_path, scenario, capsys):
    assert main(["width", str(scenario)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("width ") and lines[1].startswith("chains ")
    assert int(lines[0].split()[1]) == int(lines[1].split()[1])
    assert main(["custody", str(scenario), "--mode", "all_forward_pairs", "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "custody.json").read_text())["pairing_mode"] == "all_forward_pairs"
    assert main(["separability", str(scenario), "--intervals", "30,60,300", "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "separability.csv").read_text().splitlines()
    assert rows[0] == "interval_s,fraction_separable" and len(rows) == 4


def test_sonar_detect(tmp_path):
    data = np.ones((3, 400))
    data[:, 0] = 50.0
    data[1, 200] = 30.0
    p = tmp_path / "p.csv"
    np.savetxt(p, data, delimiter=",")
    assert main(["sonar-detect", str(p), "--out", str(tmp_path), "--no-align"]) == 0
    rows = (tmp_path / "detections.csv").read_text().splitlines()
    assert rows[0] == "id,t,x,y,z,strength"
    assert len(rows) == 1 + 4

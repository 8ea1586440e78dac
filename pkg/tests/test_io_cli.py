import json

import numpy as np
import pytest

from smalltarget import io
from smalltarget.cli import main
from smalltarget.core import BBox, DataError, Detection, Frame
from smalltarget.pipeline import synth
from smalltarget.synth import Scenario, TargetSpec

SCENARIO = dict(width=64, height=56, frame_count=8, seed=3, noise_sigma=0.005, target={"start": [20, 20], "velocity": [1.5, 0.5]})


@pytest.fixture
def video(tmp_path):
    d = tmp_path / "video"
    synth(Scenario.from_dict(SCENARIO), d)
    return d


# --- PGM ---------------------------------------------------------------------------


@pytest.mark.parametrize("dtype,maxval", [(np.uint8, 255), (np.uint16, 65535)])
def test_pgm_round_trip(tmp_path, dtype, maxval):
    raw = np.random.default_rng(0).integers(0, maxval + 1, (7, 11)).astype(dtype)
    io.write_pgm(tmp_path / "a.pgm", raw)
    back, mv = io.read_pgm(tmp_path / "a.pgm")
    assert mv == maxval and np.array_equal(back, raw)


def test_pgm_header_comments(tmp_path):
    (tmp_path / "c.pgm").write_bytes(b"P5\n# made by hand\n2 1\n255\n\x01\x02")
    raw, mv = io.read_pgm(tmp_path / "c.pgm")
    assert raw.tolist() == [[1, 2]] and mv == 255


@pytest.mark.parametrize("body", [b"P2\n1 1\n255\n0", b"P5\n4 4\n255\n\x00", b"P5\n"])
def test_bad_pgm_rejected(tmp_path, body):
    (tmp_path / "b.pgm").write_bytes(body)
    with pytest.raises(DataError):
        io.read_pgm(tmp_path / "b.pgm")


def test_frame_round_trip_is_exact(tmp_path):
    f = Frame.from_raw(np.arange(12, dtype=np.uint16).reshape(3, 4) * 5000, 0, 16)
    io.write_frame(tmp_path / "f.pgm", f)
    [g] = io.load_frames(tmp_path)
    assert np.array_equal(f.pixels, g.pixels)


def test_sidecar_sets_order_and_depth(tmp_path):
    for name, v in (("b.pgm", 10), ("a.pgm", 20)):
        io.write_pgm(tmp_path / name, np.full((2, 2), v, np.uint16))
    (tmp_path / "frames.json").write_text(json.dumps({"order": ["b.pgm", "a.pgm"], "source_depth": 16}))
    frames = io.load_frames(tmp_path)
    assert [f.to_raw()[0, 0] for f in frames] == [10, 20]


def test_mixed_sizes_name_the_frame(tmp_path):
    io.write_pgm(tmp_path / "a.pgm", np.zeros((4, 4), np.uint8))
    io.write_pgm(tmp_path / "b.pgm", np.zeros((5, 4), np.uint8))
    with pytest.raises(DataError, match="frame 1"):
        io.load_frames(tmp_path)


def test_unreadable_frame_names_the_frame(tmp_path):
    io.write_pgm(tmp_path / "a.pgm", np.zeros((4, 4), np.uint8))
    (tmp_path / "b.pgm").write_bytes(b"junk")
    with pytest.raises(DataError, match="frame 1"):
        io.load_frames(tmp_path)


# --- CSV -----------------------------------------------------------------------------


def test_detections_round_trip(tmp_path):
    dets = [Detection(0, BBox(1, 2, 5, 6), (3.25, 4.5), 0.75, 20), Detection(3, BBox(0, 0, 0, 0), (0, 0), 0.1, 1)]
    io.write_detections(tmp_path / "d.csv", dets)
    text = (tmp_path / "d.csv").read_bytes()
    assert b"\r" not in text and text.startswith(b"frame,x_min,y_min,x_max,y_max,cx,cy,score,area\n")
    back = io.read_detections(tmp_path / "d.csv")
    assert [(d.frame_index, d.bbox, d.centroid, d.area) for d in back] == [(d.frame_index, d.bbox, d.centroid, d.area) for d in dets]


def test_upsampled_detections_carry_original_columns(tmp_path):
    io.write_detections(tmp_path / "d.csv", [Detection(0, BBox(0, 0, 3, 3), (1.5, 1.5), 1.0, 16)], factor=2)
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0].endswith(",cx_orig,cy_orig")
    assert lines[1].endswith(",0.5000,0.5000")


@pytest.mark.parametrize(
    "body,match",
    [
        ("frame,x_min\n", "missing columns"),
        ("frame,x_min,y_min,x_max,y_max,cx,cy,score,area\n0,1,1,2,2,1.5,1.5,0.5,4\n1,1,1,2\n", ":3:"),
        ("frame,x_min,y_min,x_max,y_max,cx,cy,score,area\n0,1,1,2,2,1.5,x,0.5,4\n", ":2:"),
        ("frame,x_min,y_min,x_max,y_max,cx,cy,score,area\n2,1,1,2,2,1.5,1.5,0.5,4\n1,1,1,2,2,1.5,1.5,0.5,4\n", "sorted"),
        ("frame,x_min,y_min,x_max,y_max,cx,cy,score,area\n0,5,1,2,2,1.5,1.5,0.5,4\n", ":2:"),
        ("", "empty"),
    ],
)
def test_bad_detection_rows_report_line(tmp_path, body, match):
    (tmp_path / "d.csv").write_text(body)
    with pytest.raises(DataError, match=match):
        io.read_detections(tmp_path / "d.csv")


def test_tracks_and_gt_round_trip(tmp_path):
    rows = [(0, 1, BBox(1, 2, 3, 4), 0.5), (1, 1, BBox(2, 2, 4, 4), 0.25)]
    io.write_tracks(tmp_path / "t.csv", rows)
    assert io.read_tracks(tmp_path / "t.csv") == rows
    assert io.read_points(tmp_path / "t.csv") == {0: [(2.0, 3.0)], 1: [(3.0, 3.0)]}


# --- CLI ------------------------------------------------------------------------------


def test_cli_end_to_end(video, tmp_path, capsys):
    det, trk = tmp_path / "d.csv", tmp_path / "t.csv"
    assert main(["detect", str(video), "-o", str(det), "--workers", "2"]) == 0
    manifest = json.loads((tmp_path / "d.manifest.json").read_text())
    assert manifest["workers"] == 2 and manifest["frame_count"] == 8
    assert manifest["config"]["resolved"]["patch_size"] == 7
    assert main(["track", str(det), "-o", str(trk)]) == 0
    assert main(["eval", str(trk), str(video / "gt.csv"), "-o", str(tmp_path / "m.json")]) == 0
    m = json.loads((tmp_path / "m.json").read_text())
    assert m["recall"] == 1.0 and m["precision"] == 1.0
    assert main(["render", str(video), str(trk), str(tmp_path / "r")]) == 0
    assert len(list((tmp_path / "r").glob("*.pgm"))) == 8
    assert main(["upsample", str(video), str(tmp_path / "u"), "--factor", "2"]) == 0
    assert io.load_frames(tmp_path / "u")[0].pixels.shape == (112, 128)


def test_cli_config_file_and_flag_override(video, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"patch_size": 9, "top_n_targets": 2}))
    det = tmp_path / "d.csv"
    assert main(["detect", str(video), "-o", str(det), "--config", str(cfg), "--patch-size", "11"]) == 0
    manifest = json.loads((tmp_path / "d.manifest.json").read_text())
    assert manifest["config"]["patch_size"] == 11 and manifest["config"]["top_n_targets"] == 2


def test_cli_workers_env(video, tmp_path, monkeypatch):
    monkeypatch.setenv("SMALLTARGET_WORKERS", "3")
    assert main(["detect", str(video), "-o", str(tmp_path / "d.csv")]) == 0
    assert json.loads((tmp_path / "d.manifest.json").read_text())["workers"] == 3


def test_cli_empty_dir_is_data_error_without_output(tmp_path):
    (tmp_path / "empty").mkdir()
    out = tmp_path / "d.csv"
    assert main(["detect", str(tmp_path / "empty"), "-o", str(out)]) == 2
    assert not out.exists() and not (tmp_path / "d.manifest.json").exists()


def test_cli_missing_dir_is_data_error(tmp_path):
    assert main(["detect", str(tmp_path / "nope"), "-o", str(tmp_path / "d.csv")]) == 2


def test_cli_usage_errors_exit_1(tmp_path):
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["detect"])
    assert e.value.code == 1
    assert main(["bench", str(tmp_path), "--worker-counts", "1"]) == 1


def test_cli_bad_config_value_is_usage_error(video, tmp_path):
    assert main(["detect", str(video), "-o", str(tmp_path / "d.csv"), "--patch-size", "8"]) == 1


def test_cli_track_unsorted_is_data_error(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("frame,x_min,y_min,x_max,y_max,cx,cy,score,area\n2,1,1,2,2,1.5,1.5,0.5,4\n1,1,1,2,2,1.5,1.5,0.5,4\n")
    assert main(["track", str(p), "-o", str(tmp_path / "t.csv")]) == 2


def test_cli_track_empty_detections(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text(",".join(io.DETECTION_FIELDS) + "\n")
    assert main(["track", str(p), "-o", str(tmp_path / "t.csv"), "--frames", "5"]) == 0
    assert (tmp_path / "t.csv").read_text() == ",".join(io.TRACK_FIELDS) + "\n"


def test_cli_eval_malformed_gt_reports_line(video, tmp_path, capsys):
    gt = tmp_path / "gt.csv"
    gt.write_text(",".join(io.GT_FIELDS) + "\n0,1,1,0,0,2,2\n1,1,1,0,0\n")
    det = tmp_path / "d.csv"
    det.write_text(",".join(io.DETECTION_FIELDS) + "\n")
    assert main(["eval", str(det), str(gt)]) == 2
    assert ":3:" in capsys.readouterr().err


def test_cli_eval_empty_detections(video, tmp_path, capsys):
    det = tmp_path / "d.csv"
    det.write_text(",".join(io.DETECTION_FIELDS) + "\n")
    assert main(["eval", str(det), str(video / "gt.csv")]) == 0
    m = json.loads(capsys.readouterr().out)
    assert (m["precision"], m["recall"], m["missed"]) == (0.0, 0.0, 8)


def test_cli_synth_determinism_and_rejection(tmp_path):
    sc = tmp_path / "sc.json"
    sc.write_text(json.dumps(SCENARIO))
    assert main(["synth", str(sc), str(tmp_path / "a")]) == 0
    assert main(["synth", str(sc), str(tmp_path / "b")]) == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert len([n for n in names if n.endswith(".pgm")]) == 8
    for n in names:
        assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()
    bad = dict(SCENARIO, target={"start": [20, 20], "velocity": [9, 0]})
    sc.write_text(json.dumps(bad))
    assert main(["synth", str(sc), str(tmp_path / "c")]) == 2
    assert not (tmp_path / "c").exists()


def test_cli_synth_unknown_field(tmp_path, capsys):
    sc = tmp_path / "sc.json"
    sc.write_text(json.dumps({"widht": 10}))
    assert main(["synth", str(sc), str(tmp_path / "a")]) == 2
    assert "widht" in capsys.readouterr().err

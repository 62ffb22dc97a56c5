import json
import math
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ccsmeasure import boundary as bd
from ccsmeasure import circle_measure as cm
from ccsmeasure import cli, io

TWO_PI = 2 * math.pi


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def files(tmp_path):
    def measure(name, m):
        return write(tmp_path / name, io.measure_to_json(m))
    return {
        "mgon4": measure("mgon4.json", cm.regular_polygon(4)),
        "mgon3": measure("mgon3.json", cm.regular_polygon(3)),
        "segment": measure("segment.json", cm.segment()),
        "halfdisc": measure("halfdisc.json", cm.half_disc()),
        "uniform": measure("uniform.json", cm.uniform(256)),
        "sample": write(tmp_path / "sample.json", {"points": [[1, 0], [1, 2.0943951023931953],
                                                              [1, 4.1887902047863905]]}),
        "points": write(tmp_path / "points.json", [[0, 0], [1, 0], [1, 1], [0, 1]]),
        "dir": tmp_path,
    }


# -- measure JSON ----------------------------------------------------------

measures = st.builds(
    lambda a, w, g: cm.CircleMeasure.from_atoms(a, w, grid=g),
    st.lists(st.floats(0, TWO_PI, exclude_max=True), min_size=3, max_size=3),
    st.lists(st.floats(0.01, 2), min_size=3, max_size=3),
    st.one_of(st.none(), st.lists(st.floats(0, 1), min_size=4, max_size=4).map(np.array)),
)


@given(measures)
@settings(max_examples=50)
def test_measure_json_round_trip_is_exact(m):
    obj = json.loads(io.dump_json(io.measure_to_json(m), None))
    back = io.measure_from_json(obj)
    np.testing.assert_array_equal(back.angles, m.angles)
    np.testing.assert_array_equal(back.weights, m.weights)
    if m.grid is None:
        assert back.grid is None
    else:
        np.testing.assert_array_equal(back.grid, m.grid)
    assert obj["kind"] == m.kind


def test_measure_document_shape():
    obj = io.measure_to_json(cm.half_disc(8))
    assert set(obj) == {"kind", "atoms", "grid", "mass"}
    assert obj["kind"] == "mixed"
    assert obj["grid"]["cells"] == 8 and len(obj["grid"]["masses"]) == 8
    assert obj["mass"] == pytest.approx(1.0)


@pytest.mark.parametrize("doc, path", [
    ({"atoms": [[0.0, 0.5], [1.0, -0.5]]}, "$.atoms[1][1]"),
    ({"atoms": [[7.0, 0.5]]}, "$.atoms[0][0]"),
    ({"atoms": [[-0.1, 0.5]]}, "$.atoms[0][0]"),
    ({"atoms": [[0.0, "a"]]}, "$.atoms[0][1]"),
    ({"atoms": [[0.0, 1.0]], "mass": 2.0}, "$.mass"),
    ({"atoms": [[0.0, 1.0]], "kind": "grid"}, "$.kind"),
    ({"grid": {"cells": 3, "masses": [1, 1]}}, "$.grid.cells"),
    ({"grid": {"cells": 2, "masses": [1, -1]}}, "$.grid.masses[1]"),
    ({"grid": [1, 1]}, "$.grid"),
    ({"atoms": [[0.0, 1.0]], "colour": 1}, "$.colour"),
    ({}, "$"),
    ({"preset": "mgon", "m": 0}, "$.m"),
    ({"preset": "blob"}, "$.preset"),
])
def test_measure_validation_names_field(doc, path):
    with pytest.raises(io.ValidationError) as exc:
        io.measure_from_json(doc)
    assert exc.value.path == path
    assert exc.value.diagnostic()["path"] == path


def test_invalid_json_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(io.ValidationError):
        io.read_measure(str(p))


def test_presets():
    assert io.measure_from_json({"preset": "mgon", "m": 5}).angles.size == 5
    assert io.measure_from_json({"preset": "segment"}).angles.tolist() == [math.pi / 2, 3 * math.pi / 2]
    assert io.measure_from_json({"preset": "half_disc", "cells": 64}).kind == "mixed"


def test_sample_and_boundary_round_trips():
    s = io.sample_from_json({"points": [[1.0, 0.5], [2.0, 6.0]]})
    assert io.sample_to_json(s) == {"points": [[1.0, 0.5], [2.0, 6.0]]}
    with pytest.raises(io.ValidationError):
        io.sample_from_json({"points": [[-1.0, 0.5]]})
    b = bd.boundary_from_measure(cm.regular_polygon(6))
    back = io.boundary_from_json(json.loads(io.dump_json(io.boundary_to_json(b), None)))
    np.testing.assert_array_equal(back.vertices, b.vertices)
    assert io.boundary_from_json({"vertices": [[0, 0], [1, 0], [0, 1]]}).n_edges == 3


def test_lambdas_json():
    assert io.lambdas_from_json({"0,1,2": 0.5}) == {(0, 1, 2): 0.5}
    with pytest.raises(io.ValidationError):
        io.lambdas_from_json({"0,1": 0.5})


# -- CSV and SVG -----------------------------------------------------------

def test_csv_uses_round_trip_floats(tmp_path):
    p = tmp_path / "t.csv"
    text = io.write_csv(["n", "x"], [(1, 0.1), (2, 1 / 3)], str(p))
    assert text.splitlines()[0] == "n,x"
    rows = io.read_csv(str(p))
    assert float(rows[1]["x"]) == 1 / 3
    assert rows[0]["n"] == "1"


def test_svg_layout():
    svg = io.svg_polyline([[0, 0], [1, 0], [1, 2], [0, 2]])
    root = ET.fromstring(svg)
    ns = "{http://www.w3.org/2000/svg}"
    x, y, w, h = map(float, root.get("viewBox").split())
    assert (x, y, w, h) == pytest.approx((-0.1, -0.1, 1.2, 2.2))
    path = root.find(f"{ns}g/{ns}path")
    assert path.get("stroke-width") == "0.002"
    assert path.get("d").startswith("M 0 0 L 1 0") and path.get("d").endswith("Z")
    assert "scale(1 -1)" in root.find(f"{ns}g").get("transform")


# -- command line ----------------------------------------------------------

def test_boundary_build_with_svg(files, capsys):
    svg = str(files["dir"] / "out.svg")
    code, out, _ = run(["boundary", "build", "--in", files["mgon4"], "--svg", svg], capsys)
    assert code == 0
    v = json.loads(out)["vertices"]
    np.testing.assert_allclose(v, [[0, 0], [0.25, 0], [0.25, 0.25], [0, 0.25]], atol=1e-15)
    assert ET.parse(svg).getroot().tag.endswith("svg")


def test_converge_example_row_count(files, capsys):
    code, out, _ = run(["sample", "converge", "--measure", files["halfdisc"], "--ns", "100,1000,10000",
                        "--replicas", "50", "--seed", "7"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "n,replica,d_hausdorff"
    assert len(lines) == 151


def test_fixed_area_example(files, capsys):
    svg = str(files["dir"] / "fa.svg")
    stats = str(files["dir"] / "fa.csv")
    code, out, _ = run(["generate", "fixed-area", "--beta", "0.005", "--K", "20", "--seed", "3",
                        "--max-rejects", "100000", "--svg", svg, "--stats", stats], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["mass"] == pytest.approx(1.0, abs=1e-12)
    assert io.read_csv(stats)[0]["accepted"] == "1"


def test_fixed_area_rejection_report(capsys):
    code, out, _ = run(["generate", "fixed-area", "--beta", str(0.99 / (2 * math.pi ** 2)), "--K", "10",
                        "--seed", "1", "--max-rejects", "20"], capsys)
    assert code == 0
    assert out.splitlines() == ["seed,accepted,rejects", "1,0,20"]


@pytest.mark.parametrize("argv", [
    ["measure", "fourier", "--in", "{mgon4}", "--K", "4"],
    ["measure", "check", "--in", "{halfdisc}"],
    ["measure", "make", "--preset", "mgon", "--m", "6"],
    ["boundary", "area", "--in", "{mgon3}"],
    ["boundary", "svg", "--in", "{halfdisc}", "--arc-subdiv", "1"],
    ["op", "minkowski", "--a", "{segment}", "--b", "{mgon3}"],
    ["op", "mixture", "--a", "{segment}", "--b", "{mgon3}", "--lam", "0.25"],
    ["op", "convolve", "--a", "{mgon3}", "--b", "{uniform}", "--arc-subdiv", "1"],
    ["op", "sym-minkowski", "--in", "{mgon3}", "--theta", "pi/2"],
    ["op", "sym-convolve", "--in", "{segment}"],
    ["op", "iterate-sym", "--in", "{segment}", "--k", "4", "--grid", "1024"],
    ["op", "stable-limit", "--in", "{mgon4}"],
    ["sample", "fdd", "--measure", "{uniform}", "--partition", "0,pi,2pi"],
    ["sample", "fdd", "--measure", "{uniform}", "--partition", "0,pi,2pi", "--replicas", "20",
     "--n", "50", "--seed", "1"],
    ["sample", "curve", "--measure", "{halfdisc}", "--n", "100", "--seed", "3", "--points", "9"],
    ["reorder", "complex", "--in", "{sample}", "--seed", "1"],
    ["reorder", "polygon", "--in", "{points}", "--seed", "1"],
    ["reorder", "k-operator", "--in", "{sample}"],
    ["generate", "closed-first", "--K", "5", "--seed", "1", "--cells", "256"],
    ["generate", "sparse", "--K", "5", "--seed", "1", "--cells", "256"],
    ["chirotope", "signs", "--in", "{points}"],
    ["chirotope", "laplace-mc", "--lambdas", '{{"0,1,2": 0.5}}', "--replicas", "1000", "--seed", "2"],
    ["chirotope", "laplace-n3", "--lambda", "0.5"],
])
def test_every_command_runs_and_is_reproducible(argv, files, capsys):
    argv = [a.format(**files) for a in argv]
    code, first, err = run(argv, capsys)
    assert code == 0, err
    assert first
    code, second, _ = run(argv, capsys)
    assert second == first


def test_stable_limit_output(files, capsys):
    _, out, _ = run(["op", "stable-limit", "--in", files["mgon4"]], capsys)
    assert json.loads(out)["label"] == "mgon(4)"


def test_laplace_n3_output(capsys):
    _, out, _ = run(["chirotope", "laplace-n3", "--lambda", "1"], capsys)
    assert json.loads(out)["value"] == pytest.approx(4.0)


def test_output_file_matches_stdout(files, capsys):
    argv = ["sample", "converge", "--measure", files["halfdisc"], "--ns", "100", "--replicas", "3",
            "--seed", "11"]
    _, out, _ = run(argv, capsys)
    target = files["dir"] / "conv.csv"
    assert run(argv + ["--out", str(target)], capsys)[0] == 0
    assert target.read_text() == out


def test_validation_error_exit_code(files, capsys):
    bad = write(files["dir"] / "bad.json", {"atoms": [[0.0, 0.5], [1.0, -0.5]]})
    code, out, err = run(["boundary", "build", "--in", bad], capsys)
    assert code == 2 and out == ""
    diag = json.loads(err)
    assert diag == {"error": "validation", "path": "$.atoms[1][1]", "message": "weight must be nonnegative"}


def test_numeric_domain_error_exit_code(capsys):
    code, _, err = run(["chirotope", "laplace-n3", "--lambda", "2"], capsys)
    assert code == 2
    assert json.loads(err)["error"] == "validation"


def test_unclosed_measure_exit_code(files, capsys):
    dirac = write(files["dir"] / "dirac.json", {"atoms": [[0.0, 1.0]]})
    code, _, err = run(["boundary", "build", "--in", dirac], capsys)
    assert code == 2 and "not closed" in json.loads(err)["message"]


@pytest.mark.parametrize("argv", [
    ["nonsense"],
    ["boundary", "frobnicate"],
    ["boundary", "build", "--in", "x.json", "--bogus"],
    ["sample", "converge", "--measure", "x.json", "--ns", "1,2", "--replicas", "1"],
])
def test_usage_errors_exit_64(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    assert exc.value.code == 64
    assert "usage" in capsys.readouterr().err


def test_fdd_replicas_need_seed(files, capsys):
    code, _, err = run(["sample", "fdd", "--measure", files["uniform"], "--partition", "0,2pi",
                        "--replicas", "5"], capsys)
    assert code == 64


def test_eval_angle():
    assert cli.eval_angle("pi/2") == pytest.approx(math.pi / 2)
    assert cli.eval_angle("2pi") == pytest.approx(TWO_PI)
    assert cli.eval_angle("-pi") == pytest.approx(-math.pi)
    assert cli.eval_angle("0.25") == 0.25


def test_console_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "ccsmeasure.cli", "op", "stable-limit", "--in", files["mgon3"]],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["label"] == "mgon(3)"
    proc = subprocess.run([sys.executable, "-m", "ccsmeasure.cli", "nope"], capture_output=True, text=True)
    assert proc.returncode == 64

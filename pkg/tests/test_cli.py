import pytest
import io
import os
import json
import math
import numpy as np

import netelast.cli as cli
import netelast.netfile as netfile
import netelast.net as net

HEXAGONAL = os.path.join("tests", "hexagonal.net.json")

def run(argv, stdin=""):
    out = io.StringIO()
    code = cli.main(argv, io.StringIO(stdin), out)
    return code, out.getvalue()

def test_lattice():
    code, text = run(["lattice", "hexagonal", "--l", "1", "--w0", "1", "--w1", "1"])
    assert(code == 0)
    result = netfile.loads(text)
    assert(result.graph == net.lattice_preset("hexagonal")[0])

def test_lattice_single_vertex():
    code, text = run(["lattice", "single_vertex", "--weights", '{"[1,0]": 3, "[0,1]": 1, "[0,0]": 2}'])
    assert(code == 0)
    assert(netfile.loads(text).graph.vertex_count == 1)

def test_unknown_preset():
    assert(run(["lattice", "nonagon"])[0] == cli.EXIT_INVALID)

def test_lattice_to_file(tmp_path):
    filename = str(tmp_path / "square.net.json.gz")
    code, text = run(["--out", filename, "lattice", "square"])
    assert(code == 0)
    assert(text == "")
    assert(netfile.parse(filename).graph.vertex_count == 1)

def test_harmonic():
    code, text = run(["harmonic", HEXAGONAL])
    assert(code == 0)
    data = json.loads(text)
    assert(data["energy"] == pytest.approx(3))
    assert(np.allclose(data["tension"], np.eye(2) * 1.5))
    assert(data["covolume"] == pytest.approx(3 * math.sqrt(3) / 2))

def test_harmonic_from_stdin():
    with open(HEXAGONAL, encoding="utf-8") as f:
        code, text = run(["harmonic", "-"], f.read())
    assert(code == 0)
    assert(len(json.loads(text)["positions"]) == 2)

def test_bad_input():
    assert(run(["harmonic", os.path.join("tests", "no_such.net.json")])[0] == cli.EXIT_INVALID)
    assert(run(["harmonic"], "{")[0] == cli.EXIT_INVALID)
    disconnected = netfile.serialize(net.build_graph(1, 2, [(0, 0, (1,), 1), (1, 1, (1,), 1)]),
                                     net.PeriodMap([[1]]))
    assert(run(["harmonic"], disconnected)[0] == cli.EXIT_INVALID)

def test_tension():
    code, text = run(["tension", HEXAGONAL])
    assert(code == 0)
    data = json.loads(text)
    assert(data["standard"])
    assert(np.allclose(data["per_weight"], np.eye(2) * 0.3))
    assert(np.allclose(data["deviatoric"], 0))

def test_standardize_as_net():
    stretched = netfile.serialize(*net.lattice_preset("hexagonal", l=2, w0=1, w1=3))
    code, text = run(["standardize", "--as-net"], stretched)
    assert(code == 0)
    result = netfile.loads(text)
    assert(result.positions is not None)
    code, text = run(["tension"], text)
    assert(json.loads(text)["standard"])

@pytest.fixture
def trace_text():
    code, text = run(["lattice", "hexagonal", "--l", "1", "--w0", "1", "--w1", "1"])
    code, text = run(["deform", "--mode", "slow", "--lambda", "1.6", "--theta", "0", "--delta", "0.8",
                      "--K", "15"], text)
    assert(code == 0)
    return text

def test_deform_pipeline(trace_text):
    data = json.loads(trace_text)
    assert(data["complete"])
    assert([e["kind"] for e in data["events"]] == ["contraction"])
    assert(data["events"][0]["stretch"] == pytest.approx(1.25, rel=1e-8))

def test_deform_pipeline_hits_move_cap():
    # With K = 4 the merged vertex splits again at once, and the halves
    # contract again, so the run only stops at the cap of 10 moves per vertex
    code, text = run(["lattice", "hexagonal", "--l", "1", "--w0", "1", "--w1", "1"])
    code, text = run(["deform", "--mode", "slow", "--lambda", "1.6", "--theta", "0", "--delta", "0.8",
                      "--K", "4"], text)
    assert(code == cli.EXIT_MOVE_CAP)
    data = json.loads(text)
    assert(not data["complete"])
    assert(len(data["events"]) == 20)
    first = data["events"][0]
    assert(first["kind"] == "contraction")
    assert(first["stretch"] == pytest.approx(1.25, rel=1e-8))
    assert({e["kind"] for e in data["events"][1:]} == {"contraction", "splitting"})
    assert("final_positions" not in data)
    again = netfile.trace_from_json(text)
    assert(not again.complete)
    assert(len(again.graphs) == 21)

def test_move_cap_trace_to_file(tmp_path):
    filename = str(tmp_path / "trace.json.xz")
    code, text = run(["--out", filename, "deform", HEXAGONAL, "--mode", "fast", "--matrix", "[[2, 0], [0, 0.5]]",
                      "--delta", "0.6", "--K", "10", "--max-moves", "1"])
    assert(code == cli.EXIT_MOVE_CAP)
    assert(text == "")
    file, _ = netfile.open_file(filename, "r")
    with file:
        trace = netfile.trace_from_json(file)
    assert(len(trace.events) == 1)
    assert(not trace.complete)

def test_usage_errors_are_invalid_input():
    assert(run(["lattice"])[0] == cli.EXIT_INVALID)
    assert(run(["unfold", HEXAGONAL])[0] == cli.EXIT_INVALID)
    assert(run([])[0] == cli.EXIT_INVALID)
    assert(run(["deform", HEXAGONAL, "--mode", "sideways"])[0] == cli.EXIT_INVALID)
    assert(run(["--help"])[0] == 0)

def test_deform_output_is_reproducible():
    argv = ["deform", HEXAGONAL, "--lambda", "5", "--theta", "0", "--delta", "0.5", "--K", "15"]
    first = run(argv)
    assert(first[0] == 0)
    assert(run(argv) == first)

def test_deform_with_config(tmp_path):
    filename = str(tmp_path / "run.json")
    with open(filename, "w") as f:
        json.dump({"lambda": 5, "delta": 0.5, "firmness": 15}, f)
    code, text = run(["deform", HEXAGONAL, "--config", filename, "--theta", "0"])
    assert(code == 0)
    data = json.loads(text)
    assert([e["kind"] for e in data["events"]] == ["contraction", "splitting", "splitting"])
    assert(data["R"] == pytest.approx(-13 / 23, rel=1e-9))

def test_deform_failures():
    code, _ = run(["deform", HEXAGONAL, "--mode", "fast", "--matrix", "[[2, 0], [0, 0.5]]",
                   "--delta", "0.6", "--K", "10", "--max-moves", "1"])
    assert(code == cli.EXIT_MOVE_CAP)
    code, _ = run(["deform", HEXAGONAL, "--lambda", "4", "--delta", "0.01", "--K", "15"])
    assert(code == cli.EXIT_NUMERICAL)
    code, _ = run(["deform", HEXAGONAL, "--lambda", "4", "--delta", "0.5", "--K", "15", "--kappa", "2"])
    assert(code == cli.EXIT_INVALID)

def test_curve(trace_text):
    code, text = run(["curve", "--samples", "5"], trace_text)
    assert(code == 0)
    lines = text.strip().split("\n")
    assert(lines[0] == "strain,sigma_eng,sigma_true,energy")
    assert(len(lines) == 6)
    first = [float(x) for x in lines[1].split(",")]
    assert(first[0] == 0)
    assert(first[3] == pytest.approx(3))
    last = [float(x) for x in lines[-1].split(",")]
    assert(last[0] == pytest.approx(0.6))
    assert(run(["curve", "--samples", "1"], trace_text)[0] == cli.EXIT_INVALID)

def test_render(trace_text):
    code, text = run(["render", HEXAGONAL])
    assert(code == 0)
    assert(text.startswith("<svg"))
    code, text = run(["render", "--trace"], trace_text)
    assert(code == 0)
    assert("<title>R = " in text)

def test_analyze_zw():
    code, text = run(["analyze", "zw", HEXAGONAL, "--v0", "0", "--v1", "1", "--weight", "2"])
    assert(code == 0)
    data = json.loads(text)
    assert(data["residual"] < 1e-9)
    assert(data["W"] > 0)
    assert(data["identity_ok"])

def test_analyze_limit_ratio():
    code, text = run(["analyze", "limit-ratio", "--s", "0.5", "1.0"])
    assert(code == 0)
    data = json.loads(text)
    assert(data["limit"] == pytest.approx(1 / math.pi))
    assert([s for s, _ in data["ratios"]] == [0.5, 1.0])
    assert(all(0 < r < 1 for _, r in data["ratios"]))
    assert(run(["analyze", "limit-ratio", "--N", "3", "--u", "1", "1"])[0] == cli.EXIT_INVALID)

def test_analyze_blend():
    code, text = run(["analyze", "blend", "--N", "3", "--a", "2", "--m", "2", "--cells", "200"])
    assert(code == 0)
    data = json.loads(text)
    assert(data["verified"] is True)
    assert(data["r0"] == pytest.approx(data["r1"]))
    assert(len(data["curve"]) == 201)
    assert(run(["analyze", "blend", "--w0", '{"[1,0]": 1}'])[0] == cli.EXIT_INVALID)

def test_curve_without_moves():
    code, text = run(["deform", HEXAGONAL, "--lambda", "1.5", "--theta", "0", "--delta", "0.1", "--K", "100"])
    assert(code == 0)
    assert(json.loads(text)["events"] == [])
    code, text = run(["curve", "--samples", "3"], text)
    rows = [[float(x) for x in line.split(",")] for line in text.strip().split("\n")[1:]]
    for (strain, sigma, _, _), stretch in zip(rows, [1.0, 1.25, 1.5]):
        assert(strain == pytest.approx(stretch - 1))
        assert(sigma == pytest.approx(2 * math.sqrt(3) / 3 * (stretch - stretch ** -3), abs=1e-12))

import json
import math

import numpy as np
import pytest

from blbounds import catalog
from blbounds.cli import datum_document, fmt, main, parse_datum, UsageError
from blbounds.linalg import Subspace
from blbounds.datum import Datum
from blbounds.visual import PointCloud, grid_cloud, write_cloud


def machine(out: str) -> dict:
    block = out.split("\n---\n", 1)[1]
    return dict(line.split("=", 1) for line in block.splitlines() if "=" in line)


@pytest.fixture
def files(tmp_path):
    def write(name, datum, **extra):
        path = tmp_path / name
        path.write_text(json.dumps(datum_document(datum, **extra)))
        return str(path)

    return {
        "young": write("young.json", catalog.young()),
        "lw": write("lw.json", catalog.loomis_whitney()),
        "dl": write("dl.json", catalog.d_lambda(0.25)),
        "id": write("id.json", catalog.identity(2)),
        "pair": write("pair.json", catalog.loomis_whitney_pair()),
        "lines": write("lines.json", catalog.coordinate_lines(2), alphas=0.5),
        "dir": tmp_path,
    }


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


# analyze


def test_analyze_young(files, capsys):
    code, out, _ = run(capsys, "analyze", files["young"])
    kv = machine(out)
    assert code == 0
    assert float(kv["criticality_defect"]) == 0
    assert float(kv["acuity"]) == pytest.approx(2)
    assert float(kv["entropy"]) == pytest.approx(1.5)


def test_analyze_loomis_whitney(files, capsys):
    code, out, _ = run(capsys, "analyze", files["lw"])
    kv = machine(out)
    assert code == 0
    assert float(kv["distortion"]) == pytest.approx(1)
    assert float(kv["beta_min"]) == 0


def test_analyze_pair_reports_defect(files, capsys):
    _, out, _ = run(capsys, "analyze", files["pair"])
    assert float(machine(out)["beta_min"]) == pytest.approx(1.0)


@pytest.mark.parametrize(
    "text, needle",
    [
        ('{"ambient_dim": 2, "maps": [', ":1:"),
        ('{"ambient_dim": 2, "weights": [1]}', "missing field 'maps'"),
        ('{"ambient_dim": 2, "maps": [{"rows": 1, "cols": 2, "entries": [1]}], "weights": [1]}', "maps[0].entries"),
        ('{"ambient_dim": 2, "maps": [{"rows": 1, "cols": 2, "entries": [1, "x"]}], "weights": [1]}', "maps[0].entries[1]"),
        ('{"ambient_dim": 3, "maps": [[[1, 0]]], "weights": [1]}', "maps[0]: has 2 columns"),
        ('{"ambient_dim": 2, "maps": [[[1, 0]]], "weights": [1, 2]}', "weights"),
        ('{"ambient_dim": 2, "maps": [[[1, 0]]], "weights": [-1]}', "positive"),
        ('{"ambient_dim": 2, "maps": [[[1, 0]]], "weights": [1], "loc": [[1, 0], [0, 1]]}', "together"),
        ('{"ambient_dim": 2, "maps": [[[1, 0]]], "weights": [1], "extra": 1}', "unknown field 'extra'"),
    ],
)
def test_malformed_files(tmp_path, capsys, text, needle):
    path = tmp_path / "bad.json"
    path.write_text(text)
    code, _, err = run(capsys, "analyze", path)
    assert code == 1
    assert needle in err


def test_usage_errors(files, capsys):
    assert run(capsys, "bound", files["young"], "--kind", "sideways")[0] == 1
    assert run(capsys, "bound", files["young"])[0] == 1  # no alpha anywhere
    assert run(capsys, "bound", files["young"], "--kind", "lower-localized", "--alpha", "1")[0] == 1
    assert run(capsys, "analyze", files["dir"] / "missing.json")[0] == 1


# bound


def test_bound_young_upper(files, capsys):
    code, out, _ = run(capsys, "bound", files["young"], "--kind", "upper", "--alpha", "0.44")
    assert code == 0
    kv = machine(out)
    assert float(kv["value"]) == pytest.approx(15.50, abs=0.01)
    assert kv["hypothesis.perceptivity"] == "CERTIFIED"


def test_bound_d_lambda_variant(files, capsys):
    code, out, _ = run(capsys, "bound", files["dl"], "--kind", "upper-variant", "--alpha", "0.577")
    assert code == 0
    assert float(machine(out)["value"]) == pytest.approx(27 * 2**1.5 * 2, rel=5e-3)


@pytest.mark.parametrize("name", ["young", "lw", "dl", "id", "pair", "lines"])
def test_bound_lower_always_finite(files, capsys, name):
    code, out, _ = run(capsys, "bound", files[name], "--kind", "lower", "--alpha", "1")
    assert code == 0
    assert math.isfinite(float(machine(out)["value"]))


def test_bound_refuted_exits_2(files, capsys):
    code, out, err = run(capsys, "bound", files["young"], "--alpha", "0.5")
    assert code == 2
    assert machine(out)["value"] == "inf"
    assert "perceptivity" in err


def test_bound_non_critical_exits_2(files, capsys):
    code, _, err = run(capsys, "bound", files["pair"], "--alpha", "0.1")
    assert code == 2
    assert "global criticality" in err


def test_bound_localized(files, capsys):
    code, out, _ = run(capsys, "bound", files["pair"], "--kind", "upper-localized", "--alpha", "0.5", "--beta", "1", "--t", "0.01")
    assert code == 0
    v1 = float(machine(out)["value"])
    _, out, _ = run(capsys, "bound", files["pair"], "--kind", "upper-localized", "--alpha", "0.5", "--beta", "1", "--t", "0.0001")
    assert float(machine(out)["value"]) == pytest.approx(v1 * 10, rel=1e-9)
    code, out, _ = run(capsys, "bound", files["pair"], "--kind", "lower-localized", "--alpha", "1", "--t", "0.01")
    assert code == 0


def test_bound_rank_deficient_exits_2(tmp_path, capsys):
    path = tmp_path / "small.json"
    path.write_text(json.dumps(datum_document(Datum([[[0.1, 0.0]], [[0.0, 1.0]]], [1.0, 1.0]))))
    code, _, err = run(capsys, "bound", path, "--kind", "upper-localized", "--alpha", "0.5", "--t", "1")
    assert code == 2
    assert "full essential rank" in err


def test_bound_with_regs_and_loc(tmp_path, capsys):
    lw = catalog.loomis_whitney()
    doc = datum_document(lw, regs=[2 * np.eye(2)] * 3, loc=0.5 * np.eye(3), alphas=0.5)
    path = tmp_path / "lrd.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "bound", path, "--kind", "upper-localized")
    assert code == 0
    assert float(machine(out)["gram_norm"]) == pytest.approx(0.5 + 2.0)


def test_bound_lower_with_w(files, capsys):
    frame = files["dir"] / "w.txt"
    frame.write_text("2 1\n1\n0\n")
    code, out, _ = run(capsys, "bound", files["young"], "--kind", "lower", "--alpha", "0.5", "--w", frame)
    assert code == 0
    assert float(machine(out)["exponent"]) == pytest.approx(1 / 3)


def test_bound_output_deterministic(files, capsys):
    argv = ("bound", files["lw"], "--alpha", "0.4")
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_analyze_round_trip(files, tmp_path, capsys):
    path = tmp_path / "y.json"
    path.write_text(json.dumps(datum_document(catalog.young(), alphas=[0.44, 0.4, 0.3])))
    _, report, _ = run(capsys, "analyze", path)
    rep = tmp_path / "report.txt"
    rep.write_text(report)
    direct = run(capsys, "bound", files["young"], "--alpha", "0.44", "--alpha", "0.4", "--alpha", "0.3")[1]
    via = run(capsys, "bound", files["young"], "--overrides", rep)[1]
    assert machine(direct)["value"] == machine(via)["value"]


# perceive


def test_perceive(files, capsys):
    code, out, _ = run(capsys, "perceive", files["young"], "--alpha", "0.44")
    assert code == 0 and machine(out)["status"] == "CERTIFIED"
    code, out, _ = run(capsys, "perceive", files["young"], "--alpha", "0.46")
    assert code == 2 and machine(out)["status"] == "REFUTED"
    assert float(machine(out)["min_slack"]) < 0


# oracle


def test_oracle_loomis_whitney(files, capsys):
    code, out, _ = run(capsys, "oracle", files["lw"], "--schedule", "fast")
    assert code == 0
    assert float(machine(out)["estimate"]) == pytest.approx(1.0, abs=1e-3)
    assert "t\teps\tvalue" in out


def test_oracle_young_and_identity(files, capsys):
    _, out, _ = run(capsys, "oracle", files["young"], "--schedule", "fast")
    assert float(machine(out)["estimate"]) == pytest.approx(0.866, abs=0.01)
    _, out, _ = run(capsys, "oracle", files["id"], "--schedule", "1e6/1e-6")
    assert float(machine(out)["estimate"]) == pytest.approx(1.0, abs=1e-5)


def test_oracle_deterministic_and_flags_non_convergence(tmp_path, files, capsys):
    argv = ("oracle", files["young"], "--schedule", "1e2,1e4/1e-2,1e-4", "--seed", "3", "--restarts", "2")
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]
    doc = datum_document(catalog.d_lambda(0.01), regs=[1e4 * np.eye(2)] * 3, loc=1e-4 * np.eye(3))
    path = tmp_path / "dl.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "oracle", path)
    assert code == 0
    assert machine(out)["converged"] in ("0", "1")


def test_oracle_bad_schedule(files, capsys):
    assert run(capsys, "oracle", files["lw"], "--schedule", "quick")[0] == 1


# visual


def test_visual_grid(files, capsys):
    cloud = files["dir"] / "g.txt"
    write_cloud(grid_cloud(16, 2), cloud)
    code, out, _ = run(capsys, "visual", files["lines"], cloud, "--delta-sweep", "0.25,0.125,0.0625")
    assert code == 0
    rows = [ln.split("\t") for ln in out.split("---")[0].splitlines()[1:4]]
    assert [int(r[1]) for r in rows] == [16, 64, 256]
    kv = machine(out)
    assert float(kv["max_ratio"]) == pytest.approx(0.25)
    assert kv["holds"] == "1"


def test_visual_slab_slope(tmp_path, capsys):
    line = Datum.from_projectors([Subspace.coordinate(2, [1])], [1.0])
    path = tmp_path / "line.json"
    path.write_text(json.dumps(datum_document(line)))
    cloud = tmp_path / "slab.txt"
    write_cloud(grid_cloud(64, 2, 1), cloud)
    code, out, _ = run(capsys, "visual", path, cloud, "--alpha", "0.5", "--beta", "1", "--delta-sweep", "0.125,0.0625,0.03125,0.015625")
    assert code == 0
    assert float(machine(out)["slope"]) == pytest.approx(1.0, abs=0.15)


def test_visual_errors(files, capsys):
    empty = files["dir"] / "empty.txt"
    empty.write_text("2 0\n")
    assert run(capsys, "visual", files["lines"], empty)[0] == 2
    cloud = files["dir"] / "g.txt"
    write_cloud(PointCloud([[0.1, 0.2]]), cloud)
    code, _, err = run(capsys, "visual", files["young"], cloud, "--alpha", "0.3")
    assert code == 2 and "projector" in err
    bad = files["dir"] / "bad.txt"
    bad.write_text("2 1\n0 zz\n")
    assert run(capsys, "visual", files["lines"], bad)[0] == 1


# helpers


def test_projector_maps_get_their_range_as_codomain():
    p = np.diag([1.0, 1.0, 0.0])
    spec = parse_datum({"ambient_dim": 3, "maps": [p.tolist()], "weights": [1.5]})
    assert spec.datum.target_dims.tolist() == [2]
    with pytest.raises(UsageError):
        parse_datum({"ambient_dim": 3, "maps": [p.tolist()], "weights": [1.5], "regs": [np.eye(3).tolist()], "loc": np.eye(3).tolist()})


def test_fmt_twelve_digits():
    assert fmt(math.pi) == "3.14159265359"
    assert fmt(True) == "1"
    assert fmt(np.array([1.0, 0.5])) == "1,0.5"
    assert fmt(math.inf) == "inf"

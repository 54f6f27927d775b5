"""Sweep configs, report schema, canonical rendering, CLI behaviour,
and the worker-count determinism contract."""

import csv
import io
import json
import math

import pytest

from bbmlab.cli import main
from bbmlab.sweep import (
    SweepConfig,
    render_csv,
    render_json,
    resolve_space,
    run_sweep,
)

TWOPI = 2 * math.pi


def small_torus_config(**over):
    base = dict(
        space={"kind": "torus", "dim": 2, "period": TWOPI},
        function={"preset": "sine", "axis": 0},
        p=2.0, r_max=0.5, r_min=0.125, levels=3,
        outer_samples=4096, inner_samples=32,
        seed=424242, tolerance=0.05,
    )
    base.update(over)
    return SweepConfig(**base)


@pytest.fixture(scope="module")
def torus_report():
    return run_sweep(small_torus_config())


# ---------------------------------------------------------------------------
# Config validation and round trip
# ---------------------------------------------------------------------------


def test_config_validation():
    with pytest.raises(ValueError):
        small_torus_config(p=1.0)
    with pytest.raises(ValueError):
        small_torus_config(r_min=0.5, r_max=0.5)
    with pytest.raises(ValueError):
        small_torus_config(levels=2)
    with pytest.raises(ValueError):
        small_torus_config(tolerance=0.0)
    with pytest.raises(ValueError):
        small_torus_config(outer_samples=4)


def test_config_dict_round_trip():
    cfg = small_torus_config()
    assert SweepConfig.from_dict(cfg.to_dict()) == cfg


def test_config_rejects_unknown_and_missing_keys():
    cfg = small_torus_config().to_dict()
    cfg["typo"] = 1
    with pytest.raises(ValueError, match="unknown"):
        SweepConfig.from_dict(cfg)
    del cfg["typo"]
    del cfg["p"]
    with pytest.raises(ValueError, match="missing"):
        SweepConfig.from_dict(cfg)


def test_radii_geometric():
    cfg = small_torus_config(r_max=0.8, r_min=0.1, levels=4)
    radii = cfg.radii()
    assert radii[0] == pytest.approx(0.8) and radii[-1] == pytest.approx(0.1)
    ratios = [radii[i + 1] / radii[i] for i in range(3)]
    for q in ratios:
        assert q == pytest.approx(0.5, rel=1e-12)


def test_resolve_space_rejects_weighted_config():
    with pytest.raises(ValueError):
        resolve_space({"kind": "weighted", "dim": 2})


# ---------------------------------------------------------------------------
# Report schema and rendering
# ---------------------------------------------------------------------------


def test_report_schema(torus_report):
    d = torus_report.to_dict()
    assert set(d) == {"config", "points", "fit", "reference", "deviation", "verdict"}
    assert len(d["points"]) == 3
    for pt in d["points"]:
        assert set(pt) == {"r", "value", "std_error", "samples"}
        assert pt["samples"] == 4096 * 32
    assert set(d["fit"]) == {"limit", "rate", "residual", "fallback"}
    assert set(d["reference"]) == {"constant", "constant_sigma", "cheeger", "source"}
    assert d["reference"]["constant"] == 0.25  # C(2, 2)
    assert d["reference"]["source"] == "closed-form"
    assert d["verdict"] in ("pass", "fail")


def test_report_values_sane(torus_report):
    # reference = C(2,2) * Ch(sine) = (1/4)(2 pi^2) = pi^2 / 2
    assert torus_report.reference == pytest.approx(math.pi ** 2 / 2, rel=1e-12)
    assert torus_report.deviation < 0.05
    assert torus_report.bound_margin <= 1.0
    assert torus_report.verdict


def test_render_json_is_canonical(torus_report):
    text = render_json(torus_report.to_dict())
    assert text.endswith("\n") and not text.endswith("\n\n")
    parsed = json.loads(text)
    assert render_json(parsed) == text
    # sorted keys at top level
    keys = [line.split('"')[1] for line in text.splitlines() if line.startswith('  "')]
    assert keys == sorted(keys)


def test_render_csv_round_trips_floats(torus_report):
    text = render_csv(torus_report)
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["r", "value", "std_error", "samples"]
    data = rows[1:4]
    for row, r, est in zip(data, torus_report.radii, torus_report.points):
        assert float(row[0]) == r  # repr round trip is exact
        assert float(row[1]) == est.value
        assert float(row[2]) == est.std_error
        assert int(row[3]) == est.samples
    assert rows[4][0] == "fit"
    assert rows[5][0] == "reference"
    assert rows[6][0] == "deviation"
    assert rows[7] == ["verdict", "pass" if torus_report.verdict else "fail"]
    assert "np.float64" not in text


def test_report_json_serializable(torus_report):
    # every leaf must be a plain python type
    def walk(obj):
        if isinstance(obj, dict):
            for k, v in obj.items():
                assert type(k) is str
                walk(v)
        elif isinstance(obj, list):
            for v in obj:
                walk(v)
        else:
            assert type(obj) in (int, float, str, bool), (type(obj), obj)

    walk(torus_report.to_dict())


# ---------------------------------------------------------------------------
# Determinism
# ---------------------------------------------------------------------------


def test_same_config_same_bytes(torus_report):
    again = run_sweep(small_torus_config())
    assert render_json(again.to_dict()) == render_json(torus_report.to_dict())


def test_worker_count_does_not_change_bytes(torus_report):
    threaded = run_sweep(small_torus_config(), workers=8)
    assert render_json(threaded.to_dict()) == render_json(torus_report.to_dict())


def test_different_seed_changes_values(torus_report):
    other = run_sweep(small_torus_config(seed=424243))
    assert other.points[0].value != torus_report.points[0].value


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


def test_cli_constant_euclidean_exact(capsys):
    code = main(["constant", "euclidean", "--p", "4", "--n", "4"])
    out = capsys.readouterr().out
    payload = json.loads(out)
    assert code == 0
    assert payload["value"] == 0.0625
    assert payload["source"] == "closed-form"


def test_cli_constant_euclidean_mc(capsys):
    code = main(["--seed", "7", "constant", "euclidean", "--p", "2", "--n", "2",
                 "--mc", "--samples", "65536"])
    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    assert payload["agreement"] == "pass"
    assert abs(payload["mc"]["z"]) < 4.0


def test_cli_constant_heisenberg(capsys):
    code = main(["--seed", "7", "constant", "heisenberg", "--p", "4",
                 "--samples", "65536"])
    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    assert payload["value"] == pytest.approx(0.106, abs=0.01)
    assert payload["std_error"] > 0


def test_cli_distance(capsys):
    code = main(["distance", "h1", "--x", "0,0,0", "--y", "0,0,1"])
    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    assert payload["value"] == pytest.approx(math.sqrt(math.pi), rel=1e-12)


def test_cli_distance_bad_arity(capsys):
    assert main(["distance", "h1", "--x", "0,0", "--y", "0,0,1"]) == 2


def test_cli_busemann(capsys):
    code = main(["busemann", "--dir", "1,0", "--z", "1,0,-1",
                 "--s-max", "100", "--points", "5"])
    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    assert payload["predicted_limit"] == -1.0
    gaps = [pt["value"] - payload["predicted_limit"] for pt in payload["points"]]
    assert gaps[-1] <= gaps[0] + 1e-12
    assert abs(gaps[-1]) < 0.1


def test_cli_quotient(capsys):
    code = main(["--seed", "11", "quotient", "--space", "euclidean", "--dim", "2",
                 "--function", "bump", "--center", "0,0", "--radius", "1",
                 "--p", "2", "--r", "0.2", "--outer", "4096", "--inner", "16"])
    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    assert payload["within_bound"] is True
    assert payload["value"] <= payload["upper_bound"]


def test_cli_csv_format(capsys):
    code = main(["--format", "csv", "constant", "euclidean", "--p", "4", "--n", "4"])
    out = capsys.readouterr().out
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "key,value"
    row = dict(line.split(",", 1) for line in lines[1:])
    assert float(row["value"]) == 0.0625


def test_cli_sweep_flags(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(["--seed", "424242", "--out", str(out), "sweep",
                 "--space", "torus", "--dim", "2", "--period", repr(TWOPI),
                 "--function", "sine", "--p", "2",
                 "--r-max", "0.5", "--r-min", "0.125", "--levels", "3",
                 "--outer", "4096", "--inner", "32", "--tolerance", "0.05"])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["verdict"] == "pass"


def test_cli_sweep_config_file_matches_library(tmp_path, torus_report):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(small_torus_config().to_dict()))
    out = tmp_path / "report.json"
    code = main(["--out", str(out), "sweep", "--config", str(cfg_path)])
    assert code == 0
    assert out.read_text() == render_json(torus_report.to_dict())


def test_cli_sweep_config_conflicts_with_flags(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(small_torus_config().to_dict()))
    code = main(["sweep", "--config", str(cfg_path), "--space", "torus"])
    assert code == 2


def test_cli_sweep_missing_flags(capsys):
    assert main(["sweep", "--space", "torus", "--function", "sine"]) == 2


def test_cli_sweep_torus_needs_period(capsys):
    assert main(["sweep", "--space", "torus", "--function", "sine", "--p", "2",
                 "--r-max", "0.5", "--r-min", "0.125"]) == 2


def test_cli_bad_config_file(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    d = small_torus_config().to_dict()
    d["bogus"] = True
    cfg_path.write_text(json.dumps(d))
    assert main(["sweep", "--config", str(cfg_path)]) == 2


def test_cli_failing_verdict_exits_1(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(["--seed", "5", "--out", str(out), "sweep",
                 "--space", "torus", "--dim", "2", "--period", repr(TWOPI),
                 "--function", "sine", "--p", "2",
                 "--r-max", "0.5", "--r-min", "0.25", "--levels", "3",
                 "--outer", "1024", "--inner", "8", "--tolerance", "0.0001"])
    assert code == 1
    assert json.loads(out.read_text())["verdict"] == "fail"

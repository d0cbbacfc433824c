import json
import re
import subprocess
from pathlib import Path

import pytest

from pressurelab.cli import main
from pressurelab.config import parse_config
from pressurelab.errors import InadmissibleWord, ScaleTooCoarse, SchemaError

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"

GM_SYSTEM = {"alphabet_size": 2, "allowed": [[0, 0], [0, 1], [1, 0]]}


def _run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def _strip_timing(text: str) -> str:
    return re.sub(r'^\s*"wall_time_s": .*$', "", text, flags=re.M)


# ---------------------------------------------------------------------------
# config parsing


def test_parse_config_collects_every_problem():
    bad = {
        "system": {"alphabet_size": 0},
        "scales": [],
        "tol": -2,
        "bogus": 1,
    }
    with pytest.raises(SchemaError) as exc:
        parse_config(bad, "pressure capacity")
    fields = {path for path, _ in exc.value.problems}
    assert "system.alphabet_size" in fields
    assert "scales" in fields
    assert "tol" in fields
    assert "bogus" in fields
    assert "potential" in fields
    assert "n_range" in fields


def test_parse_config_inadmissible_potential_key():
    cfg = {
        "system": GM_SYSTEM,
        "potential": {"depth": 2, "table": {"00": 0.5, "01": 0.0, "10": 0.0, "11": 1.0}},
    }
    with pytest.raises(InadmissibleWord):
        parse_config(cfg, "pressure exact")


def test_parse_config_scale_preconditions():
    cap = {
        "system": {"alphabet_size": 2},
        "potential": {"constant": 0.0},
        "scales": [0],
        "n_range": [2, 6],
    }
    with pytest.raises(ScaleTooCoarse):
        parse_config(cap, "pressure capacity")
    chain = {
        "system": {"alphabet_size": 2},
        "potential": {"constant": 0.0},
        "subset": {"kind": "whole"},
        "scales": [2],
        "s": 0.5,
        "delta": 0.5,
        "N": 4,
        "L": 10,
    }
    with pytest.raises(ScaleTooCoarse):
        parse_config(chain, "verify chain")
    chain["scales"] = [3]
    assert parse_config(chain, "verify chain").scales[0].m == 3


def test_parse_config_unions_needs_union_subset():
    cfg = {
        "system": {"alphabet_size": 2},
        "potential": {"constant": 0.0},
        "subset": {"kind": "whole"},
        "scales": [1],
        "N": 3,
        "L": 10,
    }
    with pytest.raises(SchemaError) as exc:
        parse_config(cfg, "verify unions")
    assert any(path == "subset" for path, _ in exc.value.problems)


def test_parse_config_defaults():
    cfg = parse_config({"system": {"alphabet_size": 3}, "potential": {"constant": 1.0}})
    assert cfg.subset.kind == "whole"
    assert len(cfg.scales) == 1 and cfg.scales[0].m == 1
    assert cfg.seed == 0
    assert cfg.threads == 1
    assert cfg.betas == (0.05, 0.1)


def test_parse_config_rejects_bad_measure():
    cfg = {
        "system": {"alphabet_size": 2},
        "potential": {"constant": 0.0},
        "scales": [2],
        "n_range": [10, 20],
        "measure": {"kind": "bernoulli", "p": [0.9, 0.2]},
    }
    with pytest.raises(SchemaError) as exc:
        parse_config(cfg, "pressure measure")
    assert any(path == "measure.p" for path, _ in exc.value.problems)


# ---------------------------------------------------------------------------
# CLI end to end


def test_cli_exact_golden_mean(tmp_path, capsys):
    code, out, err = _run(
        ["pressure", "exact", "--config", str(CONFIGS / "exact_golden_mean.json"),
         "--out", str(tmp_path)],
        capsys,
    )
    assert code == 0
    assert out.startswith("pressure exact: passed=True files=")
    report = json.loads((tmp_path / "pressure_exact_report.json").read_text())
    assert report["results"]["pressure"]["value"] == pytest.approx(0.4812118, abs=1e-6)
    assert not (tmp_path / "pressure_exact_trace.csv").exists()


def test_cli_capacity_trace_has_one_row_per_n(tmp_path, capsys):
    code, out, _ = _run(
        ["pressure", "capacity", "--config", str(CONFIGS / "capacity_full2.json"),
         "--out", str(tmp_path)],
        capsys,
    )
    assert code == 0
    lines = (tmp_path / "pressure_capacity_trace.csv").read_text().strip().splitlines()
    assert lines[0] == "n,log_partition_function"
    ns = [int(row.split(",")[0]) for row in lines[1:]]
    assert ns == list(range(4, 25))
    for row in lines[1:]:
        float(row.split(",")[1])


def test_cli_bowen_trace_and_svg(tmp_path, capsys):
    code, out, _ = _run(
        ["pressure", "bowen", "--config", str(CONFIGS / "bowen_full2.json"),
         "--out", str(tmp_path), "--svg"],
        capsys,
    )
    assert code == 0
    lines = (tmp_path / "pressure_bowen_trace.csv").read_text().strip().splitlines()
    assert lines[0] == "s,cover_value"
    svg = (tmp_path / "pressure_bowen_trace.svg").read_text()
    assert svg.startswith("<svg")
    assert "polyline" in svg
    report = json.loads((tmp_path / "pressure_bowen_report.json").read_text())
    ce = report["results"]["m=1"]
    assert ce["midpoint"] == pytest.approx(1.3132616875182228, abs=1e-3)


def test_cli_gibbs_trace_floats_are_clean(tmp_path, capsys):
    code, _, _ = _run(
        ["verify", "gibbs", "--config", str(CONFIGS / "gibbs_full2.json"),
         "--out", str(tmp_path)],
        capsys,
    )
    assert code == 0
    text = (tmp_path / "verify_gibbs_trace.csv").read_text()
    assert text.splitlines()[0] == "n,log_max_ratio"
    assert "np.float" not in text
    assert "(" not in text


def test_cli_chain_passes(tmp_path, capsys):
    code, out, _ = _run(
        ["verify", "chain", "--config", str(CONFIGS / "chain_full2.json"),
         "--out", str(tmp_path)],
        capsys,
    )
    assert code == 0
    report = json.loads((tmp_path / "verify_chain_report.json").read_text())
    assert report["passed"] is True
    assert report["results"]["m=4"]["passed"] is True


def test_cli_variational_passes(tmp_path, capsys):
    code, out, _ = _run(
        ["verify", "variational", "--config", str(CONFIGS / "variational_golden_sub.json"),
         "--out", str(tmp_path)],
        capsys,
    )
    assert code == 0
    report = json.loads((tmp_path / "verify_variational_report.json").read_text())
    assert report["results"]["m=1"]["argmax_is_equilibrium"] is True


def test_cli_unions_passes(tmp_path, capsys):
    code, out, _ = _run(
        ["verify", "unions", "--config", str(CONFIGS / "unions_fixed_points.json"),
         "--out", str(tmp_path)],
        capsys,
    )
    assert code == 0


def test_cli_failing_verification_exits_2(tmp_path, capsys):
    cfg = {
        "system": {"alphabet_size": 2},
        "potential": {"constant": 0.0},
        "subset": {
            "kind": "finite_union",
            "parts": [
                {"kind": "sub_sft", "allowed": [[1, 1], [1, 0]]},
                {"kind": "sub_sft", "allowed": [[0, 1], [1, 1]]},
            ],
        },
        "scales": [1],
        "N": 3,
        "L": 16,
        "tol": 0.001,
    }
    path = tmp_path / "equal_pressure_union.json"
    path.write_text(json.dumps(cfg))
    code, out, err = _run(
        ["verify", "unions", "--config", str(path), "--out", str(tmp_path)],
        capsys,
    )
    assert code == 2
    assert "passed=False" in out
    report = json.loads((tmp_path / "verify_unions_report.json").read_text())
    assert report["passed"] is False


def test_cli_schema_error_exits_1_with_json_record(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"system": {"alphabet_size": 2}}))
    code, out, err = _run(
        ["pressure", "bowen", "--config", str(path), "--out", str(tmp_path)],
        capsys,
    )
    assert code == 1
    assert out == ""
    record = json.loads(err.strip())
    assert record["error"] == "SchemaError"
    fields = {p for p, _ in record["problems"]}
    assert {"potential", "scales", "N", "L"} <= fields


def test_cli_missing_config_file_exits_1(tmp_path, capsys):
    code, _, err = _run(
        ["pressure", "exact", "--config", str(tmp_path / "absent.json")],
        capsys,
    )
    assert code == 1
    record = json.loads(err.strip())
    assert "message" in record


def test_cli_inadmissible_potential_exits_1(tmp_path, capsys):
    path = tmp_path / "inadmissible.json"
    path.write_text(json.dumps({
        "system": GM_SYSTEM,
        "potential": {"depth": 2, "table": {"00": 0.0, "01": 0.0, "10": 0.0, "11": 3.0}},
    }))
    code, _, err = _run(
        ["pressure", "exact", "--config", str(path), "--out", str(tmp_path)],
        capsys,
    )
    assert code == 1
    assert json.loads(err.strip())["error"] == "InadmissibleWord"


def test_cli_seed_and_thread_overrides_validated(tmp_path, capsys):
    cfgpath = CONFIGS / "bowen_full2.json"
    code, _, err = _run(
        ["pressure", "bowen", "--config", str(cfgpath), "--out", str(tmp_path),
         "--seed", "-3"],
        capsys,
    )
    assert code == 1
    assert json.loads(err.strip())["error"] == "SchemaError"
    code, _, err = _run(
        ["pressure", "bowen", "--config", str(cfgpath), "--out", str(tmp_path),
         "--threads", "0"],
        capsys,
    )
    assert code == 1


def test_cli_reports_are_deterministic(tmp_path, capsys):
    for sub, cfg in (("bowen", "bowen_full2.json"), ("capacity", "capacity_full2.json")):
        outs = []
        for tag in ("a", "b"):
            out_dir = tmp_path / f"{sub}_{tag}"
            code, _, _ = _run(
                ["pressure", sub, "--config", str(CONFIGS / cfg),
                 "--out", str(out_dir), "--seed", "7"],
                capsys,
            )
            assert code == 0
            outs.append(out_dir)
        a, b = outs
        ra = _strip_timing((a / f"pressure_{sub}_report.json").read_text())
        rb = _strip_timing((b / f"pressure_{sub}_report.json").read_text())
        assert ra == rb
        ca = (a / f"pressure_{sub}_trace.csv").read_bytes()
        cb = (b / f"pressure_{sub}_trace.csv").read_bytes()
        assert ca == cb


def test_cli_measure_threads_do_not_change_results(tmp_path, capsys):
    cfg = {
        "system": {"alphabet_size": 2},
        "potential": {"constant": 0.0},
        "scales": [2],
        "n_range": [200, 400],
        "samples": 8,
        "seed": 5,
        "measure": {"kind": "bernoulli", "p": [0.5, 0.5]},
    }
    path = tmp_path / "measure_small.json"
    path.write_text(json.dumps(cfg))
    reports = []
    for threads in ("1", "3"):
        out_dir = tmp_path / f"t{threads}"
        code, _, _ = _run(
            ["pressure", "measure", "--config", str(path), "--out", str(out_dir),
             "--threads", threads],
            capsys,
        )
        assert code == 0
        rep = json.loads((out_dir / "pressure_measure_report.json").read_text())
        del rep["wall_time_s"]
        del rep["effective"]["threads"]
        reports.append(rep)
    assert reports[0] == reports[1]


def test_cli_frequency_band_runs(tmp_path, capsys):
    code, out, _ = _run(
        ["pressure", "bowen", "--config", str(CONFIGS / "frequency_band.json"),
         "--out", str(tmp_path)],
        capsys,
    )
    assert code == 0
    report = json.loads((tmp_path / "pressure_bowen_report.json").read_text())
    assert 0.4 < report["results"]["m=1"]["midpoint"] < 0.7


def test_console_script_version():
    proc = subprocess.run(
        ["pressurelab", "--version"], capture_output=True, text=True, timeout=60
    )
    assert proc.returncode == 0
    assert proc.stdout.strip()

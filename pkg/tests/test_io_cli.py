import io
import json
from pathlib import Path

import numpy as np
import pytest

from conftest import make_panel
from tsdid.cli import main
from tsdid.errors import ValidationError
from tsdid.io import panel_from_file, panel_to_csv_text, parse_window, read_panel_csv

FIXTURES = Path(__file__).parent / "fixtures"


class TestPanelCsv:
    def test_round_trip_full_precision(self, rng):
        panel = make_panel(rng, n_pre=5, n_transition=1, n_post=5, n_controls=2)
        text = panel_to_csv_text(panel)
        pf = read_panel_csv(io.StringIO(text))
        assert np.array_equal(pf.values[:, 0], panel.treated)
        assert np.array_equal(pf.values[:, 1], panel.controls[0])
        assert np.array_equal(pf.values[:, 2], panel.controls[1])
        # And the rebuilt panel reproduces the original numbers exactly.
        rebuilt = panel_from_file(pf, (0, 0))
        assert np.array_equal(rebuilt.treated, panel.treated)

    def test_gap_detected(self):
        text = "period,a,b\n1990,1,2\n1992,3,4\n1993,1,1\n1994,1,1\n1995,1,1\n"
        with pytest.raises(ValidationError, match="gap in periods after 1990"):
            read_panel_csv(io.StringIO(text))

    def test_bad_cell_reports_line_and_column(self):
        text = "period,a,b\n1990,1,2\n1991,oops,4\n1992,1,1\n1993,1,1\n1994,1,1\n"
        with pytest.raises(ValidationError, match="line 3, column 'a'"):
            read_panel_csv(io.StringIO(text))

    def test_needs_control_column(self):
        text = "period,a\n1990,1\n1991,2\n"
        with pytest.raises(ValidationError):
            read_panel_csv(io.StringIO(text))

    def test_window_parse(self):
        assert parse_window("1990:1992") == (1990, 1992)
        assert parse_window("1991") == (1991, 1991)
        with pytest.raises(ValidationError):
            parse_window("1992:1990")
        with pytest.raises(ValidationError):
            parse_window("abc")

    def test_window_side_minimums(self, rng):
        panel = make_panel(rng, n_pre=4, n_transition=1, n_post=4)
        text = panel_to_csv_text(panel)
        pf = read_panel_csv(io.StringIO(text))
        with pytest.raises(ValidationError, match="at least 2"):
            panel_from_file(pf, (-4, 0))
        with pytest.raises(ValidationError, match="outside the observed range"):
            panel_from_file(pf, (-10, 0))

    def test_log_requires_positive(self, rng):
        panel = make_panel(rng, n_pre=4, n_transition=1, n_post=4)
        pf = read_panel_csv(io.StringIO(panel_to_csv_text(panel)))
        with pytest.raises(ValidationError, match="strictly positive"):
            panel_from_file(pf, (0, 0), log=True)


def run_cli(*argv):
    return main(list(argv))


class TestCli:
    def test_simulate_deterministic(self, tmp_path, capsys):
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        assert run_cli("simulate", "--preset", "SC-BA", "--t-pre", "30", "--t-post", "30", "--seed", "42", "--out", str(out1)) == 0
        assert run_cli("simulate", "--preset", "SC-BA", "--t-pre", "30", "--t-post", "30", "--seed", "42", "--out", str(out2)) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_simulate_then_estimate_pipeline(self, tmp_path, capsys):
        csv_path = tmp_path / "panel.csv"
        assert run_cli("simulate", "--preset", "SC-BA", "--t-pre", "60", "--t-post", "60", "--seed", "7", "--out", str(csv_path)) == 0
        out_json = tmp_path / "est.json"
        code = run_cli(
            "estimate", str(csv_path), "--window", "0:0", "--out", str(out_json)
        )
        assert code == 0
        payload = json.loads(out_json.read_text())
        assert payload["schema_version"] == 1
        ests = {rec["estimator"]: rec for rec in payload["estimates"]}
        assert set(ests) == {"tdid", "sc", "ba"}
        assert 0.0 < ests["tdid"]["p_value"] < 1.0
        assert payload["diagnostics"]["dw_stat"] > 0

    def test_estimate_with_known_step(self, tmp_path):
        n_pre, n_post = 40, 40
        periods = np.arange(-n_pre, n_post + 1)
        rng = np.random.default_rng(3)
        control = rng.standard_normal(periods.size) * 0.01
        treated = control + 0.05 * rng.standard_normal(periods.size)
        treated[periods >= 1] += 0.5
        lines = ["period,treated,control"]
        for p, a, b in zip(periods, treated, control):
            lines.append(f"{p},{float(a)!r},{float(b)!r}")
        path = tmp_path / "step.csv"
        path.write_text("\n".join(lines) + "\n")
        out_json = tmp_path / "out.json"
        assert run_cli("estimate", str(path), "--window", "0:0", "--estimators", "tdid", "--out", str(out_json)) == 0
        rec = json.loads(out_json.read_text())["estimates"][0]
        assert abs(rec["point"] - 0.5) < 3 * rec["hac_se"] + 0.02

    def test_estimate_gap_year_exit_code(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("period,a,b\n1990,1,2\n1992,3,4\n1993,1,1\n1994,1,1\n1995,1,1\n")
        assert run_cli("estimate", str(path), "--window", "1993:1993") == 1
        assert "gap in periods" in capsys.readouterr().err

    def test_estimate_numeric_error_exit_code(self, tmp_path, capsys):
        # A constant panel is estimable but has no usable variance.
        lines = ["period,a,b"] + [f"{p},1.0,0.0" for p in range(-5, 6)]
        path = tmp_path / "const.csv"
        path.write_text("\n".join(lines) + "\n")
        assert run_cli("estimate", str(path), "--window", "0:0", "--estimators", "tdid") == 2

    def test_estimate_weight_flags(self, tmp_path):
        csv_path = tmp_path / "panel.csv"
        run_cli("simulate", "--preset", "SC-BA", "--t-pre", "30", "--t-post", "30", "--seed", "1", "--out", str(csv_path))
        out = tmp_path / "o.json"
        code = run_cli(
            "estimate", str(csv_path), "--window", "0:0",
            "--weights", "post=linear-decay:0.25,pre=uniform",
            "--estimators", "tdid", "--out", str(out),
        )
        assert code == 0

    def test_estimate_ar1_transform(self, tmp_path):
        csv_path = tmp_path / "panel.csv"
        run_cli("simulate", "--preset", "AR1", "--t-pre", "80", "--t-post", "80", "--seed", "5", "--out", str(csv_path))
        out = tmp_path / "o.json"
        code = run_cli(
            "estimate", str(csv_path), "--window", "0:0", "--transform", "ar1-augment",
            "--estimators", "tdid", "--out", str(out),
        )
        assert code == 0
        rec = json.loads(out.read_text())["estimates"][0]
        assert "coef_beta1" in rec

    def test_mc_command(self, tmp_path, capsys):
        config = {
            "preset": "SC-BA",
            "sizes": [25],
            "reps": 40,
            "seed": 5,
            "estimators": ["tdid"],
        }
        cfg_path = tmp_path / "mc.json"
        cfg_path.write_text(json.dumps(config))
        prefix = str(tmp_path / "out")
        assert run_cli("mc", str(cfg_path), "--out-prefix", prefix) == 0
        table = (tmp_path / "out_table.csv").read_text().splitlines()
        assert len(table) == 2
        payload = json.loads((tmp_path / "out_table.json").read_text())
        assert payload["kind"] == "mc_report"

    def test_mc_power_command(self, tmp_path):
        config = {
            "preset": "idTest-I",
            "sizes": [25],
            "reps": 30,
            "seed": 5,
            "estimators": [],
            "tests": ["id.tdid"],
            "power_grid": [0.0, 1.0],
            "power_parameter": "h",
        }
        cfg_path = tmp_path / "mc.json"
        cfg_path.write_text(json.dumps(config))
        prefix = str(tmp_path / "pw")
        assert run_cli("mc", str(cfg_path), "--out-prefix", prefix) == 0
        lines = (tmp_path / "pw_power.csv").read_text().splitlines()
        assert len(lines) == 1 + 2 * 3

    def test_mc_empty_estimators_config_error(self, tmp_path, capsys):
        cfg_path = tmp_path / "mc.json"
        cfg_path.write_text(json.dumps({"preset": "SC-BA", "estimators": [], "reps": 10}))
        assert run_cli("mc", str(cfg_path)) == 1

    def test_mc_unknown_key_config_error(self, tmp_path):
        cfg_path = tmp_path / "mc.json"
        cfg_path.write_text(json.dumps({"preset": "SC-BA", "replications": 10}))
        assert run_cli("mc", str(cfg_path)) == 1

    def test_scan_trend(self, tmp_path):
        out = tmp_path / "scan.csv"
        assert run_cli("scan-trend", "--points", "50", "--out", str(out)) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "lambda,mineig_qa,mineig_qb,mineig_q"
        assert len(lines) == 51
        values = np.loadtxt(lines[1:], delimiter=",")
        assert np.all(values[:, 1:] > 0)

    def test_fetch_worldbank_fixture(self, tmp_path):
        out = tmp_path / "wb.csv"
        code = run_cli(
            "fetch-worldbank", "--countries", "BEN,TGO", "--indicator", "NY.GDP.PCAP.KD",
            "--start", "1960", "--end", "2018",
            "--fixture", str(FIXTURES / "worldbank_ben_tgo.json"), "--out", str(out),
        )
        assert code == 0
        pf = read_panel_csv(str(out))
        assert pf.n_periods == 59
        assert pf.unit_labels == ("BEN", "TGO")

    def test_fetch_worldbank_error_exit_code(self, tmp_path, capsys):
        code = run_cli(
            "fetch-worldbank", "--countries", "XXX,TGO", "--indicator", "X",
            "--start", "1960", "--end", "2018",
            "--fixture", str(FIXTURES / "worldbank_error.json"),
        )
        assert code == 3

    def test_usage_error_exit_code(self, capsys):
        assert run_cli("estimate") == 1

    def test_window_outside_range_exit_code(self, tmp_path):
        csv_path = tmp_path / "panel.csv"
        run_cli("simulate", "--preset", "SC-BA", "--t-pre", "10", "--t-post", "10", "--seed", "1", "--out", str(csv_path))
        assert run_cli("estimate", str(csv_path), "--window", "500:501") == 1

    def test_worldbank_roundtrip_through_estimate(self, tmp_path):
        wb_csv = tmp_path / "wb.csv"
        run_cli(
            "fetch-worldbank", "--countries", "BEN,TGO", "--indicator", "NY.GDP.PCAP.KD",
            "--start", "1960", "--end", "2018",
            "--fixture", str(FIXTURES / "worldbank_ben_tgo.json"), "--out", str(wb_csv),
        )
        out = tmp_path / "est.json"
        code = run_cli(
            "estimate", str(wb_csv), "--window", "1990:1992", "--log",
            "--transform", "ar1-augment", "--estimators", "tdid", "--out", str(out),
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["window"] == [1990, 1992]


def test_estimate_csv_format(tmp_path, capsys):
    csv_path = tmp_path / "panel.csv"
    run_cli("simulate", "--preset", "SC-BA", "--t-pre", "30", "--t-post", "30", "--seed", "2", "--out", str(csv_path))
    assert run_cli("estimate", str(csv_path), "--window", "0:0", "--estimators", "tdid", "--format", "csv") == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("estimator")
    assert len(out) == 2


def test_unit_root_pipeline_rejects_after_differencing(tmp_path):
    # Simulated unit-root panels, first-differenced: ADF rejects the unit
    # root for nearly all seeds.
    from tsdid.diagnostics import adf_test
    from tsdid.dgp import generate, preset, substream
    from tsdid.transforms import first_difference

    hits = 0
    seeds = 200
    for seed in range(seeds):
        sim = generate(preset("U-R"), 60, 60, substream(881, seed))
        diffed = first_difference(sim.panel)
        hits += adf_test(diffed.difference(0)).p_value < 0.05
    assert hits / seeds >= 0.90


def test_mc_cli_overrides(tmp_path):
    cfg_path = tmp_path / "mc.json"
    cfg_path.write_text(json.dumps({"preset": "SC-BA", "sizes": [25], "reps": 500, "seed": 1, "estimators": ["tdid"]}))
    prefix = str(tmp_path / "o")
    assert run_cli("mc", str(cfg_path), "--out-prefix", prefix, "--reps", "20", "--seed", "9") == 0
    payload = json.loads((tmp_path / "o_table.json").read_text())
    assert payload["table"][0]["reps"] == 20
    assert payload["seed"] == 9


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "tsdid" in capsys.readouterr().out


def test_repo_config_examples_valid(tmp_path):
    repo = Path(__file__).resolve().parents[1]
    for name in ("scba_table.json", "idtest_power.json", "sin_path_table.json"):
        from tsdid.cli import _config_from_json

        cfg = _config_from_json(repo / "configs" / name)
        assert cfg.reps == 2000


def test_panel_arrays_immutable(rng):
    panel = make_panel(rng)
    with pytest.raises(ValueError):
        panel.treated[0] = 99.0
    with pytest.raises(ValueError):
        panel.controls[0][0] = 99.0


def test_demeaned_sc_forces_uniform_pre_weights():
    from tsdid import WeightingScheme, fit_estimate
    from tsdid.dgp import generate, preset, substream

    sim = generate(preset("SC-BA"), 40, 40, substream(6))
    decay = WeightingScheme.linear_decay(0.4)
    dsc = fit_estimate(sim.panel, "demeaned_sc", wpre=decay)
    uniform_tdid = fit_estimate(sim.panel, "tdid")
    assert dsc.point == pytest.approx(uniform_tdid.point, abs=1e-12)


def test_mc_runs_table_and_power_when_both_configured(tmp_path):
    cfg_path = tmp_path / "mc.json"
    cfg_path.write_text(json.dumps({
        "preset": "SC-BA", "sizes": [25], "reps": 30, "seed": 2,
        "estimators": ["tdid"], "tests": ["t.tdid"], "power_grid": [0.0, 0.5],
    }))
    prefix = str(tmp_path / "both")
    assert run_cli("mc", str(cfg_path), "--out-prefix", prefix) == 0
    assert (tmp_path / "both_table.csv").exists()
    assert (tmp_path / "both_power.csv").exists()


def test_detrend_undefined_for_sc_exit_code(tmp_path):
    csv_path = tmp_path / "panel.csv"
    run_cli("simulate", "--preset", "T-T", "--t-pre", "30", "--t-post", "30", "--seed", "3", "--out", str(csv_path))
    assert run_cli("estimate", str(csv_path), "--window", "0:0", "--transform", "detrend", "--estimators", "sc") == 1
    assert run_cli("estimate", str(csv_path), "--window", "0:0", "--transform", "detrend", "--estimators", "tdid") == 0

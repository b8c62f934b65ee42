import csv
import io
import json
import math
import subprocess
import sys

import pytest
from hypothesis import given
from hypothesis import strategies as st

from merocont.boundary import CounterexampleSeries
from merocont.cli import (
    COMPARE_COLUMNS,
    EVAL_COLUMNS,
    POLE_COLUMNS,
    SCAN_COLUMNS,
    UsageError,
    parse_complex,
    parse_grid,
    run_cli,
)
from merocont.config import (
    ConfigError,
    build_series,
    dump_config,
    load_config,
    normalize_config,
    series_config,
)
from merocont.report import emit_report, format_float, to_csv, to_json

CONFIGS = {
    "gpb": {"type": "geometric_plus_b", "a": 2, "b_re": 1, "b_im": 0},
    "gpb_complex": {"type": "geometric_plus_b", "a": 3, "b_re": 0.5, "b_im": 0.5},
    "zeta": {"type": "zeta_beta", "beta": 0.5},
    "poly": {"type": "poly_reciprocal", "coeffs": [1, 0, 1]},
    "poly_start": {"type": "poly_reciprocal", "coeffs": [1, -5, 6]},
    "multi": {"type": "multi_geometric", "bases": [0.5, 0.3333333333333333],
              "weights": [1, 1]},
    "flat": {"type": "flat_weierstrass", "a": 2.0},
    "counter": {"type": "counterexample", "m": 2, "gap": "dyadic"},
    "counter_explicit": {"type": "counterexample", "m": 1, "gap": [1, 3, 9, 27]},
    "custom_exact": {"type": "custom", "base": {"kind": "geometric", "a": 2},
                     "alphas": [[0.5, 0.25]], "sigmas": [1, 2]},
    "custom_expr": {"type": "custom", "base": {"kind": "hurwitz", "q": 1},
                    "alphas": [-1, 1], "sigmas": [1, 2, 3], "h_expr": "-z / (1 + z)",
                    "radius": 0.5, "error_constants": [1.5, 1.5, 1.5]},
}


@pytest.fixture
def write_config(tmp_path):
    def write(cfg, name="series.json"):
        path = tmp_path / name
        path.write_text(json.dumps(cfg))
        return str(path)
    return write


def run(argv, capsys):
    code = run_cli(argv)
    out, err = capsys.readouterr()
    return code, out, err


class TestParsing:
    @pytest.mark.parametrize("text,expected", [
        ("-0.5+0i", -0.5 + 0j), ("2", 2 + 0j), ("1.5-2j", 1.5 - 2j), ("3i", 3j), ("-i", -1j),
    ])
    def test_complex(self, text, expected):
        assert parse_complex(text) == expected

    def test_complex_invalid(self):
        with pytest.raises(UsageError):
            parse_complex("one")

    def test_grid_real_major(self):
        pts = parse_grid("re=1:3:0.5,im=-1:1:1")
        assert len(pts) == 15
        assert pts[:4] == [1 - 1j, 1 + 0j, 1 + 1j, 1.5 - 1j]
        assert pts[-1] == 3 + 1j

    def test_grid_single_values(self):
        assert parse_grid("re=2:2:1,im=0:0:1") == [2 + 0j]
        assert parse_grid("re=2,im=-1") == [2 - 1j]

    def test_grid_missing_axis_is_zero(self):
        assert parse_grid("im=0:1:1") == [0j, 1j]

    @pytest.mark.parametrize("text", ["re=1:3", "x=0:1:1", "re=1:3:0,im=0:0:1",
                                      "re=3:1:1,im=0:0:1", "re"])
    def test_grid_invalid(self, text):
        with pytest.raises(UsageError):
            parse_grid(text)


class TestConfig:
    @pytest.mark.parametrize("key", sorted(CONFIGS))
    def test_round_trip(self, key):
        first = series_config(build_series(CONFIGS[key]))
        again = series_config(build_series(json.loads(json.dumps(first))))
        assert again == first

    def test_normalised_fields(self):
        cfg = normalize_config({"type": "geometric_plus_b", "a": 2})
        assert cfg == {"type": "geometric_plus_b", "a": 2.0, "b_re": 0.0, "b_im": 0.0}

    def test_poly_start_filled(self):
        assert series_config(build_series(CONFIGS["poly_start"]))["n_start"] == 4

    def test_counterexample_type(self):
        assert isinstance(build_series(CONFIGS["counter"]), CounterexampleSeries)

    def test_dump_sorted(self):
        text = dump_config(build_series(CONFIGS["zeta"]))
        assert text == '{"beta": 0.5, "type": "zeta_beta"}'

    @pytest.mark.parametrize("cfg", [
        {"type": "nope"},
        {"type": "zeta_beta"},
        {"type": "zeta_beta", "beta": 1.5},
        {"type": "geometric_plus_b", "a": "two"},
        {"type": "geometric_plus_b", "a": 2, "b_re": -4},
        {"type": "poly_reciprocal", "coeffs": [2, 1]},
        {"type": "custom", "base": {"kind": "other"}},
        {"type": "custom", "base": {"kind": "geometric", "a": 2}, "alphas": [1],
         "sigmas": [1, 2], "h_expr": "__import__('os')"},
        {"type": "counterexample", "m": 1, "gap": [5, 4]},
        {"type": "counterexample", "m": 1.5},
        [1, 2],
    ])
    def test_invalid(self, cfg):
        with pytest.raises(ConfigError):
            build_series(cfg)

    def test_custom_expression(self):
        series = build_series(CONFIGS["custom_expr"])
        assert series.h(0.25) == pytest.approx(-0.2)

    def test_load_errors(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(str(tmp_path / "missing.json"))
        bad = tmp_path / "bad.json"
        bad.write_text("{")
        with pytest.raises(ConfigError):
            load_config(str(bad))


class TestReport:
    def test_float_digits(self):
        assert format_float(0.1) == "0.10000000000000001"
        assert float(format_float(1 / 3)) == 1 / 3
        assert format_float(math.inf) == "inf" and format_float(math.nan) == "nan"

    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_float_round_trip(self, x):
        assert float(format_float(x)) == x

    def test_empty_csv(self):
        assert to_csv([], POLE_COLUMNS) == "re,im,shift,residue_re,residue_im,status\n"
        with pytest.raises(ValueError):
            to_csv([])

    def test_json_key_order(self):
        text = to_json({"z": 1, "a": 2.5, "c": 1 + 2j, "ok": True, "none": None})
        assert text == ('{"z": 1, "a": 2.5, "c": {"re": 1, "im": 2}, "ok": true, '
                        '"none": null}\n')
        json.loads(text)

    def test_json_non_finite(self):
        assert json.loads(to_json({"x": math.inf})) == {"x": "inf"}

    def test_destinations(self, tmp_path):
        buf = io.StringIO()
        emit_report([{"a": 1.0}], "csv", buf)
        assert buf.getvalue() == "a\n1\n"
        path = tmp_path / "r.json"
        emit_report({"a": 1.0}, "json", str(path))
        assert json.loads(path.read_text()) == {"a": 1}
        with pytest.raises(ValueError):
            emit_report([], "xml", buf, ["a"])


class TestEval:
    def test_single_json(self, write_config, capsys):
        cfg = write_config(CONFIGS["gpb"])
        code, out, _ = run(["eval", "--config", cfg, "--s", "-0.5+0i", "--tol", "1e-8",
                            "--out", "json"], capsys)
        assert code == 0
        rec = json.loads(out)
        assert list(rec) == ["s", "value", "error_bound", "plan", "certified"]
        assert list(rec["plan"]) == ["N", "nu", "K_max", "M_max"]
        assert abs(rec["value"]["re"] - -2.264908462972962) <= rec["error_bound"] + 1e-12
        assert abs(rec["value"]["im"]) <= 1e-15 and rec["certified"] is True

    def test_grid_csv(self, write_config, capsys):
        cfg = write_config(CONFIGS["zeta"])
        # Real points avoid the pole lattice 1 - k/2.
        code, out, _ = run(["eval", "--config", cfg, "--grid", "re=-0.75:0.75:0.75,im=0:1:1"],
                           capsys)
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert list(rows[0]) == EVAL_COLUMNS
        assert [(float(r["re_s"]), float(r["im_s"])) for r in rows] == [
            (-0.75, 0), (-0.75, 1), (0, 0), (0, 1), (0.75, 0), (0.75, 1)
        ]

    def test_output_file(self, write_config, capsys, tmp_path):
        cfg = write_config(CONFIGS["gpb"])
        dest = tmp_path / "out.json"
        code, out, _ = run(["eval", "--config", cfg, "--s", "2", "--output", str(dest)], capsys)
        assert code == 0 and out == ""
        assert json.loads(dest.read_text())["value"]["re"] == pytest.approx(
            0.1681522598687239, abs=1e-10)

    def test_counterexample_eval(self, write_config, capsys):
        cfg = write_config(CONFIGS["counter"])
        code, out, _ = run(["eval", "--config", cfg, "--s", "-1.5+0.3i"], capsys)
        assert code == 0
        assert math.isfinite(json.loads(out)["value"]["re"])

    def test_threads_preserve_order(self, write_config, capsys, monkeypatch):
        cfg = write_config(CONFIGS["gpb"])
        argv = ["eval", "--config", cfg, "--grid", "re=-1.5:1.5:0.5,im=-1:1:0.5"]
        monkeypatch.setenv("MEROCONT_THREADS", "1")
        _, serial, _ = run(argv, capsys)
        monkeypatch.setenv("MEROCONT_THREADS", "4")
        _, parallel, _ = run(argv, capsys)
        assert serial == parallel

    def test_byte_identical(self, write_config, capsys):
        cfg = write_config(CONFIGS["zeta"])
        argv = ["eval", "--config", cfg, "--grid", "re=-0.8:0.8:0.4,im=0:2:1"]
        assert run(argv, capsys)[1] == run(argv, capsys)[1]


class TestOtherCommands:
    def test_direct(self, write_config, capsys):
        cfg = write_config(CONFIGS["gpb"])
        code, out, _ = run(["direct", "--config", cfg, "--s", "2", "--tol", "1e-12"], capsys)
        assert code == 0
        assert json.loads(out)["value_re"] == pytest.approx(0.1681522598687239, abs=1e-12)

    def test_compare_spec_grid(self, write_config, capsys):
        cfg = write_config(CONFIGS["gpb"])
        code, out, _ = run(["compare", "--config", cfg, "--grid", "re=1:3:0.5,im=-1:1:1",
                            "--tol", "1e-8"], capsys)
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 15 and list(rows[0]) == COMPARE_COLUMNS
        assert all(r["within_budget"] == "true" for r in rows)

    def test_poles(self, write_config, capsys):
        cfg = write_config(CONFIGS["gpb"])
        code, out, _ = run(["poles", "--config", cfg, "--rect", "-2.2,0.2,-0.5,0.5",
                            "--verify"], capsys)
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert list(rows[0]) == POLE_COLUMNS
        assert [float(r["re"]) for r in rows] == [0, -1, -2]
        assert all(r["status"] == "verified" for r in rows)
        assert float(rows[0]["residue_re"]) == pytest.approx(1 / math.log(2), abs=1e-8)

    def test_poles_empty_rect_region(self, write_config, capsys):
        cfg = write_config(CONFIGS["gpb"])
        code, out, _ = run(["poles", "--config", cfg, "--rect", "0.3,0.9,-0.5,0.5"], capsys)
        assert code == 0
        assert out == ",".join(POLE_COLUMNS) + "\n"

    def test_residue(self, write_config, capsys):
        cfg = write_config(CONFIGS["zeta"])
        code, out, _ = run(["residue", "--config", cfg, "--center", "0.75", "--radius",
                            "0.1"], capsys)
        assert code == 0
        rec = json.loads(out)
        assert math.hypot(rec["residue_re"], rec["residue_im"]) <= 1e-6 + rec["budget"]

    def test_boundary_scan(self, write_config, capsys):
        cfg = write_config({"type": "counterexample", "m": 1})
        code, out, _ = run(["boundary-scan", "--config", cfg, "--offsets", "0.1,0.01,0.001",
                            "--heights", "0"], capsys)
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert list(rows[0]) == SCAN_COLUMNS
        mags = [float(r["t2_abs"]) for r in rows]
        assert mags == sorted(mags) and len(mags) == 3

    def test_boundary_scan_needs_counterexample(self, write_config, capsys):
        cfg = write_config(CONFIGS["gpb"])
        code, _, err = run(["boundary-scan", "--config", cfg], capsys)
        assert code == 1 and json.loads(err)["exit_code"] == 1

    def test_selftest_formats(self, capsys):
        code, text, _ = run(["selftest"], capsys)
        assert code == 0
        assert text.count("PASS") == len(text.strip().splitlines()) - 1
        code, out, _ = run(["selftest", "--out", "json"], capsys)
        assert all(r["status"] == "PASS" for r in json.loads(out))

    def test_selftest_byte_identical(self, capsys):
        assert run(["selftest"], capsys)[1] == run(["selftest"], capsys)[1]


class TestExitCodes:
    def test_usage(self, capsys):
        assert run([], capsys)[0] == 1
        assert run(["frobnicate"], capsys)[0] == 1

    def test_missing_config(self, capsys, tmp_path):
        code, _, err = run(["eval", "--config", str(tmp_path / "none.json"), "--s", "1"],
                           capsys)
        assert code == 1
        assert json.loads(err)["error"] == "ConfigError"

    def test_no_points(self, write_config, capsys):
        assert run(["eval", "--config", write_config(CONFIGS["gpb"])], capsys)[0] == 1

    def test_bad_grid(self, write_config, capsys):
        cfg = write_config(CONFIGS["gpb"])
        assert run(["eval", "--config", cfg, "--grid", "re=1:2"], capsys)[0] == 1

    def test_empty_rect(self, write_config, capsys):
        cfg = write_config(CONFIGS["gpb"])
        assert run(["poles", "--config", cfg, "--rect", "1,0,0,1"], capsys)[0] == 1

    def test_accuracy(self, write_config, capsys):
        cfg = write_config(CONFIGS["zeta"])
        code, _, err = run(["direct", "--config", cfg, "--s", "1.3", "--tol", "1e-9",
                            "--max-terms", "1000"], capsys)
        assert code == 2 and json.loads(err)["error"] == "AccuracyUnreachable"

    def test_domain(self, write_config, capsys):
        cfg = write_config(CONFIGS["gpb"])
        code, _, err = run(["eval", "--config", cfg, "--s", "0"], capsys)
        assert code == 3 and json.loads(err)["error"] == "NearPole"
        code, _, err = run(["direct", "--config", cfg, "--s", "0.05"], capsys)
        assert code == 3

    def test_truncation_unavailable(self, write_config, capsys):
        cfg = write_config(CONFIGS["counter"])
        assert run(["eval", "--config", cfg, "--s", "-2.5"], capsys)[0] == 3

    def test_capacity(self, write_config, capsys):
        roots = [1.0, 2**0.5, 3**0.5, 5**0.5, 7**0.5, 11**0.5, 13**0.5]
        cfg = write_config({"type": "custom", "base": {"kind": "geometric", "a": 2},
                            "alphas": [0.1] * 6, "sigmas": roots})
        code, _, err = run(["poles", "--config", cfg, "--rect", "-30,0,-1,1",
                            "--shift-cap", "1000"], capsys)
        assert code == 4 and json.loads(err)["error"] == "CapacityExceeded"


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps(CONFIGS["gpb"]))
    proc = subprocess.run(
        [sys.executable, "-m", "merocont", "eval", "--config", str(cfg), "--s", "-0.5+0i",
         "--tol", "1e-8"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["plan"]["N"] >= 0

import json
import math

import numpy as np
import pytest

from eclength import RunConfig
from eclength.cli import (
    load_operator,
    make_template_space,
    parse_root_token,
    parse_splice_template,
    preset_operator,
    region_boundary,
    roots_from_tokens,
    run,
)


class TestRootGrammar:
    def test_plain(self):
        assert parse_root_token("0:3") == (0.0, 0.0, 3)

    def test_pair(self):
        assert parse_root_token("0,1:1") == (0.0, 1.0, 1)

    def test_repetition(self):
        assert parse_root_token("0:1x3") == (0.0, 0.0, 3)

    def test_negative_real(self):
        assert parse_root_token("-1.5:2") == (-1.5, 0.0, 2)

    def test_merge(self):
        rs = roots_from_tokens(["0:1x2", "0:1"])
        assert rs.entries[0].mult == 3

    def test_bad_tokens(self):
        for tok in ("0", "0:", "a:1", "0,-1:1", "0:0"):
            with pytest.raises(ValueError):
                parse_root_token(tok)


class TestPresets:
    def test_trig4(self):
        rs = preset_operator("trig4")
        assert rs.degree == 5
        assert any(i == 1.0 for _, i, _ in rs.entries)

    def test_hyp1(self):
        rs = preset_operator("hyp1")
        assert rs.degree == 2
        assert all(i == 0.0 for _, i, _ in rs.entries)

    def test_unknown_name(self):
        assert preset_operator("splineX") is None
        with pytest.raises(ValueError):
            load_operator("not-an-operator")


class TestCritlenCommand:
    def test_cycloidal_value(self, capsys, tmp_path):
        code = run(["critlen", "--roots", "0:1x3", "0,1:1"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["status"] == "Finite"
        assert payload["value"] == pytest.approx(8.9868, abs=1e-3)

    def test_design_flag(self, capsys):
        code = run(["critlen", "--coeffs", "0", "1", "0", "--design"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["design"] is True
        assert payload["value"] == pytest.approx(math.pi, abs=1e-8)

    def test_infinite(self, capsys):
        code = run(["critlen", "--coeffs", "-1", "0"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["status"] == "Infinite"
        assert payload["value"] == "inf"

    def test_deterministic_outputs(self, capsys):
        run(["critlen", "--roots", "0,1:1"])
        first = capsys.readouterr().out
        run(["critlen", "--roots", "0,1:1"])
        second = capsys.readouterr().out
        assert first == second


class TestEctestCommand:
    def test_exit_codes(self, capsys):
        ec = run(["ectest", "--space", '{"coeffs":[1.0,0.0]}',
                  "--interval", "0", "2", "--knots", "1"])
        assert ec == 0
        capsys.readouterr()
        not_ec = run(["ectest", "--space", '{"coeffs":[1.0,0.0]}',
                      "--interval", "0", "3.3", "--knots", "1.65"])
        assert not_ec == 1
        payload = json.loads(capsys.readouterr().out)
        assert payload["verdict"] == "NotEC"
        assert "failure" in payload

    def test_debug_gamma(self, capsys):
        code = run(["ectest", "--space", '{"coeffs":[1.0,0.0]}',
                    "--interval", "0", "2", "--knots", "1", "--debug-gamma"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert len(payload["levels"]) == 1
        assert np.array(payload["levels"][0]).shape == (2, 2, 2)

    def test_splice_json_space(self, capsys, tmp_path):
        spec = {
            "sections": [
                {"operator": {"roots": [{"re": 0, "im": 1, "mult": 1}]}, "length": 2.5},
                {"operator": {"roots": [{"re": 1, "im": 0, "mult": 1},
                                        {"re": -1, "im": 0, "mult": 1}]}, "length": 0.8},
            ]
        }
        path = tmp_path / "splice.json"
        path.write_text(json.dumps(spec))
        assert run(["ectest", "--space", str(path)]) == 0


class TestSweepCommand:
    def test_scaling_sweep(self, tmp_path):
        out = tmp_path / "sweep.csv"
        template = '{"roots":[{"re":0,"im":"b","mult":1},{"re":0,"im":0,"mult":2}]}'
        code = run(["sweep", "--template", template, "--range", "0.5", "2.0", "4",
                    "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "param,value,mu,ell0"
        rows = [line.split(",") for line in lines[1:]]
        values = [float(r[1]) for r in rows]
        # One-parameter family scaled by b: values follow 2*pi/b.
        for r in rows:
            assert float(r[1]) == pytest.approx(2 * math.pi / float(r[0]), abs=1e-6)
        assert values == sorted(values, reverse=True)

    def test_byte_identical_reruns(self, tmp_path):
        template = '{"roots":[{"re":0,"im":"b","mult":1}]}'
        args = ["sweep", "--template", template, "--range", "1.0", "2.0", "3"]
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(args + ["--out", str(out1)]) == 0
        assert run(args + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_worker_pool_matches_serial(self, tmp_path):
        template = '{"roots":[{"re":0,"im":"b","mult":1}]}'
        args = ["sweep", "--template", template, "--range", "0.8", "1.6", "3"]
        serial, pooled = tmp_path / "s.csv", tmp_path / "p.csv"
        assert run(args + ["--out", str(serial)]) == 0
        assert run(args + ["--jobs", "2", "--out", str(pooled)]) == 0
        assert serial.read_bytes() == pooled.read_bytes()


class TestRegionCommand:
    def test_boundary_matches_closed_form(self):
        cfg = RunConfig(check_sections=True)
        template = parse_splice_template(["trig:T", "hyp:H"], 1)
        h_star, _, kind = region_boundary(
            lambda h: make_template_space(template, 2.5, h), 0.01, 6.0, 1e-8, cfg)
        assert kind == "interior"
        assert abs(1 / math.tan(2.5) + 1 / math.tanh(h_star)) <= 1e-5

    def test_ceiling_column(self):
        cfg = RunConfig(check_sections=True)
        template = parse_splice_template(["trig:T", "hyp:H"], 1)
        h_star, idx, kind = region_boundary(
            lambda h: make_template_space(template, 0.5, h), 0.01, 6.0, 1e-8, cfg)
        assert kind == "ceiling"
        assert h_star == 6.0

    def test_no_admissible_column(self):
        cfg = RunConfig(check_sections=True)
        template = parse_splice_template(["trig:T", "hyp:H"], 1)
        _, _, kind = region_boundary(
            lambda h: make_template_space(template, 3.2, h), 0.01, 6.0, 1e-8, cfg)
        assert kind == "floor"

    def test_raster_csv(self, tmp_path):
        out = tmp_path / "raster.csv"
        bound = tmp_path / "bound.csv"
        code = run(["region", "--splice", "trig:T", "hyp:H", "--n", "1",
                    "--grid", "3", "--h-steps", "4",
                    "--t-range", "2.4", "2.8", "--h-range", "0.05", "3.0",
                    "--tol", "1e-6", "--out", str(out), "--boundary", str(bound)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "T,H,verdict,failing_det_index"
        assert len(lines) == 1 + 3 * 4
        blines = bound.read_text().splitlines()
        assert blines[0] == "T,H_star,failing_det_index,cusp"
        assert len(blines) == 4

    def test_template_requires_symbols(self):
        with pytest.raises(ValueError):
            parse_splice_template(["trig:1.0", "hyp:2.0"], 1)


class TestCurveCommand:
    def make_control(self, tmp_path):
        path = tmp_path / "control.csv"
        path.write_text("0,0\n1,2\n2,-1\n3,3\n4,0\n")
        return path

    def test_csv_polyline(self, capsys, tmp_path):
        control = self.make_control(tmp_path)
        code = run(["curve", "--operator", "trig4", "--interval", "0", "3.14",
                    "--control", str(control), "--samples", "9"])
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "x0,x1"
        first = [float(v) for v in lines[1].split(",")]
        last = [float(v) for v in lines[-1].split(",")]
        assert np.allclose(first, [0.0, 0.0], atol=1e-9)
        assert np.allclose(last, [4.0, 0.0], atol=1e-9)

    def test_svg_output(self, tmp_path):
        control = self.make_control(tmp_path)
        out = tmp_path / "curve.svg"
        code = run(["curve", "--operator", "trig4", "--interval", "0", "3.14",
                    "--control", str(control), "--samples", "16",
                    "--output", "svg", "--out", str(out)])
        assert code == 0
        text = out.read_text()
        assert text.startswith("<svg")
        assert text.count("<polyline") == 2

    def test_figure_file(self, tmp_path):
        control = self.make_control(tmp_path)
        png = tmp_path / "curve.png"
        code = run(["curve", "--operator", "trig4", "--interval", "0", "3.14",
                    "--control", str(control), "--samples", "16",
                    "--plot", str(png)])
        assert code == 0
        assert png.stat().st_size > 1000


class TestOracleCommand:
    def test_bessel(self, capsys):
        assert run(["oracle", "bessel", "--order", "0.5"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["value"] == pytest.approx(math.pi, abs=1e-9)

    def test_closed_form(self, capsys):
        assert run(["oracle", "closed-form", "--case", "zh3", "--a", "1", "--b", "1"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["value"] == pytest.approx(4.730040744862704, abs=1e-9)

    def test_wronskian(self, capsys):
        assert run(["oracle", "wronskian", "--operator", '{"coeffs":[1.0,0.0]}',
                    "--k", "0", "--h-max", "4"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["first_zero"] == pytest.approx(math.pi, abs=1e-8)

    def test_brute(self, capsys):
        assert run(["oracle", "brute", "--operator", "trig1",
                    "--interval", "0", "3.3", "--grid", "120"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["verdict"] == "NotEC"


class TestExitCodes:
    def test_usage(self, capsys):
        assert run(["nonsense"]) == 64
        capsys.readouterr()
        assert run([]) == 64
        capsys.readouterr()
        assert run(["critlen"]) == 64  # no operator given

    def test_data_error(self, capsys):
        assert run(["critlen", "--operator", "{not json"]) == 65
        capsys.readouterr()
        assert run(["critlen", "--roots", "0,-1:1"]) == 65
        capsys.readouterr()

    def test_exhaustion_is_surfaced(self, capsys):
        # Not enough probes to bracket 2*pi; must fail loudly, not report
        # infinity (only all-real roots prove an infinite critical length).
        assert run(["critlen", "--roots", "0:2", "0,1:1", "--k-max", "1"]) == 65
        assert "k_max" in capsys.readouterr().err

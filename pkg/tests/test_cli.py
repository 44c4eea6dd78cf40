import json

import numpy as np
import pytest

from furst.cli import main

BOX_CONFIG = {
    "d": 2,
    "cantor": {"base": 3, "digits": [0, 2]},
    "t": 1.5,
    "M": 6,
    "N": 6,
    "depth": 6,
    "seed": 7,
}

PACKING_CONFIG = {
    "d": 2,
    "s": 0.5,
    "t": 1.0,
    "schedule": {"mode": "demo", "etas": [1.0, 1 / 16, 1 / 256, 1 / 4096]},
    "seed": 7,
}


def write_config(path, payload):
    path.write_text(json.dumps(payload))
    return str(path)


def construct_box(tmp_path, name="run", **overrides):
    cfg = dict(BOX_CONFIG)
    cfg.update(overrides)
    cfg_path = write_config(tmp_path / f"{name}.json", cfg)
    out = tmp_path / name
    code = main(["construct-box", "--config", cfg_path, "--out", str(out)])
    return code, out


class TestConstruct:
    def test_box_row_count(self, tmp_path):
        code, out = construct_box(tmp_path)
        assert code == 0
        rows = (out / "points.csv").read_text().splitlines()
        assert rows[0] == "x1,x2"
        assert len(rows) - 1 == 6 * 6 * 2**6 == 2304
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["counts"] == {"points": 2304, "lines": 36}
        assert manifest["achieved_s"] == pytest.approx(np.log(2) / np.log(3))

    def test_packing_k0(self, tmp_path):
        cfg = dict(PACKING_CONFIG, K=0)
        cfg_path = write_config(tmp_path / "p.json", cfg)
        out = tmp_path / "p"
        assert main(["construct-packing", "--config", cfg_path, "--out", str(out)]) == 0
        rows = (out / "trajectory.csv").read_text().splitlines()
        assert rows[0] == "k,eta,option,num_lines,num_marks,pred_lines,pred_marks"
        assert len(rows) == 2
        assert rows[1].split(",")[3:5] == ["1", "1"]

    def test_invalid_t_cites_range(self, tmp_path, capsys):
        code, _ = construct_box(tmp_path, name="bad", t=3.0)
        assert code == 1
        assert "[0, 2]" in capsys.readouterr().err

    def test_resource_cap_exit_code(self, tmp_path):
        code, _ = construct_box(tmp_path, name="big", max_points=10)
        assert code == 2

    def test_seed_required(self, tmp_path):
        cfg = dict(BOX_CONFIG)
        del cfg["seed"]
        cfg_path = write_config(tmp_path / "noseed.json", cfg)
        assert main(["construct-box", "--config", cfg_path, "--out", str(tmp_path / "x")]) == 1

    def test_unknown_flag_is_user_error(self, tmp_path):
        assert main(["construct-box", "--nope"]) == 1


class TestEstimateVerifyReport:
    def test_box_estimate_slopes(self, tmp_path):
        _, out = construct_box(tmp_path)
        code = main(
            ["estimate", "--out", str(out), "--scales", "0.0625,0.000244140625"]
        )
        assert code == 0
        side = json.loads((out / "x_cover.json").read_text())
        assert abs(side["slope"] - 0.6309) <= 0.15
        assert side["thresholds"]["box"] == pytest.approx(0.6309297535714574)
        assert side["envelope_holds"] is True
        # the line sidecar records the fitted slope and the target
        lside = json.loads((out / "line_cover.json").read_text())
        assert lside["target_t"] == 1.5

    def test_single_point_slope_zero(self, tmp_path):
        out = tmp_path / "single"
        out.mkdir()
        (out / "points.csv").write_text("x1,x2\n0.25,0.75\n")
        (out / "lines.csv").write_text("dir1,dir2,trans1,trans2\n1.0,0.0,0.0,0.75\n")
        (out / "manifest.json").write_text(
            json.dumps(
                {
                    "kind": "box",
                    "spec": BOX_CONFIG,
                    "floors": {"points": 1e-9, "lines": 1e-9},
                    "thresholds": {"box": 0, "packing": 0, "hausdorff": 0},
                }
            )
        )
        assert main(["estimate", "--out", str(out)]) == 0
        side = json.loads((out / "x_cover.json").read_text())
        assert side["slope"] == 0.0

    def test_verify_all_sound(self, tmp_path):
        _, out = construct_box(tmp_path)
        code = main(
            ["verify", "--out", str(out), "--scales", "0.0625,0.000244140625"]
        )
        assert code == 0
        summary = json.loads((out / "verify_summary.json").read_text())
        assert summary["all_sound"] is True
        assert summary["scales_checked"] == 9
        certs = json.loads((out / "certificates.json").read_text())
        assert all(c["sound"] for c in certs["certificates"])

    def test_verify_missing_point_reports_inconsistent(self, tmp_path, capsys):
        # two parallel lines, far apart; the second has no cloud point
        out = tmp_path / "adv"
        out.mkdir()
        (out / "points.csv").write_text("x1,x2\n0.3,0.0\n")
        (out / "lines.csv").write_text(
            "dir1,dir2,trans1,trans2\n1.0,0.0,0.0,0.0\n1.0,0.0,0.0,0.5\n"
        )
        (out / "manifest.json").write_text(
            json.dumps(
                {
                    "kind": "box",
                    "spec": BOX_CONFIG,
                    "floors": {"points": 1e-9, "lines": 1e-9},
                    "thresholds": {"box": 0, "packing": 0, "hausdorff": 0},
                }
            )
        )
        code = main(["verify", "--out", str(out), "--scales", "0.01,0.005"])
        assert code == 1
        assert "no cloud point" in capsys.readouterr().err

    def test_packing_estimate_exponent_cap(self, tmp_path):
        # the K = 3 demo trajectory keeps its mark exponent under
        # max(s, t/2) + 0.2 at every step scale
        cfg_path = write_config(tmp_path / "p3.json", PACKING_CONFIG)
        out = tmp_path / "p3"
        assert main(["construct-packing", "--config", cfg_path, "--out", str(out)]) == 0
        assert main(["estimate", "--out", str(out)]) == 0
        rows = (out / "packing_exponents.csv").read_text().splitlines()[1:]
        assert len(rows) == 3
        for row in rows:
            assert float(row.split(",")[4]) <= max(0.5, 0.5) + 0.2
        side = json.loads((out / "packing_exponents.json").read_text())
        assert side["max_mark_exponent"] <= side["mark_exponent_cap"] + 0.2

    def test_packing_verify_two_point(self, tmp_path):
        cfg = dict(PACKING_CONFIG)
        cfg["schedule"] = {"mode": "demo", "etas": [1.0, 1 / 16, 2.0**-10]}
        cfg_path = write_config(tmp_path / "p.json", cfg)
        out = tmp_path / "p"
        assert main(["construct-packing", "--config", cfg_path, "--out", str(out)]) == 0
        assert main(["verify", "--out", str(out)]) == 0
        certs = json.loads((out / "certificates.json").read_text())
        assert certs["all_sound"]
        assert certs["certificates"][0]["branch"].startswith("dichotomy")

    def test_verify_empty_family_warns_exit_zero(self, tmp_path, capsys):
        out = tmp_path / "empty"
        out.mkdir()
        (out / "points.csv").write_text("x1,x2\n0.25,0.75\n")
        (out / "lines.csv").write_text("dir1,dir2,trans1,trans2\n")
        (out / "manifest.json").write_text(
            json.dumps(
                {
                    "kind": "box",
                    "spec": BOX_CONFIG,
                    "floors": {"points": 1e-9, "lines": 1e-9},
                    "thresholds": {"box": 0, "packing": 0, "hausdorff": 0},
                }
            )
        )
        assert main(["verify", "--out", str(out)]) == 0
        assert "no certificates" in capsys.readouterr().err
        summary = json.loads((out / "verify_summary.json").read_text())
        assert summary["scales_checked"] == 0

    def test_report_svg(self, tmp_path):
        _, out = construct_box(tmp_path)
        main(["estimate", "--out", str(out), "--scales", "0.0625,0.000244140625"])
        assert main(["report", "--out", str(out)]) == 0
        svg = (out / "x_cover.svg").read_text()
        assert svg.startswith("<svg")
        assert "circle" in svg
        report = json.loads((out / "report.json").read_text())
        assert {s["series"] for s in report["series"]} == {"x_cover", "line_cover"}

    def test_report_without_estimate_fails(self, tmp_path):
        _, out = construct_box(tmp_path, name="bare")
        assert main(["report", "--out", str(out)]) == 1

    def test_missing_artifacts(self, tmp_path):
        assert main(["estimate", "--out", str(tmp_path / "nothing")]) == 1


class TestDeterminism:
    def test_box_outputs_byte_identical(self, tmp_path):
        _, out1 = construct_box(tmp_path, name="a")
        _, out2 = construct_box(tmp_path, name="b")
        for name in ("points.csv", "lines.csv", "manifest.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_packing_outputs_byte_identical(self, tmp_path):
        cfg_path = write_config(tmp_path / "p.json", PACKING_CONFIG)
        outs = []
        for name in ("pa", "pb"):
            out = tmp_path / name
            assert main(
                ["construct-packing", "--config", cfg_path, "--out", str(out)]
            ) == 0
            outs.append(out)
        for name in ("trajectory.csv", "states.json", "manifest.json"):
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()

    def test_seed_flag_overrides(self, tmp_path):
        cfg_path = write_config(tmp_path / "c.json", BOX_CONFIG)
        out = tmp_path / "s"
        assert main(
            ["construct-box", "--config", cfg_path, "--out", str(out), "--seed", "99"]
        ) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["spec"]["seed"] == 99

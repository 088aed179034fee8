import csv
import json
import math

import pytest

from qslimit.exceptions import ConfigError
from qslimit.sweeps import (
    AxisSpec,
    RunConfig,
    columns,
    evaluate_point,
    format_value,
    render_csv,
    reproduce_figure,
    run_sweep,
)

HALF = 2**-0.5


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestAxisSpec:
    def test_parse_range(self):
        assert AxisSpec.parse("gamma0", "0.1:20:200") == AxisSpec("gamma0", 0.1, 20.0, 200)

    def test_parse_value(self):
        assert AxisSpec.parse("alpha", "0.707") == AxisSpec("alpha", 0.707, 0.707, 1)

    @pytest.mark.parametrize("text", ["a", "1:2", "1:2:x", "2:1:5", "1:2:0", "1:2:1"])
    def test_parse_rejects(self, text):
        with pytest.raises(ConfigError):
            AxisSpec.parse("alpha", text)

    def test_points(self):
        pts = AxisSpec("s", 1.0, 2.0, 5).points()
        assert pts == [1.0, 1.25, 1.5, 1.75, 2.0]


class TestRunConfig:
    def test_foreign_parameter(self):
        with pytest.raises(ConfigError, match="'s'"):
            RunConfig.create("jc", coords={"gamma0": 1.0, "time": 1.0, "s": 3.0})

    def test_xu_only_for_jc(self):
        with pytest.raises(ConfigError, match="xu"):
            RunConfig.create("dephasing", coords={"s": 1.0, "eta": 0.6, "time": 1.0}, bounds=("xu",))

    def test_lists_every_problem(self):
        with pytest.raises(ConfigError) as info:
            RunConfig.create("jc", coords={"gamma0": -1.0, "time": 0.0}, method="fast")
        message = str(info.value)
        assert "gamma0" in message and "time" in message and "method" in message

    def test_defaults(self):
        cfg = RunConfig.create("jc", coords={"gamma0": 1.0, "time": 1.0})
        assert cfg.coords["lambda"] == 15.0 and cfg.coords["alpha"] == pytest.approx(HALF)


class TestEvaluatePoint:
    def test_jc_markovian_excited(self):
        cfg = RunConfig.create("jc", coords={"gamma0": 1.0, "alpha": 1.0, "time": 1.0}, bounds=("ml",))
        row = evaluate_point(cfg)
        assert row["ml_closed"] == pytest.approx(1.0, rel=1e-10)
        assert row["regime"] == "Markovian" and row["ml_accelerated"] is False
        assert row["error"] == ""

    def test_dephasing_ohmic(self):
        cfg = RunConfig.create("dephasing", coords={"s": 1.0, "eta": 0.6, "time": 3.0}, bounds=("ml",))
        assert evaluate_point(cfg)["ml_closed"] == pytest.approx(3.0, rel=1e-10)

    def test_ground_state_flag_suppressed(self):
        cfg = RunConfig.create("jc", coords={"gamma0": 50.0, "alpha": 0.0, "time": 1.0}, bounds=("ml",))
        row = evaluate_point(cfg)
        assert row["ml_closed"] == 0.0 and row["ml_accelerated"] is False

    def test_both_methods(self):
        cfg = RunConfig.create(
            "jc", coords={"gamma0": 50.0, "time": 1.0}, bounds=("ml", "ni", "xu"), method="both"
        )
        row = evaluate_point(cfg)
        assert set(columns(cfg)) == set(row)
        assert row["ml_absdiff"] < 1e-7 and row["ni_absdiff"] < 1e-7
        assert row["xu"] < 1.0

    def test_column_order(self):
        cfg = RunConfig.create("dephasing", coords={"s": 3.0, "eta": 0.6, "time": 3.0}, method="both")
        assert columns(cfg) == [
            "s", "eta", "beta", "theta", "time",
            "ml_closed", "ml_generic", "ml_absdiff", "ml_accelerated",
            "ni_closed", "ni_generic", "ni_absdiff", "ni_accelerated",
            "capacity_nonmarkovianity", "rate_sign", "regime", "error",
        ]


class TestRunSweep:
    def test_row_major_order(self):
        cfg = RunConfig.create("jc", coords={"gamma0": 1.0, "time": 1.0})
        rows = run_sweep(cfg, [AxisSpec("gamma0", 1.0, 3.0, 3), AxisSpec("alpha", 0.0, 1.0, 2)])
        assert [(r["gamma0"], r["alpha"]) for r in rows] == [
            (1.0, 0.0), (1.0, 1.0), (2.0, 0.0), (2.0, 1.0), (3.0, 0.0), (3.0, 1.0)
        ]

    def test_degenerate_axis_equals_point(self):
        cfg = RunConfig.create("jc", coords={"gamma0": 50.0, "time": 1.0}, bounds=("ml", "ni", "xu"))
        [row] = run_sweep(cfg, [AxisSpec("gamma0", 50.0, 50.0, 1)])
        assert row == evaluate_point(cfg)

    def test_parallel_matches_serial(self):
        cfg = RunConfig.create("dephasing", coords={"s": 1.0, "eta": 0.6, "time": 3.0})
        axes = [AxisSpec("s", 0.5, 4.0, 8), AxisSpec("eta", 0.2, 1.0, 3)]
        header = columns(cfg)
        assert render_csv(run_sweep(cfg, axes, jobs=2), header) == render_csv(run_sweep(cfg, axes), header)

    def test_error_rows_keep_going(self):
        # the Xu bound is undefined when q(t) stays exactly 1 (no evolution)
        cfg = RunConfig.create("jc", coords={"gamma0": 1.0, "time": 1.0}, bounds=("xu",))
        rows = run_sweep(cfg, [AxisSpec("gamma0", 1e-300, 1.0, 2)])
        assert "gamma0=1e-300" in rows[0]["error"] and "xu" not in rows[0]
        assert rows[1]["error"] == "" and rows[1]["xu"] == pytest.approx(1.0)
        text = render_csv(rows, columns(cfg))
        assert text.count("\n") == 3

    @pytest.mark.parametrize(
        "axes",
        [
            [],
            [AxisSpec("s", 1.0, 2.0, 2)],
            [AxisSpec(n, 0.1, 1.0, 2) for n in ("gamma0", "alpha", "time", "theta")],
            [AxisSpec("alpha", 0.0, 1.0, 2), AxisSpec("alpha", 0.0, 1.0, 2)],
        ],
    )
    def test_invalid_axes(self, axes):
        cfg = RunConfig.create("jc", coords={"gamma0": 1.0, "time": 1.0})
        with pytest.raises(ConfigError):
            run_sweep(cfg, axes)

    def test_too_many_points(self):
        cfg = RunConfig.create("jc", coords={"gamma0": 1.0, "time": 1.0})
        with pytest.raises(ConfigError, match="points"):
            run_sweep(cfg, [AxisSpec("gamma0", 1.0, 2.0, 10**4), AxisSpec("alpha", 0.0, 1.0, 10**4)])

    def test_invalid_grid_value(self):
        cfg = RunConfig.create("jc", coords={"gamma0": 1.0, "time": 1.0})
        with pytest.raises(ConfigError):
            run_sweep(cfg, [AxisSpec("gamma0", -1.0, 1.0, 3)])


class TestFormat:
    @pytest.mark.parametrize(
        "value,text",
        [
            (1.0, "1.0"),
            (0.1 + 0.2, "0.3"),
            (1.00000000002, "1.00000000002"),
            (1.000000000000002, "1.0"),
            (True, "true"),
            (False, "false"),
            (None, ""),
            ("Markovian", "Markovian"),
            (-1, "-1"),
            (1.23456789012345e-20, "1.23456789012e-20"),
        ],
    )
    def test_values(self, value, text):
        assert format_value(value) == text

    def test_twelve_significant_digits_round_trip(self):
        for x in (math.pi, 1 / 3, 2.0**-0.5, 123456.789012345):
            assert float(format_value(x)) == float(f"{x:.12g}")


class TestFigures:
    def test_fig2(self, tmp_path):
        csv_path, json_path = reproduce_figure("fig2", tmp_path, resolution=200)
        rows = _read(csv_path)
        assert len(rows) == 200
        by_g0 = {round(float(r["gamma0"]), 9): r for r in rows}
        assert float(by_g0[1.0]["ni_closed"]) == pytest.approx(1.0, abs=1e-8)
        assert float(by_g0[20.0]["ni_closed"]) < 1.0
        assert all(r["actual_time"] == "1.0" for r in rows)
        meta = json.loads(json_path.read_text())
        assert meta["figure"] == "fig2" and meta["failed_points"] == 0
        assert meta["config"]["coords"] == {"lambda": 15.0, "alpha": HALF, "theta": 0.0, "time": 1.0}

    def test_fig4_layers(self, tmp_path):
        rows = _read(reproduce_figure("fig4", tmp_path, resolution=11)[0])
        assert len(rows) == 11 * 11 * 2
        for r in rows:
            if float(r["s"]) == 2.0:
                layer = 1.5 if float(r["beta"]) < 0.5 else 3.0
                assert float(r["ml_closed"]) == pytest.approx(layer, abs=1e-9)

    def test_fig5(self, tmp_path):
        csv_path, json_path = reproduce_figure("fig5", tmp_path, resolution=200)
        rows = _read(csv_path)
        by_g0 = {round(float(r["gamma0"]), 9): r for r in rows}
        assert float(by_g0[5.0]["blp_nonmarkovianity"]) == 0.0
        assert float(by_g0[20.0]["blp_nonmarkovianity_normalized"]) == 1.0
        assert json.loads(json_path.read_text())["normalization_max"] > 0

    def test_fig3_matches_boundary_curves(self, tmp_path):
        res = 41
        rows = _read(reproduce_figure("fig3", tmp_path, resolution=res)[0])
        s_pts = AxisSpec("s", 0.05, 6.0, res).points()
        t_pts = AxisSpec("time", 0.05, 10.0, res).points()
        ds, dt = s_pts[1] - s_pts[0], t_pts[1] - t_pts[0]

        def near_boundary(s, t):
            # does some curve t = tan(k pi / s) cross the cell around (s, t)?
            for k in range(1, 10):
                lo = math.atan(t - dt) if t > dt else 0.0
                hi = math.atan(t + dt)
                for ss in (s - ds, s + ds):
                    if ss > 0 and lo <= k * math.pi / ss <= hi:
                        return True
                if (s - ds) * lo <= k * math.pi <= (s + ds) * hi:
                    return True
            return False

        for r in rows:
            s, t = float(r["s"]), float(r["time"])
            if near_boundary(s, t):
                continue
            expected = 1 if math.sin(s * math.atan(t)) > 0 else -1
            assert int(r["rate_sign"]) == expected

    def test_fig6_markovian_zero(self, tmp_path):
        rows = _read(reproduce_figure("fig6b", tmp_path, resolution=11)[0])
        for r in rows:
            if float(r["s"]) <= 2.0:
                assert float(r["capacity_nonmarkovianity"]) == 0.0
        assert max(float(r["capacity_nonmarkovianity_normalized"]) for r in rows) == 1.0

    @pytest.mark.parametrize("name", ["fig1a", "fig1b", "fig2", "fig4"])
    def test_closed_and_generic_agree(self, tmp_path, name):
        rows = _read(reproduce_figure(name, tmp_path, resolution=9, method="both")[0])
        for r in rows:
            assert r["error"] == ""
            t = float(r["time"])
            for b in ("ml", "ni"):
                if f"{b}_absdiff" not in r:
                    continue
                closed, generic = float(r[f"{b}_closed"]), float(r[f"{b}_generic"])
                if closed == generic == 0.0:
                    continue
                assert float(r[f"{b}_absdiff"]) < 1e-7
                assert 0.0 <= closed <= t * (1 + 1e-8) and 0.0 <= generic <= t * (1 + 1e-8)

    def test_unknown_figure(self, tmp_path):
        with pytest.raises(ConfigError):
            reproduce_figure("fig9", tmp_path)

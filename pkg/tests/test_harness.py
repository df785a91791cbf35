"""Experiment orchestration: config records and text format, shipped
presets, experiment runners, and their CSV artifacts."""

import dataclasses
import math
import os

import numpy as np
import pytest

import rkhs_adapt as ra
from rkhs_adapt import (
    ExperimentConfig,
    load_config,
    normalize_config_text,
    parse_config,
    parse_n_list,
    preset_names,
    preset_text,
    read_pe_report,
    read_table,
    run_condnum,
    run_pe,
    run_simulate,
    run_sweep,
    serialize_config,
    span_interpolant,
    uniform_centers,
)


def _smoke(tmp_path, **overrides):
    cfg = load_config("smoke")
    overrides.setdefault("out_dir", str(tmp_path / "out"))
    return dataclasses.replace(cfg, **overrides)


class TestConfigDefaults:
    def test_published_constants(self):
        cfg = ExperimentConfig()
        assert cfg.kernel_kind == "gaussian"
        assert cfg.sigma == 50.0
        assert cfg.n == 50
        assert (cfg.m1, cfg.m2) == (0.5, 0.5)
        assert (cfg.k1, cfg.k2, cfg.c2) == (50000.0, 30000.0, 200.0)
        assert (cfg.kappa, cfg.nu, cfg.radius) == (2.0, 0.04, 4.0)
        assert cfg.mode == "euclidean"
        assert cfg.gain == 0.001
        assert cfg.dt == 1e-4
        assert cfg.t_final == 100.0

    def test_derived_geometry(self):
        cfg = ExperimentConfig()
        assert cfg.lap_length == pytest.approx(2.0 * math.pi * 4.0)
        # one lap per 25 s of driving, ten kernel cells per lap
        assert cfg.resolved_path_speed == pytest.approx(cfg.lap_length / 25.0)
        assert cfg.resolved_bspline_unit == pytest.approx(cfg.lap_length / 10.0)

    def test_explicit_values_override_derived(self):
        cfg = dataclasses.replace(ExperimentConfig(), path_speed=3.0,
                                  bspline_unit=2.5)
        assert cfg.resolved_path_speed == 3.0
        assert cfg.resolved_bspline_unit == 2.5

    def test_defaults_validate(self):
        ExperimentConfig().validate()


class TestConfigValidation:
    def _check(self, field, **overrides):
        cfg = dataclasses.replace(ExperimentConfig(), **overrides)
        with pytest.raises(ra.ConfigError) as err:
            cfg.validate()
        assert err.value.field == field

    def test_bad_kernel_kind(self):
        self._check("kernel.kind", kernel_kind="cubic")

    def test_bad_sigma(self):
        self._check("kernel.sigma", sigma=-1.0)

    def test_bad_smoothness(self):
        self._check("kernel.bspline_smoothness", bspline_smoothness=0.5)

    def test_unit_must_tile_the_lap(self):
        self._check("kernel.bspline_unit", bspline_unit=7.3)

    def test_unit_needs_four_cells(self):
        self._check("kernel.bspline_unit",
                    radius=4.0, bspline_unit=2.0 * math.pi * 4.0 / 3.0)

    def test_explicit_centers_need_matching_n(self):
        self._check("centers.n", centers_policy="explicit",
                    centers_values=(1.0, 2.0), n=3)

    def test_bad_plant_parameter(self):
        self._check("plant.m1", m1=0.0)

    def test_csv_road_needs_path(self):
        self._check("road.csv_path", road_kind="csv", csv_path="")

    def test_bad_mode(self):
        self._check("learning.mode", mode="newton")

    def test_bad_gain(self):
        self._check("learning.gain", gain=0.0)

    def test_q_diag_length(self):
        self._check("learning.q_diag", q_diag=(1.0, 1.0))

    def test_timestep_guard_against_plant_spectrum(self):
        self._check("simulation.dt", dt=2e-4)

    def test_horizon_whole_steps(self):
        self._check("simulation.t_final", t_final=100.00005)

    def test_init_at_truth_needs_span_truth(self):
        self._check("simulation.init_at_truth", init_at_truth=True,
                    project_to_span=False)

    def test_negative_path_speed(self):
        self._check("simulation.path_speed", path_speed=-1.0)


class TestConfigTextFormat:
    def test_serialize_parse_round_trip(self):
        cfg = ExperimentConfig()
        text = serialize_config(cfg)
        assert parse_config(text) == cfg

    def test_serialize_is_fixed_point(self):
        text = preset_text("paper-sine")
        normalized = normalize_config_text(text)
        assert normalize_config_text(normalized) == normalized

    def test_comments_and_blank_lines_ignored(self):
        text = serialize_config(ExperimentConfig())
        noisy = "# leading comment\n\n" + text.replace(
            "[kernel]", "# about the kernel\n[kernel]\n")
        assert parse_config(noisy) == ExperimentConfig()

    def test_unknown_section_rejected(self):
        with pytest.raises(ra.ConfigError):
            parse_config("[chassis]\nm1 = 1.0\n")

    def test_unknown_key_rejected(self):
        with pytest.raises(ra.ConfigError):
            parse_config("[kernel]\nbandwidth = 1.0\n")

    def test_bad_value_names_the_field(self):
        text = "[kernel]\nsigma = wide\n"
        with pytest.raises(ra.ConfigError) as err:
            parse_config(text)
        assert err.value.field == "kernel.sigma"

    def test_duplicate_key_rejected(self):
        with pytest.raises(ra.ConfigError):
            parse_config("[kernel]\nsigma = 1.0\nsigma = 2.0\n")

    def test_key_outside_section_rejected(self):
        with pytest.raises(ra.ConfigError):
            parse_config("sigma = 1.0\n")


class TestPresets:
    def test_shipped_presets(self):
        names = preset_names()
        for name in ("paper-sine", "paper-splines", "smoke"):
            assert name in names

    def test_presets_parse_and_validate(self):
        for name in preset_names():
            cfg = parse_config(preset_text(name))
            cfg.validate()

    def test_load_config_by_name_and_path(self, tmp_path):
        by_name = load_config("smoke")
        path = tmp_path / "copy.cfg"
        path.write_text(preset_text("smoke"), encoding="utf-8")
        assert load_config(str(path)) == by_name

    def test_unknown_name_rejected(self):
        with pytest.raises(ra.ConfigError):
            load_config("no-such-preset")

    def test_paper_sine_geometry(self):
        cfg = load_config("paper-sine")
        # radius chosen so the lap closes exactly at 25 in binary64 and
        # the sine completes one cycle per lap
        assert cfg.lap_length == 25.0
        assert cfg.nu * cfg.lap_length == pytest.approx(1.0, abs=1e-12)
        assert cfg.project_to_span


class TestNListParsing:
    def test_plain_list(self):
        assert parse_n_list("10,20,30") == [10, 20, 30]

    def test_ellipsis_expansion(self):
        assert parse_n_list("10,20,...,100") == list(range(10, 101, 10))

    def test_ellipsis_must_land_exactly(self):
        with pytest.raises(ra.ConfigError):
            parse_n_list("10,20,...,95")

    def test_must_be_ascending(self):
        with pytest.raises(ra.ConfigError):
            parse_n_list("20,10")

    def test_rejects_nonpositive(self):
        with pytest.raises(ra.ConfigError):
            parse_n_list("0,10")

    def test_single_value(self):
        assert parse_n_list("7") == [7]


class TestUniformCenters:
    def test_midpoint_lattice(self):
        got = uniform_centers(4, 8.0)
        assert got == pytest.approx([1.0, 3.0, 5.0, 7.0])

    def test_stays_inside_domain(self):
        for n in (1, 2, 17, 100):
            c = uniform_centers(n, 25.0)
            assert c[0] > 0.0 and c[-1] < 25.0
            assert np.diff(c) == pytest.approx(np.full(n - 1, 25.0 / n))


class TestSpanInterpolant:
    def test_matches_road_at_centers(self):
        cfg = load_config("paper-sine")
        dom = ra.Domain1D(cfg.lap_length)
        kernel = ra.GaussianKernel(cfg.sigma, dom)
        centers = uniform_centers(cfg.n, cfg.lap_length)
        road = ra.RoadProfile.sine(cfg.kappa, cfg.nu, dom)
        f = span_interpolant(kernel, centers, road)
        for c in centers[::7]:
            assert f(float(c)) == pytest.approx(road(float(c)), abs=1e-9)

    def test_closed_form_matches_generic_solve(self):
        # well-conditioned case where the plain Grammian solve is reliable:
        # the circulant shortcut and the dense path must agree
        cfg = load_config("paper-sine")
        dom = ra.Domain1D(cfg.lap_length)
        kernel = ra.GaussianKernel(cfg.sigma, dom)
        centers = uniform_centers(20, cfg.lap_length)
        road = ra.RoadProfile.sine(cfg.kappa, cfg.nu, dom)
        fast = span_interpolant(kernel, centers, road)
        K = ra.grammian(kernel, centers)
        rhs = np.array([road(float(c)) for c in centers])
        direct = np.linalg.solve(K, rhs)
        assert fast.coefficients == pytest.approx(direct, rel=1e-8, abs=1e-10)

    def test_generic_path_for_csv_road(self, tmp_path):
        path = tmp_path / "road.csv"
        ss = np.linspace(0.0, 25.0, 40, endpoint=False)
        zz = np.cos(2.0 * np.pi * ss / 25.0)
        path.write_text("s,z\n" + "".join(f"{s},{z}\n" for s, z in zip(ss, zz)),
                        encoding="utf-8")
        road = ra.ingest_profile_csv(str(path), domain_length=25.0)
        dom = ra.Domain1D(25.0)
        kernel = ra.GaussianKernel(0.5, dom)
        centers = uniform_centers(10, 25.0)
        f = span_interpolant(kernel, centers, road)
        for c in centers:
            assert f(float(c)) == pytest.approx(road(float(c)), abs=1e-8)


class TestRunSimulate:
    def test_artifact_files_and_schema(self, tmp_path):
        cfg = _smoke(tmp_path)
        art = run_simulate(cfg)
        assert os.path.exists(art.trajectory_csv)
        assert os.path.exists(art.estimate_csv)
        header, cols = read_table(art.trajectory_csv)
        assert header == ["t", "x1", "x2", "x3", "x4",
                          "xh1", "xh2", "xh3", "xh4", "V", "xerr"]
        steps = round(cfg.t_final / cfg.dt)
        assert cols["t"].size == steps // cfg.sample_every + 1
        eheader, ecols = read_table(art.estimate_csv)
        assert eheader == ["s", "f_true", "f_hat"]
        assert ecols["s"].size == 2048

    def test_trajectory_matches_run(self, tmp_path):
        cfg = _smoke(tmp_path)
        art = run_simulate(cfg)
        _, cols = read_table(art.trajectory_csv)
        assert cols["t"] == pytest.approx(art.run.t)
        assert cols["x1"] == pytest.approx(art.run.x[:, 0])
        assert cols["xerr"] == pytest.approx(art.run.x_err_norm)

    def test_v_column_exact_for_span_truth(self, tmp_path):
        cfg = _smoke(tmp_path)  # smoke projects the road onto the span
        art = run_simulate(cfg)
        _, cols = read_table(art.trajectory_csv)
        assert np.all(np.isfinite(cols["V"]))
        assert art.run.v_exact

    def test_v_column_empty_for_raw_road(self, tmp_path):
        cfg = _smoke(tmp_path, project_to_span=False)
        art = run_simulate(cfg)
        _, cols = read_table(art.trajectory_csv)
        assert np.all(np.isnan(cols["V"]))
        assert not art.run.v_exact

    def test_truth_injection_keeps_v_at_zero(self, tmp_path):
        cfg = _smoke(tmp_path, init_at_truth=True)
        art = run_simulate(cfg)
        assert np.all(art.run.V == 0.0)
        _, cols = read_table(art.trajectory_csv)
        assert np.all(cols["V"] == 0.0)

    def test_reruns_are_byte_identical(self, tmp_path):
        art1 = run_simulate(_smoke(tmp_path, out_dir=str(tmp_path / "a")))
        art2 = run_simulate(_smoke(tmp_path, out_dir=str(tmp_path / "b")))
        with open(art1.trajectory_csv, "rb") as f1, \
                open(art2.trajectory_csv, "rb") as f2:
            assert f1.read() == f2.read()
        with open(art1.estimate_csv, "rb") as f1, \
                open(art2.estimate_csv, "rb") as f2:
            assert f1.read() == f2.read()

    def test_svg_emitted_on_request(self, tmp_path):
        art = run_simulate(_smoke(tmp_path), svg=True)
        assert art.estimate_svg is not None
        assert os.path.exists(art.estimate_svg)
        with open(art.estimate_svg, "r", encoding="utf-8") as fh:
            assert "<svg" in fh.read(2000)

    def test_no_svg_by_default(self, tmp_path):
        art = run_simulate(_smoke(tmp_path))
        assert art.estimate_svg is None

    def test_rejects_invalid_config(self, tmp_path):
        with pytest.raises(ra.ConfigError):
            run_simulate(_smoke(tmp_path, gain=-1.0))


class TestRunSweep:
    def test_sweep_schema_and_records(self, tmp_path):
        cfg = _smoke(tmp_path)
        result = run_sweep(cfg, [4, 8])
        assert [r.n for r in result.result.records] == [4, 8]
        header, cols = read_table(result.sweep_csv)
        assert header == ["n", "l2", "sup", "cond"]
        assert cols["n"] == pytest.approx([4.0, 8.0])
        assert np.all(cols["l2"] > 0.0)
        assert np.all(cols["cond"] >= 1.0)

    def test_single_n_gives_one_row(self, tmp_path):
        result = run_sweep(_smoke(tmp_path), [6])
        assert len(result.result.records) == 1

    def test_frozen_learning_leaves_truth_norm(self, tmp_path):
        # very large gain freezes the parameter estimate at zero, so the
        # reported error is the quadrature norm of the road itself
        cfg = _smoke(tmp_path, gain=1e12, project_to_span=False,
                     t_final=0.15, sample_every=10)
        result = run_sweep(cfg, [4, 8])
        lap = cfg.lap_length
        expected = cfg.kappa * math.sqrt(lap / 2.0)
        for rec in result.result.records:
            assert rec.l2 == pytest.approx(expected, rel=1e-6)

    def test_slope_fit_on_synthetic_records(self):
        from rkhs_adapt.harness import SweepRecord, SweepResult
        records = [SweepRecord(n=n, l2=10.0 * n ** -1.5, sup=1.0, cond=1.0,
                               final_state_error=0.0)
                   for n in (10, 20, 40, 80)]
        slope, _ = SweepResult(records=records).slope_fit()
        assert slope == pytest.approx(-1.5, abs=1e-12)

    def test_n_list_must_ascend(self, tmp_path):
        with pytest.raises(ra.ConfigError):
            run_sweep(_smoke(tmp_path), [8, 4])


class TestRunCondnum:
    def test_single_center_is_perfectly_conditioned(self, tmp_path):
        art = run_condnum(_smoke(tmp_path), [1])
        header, cols = read_table(art.condnum_csv)
        assert header == ["n", "cond_bspline1", "cond_bspline2", "cond_gauss"]
        assert cols["cond_bspline1"][0] == 1.0
        assert cols["cond_bspline2"][0] == 1.0
        assert cols["cond_gauss"][0] == 1.0

    def test_small_table_is_finite_and_sane(self, tmp_path):
        # ordering claims live in the acceptance suite at full size; here
        # only basic sanity on a small table
        art = run_condnum(_smoke(tmp_path), [2, 4, 8])
        _, cols = read_table(art.condnum_csv)
        assert cols["n"] == pytest.approx([2.0, 4.0, 8.0])
        for col in ("cond_bspline1", "cond_bspline2", "cond_gauss"):
            assert np.all(np.isfinite(cols[col]))
            assert np.all(cols[col] >= 1.0)

    def test_exact_wide_kernel_conditioning_matches_float64(self, tmp_path):
        # for sizes where binary64 SVD is still trustworthy the arbitrary-
        # precision circulant route must agree
        cfg = _smoke(tmp_path, sigma=1.0)
        art = run_condnum(cfg, [4])
        _, cols = read_table(art.condnum_csv)
        dom = ra.Domain1D(cfg.lap_length)
        K = ra.grammian(ra.GaussianKernel(1.0, dom),
                        uniform_centers(4, cfg.lap_length))
        assert cols["cond_gauss"][0] == pytest.approx(
            ra.condition_number_2(K), rel=1e-9)


class TestRunPe:
    def test_full_lap_excites(self, tmp_path):
        cfg = _smoke(tmp_path, n=3, t_final=2.7, path_speed=10.0,
                     sample_every=10)
        lap_time = cfg.lap_length / 10.0
        report = run_pe(cfg, 0.0, lap_time)
        assert report.gamma > 0.0
        assert report.exceeds
        assert report.matrix.shape == (3, 3)

    def test_parked_path_is_not_exciting(self, tmp_path):
        cfg = _smoke(tmp_path, n=3, path_speed=0.0, t_final=0.75,
                     sample_every=10)
        report = run_pe(cfg, 0.0, 0.7)
        assert abs(report.gamma) <= 1e-10
        assert not report.exceeds

    def test_gamma_scales_with_lap_count(self, tmp_path):
        cfg = _smoke(tmp_path, n=3, t_final=7.56, path_speed=10.0,
                     sample_every=10)
        lap_time = cfg.lap_length / 10.0
        one = run_pe(cfg, 0.0, lap_time)
        three = run_pe(cfg, 0.0, 3.0 * lap_time)
        assert three.gamma == pytest.approx(3.0 * one.gamma, rel=0.01)

    def test_report_round_trips_through_csv(self, tmp_path):
        cfg = _smoke(tmp_path, n=3, t_final=2.7, path_speed=10.0,
                     sample_every=10)
        report = run_pe(cfg, 0.0, 2.5, threshold=0.05)
        gamma, threshold, exceeds, matrix = read_pe_report(report.pe_csv)
        assert gamma == report.gamma
        assert threshold == 0.05
        assert exceeds == report.exceeds
        assert matrix == pytest.approx(report.matrix)

    def test_window_validated(self, tmp_path):
        cfg = _smoke(tmp_path)
        with pytest.raises(ra.WindowOutOfRange):
            run_pe(cfg, 0.5, 10.0)


class TestThreadCap:
    def test_env_cap_accepted(self, tmp_path, monkeypatch):
        monkeypatch.setenv("RKHS_ADAPT_THREADS", "1")
        result = run_sweep(_smoke(tmp_path), [4, 6])
        assert len(result.result.records) == 2

    def test_env_cap_garbage_rejected(self, tmp_path, monkeypatch):
        monkeypatch.setenv("RKHS_ADAPT_THREADS", "many")
        with pytest.raises(ra.ConfigError):
            run_sweep(_smoke(tmp_path), [4, 6])

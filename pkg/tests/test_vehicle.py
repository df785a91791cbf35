"""Quarter-car plant construction and road-profile inputs (analytic sine
and sampled CSV profiles)."""

import math

import numpy as np
import pytest

import rkhs_adapt as ra
from rkhs_adapt import QuarterCarParams, RoadProfile, build_plant, ingest_profile_csv
from rkhs_adapt.vehicle import road_eval


class TestQuarterCarPlant:
    def test_default_matrices_frozen(self):
        plant = build_plant()
        expected_A = np.array([
            [-400.0, -160000.0, 400.0, 60000.0],
            [1.0, 0.0, 0.0, 0.0],
            [-400.0, 60000.0, -400.0, -60000.0],
            [0.0, 0.0, 1.0, 0.0],
        ])
        assert np.array_equal(plant.A, expected_A)
        assert np.array_equal(plant.B, np.array([100000.0, 0.0, 0.0, 0.0]))

    def test_entries_track_parameters(self):
        p = QuarterCarParams(m1=1.0, m2=0.5, k1=1000.0, k2=300.0, c2=10.0)
        plant = build_plant(p)
        assert plant.A[0] == pytest.approx(
            [-p.c2 / p.m1, -(p.k1 + p.k2) / p.m1, p.c2 / p.m1, p.k2 / p.m1])
        assert plant.A[2] == pytest.approx(
            [-p.c2 / p.m2, p.k2 / p.m2, -p.c2 / p.m2, -p.k2 / p.m2])
        assert np.array_equal(plant.A[1], [1.0, 0.0, 0.0, 0.0])
        assert np.array_equal(plant.A[3], [0.0, 0.0, 1.0, 0.0])
        assert plant.B == pytest.approx([p.k1 / p.m1, 0.0, 0.0, 0.0])

    def test_default_spectrum_frozen(self):
        # eigenvalues from an independent eigensolve of the frozen matrix
        eigs = np.sort_complex(np.linalg.eigvals(build_plant().A))
        expected = np.sort_complex(np.array([
            -303.02436747 + 562.06501841j, -303.02436747 - 562.06501841j,
            -96.97563253 + 72.87630386j, -96.97563253 - 72.87630386j,
        ]))
        assert eigs == pytest.approx(expected, rel=1e-8)

    def test_is_hurwitz(self):
        assert ra.hurwitz_margin(build_plant().A) < 0.0

    def test_unit_static_gain_to_both_positions(self):
        # a constant road height h is an equilibrium with both masses at
        # height h and zero velocities: -A^{-1} B = (0, 1, 0, 1)
        plant = build_plant()
        dc = -np.linalg.solve(plant.A, plant.B)
        assert dc == pytest.approx([0.0, 1.0, 0.0, 1.0], abs=1e-12)
        asym = build_plant(QuarterCarParams(m1=2.0, m2=0.3, k1=800.0,
                                            k2=450.0, c2=7.0))
        dc = -np.linalg.solve(asym.A, asym.B)
        assert dc == pytest.approx([0.0, 1.0, 0.0, 1.0], abs=1e-10)

    def test_rejects_nonpositive_parameters(self):
        with pytest.raises(ValueError):
            build_plant(QuarterCarParams(m1=0.0))
        with pytest.raises(ValueError):
            build_plant(QuarterCarParams(k2=-1.0))


class TestSineRoad:
    def test_values_match_closed_form(self):
        dom = ra.Domain1D(25.0)
        road = RoadProfile.sine(2.0, 0.04, dom)
        assert road.kind == "sine"
        for s in (0.0, 3.1, 6.25, 20.0):
            assert road(s) == pytest.approx(2.0 * math.sin(2.0 * math.pi * 0.04 * s),
                                            abs=1e-14)

    def test_periodic_when_frequency_is_integer_per_lap(self):
        dom = ra.Domain1D(25.0)
        road = RoadProfile.sine(2.0, 0.04, dom)  # one cycle per lap
        for s in np.linspace(0.0, 25.0, 11):
            assert road(s + 25.0) == pytest.approx(road(s), abs=1e-12)

    def test_vectorized_evaluation(self):
        dom = ra.Domain1D(25.0)
        road = RoadProfile.sine(1.0, 0.08, dom)
        ss = np.linspace(0.0, 25.0, 13)
        batch = road_eval(road, ss)
        assert batch == pytest.approx([road(float(s)) for s in ss])


class TestCsvProfiles:
    def _write(self, tmp_path, text, name="road.csv"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    def test_round_trip_interpolates_knots(self, tmp_path):
        path = self._write(tmp_path,
                           "s,z\n0.0,0.0\n1.0,0.5\n2.0,0.0\n3.0,-0.5\n")
        road = ingest_profile_csv(path, domain_length=4.0)
        assert road.kind == "sampled"
        assert road.domain.length == 4.0
        for s, z in [(0.0, 0.0), (1.0, 0.5), (2.0, 0.0), (3.0, -0.5)]:
            assert road(s) == pytest.approx(z, abs=1e-12)

    def test_linear_between_knots_and_periodic_wrap(self, tmp_path):
        path = self._write(tmp_path,
                           "s,z\n0.0,0.0\n1.0,0.5\n2.0,0.0\n3.0,-0.5\n")
        road = ingest_profile_csv(path, domain_length=4.0)
        assert road(0.5) == pytest.approx(0.25, abs=1e-12)
        # wrap segment from (3, -0.5) back to (0 + L, 0.0)
        assert road(3.5) == pytest.approx(-0.25, abs=1e-12)
        assert road(4.0 + 0.5) == pytest.approx(road(0.5), abs=1e-12)

    def test_custom_column_names(self, tmp_path):
        path = self._write(tmp_path,
                           "pos,height,junk\n0.0,1.0,x\n5.0,2.0,y\n")
        road = ingest_profile_csv(path, s_column="pos", z_column="height",
                                  domain_length=10.0)
        assert road(5.0) == pytest.approx(2.0)

    def test_unsorted_rows_are_sorted(self, tmp_path):
        path = self._write(tmp_path, "s,z\n2.0,0.2\n0.0,0.0\n1.0,0.1\n")
        road = ingest_profile_csv(path, domain_length=3.0)
        assert road(1.0) == pytest.approx(0.1, abs=1e-12)
        assert np.all(np.diff(road.knots_s) > 0)

    def test_duplicate_positions_warn_and_last_wins(self, tmp_path):
        path = self._write(tmp_path, "s,z\n0.0,1.0\n1.0,5.0\n1.0,7.0\n2.0,0.0\n")
        with pytest.warns(UserWarning, match="duplicate"):
            road = ingest_profile_csv(path, domain_length=3.0)
        assert road(1.0) == pytest.approx(7.0)

    def test_parse_error_carries_row_number(self, tmp_path):
        path = self._write(tmp_path, "s,z\n0.0,0.0\n1.0,oops\n")
        with pytest.raises(ra.ParseError) as err:
            ingest_profile_csv(path, domain_length=2.0)
        assert err.value.row == 3

    def test_missing_column_is_parse_error(self, tmp_path):
        path = self._write(tmp_path, "s,height\n0.0,0.0\n1.0,1.0\n")
        with pytest.raises(ra.ParseError):
            ingest_profile_csv(path, domain_length=2.0)

    def test_non_finite_rejected(self, tmp_path):
        path = self._write(tmp_path, "s,z\n0.0,0.0\n1.0,inf\n")
        with pytest.raises(ra.ParseError):
            ingest_profile_csv(path, domain_length=2.0)

    def test_too_few_points(self, tmp_path):
        path = self._write(tmp_path, "s,z\n0.0,0.0\n")
        with pytest.raises(ra.TooFewPoints):
            ingest_profile_csv(path, domain_length=2.0)

    def test_requires_domain_length(self, tmp_path):
        path = self._write(tmp_path, "s,z\n0.0,0.0\n1.0,1.0\n")
        with pytest.raises(ValueError):
            ingest_profile_csv(path)

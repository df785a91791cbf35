"""Shared test setup: headless plotting, one tiny warm-up run so the
compiled simulation loop is built (or loaded from disk cache) before any
timed assertion executes, and a terminal section echoing the acceptance
verdict lines."""

import os

import numpy as np
import pytest

os.environ.setdefault("MPLBACKEND", "Agg")

import rkhs_adapt as ra

#: one line per acceptance criterion, filled in by tests/test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session", autouse=True)
def _warm_compiled_loop():
    plant = ra.build_plant()
    law = ra.LearningLaw.for_plant(plant, 1.0)
    dom = ra.Domain1D(25.0)
    kernel = ra.GaussianKernel(1.0, dom)
    centers = ra.uniform_centers(3, 25.0)
    road = ra.RoadProfile.sine(2.0, 0.04, dom)
    ra.simulate(plant, road, law, centers, kernel,
                path_speed=1.0, t_final=0.001, dt=1e-4)
    # second flavor: expansion truth + rkhs_metric + diagonal gain
    truth = ra.RkhsExpansion(kernel, centers, np.array([1.0, -0.5, 0.25]))
    law2 = ra.LearningLaw.for_plant(plant, 1.0, mode="rkhs_metric")
    ra.simulate(plant, truth, law2, centers, kernel,
                path_speed=1.0, t_final=0.001, dt=1e-4)
    yield

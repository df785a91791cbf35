"""Quarter-car plant construction and road-profile sources.

The plant is the 2-degree-of-freedom mass-spring-damper model excited by
road elevation at the tire contact, in state order
``(x1_dot, x1, x2_dot, x2)`` — rows 2 and 4 of the system matrix are
integrator rows.  Road profiles are either a synthetic sinusoid or a
sampled elevation sequence ingested from CSV and interpolated linearly
with periodic wrap-around.
"""

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _sim
from .dynamics import LtiPlant
from .errors import ParseError, TooFewPoints
from .kernels import Domain1D

__all__ = [
    "QuarterCarParams",
    "RoadProfile",
    "build_plant",
    "ingest_profile_csv",
    "road_eval",
]


@dataclass(frozen=True)
class QuarterCarParams:
    """Masses (kg), stiffnesses (N/m), and damping (N s/m) of the model."""

    m1: float = 0.5
    m2: float = 0.5
    k1: float = 50000.0
    k2: float = 30000.0
    c2: float = 200.0

    def __post_init__(self):
        for name in ("m1", "m2", "k1", "k2", "c2"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0.0):
                raise ValueError(f"{name} must be > 0, got {val}")


def build_plant(params=QuarterCarParams()):
    """Assemble the quarter-car state matrices.

    State order ``(x1_dot, x1, x2_dot, x2)``::

        A = [[-c2/m1, -(k1+k2)/m1,  c2/m1,  k2/m1],
             [  1,         0,         0,      0  ],
             [-c2/m2,   k2/m2,     -c2/m2, -k2/m2],
             [  0,         0,         1,      0  ]]
        B = (k1/m1, 0, 0, 0)^T

    The row-3 sign pattern is kept exactly as written here; construction
    verifies the matrix is Hurwitz and raises ``NotHurwitz`` otherwise,
    which guards against transcription mistakes in the entries.
    """
    p = params
    A = np.array(
        [
            [-p.c2 / p.m1, -(p.k1 + p.k2) / p.m1, p.c2 / p.m1, p.k2 / p.m1],
            [1.0, 0.0, 0.0, 0.0],
            [-p.c2 / p.m2, p.k2 / p.m2, -p.c2 / p.m2, -p.k2 / p.m2],
            [0.0, 0.0, 1.0, 0.0],
        ]
    )
    B = np.array([p.k1 / p.m1, 0.0, 0.0, 0.0])
    return LtiPlant(A, B)


@dataclass(frozen=True)
class RoadProfile:
    """Road elevation as a function of arc length on a 1-D domain.

    ``kind`` is ``"sine"`` (fields ``amplitude``, ``frequency``) or
    ``"sampled"`` (fields ``knots_s``, ``knots_z``; knots strictly
    increasing within one period).
    """

    kind: str
    domain: Domain1D
    amplitude: float = 0.0
    frequency: float = 0.0
    knots_s: np.ndarray | None = None
    knots_z: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "sine":
            if not (
                math.isfinite(self.amplitude) and math.isfinite(self.frequency)
            ):
                raise ValueError("sine profile needs finite amplitude/frequency")
        elif self.kind == "sampled":
            ks = np.asarray(self.knots_s, dtype=float)
            kz = np.asarray(self.knots_z, dtype=float)
            if ks.ndim != 1 or ks.shape != kz.shape or ks.size < 2:
                raise ValueError("sampled profile needs matching 1-D knots")
            if not (np.all(np.isfinite(ks)) and np.all(np.isfinite(kz))):
                raise ValueError("knots must be finite")
            if np.any(ks < 0.0) or np.any(ks >= self.domain.length):
                raise ValueError("knot positions must lie in [0, length)")
            if np.any(np.diff(ks) <= 0.0):
                raise ValueError("knot positions must be strictly increasing")
            ks = ks.copy()
            kz = kz.copy()
            ks.setflags(write=False)
            kz.setflags(write=False)
            object.__setattr__(self, "knots_s", ks)
            object.__setattr__(self, "knots_z", kz)
        else:
            raise ValueError(f"unknown profile kind {self.kind!r}")

    @classmethod
    def sine(cls, amplitude, frequency, domain):
        return cls(kind="sine", domain=domain, amplitude=amplitude,
                   frequency=frequency)

    @classmethod
    def sampled(cls, knots_s, knots_z, domain):
        return cls(kind="sampled", domain=domain, knots_s=knots_s,
                   knots_z=knots_z)

    def true_kind_code(self):
        return _sim.TRUE_SINE if self.kind == "sine" else _sim.TRUE_SAMPLED

    def __call__(self, s):
        return road_eval(self, s)


_EMPTY = np.empty(0)


def road_eval(profile, s):
    """Road elevation at arc length ``s`` (wrapped into the domain).

    Sine profiles evaluate ``amplitude * sin(2 pi frequency s)`` on the
    wrapped coordinate; sampled profiles interpolate linearly between
    knots with periodic wrap-around.  Both satisfy
    ``road_eval(s) == road_eval(s + length)`` up to wrap rounding.
    """
    ks = profile.knots_s if profile.knots_s is not None else _EMPTY
    kz = profile.knots_z if profile.knots_z is not None else _EMPTY
    s_arr = np.asarray(s, dtype=float)
    scalar = s_arr.ndim == 0
    flat = np.atleast_1d(s_arr)
    out = np.empty(flat.shape)
    for i, si in enumerate(flat):
        out[i] = _sim.road_value(
            profile.true_kind_code(),
            profile.amplitude,
            profile.frequency,
            profile.domain.length,
            ks,
            kz,
            float(si),
        )
    return float(out[0]) if scalar else out


def ingest_profile_csv(path, s_column="s", z_column="z", domain_length=None):
    """Read a sampled road profile from a CSV file.

    The file must be UTF-8 with a header row naming (at least) the two
    requested columns.  Positions are wrapped into ``[0, length)``, then
    sorted; duplicate positions are collapsed keeping the last occurrence
    in file order, with a warning.  Returns a ``sampled``
    :class:`RoadProfile` on a periodic domain of the given length.

    Raises
    ------
    ParseError
        Missing columns or a non-numeric cell (carries the 1-based row).
    TooFewPoints
        Fewer than two distinct knots survive.
    """
    if domain_length is None or not (
        math.isfinite(domain_length) and domain_length > 0.0
    ):
        raise ValueError("domain_length must be a positive number")
    domain = Domain1D(length=float(domain_length), periodic=True)

    rows = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise ParseError("empty file: header row required", row=1)
        missing = {s_column, z_column} - set(reader.fieldnames)
        if missing:
            raise ParseError(
                f"header lacks column(s) {sorted(missing)}", row=1
            )
        for lineno, record in enumerate(reader, start=2):
            try:
                s_val = float(record[s_column])
                z_val = float(record[z_column])
            except (TypeError, ValueError, KeyError):
                raise ParseError(
                    f"non-numeric or missing value in row {lineno}",
                    row=lineno,
                ) from None
            if not (math.isfinite(s_val) and math.isfinite(z_val)):
                raise ParseError(
                    f"non-finite value in row {lineno}", row=lineno
                )
            rows.append((s_val % domain.length, z_val, lineno))

    if len(rows) < 2:
        raise TooFewPoints(f"need at least 2 rows, got {len(rows)}")

    # Stable sort by wrapped position; collapse duplicates, last in file
    # order winning.
    rows.sort(key=lambda r: r[0])
    tol = 1e-12 * domain.length
    dedup = []
    dropped = 0
    for s_val, z_val, lineno in rows:
        if dedup and abs(s_val - dedup[-1][0]) <= tol:
            if lineno > dedup[-1][2]:
                dedup[-1] = (dedup[-1][0], z_val, lineno)
            dropped += 1
        else:
            dedup.append((s_val, z_val, lineno))
    if dropped:
        warnings.warn(
            f"{dropped} duplicate position(s) collapsed (last occurrence "
            "wins)",
            UserWarning,
            stacklevel=2,
        )
    if len(dedup) < 2:
        raise TooFewPoints("fewer than 2 distinct knots after deduplication")

    ks = np.array([r[0] for r in dedup])
    kz = np.array([r[1] for r in dedup])
    return RoadProfile.sampled(ks, kz, domain)

"""Experiment orchestration: validated configuration records, flat text
config files with shipped presets, and the four experiment runners
(single simulation, basis-count sweep, Grammian conditioning table,
excitation report) with CSV and optional SVG emission.

Config files are flat ``key = value`` text grouped into ``[section]``
headers; ``#`` starts a full-line comment.  :func:`serialize_config`
emits a canonical form (fixed section/key order, shortest round-trip
float formatting), so ``serialize(parse(text))`` is a fixed point and
emitted files diff cleanly.

All CSV output uses ``repr`` float formatting (shortest string that
round-trips in binary64) and ``\\n`` newlines, which makes repeated runs
of the same configuration byte-identical.
"""

from __future__ import annotations

import dataclasses
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dynamics, kernels, linops
from .errors import ConfigError
from .kernels import Domain1D, GaussianKernel, MultiscaleKernel, cross_grammian, grammian
from .rkhs import RkhsExpansion
from .vehicle import QuarterCarParams, RoadProfile, build_plant, ingest_profile_csv, road_eval

__all__ = [
    "ExperimentConfig",
    "SweepRecord",
    "SweepResult",
    "SimulationArtifacts",
    "SweepArtifacts",
    "CondnumArtifacts",
    "PeReport",
    "parse_config",
    "serialize_config",
    "normalize_config_text",
    "load_config",
    "preset_names",
    "preset_text",
    "parse_n_list",
    "uniform_centers",
    "span_interpolant",
    "run_simulate",
    "run_sweep",
    "run_condnum",
    "run_pe",
    "read_table",
    "read_pe_report",
]

KERNEL_KINDS = ("gaussian", "bspline1", "bspline2")
LEARNING_MODES = ("euclidean", "rkhs_metric")
ROAD_KINDS = ("sine", "csv")
CENTER_POLICIES = ("uniform", "explicit")

#: Points in the fixed uniform grid used for all function-error metrics.
ESTIMATE_GRID = 2048

#: Beyond this many decimal digits of spread the exact Grammian condition
#: number is reported as ``inf`` rather than computed (the arbitrary-
#: precision eigenvalue sums would take minutes and the value is far past
#: anything representable in binary64 anyway).
_CONDNUM_DIGIT_CAP = 5000.0


# --------------------------------------------------------------------------
# configuration record


@dataclass(frozen=True)
class ExperimentConfig:
    """Every constant of one experiment in a single validated record.

    Defaults are the published quarter-car constants (masses, spring and
    damper rates, gain 0.001, path radius 4, road frequency 0.04 and
    amplitude 2, kernel width 50).  The shipped presets override the
    geometry and gains with values tuned for the bundled experiments;
    see the preset files for commentary.
    """

    # [kernel]
    kernel_kind: str = "gaussian"
    sigma: float = 50.0
    bspline_unit: float | None = None  # None -> lap_length / 10
    bspline_max_level: int = 4
    bspline_smoothness: float | None = None  # None -> per-order default
    # [centers]
    centers_policy: str = "uniform"
    n: int = 50
    centers_values: tuple[float, ...] = ()
    # [plant]
    m1: float = 0.5
    m2: float = 0.5
    k1: float = 50000.0
    k2: float = 30000.0
    c2: float = 200.0
    # [road]
    road_kind: str = "sine"
    kappa: float = 2.0
    nu: float = 0.04
    radius: float = 4.0
    csv_path: str = ""
    s_column: str = "s"
    z_column: str = "z"
    # [learning]
    mode: str = "euclidean"
    gain: float = 0.001
    ridge: float = 0.0
    q_diag: tuple[float, ...] = (1.0, 1.0, 1.0, 1.0)
    # [simulation]
    dt: float = 1e-4
    t_final: float = 100.0
    path_speed: float | None = None  # None -> one lap per 25 s
    sample_every: int = 100
    s0: float = 0.0
    project_to_span: bool = False
    init_at_truth: bool = False
    seed: int = 0
    # [output]
    out_dir: str = "runs"

    @property
    def lap_length(self) -> float:
        """Arc length of one lap of the circular path."""
        return 2.0 * math.pi * self.radius

    @property
    def resolved_path_speed(self) -> float:
        """Configured path speed, defaulting to one lap per 25 seconds."""
        if self.path_speed is None:
            return self.lap_length / 25.0
        return self.path_speed

    @property
    def resolved_bspline_unit(self) -> float:
        """Configured knot unit, defaulting to one tenth of the lap."""
        if self.bspline_unit is None:
            return self.lap_length / 10.0
        return self.bspline_unit

    def validate(self) -> "ExperimentConfig":
        cfg = self
        _require(cfg.kernel_kind in KERNEL_KINDS, "kernel.kind",
                 f"must be one of {KERNEL_KINDS}, got {cfg.kernel_kind!r}")
        _require(_finite_pos(cfg.sigma), "kernel.sigma", "must be finite and > 0")
        _require(cfg.bspline_max_level >= 0, "kernel.bspline_max_level", "must be >= 0")
        if cfg.bspline_smoothness is not None:
            _require(cfg.bspline_smoothness > 0.5, "kernel.bspline_smoothness",
                     "must exceed 0.5 (half the domain dimension)")
        unit = cfg.resolved_bspline_unit
        _require(_finite_pos(unit), "kernel.bspline_unit", "must be finite and > 0")
        knots = cfg.lap_length / unit
        _require(abs(knots - round(knots)) <= 1e-9 * max(1.0, knots) and round(knots) >= 4,
                 "kernel.bspline_unit",
                 "lap_length / bspline_unit must be an integer >= 4 so the "
                 "periodized multiscale kernels close around the lap")

        _require(cfg.centers_policy in CENTER_POLICIES, "centers.policy",
                 f"must be one of {CENTER_POLICIES}, got {cfg.centers_policy!r}")
        _require(cfg.n >= 1, "centers.n", "must be >= 1")
        if cfg.centers_policy == "explicit":
            _require(len(cfg.centers_values) >= 1, "centers.values",
                     "explicit policy needs at least one center")
            _require(len(cfg.centers_values) == cfg.n, "centers.n",
                     "must equal the number of explicit centers")
            _require(all(math.isfinite(v) for v in cfg.centers_values),
                     "centers.values", "all centers must be finite")

        for name in ("m1", "m2", "k1", "k2", "c2"):
            _require(_finite_pos(getattr(cfg, name)), f"plant.{name}",
                     "must be finite and > 0")

        _require(cfg.road_kind in ROAD_KINDS, "road.kind",
                 f"must be one of {ROAD_KINDS}, got {cfg.road_kind!r}")
        _require(math.isfinite(cfg.kappa), "road.kappa", "must be finite")
        _require(math.isfinite(cfg.nu), "road.nu", "must be finite")
        _require(_finite_pos(cfg.radius), "road.radius", "must be finite and > 0")
        if cfg.road_kind == "csv":
            _require(bool(cfg.csv_path), "road.csv_path",
                     "required when road.kind = csv")

        _require(cfg.mode in LEARNING_MODES, "learning.mode",
                 f"must be one of {LEARNING_MODES}, got {cfg.mode!r}")
        _require(_finite_pos(cfg.gain), "learning.gain", "must be finite and > 0")
        _require(math.isfinite(cfg.ridge) and cfg.ridge >= 0.0, "learning.ridge",
                 "must be finite and >= 0")
        _require(len(cfg.q_diag) == 4, "learning.q_diag",
                 "must list exactly 4 diagonal entries")
        _require(all(_finite_pos(q) for q in cfg.q_diag), "learning.q_diag",
                 "entries must be finite and > 0")

        _require(_finite_pos(cfg.dt), "simulation.dt", "must be finite and > 0")
        _require(_finite_pos(cfg.t_final), "simulation.t_final",
                 "must be finite and > 0")
        plant = build_plant(QuarterCarParams(m1=cfg.m1, m2=cfg.m2, k1=cfg.k1,
                                             k2=cfg.k2, c2=cfg.c2))
        rho = float(np.max(np.abs(np.linalg.eigvals(plant.A))))
        _require(cfg.dt * rho < dynamics.STABILITY_GUARD, "simulation.dt",
                 f"dt * spectral_radius(A) = {cfg.dt * rho:.3g} must stay "
                 f"below {dynamics.STABILITY_GUARD} for stable integration")
        n_steps = cfg.t_final / cfg.dt
        _require(abs(n_steps - round(n_steps)) <= 1e-9 * max(n_steps, 1.0),
                 "simulation.t_final",
                 "must be a whole number of dt steps")
        speed = cfg.resolved_path_speed
        _require(math.isfinite(speed) and speed >= 0.0, "simulation.path_speed",
                 "must be finite and >= 0")
        _require(cfg.sample_every >= 1, "simulation.sample_every", "must be >= 1")
        _require(math.isfinite(cfg.s0), "simulation.s0", "must be finite")
        if cfg.init_at_truth:
            _require(cfg.project_to_span, "simulation.init_at_truth",
                     "requires project_to_span = true (the coefficient truth "
                     "only exists when the true function lies in the span)")
        _require(cfg.seed >= 0, "simulation.seed", "must be >= 0")
        _require(bool(cfg.out_dir), "output.dir", "must be nonempty")
        return cfg


def _require(ok: bool, field: str, message: str) -> None:
    if not ok:
        raise ConfigError(field, message)


def _finite_pos(x: float) -> bool:
    return math.isfinite(x) and x > 0.0


# --------------------------------------------------------------------------
# config text format


def _parse_float(text: str) -> float:
    return float(text)


def _parse_opt_float(text: str) -> float | None:
    return None if text == "" else float(text)


def _parse_int(text: str) -> int:
    return int(text)


def _parse_bool(text: str) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise ValueError(f"expected true or false, got {text!r}")


def _parse_str(text: str) -> str:
    return text


def _parse_float_tuple(text: str) -> tuple[float, ...]:
    if not text:
        return ()
    return tuple(float(tok) for tok in text.split(","))


def _fmt_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    return str(value)


#: (section, key) -> (field name, parser).  Also fixes canonical order.
_SCHEMA: dict[str, tuple[tuple[str, str, object], ...]] = {
    "kernel": (
        ("kind", "kernel_kind", _parse_str),
        ("sigma", "sigma", _parse_float),
        ("bspline_unit", "bspline_unit", _parse_opt_float),
        ("bspline_max_level", "bspline_max_level", _parse_int),
        ("bspline_smoothness", "bspline_smoothness", _parse_opt_float),
    ),
    "centers": (
        ("policy", "centers_policy", _parse_str),
        ("n", "n", _parse_int),
        ("values", "centers_values", _parse_float_tuple),
    ),
    "plant": (
        ("m1", "m1", _parse_float),
        ("m2", "m2", _parse_float),
        ("k1", "k1", _parse_float),
        ("k2", "k2", _parse_float),
        ("c2", "c2", _parse_float),
    ),
    "road": (
        ("kind", "road_kind", _parse_str),
        ("kappa", "kappa", _parse_float),
        ("nu", "nu", _parse_float),
        ("radius", "radius", _parse_float),
        ("csv_path", "csv_path", _parse_str),
        ("s_column", "s_column", _parse_str),
        ("z_column", "z_column", _parse_str),
    ),
    "learning": (
        ("mode", "mode", _parse_str),
        ("gain", "gain", _parse_float),
        ("ridge", "ridge", _parse_float),
        ("q_diag", "q_diag", _parse_float_tuple),
    ),
    "simulation": (
        ("dt", "dt", _parse_float),
        ("t_final", "t_final", _parse_float),
        ("path_speed", "path_speed", _parse_opt_float),
        ("sample_every", "sample_every", _parse_int),
        ("s0", "s0", _parse_float),
        ("project_to_span", "project_to_span", _parse_bool),
        ("init_at_truth", "init_at_truth", _parse_bool),
        ("seed", "seed", _parse_int),
    ),
    "output": (
        ("dir", "out_dir", _parse_str),
    ),
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse flat ``key = value`` config text into an
    :class:`ExperimentConfig` (unset keys keep their defaults).

    Raises :class:`ConfigError` naming the offending line or key; the
    result is *not* yet validated — call :meth:`ExperimentConfig.validate`
    (the runners do so themselves).
    """
    values: dict[str, object] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(f"line {lineno}", f"unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key = value, got {raw!r}")
        if section is None:
            raise ConfigError(f"line {lineno}", "key outside any [section]")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        entry = next((e for e in _SCHEMA[section] if e[0] == key), None)
        if entry is None:
            raise ConfigError(f"{section}.{key}", "unknown key")
        field_name, parser = entry[1], entry[2]
        if field_name in values:
            raise ConfigError(f"{section}.{key}", f"duplicate key at line {lineno}")
        try:
            values[field_name] = parser(val)
        except ValueError as exc:
            raise ConfigError(f"{section}.{key}", str(exc)) from None
    return ExperimentConfig(**values)


def serialize_config(config: ExperimentConfig) -> str:
    """Render a config in canonical form (fixed order, every key present)."""
    lines: list[str] = []
    for section, entries in _SCHEMA.items():
        lines.append(f"[{section}]")
        for key, field_name, _parser in entries:
            value = getattr(config, field_name)
            lines.append(f"{key} = {_fmt_value(value)}".rstrip())
        lines.append("")
    return "\n".join(lines)


def normalize_config_text(text: str) -> str:
    """Canonical form of config text: comments dropped, defaults filled,
    sections and keys in fixed order."""
    return serialize_config(parse_config(text))


def preset_names() -> tuple[str, ...]:
    """Names of the shipped preset configs."""
    from importlib import resources

    folder = resources.files("rkhs_adapt") / "presets"
    names = sorted(p.name[:-4] for p in folder.iterdir() if p.name.endswith(".cfg"))
    return tuple(names)


def preset_text(name: str) -> str:
    """Raw text of a shipped preset config."""
    from importlib import resources

    path = resources.files("rkhs_adapt") / "presets" / f"{name}.cfg"
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError("config", f"no preset named {name!r}; "
                          f"available: {', '.join(preset_names())}") from None


def load_config(path_or_name: str) -> ExperimentConfig:
    """Load a config from a file path, or by shipped preset name."""
    path = Path(path_or_name)
    if path.exists():
        return parse_config(path.read_text(encoding="utf-8"))
    if path_or_name == str(path.name) and not path_or_name.endswith(".cfg"):
        return parse_config(preset_text(path_or_name))
    raise ConfigError("config", f"no such config file: {path_or_name}")


def parse_n_list(text: str) -> list[int]:
    """Parse a basis-count list like ``10,20,...,100`` (the ellipsis
    continues the arithmetic progression of the first two entries).
    Entries must be positive and strictly ascending."""
    tokens = [tok.strip() for tok in text.split(",") if tok.strip()]
    if not tokens:
        raise ConfigError("n-list", "empty list")
    values: list[int] = []
    for i, tok in enumerate(tokens):
        if tok == "...":
            if len(values) < 2:
                raise ConfigError("n-list", "need two leading values before '...'")
            if i != len(tokens) - 2:
                raise ConfigError("n-list", "'...' must sit before the final value")
            step = values[-1] - values[-2]
            if step <= 0:
                raise ConfigError("n-list", "'...' needs an increasing progression")
            try:
                last = int(tokens[-1])
            except ValueError:
                raise ConfigError("n-list", f"bad integer {tokens[-1]!r}") from None
            if last <= values[-1] or (last - values[-1]) % step != 0:
                raise ConfigError("n-list",
                                  f"'...' cannot reach {last} in steps of {step}")
            values.extend(range(values[-1] + step, last + 1, step))
            break
        try:
            values.append(int(tok))
        except ValueError:
            raise ConfigError("n-list", f"bad integer {tok!r}") from None
    if values[0] < 1:
        raise ConfigError("n-list", "entries must be >= 1")
    for prev, cur in zip(values, values[1:]):
        if cur <= prev:
            raise ConfigError("n-list", "entries must be strictly ascending")
    return values


# --------------------------------------------------------------------------
# builders


def uniform_centers(n: int, length: float) -> np.ndarray:
    """``n`` cell midpoints of the uniform partition of ``[0, length)``.

    Midpoints (rather than left edges) keep every center set geometrically
    similar across ``n``, so Grammian conditioning grows monotonically with
    basis count for dyadic multiscale kernels as well.
    """
    return (np.arange(n, dtype=float) + 0.5) * (length / n)


def build_domain(config: ExperimentConfig) -> Domain1D:
    return Domain1D(config.lap_length, periodic=True)


def build_kernel(config: ExperimentConfig, kind: str | None = None,
                 domain: Domain1D | None = None):
    """Construct the configured kernel (``kind`` overrides the config)."""
    kind = kind or config.kernel_kind
    domain = domain or build_domain(config)
    if kind == "gaussian":
        return GaussianKernel(config.sigma, domain)
    if kind in ("bspline1", "bspline2"):
        order = 1 if kind == "bspline1" else 2
        return MultiscaleKernel(order, domain,
                                smoothness=config.bspline_smoothness,
                                max_level=config.bspline_max_level,
                                unit=config.resolved_bspline_unit)
    raise ConfigError("kernel.kind", f"unknown kernel kind {kind!r}")


def build_centers(config: ExperimentConfig) -> np.ndarray:
    if config.centers_policy == "explicit":
        return np.asarray(config.centers_values, dtype=float)
    return uniform_centers(config.n, config.lap_length)


def build_road(config: ExperimentConfig, domain: Domain1D | None = None) -> RoadProfile:
    domain = domain or build_domain(config)
    if config.road_kind == "sine":
        return RoadProfile.sine(config.kappa, config.nu, domain)
    return ingest_profile_csv(config.csv_path, s_column=config.s_column,
                              z_column=config.z_column,
                              domain_length=domain.length)


def build_quarter_car(config: ExperimentConfig):
    params = QuarterCarParams(m1=config.m1, m2=config.m2, k1=config.k1,
                              k2=config.k2, c2=config.c2)
    return build_plant(params)


def build_law(config: ExperimentConfig, plant) -> dynamics.LearningLaw:
    Q = np.diag(np.asarray(config.q_diag, dtype=float))
    return dynamics.LearningLaw.for_plant(plant, gain=config.gain,
                                          mode=config.mode, Q=Q,
                                          ridge=config.ridge)


def _is_uniform_midpoints(centers: np.ndarray, length: float) -> bool:
    n = centers.size
    return bool(np.array_equal(centers, uniform_centers(n, length)))


def span_interpolant(kernel, centers: np.ndarray, road: RoadProfile) -> RkhsExpansion:
    """Collocation interpolant of the road through the kernel sections at
    the centers: coefficients solve ``K a = road(centers)``.

    For a harmonic road on uniform midpoint centers with a
    translation-invariant kernel the Grammian is circulant and the road
    samples are one of its Fourier eigenvectors, so the solve collapses to
    a single eigenvalue — exact at any conditioning, which matters because
    wide Gaussian Grammians are numerically singular long before the
    interpolation problem itself degenerates.
    """
    centers = np.asarray(centers, dtype=float)
    n = centers.size
    length = kernel.domain.length
    if (road.kind == "sine" and isinstance(kernel, GaussianKernel)
            and kernel.domain.periodic and _is_uniform_midpoints(centers, length)):
        mode = road.frequency * length
        m = round(mode)
        if m != 0 and abs(mode - m) <= 1e-9 * max(1.0, abs(mode)) and 2 * abs(m) < n:
            row = np.array([kernels.kernel_eval(kernel, centers[0], c)
                            for c in centers])
            lam = float(row @ np.cos(2.0 * np.pi * m * np.arange(n) / n))
            alpha = (road.amplitude / lam) * np.sin(
                2.0 * np.pi * road.frequency * centers)
            return RkhsExpansion(kernel, centers, alpha)
    K = grammian(kernel, centers)
    z = np.array([road_eval(road, s) for s in centers])
    alpha = linops.solve_spd(K, z)
    return RkhsExpansion(kernel, centers, alpha)


# --------------------------------------------------------------------------
# CSV emission and ingestion


def _fmt_cell(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_csv(path: Path, header: str, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt_cell(x) for x in row) + "\n")


def read_table(path) -> tuple[list[str], dict[str, np.ndarray]]:
    """Read back a numeric CSV written by the runners: returns the header
    names and one float column array per name."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        data = [[] for _ in header]
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if len(cells) != len(header):
                from .errors import ParseError

                raise ParseError(f"row has {len(cells)} cells, "
                                 f"expected {len(header)}", row=lineno)
            for i, cell in enumerate(cells):
                data[i].append(float(cell))
    columns = {name: np.asarray(col, dtype=float)
               for name, col in zip(header, data)}
    return header, columns


# --------------------------------------------------------------------------
# SVG emission (matplotlib, lazily imported; flag-gated by the callers)


def _save_svg(fig, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})


def _new_axes():
    import matplotlib

    matplotlib.rcParams["svg.hashsalt"] = "rkhs-adapt"
    from matplotlib.figure import Figure

    fig = Figure(figsize=(7.0, 4.6), dpi=100)
    return fig, fig.add_subplot(111)


def _plot_estimate(path: Path, grid, f_true, f_hat) -> None:
    fig, ax = _new_axes()
    ax.plot(grid, f_true, color="0.35", lw=1.6, label="road")
    ax.plot(grid, f_hat, color="tab:blue", lw=1.1, label="estimate")
    ax.set_xlabel("arc length s [m]")
    ax.set_ylabel("elevation [m]")
    ax.legend(loc="upper right")
    ax.set_title("final function estimate")
    _save_svg(fig, path)


def _plot_sweep(path: Path, ns, l2s, slope, intercept) -> None:
    fig, ax = _new_axes()
    ns = np.asarray(ns, dtype=float)
    l2s = np.asarray(l2s, dtype=float)
    mask = l2s > 0.0
    ax.plot(np.log(ns[mask]), np.log(l2s[mask]), "o", color="tab:blue",
            label="L2 error")
    if math.isfinite(slope):
        xs = np.log(ns[mask])
        ax.plot(xs, slope * xs + intercept, "-", color="0.35",
                label=f"fit slope {slope:.3f}")
    ax.set_xlabel("ln n")
    ax.set_ylabel("ln L2 error")
    ax.legend(loc="upper right")
    ax.set_title("function-estimate error vs basis count")
    _save_svg(fig, path)


def _plot_condnum(path: Path, ns, columns: dict[str, list[float]]) -> None:
    fig, ax = _new_axes()
    styles = {"cond_bspline1": ("tab:green", "s"),
              "cond_bspline2": ("tab:orange", "^"),
              "cond_gauss": ("tab:blue", "o")}
    ns = np.asarray(ns, dtype=float)
    for name, vals in columns.items():
        vals = np.asarray(vals, dtype=float)
        mask = np.isfinite(vals)
        color, marker = styles.get(name, ("0.35", "x"))
        ax.semilogy(ns[mask], vals[mask], marker=marker, color=color,
                    label=name)
    ax.set_xlabel("basis count n")
    ax.set_ylabel("Grammian condition number")
    ax.legend(loc="upper left")
    ax.set_title("Grammian conditioning vs basis count")
    _save_svg(fig, path)


# --------------------------------------------------------------------------
# runners


@dataclass(frozen=True)
class SimulationArtifacts:
    run: dynamics.EstimatorRun
    trajectory_csv: Path
    estimate_csv: Path
    estimate_svg: Path | None


@dataclass(frozen=True)
class SweepRecord:
    n: int
    l2: float
    sup: float
    cond: float
    final_state_error: float


@dataclass(frozen=True)
class SweepResult:
    records: tuple[SweepRecord, ...]

    def __post_init__(self):
        ns = [r.n for r in self.records]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ConfigError("n-list", "basis counts must be strictly increasing")

    @property
    def ns(self) -> np.ndarray:
        return np.array([r.n for r in self.records], dtype=float)

    @property
    def l2s(self) -> np.ndarray:
        return np.array([r.l2 for r in self.records], dtype=float)

    def slope_fit(self) -> tuple[float, float]:
        """Least-squares slope and intercept of ln(l2) against ln(n)."""
        mask = self.l2s > 0.0
        if mask.sum() < 2:
            return math.nan, math.nan
        coeffs = np.polyfit(np.log(self.ns[mask]), np.log(self.l2s[mask]), 1)
        return float(coeffs[0]), float(coeffs[1])


@dataclass(frozen=True)
class SweepArtifacts:
    result: SweepResult
    sweep_csv: Path
    sweep_svg: Path | None


@dataclass(frozen=True)
class CondnumArtifacts:
    ns: tuple[int, ...]
    cond_bspline1: tuple[float, ...]
    cond_bspline2: tuple[float, ...]
    cond_gauss: tuple[float, ...]
    condnum_csv: Path
    condnum_svg: Path | None


@dataclass(frozen=True)
class PeReport:
    gamma: float
    threshold: float
    exceeds: bool
    matrix: np.ndarray
    pe_csv: Path


def _thread_cap(n_jobs: int) -> int:
    env = os.environ.get("RKHS_ADAPT_THREADS", "")
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise ConfigError("RKHS_ADAPT_THREADS",
                              f"must be a positive integer, got {env!r}") from None
        if cap < 1:
            raise ConfigError("RKHS_ADAPT_THREADS", "must be >= 1")
    else:
        cap = os.cpu_count() or 1
    return max(1, min(n_jobs, cap))


def _estimate_grid(length: float) -> np.ndarray:
    return np.arange(ESTIMATE_GRID, dtype=float) * (length / ESTIMATE_GRID)


def _simulate_once(config: ExperimentConfig):
    """Build every component from the config and integrate one run."""
    domain = build_domain(config)
    kernel = build_kernel(config, domain=domain)
    centers = build_centers(config)
    road = build_road(config, domain)
    plant = build_quarter_car(config)
    law = build_law(config, plant)
    true_f = (span_interpolant(kernel, centers, road)
              if config.project_to_span else road)
    alpha_hat0 = None
    if config.init_at_truth:
        alpha_hat0 = np.asarray(true_f.coefficients, dtype=float).copy()
    run = dynamics.simulate(
        plant, true_f, law, centers, kernel,
        path_speed=config.resolved_path_speed,
        t_final=config.t_final, dt=config.dt,
        sample_every=config.sample_every, s0=config.s0,
        alpha_hat0=alpha_hat0, config_echo=dataclasses.asdict(config))
    return run, domain, kernel, centers, road


def run_simulate(config: ExperimentConfig, *, svg: bool = False) -> SimulationArtifacts:
    """Integrate one run and write ``trajectory.csv`` + ``estimate.csv``
    (and optionally ``estimate.svg``) under the configured output dir."""
    config.validate()
    run, domain, kernel, centers, road = _simulate_once(config)
    out = Path(config.out_dir)

    V = run.V if run.v_exact else np.full(run.t.size, math.nan)
    traj_rows = (
        (run.t[i],
         run.x[i, 0], run.x[i, 1], run.x[i, 2], run.x[i, 3],
         run.x_hat[i, 0], run.x_hat[i, 1], run.x_hat[i, 2], run.x_hat[i, 3],
         V[i], run.x_err_norm[i])
        for i in range(run.t.size)
    )
    trajectory_csv = out / "trajectory.csv"
    _write_csv(trajectory_csv, "t,x1,x2,x3,x4,xh1,xh2,xh3,xh4,V,xerr", traj_rows)

    grid = _estimate_grid(domain.length)
    f_true = np.array([road_eval(road, s) for s in grid])
    f_hat = cross_grammian(kernel, grid, centers) @ run.alpha_hat[-1]
    estimate_csv = out / "estimate.csv"
    _write_csv(estimate_csv, "s,f_true,f_hat", zip(grid, f_true, f_hat))

    estimate_svg = None
    if svg:
        estimate_svg = out / "estimate.svg"
        _plot_estimate(estimate_svg, grid, f_true, f_hat)
    return SimulationArtifacts(run, trajectory_csv, estimate_csv, estimate_svg)


def run_sweep(config: ExperimentConfig, n_list, *, svg: bool = False) -> SweepArtifacts:
    """Repeat the configured run over a list of basis counts and tabulate
    function-error metrics (``n,l2,sup,cond``) against the road."""
    config.validate()
    ns = [int(n) for n in n_list]
    if not ns:
        raise ConfigError("n-list", "must be nonempty")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ConfigError("n-list", "must be strictly increasing")

    def one(n: int) -> SweepRecord:
        cfg_n = dataclasses.replace(config, n=n, centers_policy="uniform",
                                    centers_values=())
        run, domain, kernel, centers, road = _simulate_once(cfg_n)
        grid = _estimate_grid(domain.length)
        f_true = np.array([road_eval(road, s) for s in grid])
        f_hat = cross_grammian(kernel, grid, centers) @ run.alpha_hat[-1]
        err = f_true - f_hat
        ds = domain.length / grid.size
        l2 = float(np.sqrt(np.sum(err * err) * ds))
        sup = float(np.max(np.abs(err)))
        cond = linops.condition_number_2(grammian(kernel, centers))
        return SweepRecord(n, l2, sup, cond, float(run.x_err_norm[-1]))

    with ThreadPoolExecutor(max_workers=_thread_cap(len(ns))) as pool:
        records = list(pool.map(one, ns))

    result = SweepResult(tuple(records))
    out = Path(config.out_dir)
    sweep_csv = out / "sweep.csv"
    _write_csv(sweep_csv, "n,l2,sup,cond",
               ((r.n, r.l2, r.sup, r.cond) for r in records))
    sweep_svg = None
    if svg:
        slope, intercept = result.slope_fit()
        sweep_svg = out / "sweep.svg"
        _plot_sweep(sweep_svg, result.ns, result.l2s, slope, intercept)
    return SweepArtifacts(result, sweep_csv, sweep_svg)


def _gaussian_circulant_cond(sigma: float, n: int, length: float) -> float:
    """Condition number of the uniform-center Gaussian Grammian, computed
    in adaptive arbitrary precision via its circulant eigenvalues.

    Binary64 eigensolvers bottom out near condition 1e16 and then report
    noise, which would break the monotone growth this table exists to
    show; the exact circulant route has no such ceiling.  The kernel is
    periodized by summing enough wrap-around images for the working
    precision.
    """
    if n == 1:
        return 1.0
    digits = (math.pi * sigma * n / length) ** 2 / (2.0 * math.log(10.0))
    if digits > _CONDNUM_DIGIT_CAP:
        return math.inf
    import mpmath

    with mpmath.workdps(int(1.2 * digits) + 40):
        dps = mpmath.mp.dps
        images = int(mpmath.sqrt((dps + 10) * 2.0 * sigma**2 * mpmath.log(10)) / length) + 2
        two_s2 = 2.0 * sigma * sigma
        spacing = mpmath.mpf(length) / n
        col = [sum(mpmath.e ** (-((j * spacing + m * length) ** 2) / two_s2)
                   for m in range(-images, images + 1)) for j in range(n)]
        eigs = [sum(col[j] * mpmath.cos(2 * mpmath.pi * j * k / n)
                    for j in range(n)) for k in range(n)]
        cond = max(eigs) / min(eigs)
        return float(cond)


def run_condnum(config: ExperimentConfig, n_list, *, svg: bool = False) -> CondnumArtifacts:
    """Tabulate Grammian condition numbers of the three kernel families
    over a list of basis counts (uniform centers per n)."""
    config.validate()
    ns = [int(n) for n in n_list]
    if not ns:
        raise ConfigError("n-list", "must be nonempty")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ConfigError("n-list", "must be strictly increasing")

    domain = build_domain(config)
    kern_b1 = build_kernel(config, kind="bspline1", domain=domain)
    kern_b2 = build_kernel(config, kind="bspline2", domain=domain)
    c_b1, c_b2, c_g = [], [], []
    for n in ns:
        centers = uniform_centers(n, domain.length)
        c_b1.append(linops.condition_number_2(grammian(kern_b1, centers)))
        c_b2.append(linops.condition_number_2(grammian(kern_b2, centers)))
        c_g.append(_gaussian_circulant_cond(config.sigma, n, domain.length))

    out = Path(config.out_dir)
    condnum_csv = out / "condnum.csv"
    _write_csv(condnum_csv, "n,cond_bspline1,cond_bspline2,cond_gauss",
               zip(ns, c_b1, c_b2, c_g))
    condnum_svg = None
    if svg:
        condnum_svg = out / "condnum.svg"
        _plot_condnum(condnum_svg, ns, {"cond_bspline1": c_b1,
                                        "cond_bspline2": c_b2,
                                        "cond_gauss": c_g})
    return CondnumArtifacts(tuple(ns), tuple(c_b1), tuple(c_b2), tuple(c_g),
                            condnum_csv, condnum_svg)


def run_pe(config: ExperimentConfig, t0: float, delta: float,
           threshold: float = 0.0) -> PeReport:
    """Integrate the configured run, compute the excitation lower bound
    over the window ``[t0, t0 + delta]`` and write the report CSV."""
    config.validate()
    if not (math.isfinite(t0) and t0 >= 0.0):
        raise ConfigError("t0", "must be finite and >= 0")
    if not _finite_pos(delta):
        raise ConfigError("delta", "must be finite and > 0")
    if not math.isfinite(threshold):
        raise ConfigError("threshold", "must be finite")

    run, domain, kernel, centers, road = _simulate_once(config)
    M = dynamics.pe_matrix(run, t0, delta, kernel, centers)
    K = grammian(kernel, centers)
    gamma = float(dynamics.pe_lower_bound(M, K))
    exceeds = bool(gamma > threshold)

    out = Path(config.out_dir)
    pe_csv = out / "pe.csv"
    out.mkdir(parents=True, exist_ok=True)
    with open(pe_csv, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"gamma,{_fmt_cell(gamma)}\n")
        fh.write(f"threshold,{_fmt_cell(float(threshold))}\n")
        fh.write(f"exceeds,{'true' if exceeds else 'false'}\n")
        for i in range(M.shape[0]):
            fh.write("m," + ",".join(_fmt_cell(v) for v in M[i]) + "\n")
    return PeReport(gamma, float(threshold), exceeds, M, pe_csv)


def read_pe_report(path) -> tuple[float, float, bool, np.ndarray]:
    """Read back a ``pe.csv``: returns (gamma, threshold, exceeds, matrix)."""
    from .errors import ParseError

    gamma = threshold = None
    exceeds = None
    rows: list[list[float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            tag, _, rest = line.partition(",")
            if tag == "gamma":
                gamma = float(rest)
            elif tag == "threshold":
                threshold = float(rest)
            elif tag == "exceeds":
                exceeds = rest == "true"
            elif tag == "m":
                rows.append([float(v) for v in rest.split(",")])
            else:
                raise ParseError(f"unknown row tag {tag!r}", row=lineno)
    if gamma is None or threshold is None or exceeds is None or not rows:
        raise ParseError("incomplete excitation report")
    return gamma, threshold, exceeds, np.asarray(rows, dtype=float)

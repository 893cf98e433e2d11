"""Experiment configuration: ``[section]`` headers with flat ``key = value`` lines.

Every key is optional; omitted signal keys take the reference settings
(B = 2 GHz, f_c = 1 GHz, T_p = 3 us, f_s = 500 MHz, chirp rate B / T_p).
Unknown sections or keys are rejected so typos do not pass silently.
"""
from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

from .chaos import CarrierMode, CarrierSpec
from .errors import ConfigError, DomainError
from .geometry import ArrayGeometry, Scene, TargetSpec, build_square_array, default_targets, paint_targets
from .io import load_scene
from .reconstruction import GPConfig, Method

__all__ = ["ExperimentConfig", "parse_config", "parse_config_string"]


@dataclass(frozen=True)
class SignalConfig:
    bandwidth_hz: float = 2e9
    center_frequency_hz: float = 1e9
    pulse_width_s: float = 3e-6
    phase_rad: float = 0.0
    mode: str = "linear_chirp"
    chirp_rate_hz_per_s: float | None = None
    chip_interval_s: float | None = None
    map_coefficient: float = 4.0

    def carrier(self) -> CarrierSpec:
        return CarrierSpec(self.center_frequency_hz, self.bandwidth_hz, self.pulse_width_s,
                           self.phase_rad, CarrierMode(self.mode))

    @property
    def chip_interval(self) -> float:
        return self.chip_interval_s if self.chip_interval_s is not None else 1.0 / self.bandwidth_hz


@dataclass(frozen=True)
class GeometryConfig:
    n_tx: int = 4
    array_side_m: float = 4.0
    standoff_m: float = 1.0
    spreading_loss: bool = False
    rho: float = 1.0

    def build(self, side=None) -> ArrayGeometry:
        return build_square_array(self.n_tx, self.array_side_m if side is None else side, self.standoff_m)


@dataclass(frozen=True)
class SceneConfig:
    rows: int = 32
    cols: int = 32
    pixel_size_m: float = 0.015
    targets: tuple | None = None  # None: default two-target layout scaled to the grid
    scene_file: str | None = None

    @property
    def target_list(self) -> list[TargetSpec]:
        return default_targets(self.rows, self.cols) if self.targets is None else list(self.targets)

    def build(self) -> Scene:
        if self.scene_file is not None:
            # a sidecar next to the scene file takes precedence over this section
            if Path(self.scene_file).with_suffix(".ini").exists():
                return load_scene(self.scene_file)
            return load_scene(self.scene_file, pixel_size=self.pixel_size_m)
        return paint_targets(Scene.empty(self.rows, self.cols, self.pixel_size_m), self.target_list)


@dataclass(frozen=True)
class SamplingConfig:
    sampling_frequency_hz: float = 500e6
    nyquist_frequency_hz: float = 4e9
    n_detections: int = 0  # 0 means rows * cols
    min_strictness: float = 1.0
    max_lag: int = 16
    max_pulses: int = 64


@dataclass(frozen=True)
class NoiseConfig:
    snr_db: tuple = (0.0, 10.0, 20.0, 30.0)
    seeds: tuple = (0, 1, 2, 3, 4)
    include_noiseless: bool = True


@dataclass(frozen=True)
class SolverConfig:
    method: str = "gradient_projection"
    regularization: float = 0.0
    max_iterations: int = 10_000
    tolerance: float = 1e-8
    condition_ceiling: float = 1e10
    fallback: bool = True

    def gp(self) -> GPConfig:
        return GPConfig(self.regularization, self.max_iterations, self.tolerance)


@dataclass(frozen=True)
class SpatialConfig:
    array_sides_m: tuple = (0.5, 1.0, 4.0)
    n_detections: int = 1500
    n_seeds: int = 10
    reference_row: int | None = None
    reference_col: int | None = None


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    seed: int = 0
    export_measurements: bool = False
    export_sequences: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    signal: SignalConfig = SignalConfig()
    geometry: GeometryConfig = GeometryConfig()
    scene: SceneConfig = SceneConfig()
    sampling: SamplingConfig = SamplingConfig()
    noise: NoiseConfig = NoiseConfig()
    solver: SolverConfig = SolverConfig()
    spatial: SpatialConfig = SpatialConfig()
    output: OutputConfig = OutputConfig()

    def n_detections(self, scene: Scene) -> int:
        return self.sampling.n_detections or scene.rows * scene.cols


_SECTIONS = {
    "signal": SignalConfig,
    "geometry": GeometryConfig,
    "scene": SceneConfig,
    "sampling": SamplingConfig,
    "noise": NoiseConfig,
    "solver": SolverConfig,
    "spatial": SpatialConfig,
    "output": OutputConfig,
}


def _float_list(text):
    return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())


def _int_list(text):
    return tuple(int(v) for v in text.replace(";", ",").split(",") if v.strip())


def _targets(text):
    """``row0:row1:col0:col1[:coef]`` entries separated by ``;``."""
    out = []
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        if len(parts) not in (4, 5):
            raise ValueError(f"bad target {item!r}")
        coef = float(parts[4]) if len(parts) == 5 else 1.0
        out.append(TargetSpec(*(int(p) for p in parts[:4]), coef))
    return tuple(out)


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_CONVERTERS = {
    ("noise", "snr_db"): _float_list,
    ("noise", "seeds"): _int_list,
    ("spatial", "array_sides_m"): _float_list,
    ("scene", "targets"): _targets,
}


def _convert(section, key, text, default_type):
    conv = _CONVERTERS.get((section, key))
    if conv is not None:
        return conv(text)
    if default_type is bool:
        return _bool(text)
    if default_type is int:
        return int(text)
    if default_type is str:
        return text.strip()
    return float(text)


def _field_types(cls):
    import typing

    hints = typing.get_type_hints(cls)
    out = {}
    for f in dataclasses.fields(cls):
        hint = hints[f.name]
        args = [a for a in typing.get_args(hint) if a is not type(None)]
        out[f.name] = args[0] if args else hint
    return out


def _validate(cfg: ExperimentConfig, base_dir: Path):
    def positive(section, key, value):
        if not (value > 0 and math.isfinite(value)):
            raise ConfigError(f"[{section}] {key} must be positive, got {value!r}", key=key)

    s = cfg.signal
    for key in ("bandwidth_hz", "center_frequency_hz", "pulse_width_s"):
        positive("signal", key, getattr(s, key))
    if s.chip_interval_s is not None:
        positive("signal", "chip_interval_s", s.chip_interval_s)
    if not 0 < s.map_coefficient <= 4:
        raise ConfigError("[signal] map_coefficient must lie in (0, 4]", key="map_coefficient")
    if s.mode not in {m.value for m in CarrierMode}:
        raise ConfigError(f"[signal] unknown mode {s.mode!r}", key="mode")
    if s.chirp_rate_hz_per_s is not None:
        expected = s.bandwidth_hz / s.pulse_width_s if s.mode == "linear_chirp" else 0.0
        # a quoted rate such as 6.67e14 is typically rounded to three digits
        if not math.isclose(s.chirp_rate_hz_per_s, expected, rel_tol=5e-3, abs_tol=1e-300):
            raise ConfigError(
                f"[signal] chirp_rate_hz_per_s={s.chirp_rate_hz_per_s:g} disagrees with "
                f"bandwidth/pulse_width={expected:g}", key="chirp_rate_hz_per_s")

    g = cfg.geometry
    for key in ("array_side_m", "standoff_m", "rho"):
        positive("geometry", key, getattr(g, key))
    if g.n_tx < 1:
        raise ConfigError("[geometry] n_tx must be >= 1", key="n_tx")

    sc = cfg.scene
    positive("scene", "pixel_size_m", sc.pixel_size_m)
    if sc.rows < 1 or sc.cols < 1:
        raise ConfigError("[scene] rows and cols must be >= 1", key="rows")
    if sc.scene_file is not None:
        p = Path(sc.scene_file)
        if not p.is_absolute():
            p = base_dir / p
        if not p.exists():
            raise ConfigError(f"[scene] scene_file {str(p)!r} does not exist", key="scene_file")
    else:
        for t in sc.target_list:
            if t.row_stop > sc.rows or t.col_stop > sc.cols:
                raise ConfigError(f"[scene] targets: {t} exceeds the {sc.rows}x{sc.cols} grid", key="targets")

    sa = cfg.sampling
    for key in ("sampling_frequency_hz", "nyquist_frequency_hz"):
        positive("sampling", key, getattr(sa, key))
    if sa.n_detections < 0:
        raise ConfigError("[sampling] n_detections must be >= 0", key="n_detections")
    if sa.min_strictness < 1:
        raise ConfigError("[sampling] min_strictness must be >= 1", key="min_strictness")
    if sa.max_lag < 1 or sa.max_pulses < 1:
        raise ConfigError("[sampling] max_lag and max_pulses must be >= 1", key="max_lag")
    if 1.0 / sa.sampling_frequency_hz < sa.min_strictness / s.bandwidth_hz * (1 - 1e-9):
        raise ConfigError(
            "[sampling] sampling_frequency_hz too high: detection spacing is below "
            "min_strictness x coherence time", key="sampling_frequency_hz")

    if not cfg.noise.seeds:
        raise ConfigError("[noise] seeds must not be empty", key="seeds")
    so = cfg.solver
    if so.method not in {m.value for m in Method}:
        raise ConfigError(f"[solver] unknown method {so.method!r}", key="method")
    if so.regularization < 0:
        raise ConfigError("[solver] regularization must be >= 0", key="regularization")
    if so.max_iterations < 1:
        raise ConfigError("[solver] max_iterations must be >= 1", key="max_iterations")
    positive("solver", "tolerance", so.tolerance)
    positive("solver", "condition_ceiling", cfg.solver.condition_ceiling)

    sp = cfg.spatial
    if not sp.array_sides_m:
        raise ConfigError("[spatial] array_sides_m must not be empty", key="array_sides_m")
    for b in sp.array_sides_m:
        positive("spatial", "array_sides_m", b)
    if sp.n_detections < 100:
        raise ConfigError("[spatial] n_detections must be >= 100", key="n_detections")
    if sp.n_seeds < 1:
        raise ConfigError("[spatial] n_seeds must be >= 1", key="n_seeds")


def _from_parser(cp: configparser.ConfigParser, base_dir: Path) -> ExperimentConfig:
    sections = {}
    for name in cp.sections():
        if name not in _SECTIONS:
            raise ConfigError(f"unknown section [{name}]", key=name)
        cls = _SECTIONS[name]
        types = _field_types(cls)
        values = {}
        for key, text in cp[name].items():
            if key not in types:
                raise ConfigError(f"unknown key {key!r} in [{name}]", key=key)
            try:
                values[key] = _convert(name, key, text, types[key])
            except (ValueError, DomainError) as exc:
                raise ConfigError(f"[{name}] {key}: {exc}", key=key) from exc
        sections[name] = cls(**values)
    cfg = ExperimentConfig(**sections)
    if cfg.scene.scene_file is not None and not Path(cfg.scene.scene_file).is_absolute():
        resolved = str(base_dir / cfg.scene.scene_file)
        cfg = dataclasses.replace(cfg, scene=dataclasses.replace(cfg.scene, scene_file=resolved))
    _validate(cfg, base_dir)
    return cfg


def _parser():
    return configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#",), strict=True
    )


def _wrap_parse_error(exc):
    lineno = getattr(exc, "lineno", None)
    if lineno is None and getattr(exc, "errors", None):
        lineno = exc.errors[0][0]
    return ConfigError(f"line {lineno}: {exc.message.splitlines()[0]}", lineno=lineno)


def parse_config_string(text: str, base_dir=".") -> ExperimentConfig:
    cp = _parser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise _wrap_parse_error(exc) from exc
    return _from_parser(cp, Path(base_dir))


def parse_config(path) -> ExperimentConfig:
    """Load and validate a config file.

    Raises:
        ConfigError: on a syntax error (``lineno`` set) or an invalid value
            (``key`` set).
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_string(text, base_dir=path.parent)

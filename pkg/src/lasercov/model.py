"""Configuration types, environment presets and the reference parameter set.

Every physical symbol used by the evaluators lives in exactly one field of
:class:`SystemConfig`; :data:`SYMBOLS` maps the conventional symbol names to
their dotted field paths. Configurations are immutable; use
:func:`dataclasses.replace` or :func:`apply_overrides` to derive variants.

The on-disk format is a flat ``key = value`` document whose dotted keys mirror
the field paths, e.g.::

    env.label = Urban
    spatial.r_max = 100
    classes.Nu.m = 3
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .errors import ConfigError

CLASSES = ("Lu", "Nu", "Lb", "Nb")
UAV_CLASSES = ("Lu", "Nu")
TBS_CLASSES = ("Lb", "Nb")
LOS_CLASSES = ("Lu", "Lb")

# LOS partner of every class: NLOS densities are the complement of these.
LOS_PARTNER = {"Lu": "Lu", "Nu": "Lu", "Lb": "Lb", "Nb": "Lb"}

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class EnvironmentParams:
    a: float
    b: float
    c: float
    label: str = "custom"


ENVIRONMENTS = {
    "SubUrban": EnvironmentParams(a=1.0, b=6.581, c=1.0, label="SubUrban"),
    "Urban": EnvironmentParams(a=1.0, b=0.151, c=1.0, label="Urban"),
    "DenseUrban": EnvironmentParams(a=1.0, b=0.101, c=1.0, label="DenseUrban"),
}


def environment_preset(label: str) -> EnvironmentParams:
    """Return the LOS-model parameters of a named environment."""
    try:
        return ENVIRONMENTS[label]
    except KeyError:
        names = ", ".join(ENVIRONMENTS)
        raise ConfigError(f"env.label: unknown environment {label!r} (expected one of {names})") from None


@dataclass(frozen=True)
class NodeClassParams:
    name: str
    rho: float  # transmit power, W
    eta: float  # excess path loss
    alpha_pl: float  # path-loss exponent
    height: float  # m
    m: int  # Nakagami order

    @property
    def is_los(self) -> bool:
        return self.name in LOS_CLASSES

    @property
    def is_uav(self) -> bool:
        return self.name in UAV_CLASSES

    @property
    def gain(self) -> float:
        return self.rho * self.eta


@dataclass(frozen=True)
class LaserLinkParams:
    delta_s: float = 1e-5
    wTchi: float = 0.004  # m^2
    D: float = 0.1  # m
    delta_theta: float = 3.4e-5  # rad
    alpha_atten: float = 1e-6  # 1/m
    p_trans: float = 2000.0  # W
    p_prop: float = 100.0  # W
    p_comm: float = 2.0  # W
    k_wave: float = 5.92e6  # 1/m
    cn2: float = 0.5e-14  # m^(-2/3)
    planck: float = 6.63e-34  # J s
    delta_f: float = 1e9  # Hz
    eta_det: float = 0.8
    B_threshold: float = 0.9

    @property
    def demand(self) -> float:
        """Power the UAV must receive to hover and communicate (W)."""
        return self.p_prop + self.p_comm

    @property
    def photon_frequency(self) -> float:
        return SPEED_OF_LIGHT * self.k_wave / (2.0 * math.pi)


@dataclass(frozen=True)
class SpatialParams:
    lambda_lbd: float = 0.52e-6  # 1/m^2
    lambda_b: float = 2e-6
    lambda_cc: float = 3e-6
    r_max: float = 100.0  # m
    region_half_width: float = 15_000.0  # m; 30 km x 30 km = 900 km^2
    mean_members: float = 5.0

    @property
    def region_area(self) -> float:
        return (2.0 * self.region_half_width) ** 2


@dataclass(frozen=True)
class NumericsParams:
    r_trunc: float = 20_000.0  # m
    quad_abs_tol: float = 1e-8
    quad_rel_tol: float = 1e-6
    fd_step: float = 1e-3  # relative to s
    root_tol: float = 1e-9  # m
    seed: int = 20240611


def _default_classes() -> dict[str, NodeClassParams]:
    return {
        "Lu": NodeClassParams("Lu", rho=1.0, eta=0.9, alpha_pl=2.0, height=100.0, m=1),
        "Nu": NodeClassParams("Nu", rho=1.0, eta=0.7, alpha_pl=3.0, height=100.0, m=3),
        "Lb": NodeClassParams("Lb", rho=30.0, eta=0.9, alpha_pl=2.0, height=25.0, m=1),
        "Nb": NodeClassParams("Nb", rho=30.0, eta=0.7, alpha_pl=3.0, height=25.0, m=3),
    }


@dataclass(frozen=True)
class SystemConfig:
    env: EnvironmentParams = field(default_factory=lambda: ENVIRONMENTS["Urban"])
    classes: Mapping[str, NodeClassParams] = field(default_factory=_default_classes)
    laser: LaserLinkParams = field(default_factory=LaserLinkParams)
    spatial: SpatialParams = field(default_factory=SpatialParams)
    noise_power: float = 1e-13  # W; 0 gives the interference-limited model
    numerics: NumericsParams = field(default_factory=NumericsParams)
    r_star: float | None = None  # m; None means solve for it from the laser link

    @property
    def uav_height(self) -> float:
        return self.classes["Lu"].height

    def base_density(self, cls: str) -> float:
        """Density of the unthinned process a class is carved from."""
        return self.spatial.lambda_cc if cls in UAV_CLASSES else self.spatial.lambda_b

    def with_env(self, label: str) -> "SystemConfig":
        return dataclasses.replace(self, env=environment_preset(label))

    def with_uav_height(self, h: float) -> "SystemConfig":
        classes = dict(self.classes)
        for name in UAV_CLASSES:
            classes[name] = dataclasses.replace(classes[name], height=float(h))
        return dataclasses.replace(self, classes=classes)

    def with_laser(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, laser=dataclasses.replace(self.laser, **changes))


def default_config(env: str = "Urban") -> SystemConfig:
    """Reference parameter set in the requested environment."""
    return SystemConfig(env=environment_preset(env))


# symbol -> dotted path; one field per symbol
SYMBOLS = {
    "a": "env.a",
    "b": "env.b",
    "c": "env.c",
    "lambda_LBD": "spatial.lambda_lbd",
    "lambda_b": "spatial.lambda_b",
    "lambda_cc": "spatial.lambda_cc",
    "r_max": "spatial.r_max",
    "rho_u": "classes.Lu.rho",
    "rho_b": "classes.Lb.rho",
    "eta_Lu": "classes.Lu.eta",
    "eta_Nu": "classes.Nu.eta",
    "eta_Lb": "classes.Lb.eta",
    "eta_Nb": "classes.Nb.eta",
    "alpha_Lu": "classes.Lu.alpha_pl",
    "alpha_Nu": "classes.Nu.alpha_pl",
    "alpha_Lb": "classes.Lb.alpha_pl",
    "alpha_Nb": "classes.Nb.alpha_pl",
    "h": "classes.Lu.height",
    "h_b": "classes.Lb.height",
    "m_Lu": "classes.Lu.m",
    "m_Nu": "classes.Nu.m",
    "m_Lb": "classes.Lb.m",
    "m_Nb": "classes.Nb.m",
    "delta_s": "laser.delta_s",
    "omega_T_chi": "laser.wTchi",
    "D": "laser.D",
    "delta_theta": "laser.delta_theta",
    "alpha": "laser.alpha_atten",
    "p_trans": "laser.p_trans",
    "p_prop": "laser.p_prop",
    "p_comm": "laser.p_comm",
    "k": "laser.k_wave",
    "C_n^2": "laser.cn2",
    "hbar": "laser.planck",
    "delta_f": "laser.delta_f",
    "eta": "laser.eta_det",
    "B": "laser.B_threshold",
    "sigma^2": "noise_power",
    "R*": "r_star",
}


# --------------------------------------------------------------------------
# validation


def config_problems(config: SystemConfig) -> list[str]:
    """Every violated invariant, as ``"path: message"`` strings."""
    out = []

    def need(ok, path, msg):
        if not ok:
            out.append(f"{path}: {msg}")

    env = config.env
    need(env.a > 0, "env.a", "must be > 0")
    need(env.b > 0, "env.b", "must be > 0")
    need(0 < env.c <= 1, "env.c", "must be in (0, 1]")

    missing = [c for c in CLASSES if c not in config.classes]
    need(not missing, "classes", f"missing classes {missing}")
    for name, p in config.classes.items():
        base = f"classes.{name}"
        need(name in CLASSES, base, "unknown class")
        need(p.name == name, f"{base}.name", f"expected {name!r}")
        need(p.rho > 0, f"{base}.rho", "must be > 0")
        need(0 < p.eta <= 1, f"{base}.eta", "must be in (0, 1]")
        need(p.alpha_pl >= 2, f"{base}.alpha_pl", "must be >= 2")
        need(p.height > 0, f"{base}.height", "must be > 0")
        need(float(p.m) == int(p.m) and p.m >= 1, f"{base}.m", "fading order must be an integer >= 1")
    if not missing:
        cl = config.classes
        for pair in (UAV_CLASSES, TBS_CLASSES):
            x, y = (cl[n] for n in pair)
            need(x.height == y.height, f"classes.{pair[1]}.height", f"must equal classes.{pair[0]}.height")
            need(x.rho == y.rho, f"classes.{pair[1]}.rho", f"must equal classes.{pair[0]}.rho")

    las = config.laser
    need(0 < las.delta_s < 1, "laser.delta_s", "must be in (0, 1)")
    for name in ("wTchi", "D", "delta_theta", "p_trans", "p_prop", "p_comm", "k_wave", "planck", "delta_f"):
        need(getattr(las, name) > 0, f"laser.{name}", "must be > 0")
    need(las.alpha_atten >= 0, "laser.alpha_atten", "must be >= 0")
    need(las.cn2 >= 0, "laser.cn2", "must be >= 0")
    need(0 < las.eta_det <= 1, "laser.eta_det", "must be in (0, 1]")
    need(0 < las.B_threshold < 1, "laser.B_threshold", "must be in (0, 1)")

    sp = config.spatial
    for name in ("lambda_lbd", "lambda_b", "lambda_cc"):
        need(getattr(sp, name) > 0, f"spatial.{name}", "density must be > 0")
    need(sp.r_max > 0, "spatial.r_max", "must be > 0")
    need(sp.region_half_width > 0, "spatial.region_half_width", "must be > 0")
    need(sp.mean_members >= 0, "spatial.mean_members", "must be >= 0")

    need(config.noise_power >= 0, "noise_power", "must be >= 0")
    num = config.numerics
    need(num.r_trunc > 0, "numerics.r_trunc", "must be > 0")
    need(num.quad_abs_tol > 0 and num.quad_rel_tol > 0, "numerics.quad_*_tol", "must be > 0")
    need(0 < num.fd_step < 0.5, "numerics.fd_step", "must be in (0, 0.5)")
    need(num.root_tol > 0, "numerics.root_tol", "must be > 0")
    need(config.r_star is None or config.r_star > 0, "r_star", "must be > 0 when set")
    return out


def validate(config: SystemConfig) -> SystemConfig:
    problems = config_problems(config)
    if problems:
        raise ConfigError(problems)
    return config


# --------------------------------------------------------------------------
# flat key = value serialization


def to_flat(config: SystemConfig) -> dict[str, object]:
    flat: dict[str, object] = {}
    for f in dataclasses.fields(config.env):
        flat[f"env.{f.name}"] = getattr(config.env, f.name)
    for name in CLASSES:
        p = config.classes[name]
        for f in dataclasses.fields(p):
            if f.name != "name":
                flat[f"classes.{name}.{f.name}"] = getattr(p, f.name)
    for section in ("laser", "spatial", "numerics"):
        obj = getattr(config, section)
        for f in dataclasses.fields(obj):
            flat[f"{section}.{f.name}"] = getattr(obj, f.name)
    flat["noise_power"] = config.noise_power
    flat["r_star"] = config.r_star
    return flat


def _parse_value(text: str):
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    if text.lower() in ("none", "null", ""):
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _coerce(path: str, value, current):
    if current is None or value is None:
        if value is None and path != "r_star":
            raise ConfigError(f"{path}: value required")
        return None if value is None else float(value)
    if isinstance(current, str):
        return str(value)
    if isinstance(value, str):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    if isinstance(current, int) and not isinstance(current, bool):
        if float(value) != int(value):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def from_flat(flat: Mapping[str, object], base: SystemConfig | None = None) -> SystemConfig:
    """Build a config from dotted keys layered over ``base`` (default: the reference set).

    Setting ``env.label`` loads that preset first; explicit ``env.a/b/c`` win.
    Unknown keys raise :class:`ConfigError`.
    """
    base = base or default_config()
    current = to_flat(base)
    unknown = sorted(k for k in flat if k not in current)
    if unknown:
        raise ConfigError([f"{k}: unknown key" for k in unknown])
    if "env.label" in flat and flat["env.label"] != base.env.label:
        preset = environment_preset(str(flat["env.label"]))
        for f in dataclasses.fields(preset):
            current[f"env.{f.name}"] = getattr(preset, f.name)
    for key, value in flat.items():
        current[key] = _coerce(key, value, current[key])

    def section(prefix, cls):
        n = len(prefix) + 1
        kw = {k[n:]: v for k, v in current.items() if k.startswith(prefix + ".")}
        return cls(**kw)

    classes = {}
    for name in CLASSES:
        kw = {k.split(".")[2]: v for k, v in current.items() if k.startswith(f"classes.{name}.")}
        classes[name] = NodeClassParams(name=name, **kw)
    return SystemConfig(
        env=section("env", EnvironmentParams),
        classes=classes,
        laser=section("laser", LaserLinkParams),
        spatial=section("spatial", SpatialParams),
        noise_power=current["noise_power"],
        numerics=section("numerics", NumericsParams),
        r_star=current["r_star"],
    )


def loads(text: str, base: SystemConfig | None = None) -> SystemConfig:
    flat = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = key.strip()
        if key in flat:
            raise ConfigError(f"{key}: duplicate key (line {lineno})")
        flat[key] = _parse_value(value)
    return from_flat(flat, base)


def dumps(config: SystemConfig) -> str:
    lines = []
    for key, value in to_flat(config).items():
        if value is None:
            text = "none"
        elif isinstance(value, str):
            text = value
        else:
            text = repr(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


def load(path: str | Path, base: SystemConfig | None = None) -> SystemConfig:
    return validate(loads(Path(path).read_text(), base))


def apply_overrides(config: SystemConfig, assignments) -> SystemConfig:
    """Apply ``["key=value", ...]`` strings (the CLI ``--set`` flag)."""
    flat = {}
    for item in assignments:
        if "=" not in item:
            raise ConfigError(f"{item!r}: expected key=value")
        key, value = item.split("=", 1)
        flat[key.strip()] = _parse_value(value)
    return from_flat(flat, config)


def get_path(config: SystemConfig, path: str):
    obj = config
    for part in path.split("."):
        obj = obj[part] if isinstance(obj, Mapping) else getattr(obj, part)
    return obj

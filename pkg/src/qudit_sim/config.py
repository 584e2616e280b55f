"""Experiment configuration: ``key = value`` documents in lab units.

Lengths are given in mm (detector sampling in um, wavelength in nm, pump
waist in um) and converted to metres by the accessors. Missing keys take
the default laboratory values; unknown keys are rejected.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields, replace
from typing import Tuple

import numpy as np

from .errors import ParseError, ValidationError
from .optics import ArmGeometry, ChannelGeometry, PumpProfile, ApertureSpec, imaging_residual

MM = 1e-3
UM = 1e-6
NM = 1e-9
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ArmConfig:
    z_L_mm: float = 500.0
    f_mm: float = 150.0
    z_I_mm: float = 800.0


@dataclass(frozen=True)
class SlitConfig:
    D: int = 4
    d_mm: float = 0.17
    a_mm: float = 0.045


@dataclass(frozen=True)
class PumpConfig:
    kind: str = "point_like"
    w0_um: float = 10.0


@dataclass(frozen=True)
class SourceConfig:
    model: str = "analytic"
    rtol: float = 2e-3


@dataclass(frozen=True)
class DetectorConfig:
    width1_mm: float = 0.1
    width2_mm: float = 0.1
    half_window_mm: float = 6.0
    step_um: float = 10.0


@dataclass(frozen=True)
class ImageScanConfig:
    start_mm: float = -0.4
    stop_mm: float = 0.4
    step_mm: float = 0.005


@dataclass(frozen=True)
class FringeConfig:
    dz1_mm: float = 200.0
    dz2_mm: float = 200.0
    fixed_x2_mm: Tuple[float, ...] = (0.0, 0.6)
    start_mm: float = -3.0
    stop_mm: float = 3.0
    step_mm: float = 0.01


@dataclass(frozen=True)
class GridConfig:
    n: int = 1024
    window_mm: float = 0.0  # half-width of the aperture-plane window; 0 picks it from the slits


@dataclass(frozen=True)
class OracleConfig:
    n: int = 64
    direct_n: int = 32


@dataclass(frozen=True)
class ExperimentConfig:
    wavelength_nm: float = 826.0
    z_A_mm: float = 200.0
    arm1: ArmConfig = field(default_factory=ArmConfig)
    arm2: ArmConfig = field(default_factory=ArmConfig)
    slits: SlitConfig = field(default_factory=SlitConfig)
    pump: PumpConfig = field(default_factory=PumpConfig)
    source: SourceConfig = field(default_factory=SourceConfig)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    scan_image: ImageScanConfig = field(default_factory=ImageScanConfig)
    fringes: FringeConfig = field(default_factory=FringeConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)

    # -- physical objects (SI units) --

    def geometry(self) -> ChannelGeometry:
        arms = tuple(ArmGeometry(a.z_L_mm * MM, a.f_mm * MM, a.z_I_mm * MM) for a in (self.arm1, self.arm2))
        return ChannelGeometry(2 * np.pi / (self.wavelength_nm * NM), self.z_A_mm * MM, arms)

    def aperture(self) -> ApertureSpec:
        s = self.slits
        return ApertureSpec.multi_slit(s.D, s.d_mm * MM, s.a_mm * MM)

    def pump_profile(self) -> PumpProfile:
        if self.pump.kind == "gaussian":
            return PumpProfile.gaussian(self.pump.w0_um * UM)
        return PumpProfile.point_like()


_ENUMS = {"pump.kind": ("point_like", "gaussian"), "source.model": ("analytic", "numeric")}


def _leaf_types():
    out = {}
    for f in fields(ExperimentConfig):
        default = getattr(ExperimentConfig(), f.name)
        if hasattr(default, "__dataclass_fields__"):
            for g in fields(default):
                out[f"{f.name}.{g.name}"] = type(getattr(default, g.name))
        else:
            out[f.name] = type(default)
    return out


KEYS = _leaf_types()


def _convert(key: str, text: str):
    typ = KEYS[key]
    text = text.strip()
    try:
        if typ is tuple:
            return tuple(float(v) for v in text.replace(",", " ").split())
        if typ is int:
            return int(text)
        if typ is float:
            return float(text)
    except ValueError:
        raise ValidationError(f"{key}: cannot read {text!r} as {typ.__name__}") from None
    if key in _ENUMS and text not in _ENUMS[key]:
        raise ValidationError(f"{key} must be one of {', '.join(_ENUMS[key])}, got {text!r}")
    return text


def with_values(cfg: ExperimentConfig, values: dict) -> ExperimentConfig:
    """Return ``cfg`` with dotted keys replaced by already-converted values."""
    top, nested = {}, {}
    for key, val in values.items():
        if "." in key:
            sec, leaf = key.split(".", 1)
            nested.setdefault(sec, {})[leaf] = val
        else:
            top[key] = val
    for sec, vals in nested.items():
        top[sec] = replace(getattr(cfg, sec), **vals)
    return replace(cfg, **top)


def parse_assignments(lines, base: ExperimentConfig = None, *, validate_config: bool = True) -> ExperimentConfig:
    """Apply ``key = value`` lines (with 1-based numbering) on top of ``base``."""
    values = {}
    for lineno, raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, val = (p.strip() for p in line.split("=", 1))
        if key not in KEYS:
            raise ParseError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ParseError(f"duplicate key {key!r}", lineno)
        if not val:
            raise ParseError(f"missing value for {key!r}", lineno)
        try:
            values[key] = _convert(key, val)
        except ValidationError as exc:
            raise ParseError(str(exc), lineno) from None
    cfg = with_values(base or ExperimentConfig(), values)
    if validate_config:
        validate(cfg)
    return cfg


def parse_config(text: str) -> ExperimentConfig:
    """Parse a configuration document; defaults fill missing keys.

    Raises
    ------
    ParseError
        Malformed line, unknown or duplicate key, unreadable value.
    ValidationError
        A physical invariant fails (imaging condition, positivity, ...).
    """
    return parse_assignments(enumerate(text.splitlines(), start=1))


def apply_overrides(cfg: ExperimentConfig, overrides) -> ExperimentConfig:
    """Apply ``key=value`` strings (command-line overrides)."""
    return parse_assignments(((None, o) for o in overrides), cfg)


def validate(cfg: ExperimentConfig) -> None:
    positive = {
        "wavelength_nm": cfg.wavelength_nm,
        "z_A_mm": cfg.z_A_mm,
        "slits.d_mm": cfg.slits.d_mm,
        "slits.a_mm": cfg.slits.a_mm,
        "pump.w0_um": cfg.pump.w0_um,
        "source.rtol": cfg.source.rtol,
        "detector.width1_mm": cfg.detector.width1_mm,
        "detector.width2_mm": cfg.detector.width2_mm,
        "detector.half_window_mm": cfg.detector.half_window_mm,
        "detector.step_um": cfg.detector.step_um,
        "scan_image.step_mm": cfg.scan_image.step_mm,
        "fringes.step_mm": cfg.fringes.step_mm,
    }
    for arm in ("arm1", "arm2"):
        for leaf in ("z_L_mm", "f_mm", "z_I_mm"):
            positive[f"{arm}.{leaf}"] = getattr(getattr(cfg, arm), leaf)
    for key, val in positive.items():
        if not val > 0:
            raise ValidationError(f"{key} must be positive, got {val}")
    for key, val in (("fringes.dz1_mm", cfg.fringes.dz1_mm), ("fringes.dz2_mm", cfg.fringes.dz2_mm), ("grid.window_mm", cfg.grid.window_mm)):
        if val < 0:
            raise ValidationError(f"{key} must be non-negative, got {val}")
    if cfg.slits.D < 1:
        raise ValidationError(f"slits.D must be >= 1, got {cfg.slits.D}")
    if cfg.slits.D > 1 and not cfg.slits.d_mm > 2 * cfg.slits.a_mm:
        raise ValidationError("slits overlap: slits.d_mm must exceed 2 * slits.a_mm")
    if cfg.grid.n < 16 or cfg.oracle.n < 2 or cfg.oracle.direct_n < 2:
        raise ValidationError("grid sizes too small (grid.n >= 16, oracle sizes >= 2)")
    if cfg.scan_image.stop_mm <= cfg.scan_image.start_mm or cfg.fringes.stop_mm <= cfg.fringes.start_mm:
        raise ValidationError("scan ranges need stop > start")
    if not cfg.fringes.fixed_x2_mm:
        raise ValidationError("fringes.fixed_x2_mm needs at least one position")
    for name, arm in (("arm1", cfg.arm1), ("arm2", cfg.arm2)):
        res = imaging_residual(cfg.z_A_mm, ArmGeometry(arm.z_L_mm, arm.f_mm, arm.z_I_mm))
        if abs(res) > 1e-12 * max(arm.z_I_mm, cfg.z_A_mm):
            raise ValidationError(
                f"{name} violates the 2f-2f imaging condition: residual {res:.6g} mm "
                f"(z_L - z_A = {arm.z_L_mm - cfg.z_A_mm:g} mm, z_I - z_L = {arm.z_I_mm - arm.z_L_mm:g} mm, "
                f"2f = {2 * arm.f_mm:g} mm)"
            )


def _format(val) -> str:
    if isinstance(val, tuple):
        return ", ".join(repr(float(v)) for v in val)
    if isinstance(val, float):
        return repr(val)
    return str(val)


def serialize(cfg: ExperimentConfig) -> str:
    """Every key in a fixed order; :func:`parse_config` reads it back exactly."""
    lines = []
    for key in KEYS:
        obj = cfg
        for part in key.split("."):
            obj = getattr(obj, part)
        lines.append(f"{key} = {_format(obj)}")
    return "\n".join(lines) + "\n"


def config_hash(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(serialize(cfg).encode()).hexdigest()[:16]

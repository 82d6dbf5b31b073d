"""Run configuration: a single INI-style file with named sections.

Sections and keys are validated strictly: an unknown section or key, a
missing required section, or an unparsable value raises ConfigError with
the offending name.  See README for the full schema.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .detection import DetectorConfig
from .errors import ConfigError
from .signal import BandNoise, Constant, EomDrive, ModulationModel, Sinusoid
from .speckle import SpeckleParams

_MODULATION_KEYS = {
    "constant": {"kind", "intensity"},
    "sinusoid": {"kind", "intensity", "depth", "frequency_hz", "phase_rad"},
    "band_noise": {"kind", "intensity", "cutoff_hz", "clip_level", "quantization_bits"},
    "eom": {"kind", "waveform", "vpp", "frequency_hz"},
}

_SECTION_KEYS = {
    "run": {"seed", "duration_s", "dt_s"},
    "modulation": None,  # depends on kind
    "speckle": {"bandwidth_rad_s", "gain"},
    "detection": {"rate_hz", "resolution_ns", "dark_rate_hz"},
    "correlator": {"bin_s", "window_s"},
    "analysis": {
        "model",
        "init_contrast",
        "init_frequency_hz",
        "init_bandwidth_rad_s",
        "init_cutoff_hz",
    },
    "output": {"directory", "format", "write_trace"},
    "sweep": {"parameter", "values"},
}

_ANALYSIS_MODELS = ("none", "speckle", "sinusoid_speckle", "noise_speckle")


@dataclass(frozen=True)
class SweepSpec:
    """One swept parameter: a section.key path and its raw values."""

    parameter: str
    values: tuple[str, ...]


@dataclass(frozen=True)
class RunConfig:
    seed: int
    duration_s: float
    dt_s: float
    modulation: ModulationModel
    speckle: SpeckleParams
    detection: DetectorConfig
    bin_s: float
    window_s: float
    analysis_model: Optional[str]
    analysis_init: dict = field(default_factory=dict)
    output_format: str = "text"
    write_trace: bool = False
    out_dir: str = "out"
    sweep: Optional[SweepSpec] = None

    @property
    def samples(self) -> int:
        return int(round(self.duration_s / self.dt_s))


class _Section:
    """Typed access to one raw section with ConfigError reporting."""

    def __init__(self, name: str, data: dict):
        self.name = name
        self.data = data

    def _fetch(self, key, default, required):
        if key not in self.data:
            if required:
                raise ConfigError(f"[{self.name}] missing required key '{key}'")
            return None, default
        return self.data[key], None

    def floatval(self, key, default=None, required=False) -> float:
        raw, dflt = self._fetch(key, default, required)
        if raw is None:
            return dflt
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"[{self.name}] {key}: not a number: {raw!r}") from None

    def intval(self, key, default=None, required=False) -> int:
        raw, dflt = self._fetch(key, default, required)
        if raw is None:
            return dflt
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"[{self.name}] {key}: not an integer: {raw!r}") from None

    def strval(self, key, default=None, required=False, choices=None) -> str:
        raw, dflt = self._fetch(key, default, required)
        value = dflt if raw is None else raw.strip()
        if choices is not None and value not in choices:
            raise ConfigError(
                f"[{self.name}] {key}: expected one of {sorted(choices)}, got {value!r}"
            )
        return value

    def boolval(self, key, default=False) -> bool:
        raw, dflt = self._fetch(key, default, False)
        if raw is None:
            return dflt
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"[{self.name}] {key}: not a boolean: {raw!r}")


def read_raw(path) -> dict:
    """Parse the INI file into {section: {key: raw string}}."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    raw = {}
    for section in parser.sections():
        if section not in _SECTION_KEYS:
            raise ConfigError(f"unknown section [{section}]")
        raw[section] = dict(parser[section])
    return raw


def _check_keys(raw: dict) -> None:
    for section, entries in raw.items():
        allowed = _SECTION_KEYS[section]
        if section == "modulation":
            kind = entries.get("kind", "").strip()
            if kind not in _MODULATION_KEYS:
                raise ConfigError(
                    f"[modulation] kind: expected one of "
                    f"{sorted(_MODULATION_KEYS)}, got {kind!r}"
                )
            allowed = _MODULATION_KEYS[kind]
        unknown = set(entries) - allowed
        if unknown:
            name = sorted(unknown)[0]
            raise ConfigError(f"[{section}] unknown key '{name}'")


def _build_modulation(sec: _Section) -> ModulationModel:
    kind = sec.strval("kind", required=True)
    try:
        if kind == "constant":
            return Constant(base_intensity=sec.floatval("intensity", 1.0))
        if kind == "sinusoid":
            return Sinusoid(
                base_intensity=sec.floatval("intensity", 1.0),
                depth=sec.floatval("depth", 1.0),
                omega=2 * np.pi * sec.floatval("frequency_hz", 50e3),
                phase=sec.floatval("phase_rad", 0.0),
            )
        if kind == "band_noise":
            intensity = sec.floatval("intensity", 1.0)
            clip_raw = sec.strval("clip_level", "none")
            if clip_raw == "none":
                clip = None
            elif clip_raw == "realistic":
                clip = 2.0 * intensity
            else:
                try:
                    clip = float(clip_raw)
                except ValueError:
                    raise ConfigError(
                        f"[modulation] clip_level: expected a number, "
                        f"'none' or 'realistic', got {clip_raw!r}"
                    ) from None
            bits_raw = sec.strval("quantization_bits", "none")
            bits = None if bits_raw == "none" else int(bits_raw)
            return BandNoise(
                mean_intensity=intensity,
                cutoff_hz=sec.floatval("cutoff_hz", 200.0),
                clip_level=clip,
                quantization_bits=bits,
            )
        if kind == "eom":
            return EomDrive(
                vpp=sec.floatval("vpp", 8.0),
                frequency_hz=sec.floatval("frequency_hz", 50e3),
                waveform=sec.strval("waveform", "sinusoid", choices={"sinusoid", "noise"}),
            )
    except ValueError as exc:
        raise ConfigError(f"[modulation] {exc}") from None
    raise ConfigError(f"[modulation] kind: unknown kind {kind!r}")


def build_config(raw: dict, require=("run", "modulation", "speckle", "detection", "correlator")) -> RunConfig:
    """Validate a raw section dict and build a RunConfig."""
    _check_keys(raw)
    for name in require:
        if name not in raw:
            raise ConfigError(f"missing required section [{name}]")

    def section(name):
        return _Section(name, raw.get(name, {}))

    run = section("run")
    seed = run.intval("seed", 0)
    duration_s = run.floatval("duration_s", 100.0)
    dt_s = run.floatval("dt_s", 1e-5)
    if duration_s <= 0 or dt_s <= 0:
        raise ConfigError("[run] duration_s and dt_s must be positive")
    if duration_s < 2 * dt_s:
        raise ConfigError("[run] duration_s must cover at least two samples")

    if "modulation" in raw:
        modulation = _build_modulation(section("modulation"))
    else:
        # no section and not required: analysis-only runs fall back to
        # an unmodulated source
        modulation = Constant(base_intensity=1.0)

    spk = section("speckle")
    try:
        speckle = SpeckleParams(
            bandwidth=spk.floatval("bandwidth_rad_s", 2 * np.pi * 10e3),
            gain=spk.floatval("gain", 1.0),
            seed=0,
        )
    except ValueError as exc:
        raise ConfigError(f"[speckle] {exc}") from None

    det = section("detection")
    try:
        detection = DetectorConfig(
            rate_hz=det.floatval("rate_hz", 50e3),
            resolution_s=det.intval("resolution_ns", 1) * 1e-9,
            dark_rate_hz=det.floatval("dark_rate_hz", 0.0),
        )
    except ValueError as exc:
        raise ConfigError(f"[detection] {exc}") from None

    corr = section("correlator")
    window_s = corr.floatval("window_s", required="correlator" in require)
    if window_s is None:
        window_s = 5e-4
    bin_s = corr.floatval("bin_s", window_s / 500.0)
    if bin_s <= 0 or window_s <= 0:
        raise ConfigError("[correlator] bin_s and window_s must be positive")

    ana = section("analysis")
    model = ana.strval("model", "none", choices=set(_ANALYSIS_MODELS))
    init = {}
    for key in ("init_contrast", "init_frequency_hz", "init_bandwidth_rad_s", "init_cutoff_hz"):
        if key in raw.get("analysis", {}):
            init[key] = ana.floatval(key)

    out = section("output")
    output_format = out.strval("format", "text", choices={"text", "binary"})
    out_dir = out.strval("directory", "out")
    write_trace = out.boolval("write_trace", False)

    sweep = None
    if "sweep" in raw:
        sw = section("sweep")
        parameter = sw.strval("parameter", required=True)
        values_raw = sw.strval("values", required=True)
        values = tuple(v.strip() for v in values_raw.split(",") if v.strip())
        if "." not in parameter or parameter.split(".", 1)[0] not in _SECTION_KEYS:
            raise ConfigError(f"[sweep] parameter: not a section.key path: {parameter!r}")
        if not values:
            raise ConfigError("[sweep] values: empty list")
        sweep = SweepSpec(parameter=parameter, values=values)

    return RunConfig(
        seed=seed,
        duration_s=duration_s,
        dt_s=dt_s,
        modulation=modulation,
        speckle=speckle,
        detection=detection,
        bin_s=bin_s,
        window_s=window_s,
        analysis_model=None if model == "none" else model,
        analysis_init=init,
        output_format=output_format,
        write_trace=write_trace,
        out_dir=out_dir,
        sweep=sweep,
    )


def load_config(path, require=("run", "modulation", "speckle", "detection", "correlator")):
    """Read and validate a config file; returns (RunConfig, raw dict)."""
    raw = read_raw(path)
    return build_config(raw, require=require), raw


def apply_override(raw: dict, parameter: str, value: str) -> dict:
    """Return a copy of the raw config with one section.key replaced."""
    section, key = parameter.split(".", 1)
    out = {name: dict(entries) for name, entries in raw.items()}
    out.setdefault(section, {})[key] = value
    return out

"""Intensity modulation models and trace synthesis.

The source under study is a laser whose intensity is modulated before it
hits the rotating ground glass: either deterministically (a sinusoid, or
an arbitrary waveform through the electro-optic modulator transfer curve)
or stochastically (band-limited Gaussian noise, realized as the intensity
of a band-limited circular complex Gaussian field so the modulation itself
has thermal counting statistics).

All traces are uniformly sampled.  Stochastic models are reproducible:
the same seed always yields the same samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from ._spectral import bandlimited_complex_field, bandlimited_real_noise
from .correlator import G2Curve
from .errors import ConfigError


@dataclass(frozen=True)
class EomTransfer:
    """Measured modulator response: drive voltage in, detector signal out.

    The response is sinusoidal in the drive voltage:
    out = offset + amplitude * sin(pi * (v - center_v) / period_v).
    Defaults are the calibration of the hardware this model reproduces.
    """

    offset: float = 2.04
    amplitude: float = 1.92
    period_v: float = 8.65
    center_v: float = 0.49

    def __post_init__(self):
        if self.period_v <= 0:
            raise ValueError("transfer period must be positive")
        if self.offset < abs(self.amplitude):
            raise ValueError("transfer range dips below zero intensity")


DEFAULT_TRANSFER = EomTransfer()


def eom_transfer(v, transfer: EomTransfer = DEFAULT_TRANSFER):
    """Map drive voltage(s) to modulated intensity in scaled detector units.

    Pure function of the input; raises ValueError on non-finite input.
    """
    arr = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("drive voltage must be finite")
    out = transfer.offset + transfer.amplitude * np.sin(
        np.pi * (arr - transfer.center_v) / transfer.period_v
    )
    return float(out) if arr.ndim == 0 else out


@dataclass(frozen=True)
class Constant:
    """Unmodulated beam of fixed intensity."""

    base_intensity: float = 1.0

    def __post_init__(self):
        if not self.base_intensity > 0:
            raise ValueError("base intensity must be positive")


@dataclass(frozen=True)
class Sinusoid:
    """I(t) = base * (1 + depth * cos(omega * t + phase)).

    `depth` is the literal intensity modulation depth in [0, 1]; `omega`
    is the angular drive frequency in rad/s.
    """

    base_intensity: float = 1.0
    depth: float = 1.0
    omega: float = 2 * np.pi * 50e3
    phase: float = 0.0

    def __post_init__(self):
        if not self.base_intensity > 0:
            raise ValueError("base intensity must be positive")
        if not 0.0 <= self.depth <= 1.0:
            raise ValueError("depth must lie in [0, 1]")
        if not self.omega > 0:
            raise ValueError("drive frequency must be positive")
        if not np.isfinite(self.phase):
            raise ValueError("phase must be finite")


@dataclass(frozen=True)
class BandNoise:
    """Thermal-statistics noise modulation band-limited to `cutoff_hz`.

    Samples are |a(t)|^2 for a circular complex Gaussian field a(t) with a
    flat spectrum of total width cutoff_hz, so the normalized intensity
    autocorrelation is 1 + sinc^2(pi * cutoff_hz * tau) and the intensity
    histogram is negative-exponential.  `clip_level` (absolute, in scaled
    units) models a generator that cannot exceed its output range;
    `quantization_bits` models its finite amplitude resolution.  Clipping
    is applied before quantization.
    """

    mean_intensity: float = 1.0
    cutoff_hz: float = 200.0
    clip_level: Optional[float] = None
    quantization_bits: Optional[int] = None

    def __post_init__(self):
        if not self.mean_intensity > 0:
            raise ValueError("mean intensity must be positive")
        if not self.cutoff_hz > 0:
            raise ValueError("noise cutoff must be positive")
        if self.clip_level is not None and not self.clip_level > 0:
            raise ValueError("clip level must be positive or None")
        if self.quantization_bits is not None and self.quantization_bits < 1:
            raise ValueError("quantization needs at least 1 bit")


@dataclass(frozen=True)
class EomDrive:
    """Voltage waveform driving the modulator, mapped through its transfer.

    `waveform` is "sinusoid" (v(t) = vpp/2 * sin(2 pi f t), bipolar around
    0 V as delivered by the signal generator) or "noise" (band-limited real
    Gaussian voltage with components up to `frequency_hz`, rms vpp/6,
    hard-clipped at +-vpp/2: the generator's output range).
    """

    vpp: float = 8.0
    frequency_hz: float = 50e3
    waveform: str = "sinusoid"
    transfer: EomTransfer = field(default=DEFAULT_TRANSFER)

    def __post_init__(self):
        if self.vpp < 0:
            raise ValueError("peak-to-peak voltage cannot be negative")
        if not self.frequency_hz > 0:
            raise ValueError("drive frequency must be positive")
        if self.waveform not in ("sinusoid", "noise"):
            raise ValueError(f"unknown drive waveform {self.waveform!r}")


ModulationModel = Union[Constant, Sinusoid, BandNoise, EomDrive]


@dataclass(frozen=True, eq=False)
class IntensityTrace:
    """Uniformly sampled nonnegative intensity.

    `mean` is the declared mean used downstream to normalize detection
    rates; synthesis sets it to the empirical mean of the samples, but it
    is an independent field so traces can be compared at a common
    normalization.  `flags` carries synthesis warnings (e.g. a noise trace
    too short for its correlation time to self-average).
    """

    t0: float
    dt: float
    samples: np.ndarray
    mean: float
    flags: tuple = ()

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("samples must be a non-empty 1-D array")
        if not self.dt > 0:
            raise ValueError("sample spacing must be positive")
        if samples.min() < 0:
            raise ValueError("intensity must be nonnegative")
        if not self.mean > 0:
            raise ValueError("declared mean must be positive")

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size * self.dt

    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.samples.size) * self.dt


def _sample_band_noise(model: BandNoise, dt, n, rng) -> tuple[np.ndarray, tuple]:
    if dt > 1.0 / (10.0 * model.cutoff_hz) * (1 + 1e-9):
        raise ConfigError(
            f"dt={dt:g} too coarse for cutoff {model.cutoff_hz:g} Hz "
            f"(need dt <= {1.0 / (10.0 * model.cutoff_hz):g})"
        )
    flags = ()
    if n * dt < 10.0 / model.cutoff_hz:
        flags = ("short-trace",)
    a = bandlimited_complex_field(n, dt, model.cutoff_hz / 2.0, rng)
    samples = np.abs(a) ** 2
    samples *= model.mean_intensity / samples.mean()
    if model.clip_level is not None:
        np.minimum(samples, model.clip_level, out=samples)
    if model.quantization_bits is not None:
        top = samples.max()
        if top > 0:
            step = top / (2**model.quantization_bits - 1)
            samples = np.rint(samples / step) * step
    return samples, flags


def _sample_eom(model: EomDrive, t0, dt, n, rng) -> np.ndarray:
    if dt > 1.0 / (10.0 * model.frequency_hz) * (1 + 1e-9):
        raise ConfigError(
            f"dt={dt:g} too coarse for drive frequency {model.frequency_hz:g} Hz"
        )
    if model.vpp == 0.0:
        v = np.zeros(n)
    elif model.waveform == "sinusoid":
        t = t0 + np.arange(n) * dt
        v = 0.5 * model.vpp * np.sin(2 * np.pi * model.frequency_hz * t)
    else:
        v = bandlimited_real_noise(n, dt, model.frequency_hz, rng) * (model.vpp / 6.0)
        np.clip(v, -0.5 * model.vpp, 0.5 * model.vpp, out=v)
    return eom_transfer(v, model.transfer)


def sample_intensity(
    model: ModulationModel, t0: float, dt: float, n: int, seed
) -> IntensityTrace:
    """Synthesize `n` intensity samples starting at `t0` with spacing `dt`.

    `seed` feeds the stochastic models (BandNoise, noise-driven EomDrive);
    deterministic models ignore it.  The declared mean of the returned
    trace is the empirical mean of its samples.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    if not dt > 0:
        raise ValueError("sample spacing must be positive")
    rng = np.random.default_rng(seed)
    flags = ()
    if isinstance(model, Constant):
        samples = np.full(n, float(model.base_intensity))
    elif isinstance(model, Sinusoid):
        # ten samples per period, or the drive aliases silently
        if model.omega > 0 and dt > 2 * np.pi / (10.0 * model.omega) * (1 + 1e-9):
            raise ConfigError(
                f"dt={dt:g} too coarse for modulation at {model.omega:g} rad/s "
                f"(need dt <= {2 * np.pi / (10.0 * model.omega):g})"
            )
        t = t0 + np.arange(n) * dt
        samples = model.base_intensity * (
            1.0 + model.depth * np.cos(model.omega * t + model.phase)
        )
    elif isinstance(model, BandNoise):
        samples, flags = _sample_band_noise(model, dt, n, rng)
    elif isinstance(model, EomDrive):
        samples = _sample_eom(model, t0, dt, n, rng)
    else:
        raise TypeError(f"unknown modulation model {type(model).__name__}")
    return IntensityTrace(
        t0=t0, dt=dt, samples=samples, mean=float(samples.mean()), flags=flags
    )


def modulation_autocorrelation(trace: IntensityTrace, max_lag: float) -> G2Curve:
    """Normalized intensity autocorrelation of a trace for lags in [0, max_lag].

    Returns the estimator <I(t) I(t+tau)>_t / <I>^2 on the trace's own
    sample grid, computed by FFT over the full overlap at each lag.  The
    declared statistical error is zero: the curve is a deterministic
    functional of the trace.
    """
    n = trace.n
    k_max = int(np.floor(max_lag / trace.dt + 1e-9))
    if k_max < 1:
        raise ValueError("max_lag shorter than one sample interval")
    if max_lag >= trace.duration / 2:
        raise ValueError("max_lag must be below half the trace duration")
    size = 1 << int(np.ceil(np.log2(n + k_max + 1)))
    spec = np.fft.rfft(trace.samples, size)
    raw = np.fft.irfft(spec * np.conj(spec), size)[: k_max + 1]
    overlap = n - np.arange(k_max + 1)
    mean = trace.samples.mean()
    gamma = raw / overlap / mean**2
    tau = np.arange(k_max + 1) * trace.dt
    return G2Curve(tau=tau, value=gamma, stderr=np.zeros_like(gamma))


def write_intensity_csv(trace: IntensityTrace, path) -> None:
    """Write a trace as CSV with header t_s,intensity."""
    t = trace.times()
    with open(path, "w", newline="") as fh:
        fh.write("t_s,intensity\n")
        for ti, xi in zip(t, trace.samples):
            fh.write(f"{float(ti)!r},{float(xi)!r}\n")

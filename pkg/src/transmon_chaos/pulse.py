"""Complex drive envelopes E(t): analytic shapes and sampled data.

Every pulse evaluates to a complex amplitude in GHz at a time in ns and
returns 0 outside its support, so a protocol is silently "off" before its
start and after its end.

Sampled pulses live in UTF-8 CSV files with columns ``t_ns, re_E_ghz,
im_E_ghz``; a header row is optional and ``#`` starts a comment line.
"""

import cmath
import math

import numpy as np

from .errors import InvalidParams, NonMonotonicTime, ParseError

__all__ = [
    "Pulse",
    "ZeroPulse",
    "FlatPulse",
    "GaussianFlattopPulse",
    "ChirpedGaussianPulse",
    "SampledPulse",
    "load_pulse",
    "save_pulse",
    "synth_test_pulse",
]


class Pulse:
    """Base class; subclasses implement ``evaluate`` on scalars or arrays."""

    t0 = 0.0
    t1 = 0.0

    def evaluate(self, t):
        raise NotImplementedError

    def __call__(self, t):
        return self.evaluate(t)

    def scaled(self, factor):
        """Pulse with the amplitude multiplied by ``factor``."""
        return _ScaledPulse(self, factor)

    def describe(self):
        """JSON-able description used for cache keys."""
        raise NotImplementedError


class ZeroPulse(Pulse):
    """No drive."""

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        return np.zeros(t.shape, dtype=complex) if t.ndim else 0j

    def describe(self):
        return {"kind": "zero"}


class FlatPulse(Pulse):
    """Constant amplitude on [0, T], zero outside."""

    def __init__(self, duration, amplitude):
        if duration <= 0:
            raise InvalidParams("duration must be positive")
        self.t1 = float(duration)
        self.amplitude = complex(amplitude)

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= 0.0) & (t <= self.t1)
        out = np.where(inside, self.amplitude, 0j)
        return out if t.ndim else complex(out)

    def describe(self):
        return {"kind": "flat", "duration": self.t1,
                "amplitude": [self.amplitude.real, self.amplitude.imag]}


class GaussianFlattopPulse(Pulse):
    """Flat plateau with Gaussian switch-on/off; exactly zero at t=0 and t=T.

    The Gaussian flanks (sigma = rise/2) are shifted and rescaled so the
    envelope hits 0 at the endpoints and exactly ``amplitude`` on the
    plateau [rise, T - rise].
    """

    def __init__(self, duration, amplitude, rise=None):
        if duration <= 0:
            raise InvalidParams("duration must be positive")
        if rise is None:
            rise = duration / 10.0
        if not 0 < rise <= duration / 2:
            raise InvalidParams("rise must lie in (0, duration/2]")
        self.t1 = float(duration)
        self.amplitude = complex(amplitude)
        self.rise = float(rise)
        self._sigma = self.rise / 2.0
        self._floor = math.exp(-0.5 * (self.rise / self._sigma) ** 2)

    def _envelope(self, t):
        up = np.exp(-0.5 * ((t - self.rise) / self._sigma) ** 2)
        down = np.exp(-0.5 * ((t - (self.t1 - self.rise)) / self._sigma) ** 2)
        raw = np.where(t < self.rise, up,
                       np.where(t > self.t1 - self.rise, down, 1.0))
        env = (raw - self._floor) / (1.0 - self._floor)
        return np.clip(env, 0.0, None)

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= 0.0) & (t <= self.t1)
        out = np.where(inside, self.amplitude * self._envelope(t), 0j)
        return out if t.ndim else complex(out)

    def describe(self):
        return {"kind": "gaussian_flattop", "duration": self.t1,
                "amplitude": [self.amplitude.real, self.amplitude.imag],
                "rise": self.rise}


class ChirpedGaussianPulse(Pulse):
    """Gaussian envelope centred on T/2 with a linear frequency sweep.

    The instantaneous frequency is ``chirp_rate * (t - T/2)`` (GHz per ns
    detuning from the carrier), so |E| is symmetric about T/2 while the
    phase winds quadratically.
    """

    def __init__(self, duration, amplitude, chirp_rate=0.0, sigma=None):
        if duration <= 0:
            raise InvalidParams("duration must be positive")
        self.t1 = float(duration)
        self.amplitude = complex(amplitude)
        self.chirp_rate = float(chirp_rate)
        self.sigma = float(sigma) if sigma is not None else duration / 6.0
        if self.sigma <= 0:
            raise InvalidParams("sigma must be positive")

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        tc = t - self.t1 / 2.0
        env = np.exp(-0.5 * (tc / self.sigma) ** 2)
        phase = np.exp(1j * math.pi * self.chirp_rate * tc ** 2)
        inside = (t >= 0.0) & (t <= self.t1)
        out = np.where(inside, self.amplitude * env * phase, 0j)
        return out if t.ndim else complex(out)

    def describe(self):
        return {"kind": "chirped_gaussian", "duration": self.t1,
                "amplitude": [self.amplitude.real, self.amplitude.imag],
                "chirp_rate": self.chirp_rate, "sigma": self.sigma}


class SampledPulse(Pulse):
    """Piecewise-linear interpolation of complex samples on [t0, t1]."""

    def __init__(self, times, values):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=complex)
        if times.ndim != 1 or times.size < 1 or times.shape != values.shape:
            raise InvalidParams("need matching 1-d time and value arrays")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise NonMonotonicTime("sample times must be strictly increasing")
        self.times = times
        self.values = values
        self.t0 = float(times[0])
        self.t1 = float(times[-1])

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        re = np.interp(t, self.times, self.values.real)
        im = np.interp(t, self.times, self.values.imag)
        inside = (t >= self.t0) & (t <= self.t1)
        out = np.where(inside, re + 1j * im, 0j)
        return out if t.ndim else complex(out)

    def describe(self):
        return {"kind": "sampled",
                "times": self.times.tolist(),
                "re": self.values.real.tolist(),
                "im": self.values.imag.tolist()}


class _ScaledPulse(Pulse):
    def __init__(self, base, factor):
        self.base = base
        self.factor = complex(factor)
        self.t0 = base.t0
        self.t1 = base.t1

    def evaluate(self, t):
        return self.factor * self.base.evaluate(t)

    def describe(self):
        return {"kind": "scaled", "factor": [self.factor.real, self.factor.imag],
                "base": self.base.describe()}


def load_pulse(path):
    """Read a sampled pulse from CSV (``t_ns, re_E_ghz, im_E_ghz``)."""
    times = []
    values = []
    header_seen = False
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 3:
                raise ParseError(f"expected 3 comma-separated fields, got {len(parts)}",
                                 line=lineno)
            try:
                t, re, im = (float(p) for p in parts)
            except ValueError:
                if not times and not header_seen:
                    header_seen = True  # single optional header row
                    continue
                raise ParseError(f"non-numeric data {parts!r}", line=lineno)
            if times and t <= times[-1]:
                raise NonMonotonicTime(
                    f"time {t!r} does not increase past {times[-1]!r}", line=lineno)
            times.append(t)
            values.append(re + 1j * im)
    if not times:
        raise ParseError(f"{path}: no samples found")
    return SampledPulse(np.array(times), np.array(values))


def save_pulse(pulse, path, n_samples=None):
    """Write a pulse as CSV. Sampled pulses round-trip bit-exactly; analytic
    pulses are sampled on a uniform grid (default 1001 points)."""
    if isinstance(pulse, SampledPulse):
        times, values = pulse.times, pulse.values
    else:
        n = 1001 if n_samples is None else int(n_samples)
        times = np.linspace(pulse.t0, pulse.t1, n)
        values = np.asarray(pulse.evaluate(times), dtype=complex)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t_ns,re_E_ghz,im_E_ghz\n")
        for t, v in zip(times, values):
            fh.write(f"{float(t)!r},{float(v.real)!r},{float(v.imag)!r}\n")


_SYNTH_KINDS = ("zero", "flat", "gaussian_flattop", "chirped_gaussian")


def synth_test_pulse(kind, duration, amplitude=0.0, **params):
    """Construct an analytic test pulse; see the shape classes for params."""
    kind = str(kind).lower()
    if kind == "zero":
        return ZeroPulse()
    if kind == "flat":
        return FlatPulse(duration, amplitude)
    if kind == "gaussian_flattop":
        return GaussianFlattopPulse(duration, amplitude, rise=params.pop("rise", None))
    if kind == "chirped_gaussian":
        return ChirpedGaussianPulse(duration, amplitude,
                                    chirp_rate=params.pop("chirp_rate", 0.0),
                                    sigma=params.pop("sigma", None))
    raise InvalidParams(f"unknown pulse kind {kind!r}; choose from {_SYNTH_KINDS}")

"""Imperfect local oscillators.

A :class:`Clock` maps true simulation time to a node's local time. The model
is constant frequency error plus random-walk frequency wander, white phase
jitter on each reading, timestamp quantization, and injected phase steps.

Phase is integrated exactly in integer arithmetic while the frequency is
constant, so a noise-free clock with drift ``d`` ppm reads
``offset0 + t + floor(t * d / 1e6)`` with no accumulated rounding.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .errors import ContractError
from .timebase import NS, S


class Timescale(str, Enum):
    PTP = "PTP"
    ARB = "ARB"


def as_fraction(value) -> Fraction:
    # repr() keeps decimal literals like 0.3 exact instead of expanding the binary float
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class ClockParams:
    """Static description of an oscillator.

    ``wander_sigma`` is ppm per sqrt(second) of random-walk frequency noise,
    ``jitter_sigma`` is RMS picoseconds of white phase noise per reading.
    """

    offset0: int = 0
    drift_ppm: Fraction | int | float = 0
    wander_sigma: float = 0.0
    jitter_sigma: float = 0.0
    granularity: int = 8 * NS
    timescale: Timescale = Timescale.PTP

    def __post_init__(self):
        if self.granularity < 1:
            raise ValueError("granularity must be >= 1 ps")
        if self.wander_sigma < 0 or self.jitter_sigma < 0:
            raise ValueError("noise sigmas must be >= 0")
        as_fraction(self.drift_ppm)

    @classmethod
    def ideal(cls, **kw) -> "ClockParams":
        kw.setdefault("granularity", 1)
        return cls(**kw)


@dataclass(frozen=True)
class PhaseGlitch:
    at: int
    magnitude: int

    def __post_init__(self):
        if self.magnitude == 0:
            raise ValueError("glitch magnitude must be non-zero")


class Clock:
    """Runtime state of one oscillator.

    The clock may be read at any true time at or after its evaluation point,
    which only moves forward through :meth:`advance_wander`. Glitches must be
    scheduled at or after the evaluation point.
    """

    def __init__(self, params: ClockParams, rng: np.random.Generator | None = None):
        self.params = params
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.accumulated_freq_offset = 0.0
        self.eval_point = 0
        self._anchor_t = 0
        self._anchor_phase = params.offset0
        self._glitch_at: list[int] = []
        self._glitch_cum: list[int] = []
        self._glitches: list[PhaseGlitch] = []
        self._set_rate()

    def _set_rate(self):
        ppm = as_fraction(self.params.drift_ppm)
        if self.accumulated_freq_offset:
            ppm += Fraction(self.accumulated_freq_offset).limit_denominator(10**9)
        rate = 1 + ppm / 1_000_000
        self._num = rate.numerator
        self._den = rate.denominator

    @property
    def glitches(self) -> tuple[PhaseGlitch, ...]:
        return tuple(self._glitches)

    def glitch_offset(self, true_time: int) -> int:
        i = bisect.bisect_right(self._glitch_at, true_time)
        return self._glitch_cum[i - 1] if i else 0

    def phase(self, true_time: int) -> int:
        """Noise-free local time (drift, wander, glitches; no jitter or quantization)."""
        if true_time < self.eval_point:
            raise ContractError(
                f"clock read at {true_time} before evaluation point {self.eval_point}"
            )
        dt = true_time - self._anchor_t
        p = self._anchor_phase + (dt * self._num) // self._den
        if self._glitch_at:
            p += self.glitch_offset(true_time)
        return p

    def local_time(self, true_time: int) -> int:
        p = self.phase(true_time)
        sigma = self.params.jitter_sigma
        if sigma:
            p += int(round(self.rng.normal(0.0, sigma)))
        return p

    def timestamp(self, true_time: int) -> int:
        g = self.params.granularity
        return (self.local_time(true_time) // g) * g

    def inject_glitch(self, glitch: PhaseGlitch) -> "Clock":
        if glitch.at < self.eval_point:
            raise ContractError(
                f"glitch at {glitch.at} lies before evaluation point {self.eval_point}"
            )
        self._glitches.append(glitch)
        self._glitches.sort(key=lambda g: g.at)
        self._glitch_at = [g.at for g in self._glitches]
        total = 0
        self._glitch_cum = []
        for g in self._glitches:
            total += g.magnitude
            self._glitch_cum.append(total)
        return self

    def advance_wander(self, dt: int, rng: np.random.Generator | None = None) -> "Clock":
        """Integrate the current frequency over ``dt`` then take one wander step."""
        if dt <= 0:
            raise ContractError("wander step dt must be > 0")
        t = self.eval_point + dt
        sigma = self.params.wander_sigma
        if sigma:
            rng = rng if rng is not None else self.rng
            self._anchor_phase = self._anchor_phase + (
                (t - self._anchor_t) * self._num
            ) // self._den
            self._anchor_t = t
            self.accumulated_freq_offset += float(rng.normal(0.0, sigma * math.sqrt(dt / S)))
            self._set_rate()
        self.eval_point = t
        return self

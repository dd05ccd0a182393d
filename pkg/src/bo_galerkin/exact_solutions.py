"""Closed-form Benjamin-Ono solutions used as references."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class DoubleSolitonParams:
    c1: float = 0.3
    c2: float = 0.6
    d1: float = -30.0
    d2: float = -55.0

    def __post_init__(self):
        if not (self.c1 > 0 and self.c2 > 0):
            raise ConfigurationError("soliton speeds must be positive")
        if self.c1 == self.c2:
            raise ConfigurationError("double soliton needs distinct speeds")


@dataclass(frozen=True)
class PeriodicWaveParams:
    c: float = 0.25
    L: float = 15.0
    delta: float = None

    def __post_init__(self):
        if not (self.c > 0 and self.L > 0):
            raise ConfigurationError("speed and half-period must be positive")
        delta = np.pi / (self.c * self.L)
        if self.delta is not None and not np.isclose(self.delta, delta, rtol=1e-14):
            raise ConfigurationError("delta must equal pi / (c L)")
        if not 0.0 < delta < 1.0:
            raise ConfigurationError(
                f"periodic wave needs 0 < delta < 1, got delta = {delta:.6g}"
            )
        object.__setattr__(self, "delta", float(delta))


def double_soliton(x, t, p=DoubleSolitonParams()):
    """Two-soliton solution on the line; the faster wave overtakes the slower.

    The constant in the numerator is ``(c1 + c2)**3 / (c1 c2 (c1 - c2)**2)``;
    with a square instead of a cube the function is not a solution.
    """
    c1, c2 = p.c1, p.c2
    l1 = np.asarray(x, dtype=float) - c1 * t - p.d1
    l2 = np.asarray(x, dtype=float) - c2 * t - p.d2
    s = (c1 + c2) ** 2 / (c1 - c2) ** 2
    num = 4.0 * c1 * c2 * (c1 * l1**2 + c2 * l2**2 + s * (c1 + c2) / (c1 * c2))
    den = (c1 * c2 * l1 * l2 - s) ** 2 + (c1 * l1 + c2 * l2) ** 2
    return num / den


def double_soliton_dx(x, t, p=DoubleSolitonParams()):
    """Spatial derivative of :func:`double_soliton`."""
    c1, c2 = p.c1, p.c2
    l1 = np.asarray(x, dtype=float) - c1 * t - p.d1
    l2 = np.asarray(x, dtype=float) - c2 * t - p.d2
    s = (c1 + c2) ** 2 / (c1 - c2) ** 2
    num = 4.0 * c1 * c2 * (c1 * l1**2 + c2 * l2**2 + s * (c1 + c2) / (c1 * c2))
    dnum = 8.0 * c1 * c2 * (c1 * l1 + c2 * l2)
    a = c1 * c2 * l1 * l2 - s
    b = c1 * l1 + c2 * l2
    den = a * a + b * b
    dden = 2.0 * a * c1 * c2 * (l1 + l2) + 2.0 * b * (c1 + c2)
    return (dnum * den - num * dden) / den**2


def periodic_wave(x, t, p=PeriodicWaveParams()):
    """2L-periodic travelling wave of speed ``c``.

    ``u = 2 c delta^2 / (1 - sqrt(1 - delta^2) cos(c delta (x - c t)))``,
    which tends to the soliton ``4c / (1 + c^2 x^2)`` as ``L`` grows.
    """
    a = np.sqrt(1.0 - p.delta**2)
    theta = p.c * p.delta * (np.asarray(x, dtype=float) - p.c * t)
    return 2.0 * p.c * p.delta**2 / (1.0 - a * np.cos(theta))


def periodic_wave_dx(x, t, p=PeriodicWaveParams()):
    a = np.sqrt(1.0 - p.delta**2)
    k = p.c * p.delta
    theta = k * (np.asarray(x, dtype=float) - p.c * t)
    return -2.0 * p.c * p.delta**2 * a * k * np.sin(theta) / (1.0 - a * np.cos(theta)) ** 2

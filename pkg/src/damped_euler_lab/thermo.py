"""Gamma-law pressure and Riemann-invariant algebra for the p-system.

Everything here works on scalars or numpy arrays. The specific volume
``u`` must be strictly positive; anything else raises :class:`DomainError`.
"""
from dataclasses import dataclass

import numpy as np


class DomainError(ValueError):
    """Argument outside the physical domain (u <= 0, s <= r, ...)."""


def _positive(name, x):
    x = np.asarray(x, dtype=float)
    if not np.all(x > 0):
        raise DomainError(f"{name} must be positive, got min {np.min(x)!r}")
    return x


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


@dataclass(frozen=True)
class PressureLaw:
    """p(u) = u**-gamma / gamma with gamma > 1."""

    gamma: float

    def __post_init__(self):
        if not np.isfinite(self.gamma) or self.gamma <= 1:
            raise DomainError(f"gamma must exceed 1, got {self.gamma!r}")

    def pressure(self, u):
        u = _positive("u", u)
        return _out(u ** -self.gamma / self.gamma)

    def dpressure(self, u):
        """p'(u) = -u**-(gamma+1)."""
        u = _positive("u", u)
        return _out(-(u ** -(self.gamma + 1)))

    def sound_speed(self, u):
        u = _positive("u", u)
        return _out(u ** (-(self.gamma + 1) / 2))

    def eta(self, u):
        """Integrated sound speed from u to infinity."""
        u = _positive("u", u)
        g = self.gamma
        return _out(2 / (g - 1) * u ** (-(g - 1) / 2))

    def eta_inverse(self, eta_val):
        e = _positive("eta", eta_val)
        g = self.gamma
        return _out(((g - 1) * e / 2) ** (-2 / (g - 1)))

    def sound_speed_from_eta(self, eta_val):
        """c as a function of eta, avoiding the detour through u."""
        e = _positive("eta", eta_val)
        g = self.gamma
        return _out(((g - 1) * e / 2) ** ((g + 1) / (g - 1)))

    def theta(self, u):
        """Antiderivative of sqrt(c); the log branch is taken exactly at gamma = 3."""
        u = _positive("u", u)
        g = self.gamma
        if g == 3:
            return _out(np.log(u))
        return _out(4 / (3 - g) * u ** ((3 - g) / 4))

    def riccati_weight(self, u):
        """(gamma+1)/4 * u**((gamma-3)/4), the coefficient of y**2 in the gradient ODE."""
        u = _positive("u", u)
        g = self.gamma
        return _out((g + 1) / 4 * u ** ((g - 3) / 4))

    def to_riemann(self, u, v):
        e = np.asarray(self.eta(u))
        v = np.asarray(v, dtype=float)
        return _out(v - e), _out(v + e)

    def from_riemann(self, r, s):
        r = np.asarray(r, dtype=float)
        s = np.asarray(s, dtype=float)
        half_gap = (s - r) / 2
        if not np.all(half_gap > 0):
            raise DomainError("s <= r: vacuum or invalid state")
        return _out(np.asarray(self.eta_inverse(half_gap))), _out((r + s) / 2)


# Function-style aliases, handy for one-off calls and for mapping over laws.

def pressure(law, u):
    return law.pressure(u)


def sound_speed(law, u):
    return law.sound_speed(u)


def eta(law, u):
    return law.eta(u)


def eta_inverse(law, eta_val):
    return law.eta_inverse(eta_val)


def theta(law, u):
    return law.theta(u)


def to_riemann(law, u, v):
    return law.to_riemann(u, v)


def from_riemann(law, r, s):
    return law.from_riemann(r, s)

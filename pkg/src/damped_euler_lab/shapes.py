"""Builtin perturbation profiles for small-data families.

A shape string is ``[coef*]name[(width[, center])]``, e.g. ``gaussian``,
``-3*gaussian``, ``0.5*bump(2, 1)``. Every builtin vanishes as x -> -inf.
"""
from dataclasses import dataclass
import math
import re

import numpy as np

# profile values below this count as "outside the support"
SUPPORT_TOL = 1e-12

_SHAPE_RE = re.compile(
    r"^\s*(?:(?P<coef>[-+]?[0-9.]+(?:[eE][-+]?\d+)?)\s*\*\s*)?(?P<sign>-)?(?P<name>[a-z_]+)"
    r"\s*(?:\(\s*(?P<args>[^)]*)\))?\s*$"
)

NAMES = ("zero", "gaussian", "bump", "tanh", "odd_gaussian")


@dataclass(frozen=True)
class Shape:
    name: str = "zero"
    coef: float = 1.0
    width: float = 1.0
    center: float = 0.0

    def __post_init__(self):
        if self.name not in NAMES:
            raise ValueError(f"unknown shape {self.name!r}; expected one of {NAMES}")
        if not self.width > 0:
            raise ValueError("shape width must be positive")

    @classmethod
    def parse(cls, text):
        m = _SHAPE_RE.match(text)
        if m is None:
            raise ValueError(f"cannot parse shape {text!r}")
        coef = float(m["coef"]) if m["coef"] else 1.0
        if m["sign"]:
            coef = -coef
        args = [float(a) for a in m["args"].split(",")] if m["args"] else []
        if len(args) > 2:
            raise ValueError(f"shape {text!r}: at most (width, center)")
        kw = dict(zip(("width", "center"), args))
        return cls(m["name"], coef, **kw)

    def __str__(self):
        return f"{self.coef!r}*{self.name}({self.width!r}, {self.center!r})"

    def _z(self, x):
        return (np.asarray(x, dtype=float) - self.center) / self.width

    def __call__(self, x):
        z = self._z(x)
        n = self.name
        if n == "zero":
            f = np.zeros_like(z)
        elif n == "gaussian":
            f = np.exp(-z * z)
        elif n == "odd_gaussian":
            f = math.sqrt(2 * math.e) * z * np.exp(-z * z)
        elif n == "bump":
            inside = np.abs(z) < 1
            zz = np.where(inside, z, 0.0)
            f = np.where(inside, np.exp(1.0 - 1.0 / (1.0 - zz * zz)), 0.0)
        else:
            f = 0.5 * (1.0 + np.tanh(z))
        return self.coef * f

    def derivative(self, x):
        z = self._z(x)
        n = self.name
        if n == "zero":
            d = np.zeros_like(z)
        elif n == "gaussian":
            d = -2 * z * np.exp(-z * z)
        elif n == "odd_gaussian":
            d = math.sqrt(2 * math.e) * (1 - 2 * z * z) * np.exp(-z * z)
        elif n == "bump":
            inside = np.abs(z) < 1
            zz = np.where(inside, z, 0.0)
            q = 1.0 - zz * zz
            d = np.where(inside, np.exp(1.0 - 1.0 / q) * (-2 * zz / (q * q)), 0.0)
        else:
            d = 0.5 / np.cosh(z) ** 2
        return self.coef * d / self.width

    def right_limit(self):
        return self.coef if self.name == "tanh" else 0.0

    def support(self):
        """Interval outside which the profile sits at its limits (to SUPPORT_TOL)."""
        if self.name == "zero" or self.coef == 0:
            return None
        if self.name == "bump":
            half = 1.0
        elif self.name == "gaussian":
            half = math.sqrt(math.log(abs(self.coef) / SUPPORT_TOL + 1.0))
        elif self.name == "odd_gaussian":
            half = math.sqrt(math.log(abs(self.coef) * 4 / SUPPORT_TOL + 1.0)) + 1.0
        else:
            half = 0.5 * math.log(abs(self.coef) / SUPPORT_TOL + 1.0)
        return self.center - half * self.width, self.center + half * self.width

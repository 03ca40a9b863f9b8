"""Flat ``key = value`` run configuration.

Every key is optional; an empty file describes the reference problem
(gamma = 3, no damping, eps = 0.1 gaussian velocity bump), which blows
up at t = 1/(0.1 sqrt(2) e^-1/2) ~ 11.658.
"""
from dataclasses import dataclass, field, fields, replace
import math

import numpy as np

from .damping import NoDamping, PowerTime, SpaceTimeBuiltin, SPACE_TIME_KINDS, Tabulated
from .shapes import Shape
from .solver import ConfigError, Grid1D, InitialDataFamily, SmallPerturbation, LIMITERS
from .thermo import DomainError, PressureLaw

# gradient threshold K default: steepest slope of the reference datum 0.1*exp(-x^2)
REFERENCE_K = 0.1 * math.sqrt(2.0) * math.exp(-0.5)

DAMPING_KINDS = ("none", "power_time", "tabulated") + SPACE_TIME_KINDS

THRESHOLD_DEFAULTS = {
    "K": REFERENCE_K,      # steepness that counts as a "large" negative gradient
    "smallness": None,     # bound on sup|r + s| at t = 0; None -> 1/(gamma-1) u_-^{-(gamma-1)/2}
    "kappa": 2.0,          # auto blow-up threshold = kappa * initial weighted compressive gradient
    "dp": 1e4,             # |p'| blow-up factor over its initial maximum
}


class ConfigErrors(ConfigError):
    """All problems found in a config, with line numbers where known."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class RunConfig:
    gamma: float = 3.0
    lam: float = 0.0
    mu: float = 1.0
    damping_kind: str = "power_time"
    damping_table: str = ""
    epsilon: float = 0.1
    shape_phi: str = "zero"
    shape_psi: str = "gaussian"
    u_minus: float = 1.0
    v_minus: float = 0.0
    delta0: float = 0.1
    x_left: float = -25.0
    x_right: float = 25.0
    n_cells: int = 2000
    frame_speed: float = 0.0
    cfl: float = 0.4
    t_max: float = 15.0
    record_interval: float = 0.1
    gradient_threshold: float = None
    vacuum_floor: float = 1e-10
    limiter: str = "van_leer"
    sweep_epsilons: tuple = ()
    sweep_mesh_levels: int = 3
    thresholds: dict = field(default_factory=dict, hash=False)
    output_dir: str = "."

    def threshold(self, name):
        return self.thresholds.get(name, THRESHOLD_DEFAULTS[name])

    def smallness(self):
        val = self.threshold("smallness")
        if val is None:
            g = self.gamma
            return self.u_minus ** (-(g - 1) / 2) / (g - 1)
        return val

    def law(self):
        return PressureLaw(self.gamma)

    def damping_model(self):
        kind = self.damping_kind
        if kind == "none" or (kind == "power_time" and self.lam == 0):
            return NoDamping()
        if kind == "power_time":
            return PowerTime(self.lam, self.mu)
        if kind == "tabulated":
            return Tabulated.load(self.damping_table)
        return SpaceTimeBuiltin(kind, self.lam, self.mu)

    def family(self):
        pert = SmallPerturbation(self.epsilon, Shape.parse(self.shape_phi), Shape.parse(self.shape_psi))
        return InitialDataFamily(pert, self.u_minus, self.v_minus, self.delta0)

    def grid(self):
        return Grid1D(self.x_left, self.x_right, int(self.n_cells), self.frame_speed)

    def with_(self, **kw):
        return replace(self, **kw)

    def validate(self):
        """Raise ConfigErrors listing every semantic problem."""
        errs = []
        if not self.gamma > 1:
            errs.append("gamma must exceed 1")
        if self.lam < 0 or self.mu < 0:
            errs.append("lambda and mu must be non-negative")
        if self.damping_kind not in DAMPING_KINDS:
            errs.append(f"damping.kind must be one of {', '.join(DAMPING_KINDS)}")
        if self.damping_kind == "tabulated" and not self.damping_table:
            errs.append("damping.kind = tabulated needs damping.table")
        if not self.epsilon > 0:
            errs.append("epsilon must be positive")
        for key, text in (("shape.phi", self.shape_phi), ("shape.psi", self.shape_psi)):
            try:
                Shape.parse(text)
            except ValueError as exc:
                errs.append(f"{key}: {exc}")
        if not self.u_minus > 0:
            errs.append("u_minus must be positive")
        if not self.delta0 > 0:
            errs.append("delta0 must be positive")
        if int(self.n_cells) != self.n_cells or self.n_cells < 16:
            errs.append("n_cells ≥ 16 required")
        if not self.x_right > self.x_left:
            errs.append("grid.x_right must exceed grid.x_left")
        if not 0 < self.cfl <= 1:
            errs.append("cfl must lie in (0, 1]")
        if not self.t_max > 0:
            errs.append("t_max must be positive")
        if not self.record_interval > 0:
            errs.append("record_interval must be positive")
        if self.gradient_threshold is not None and not self.gradient_threshold > 0:
            errs.append("gradient_threshold must be positive or auto")
        if not self.vacuum_floor >= 0:
            errs.append("vacuum_floor must be non-negative")
        if self.limiter not in LIMITERS:
            errs.append(f"limiter must be one of {', '.join(sorted(LIMITERS))}")
        if any(not e > 0 for e in self.sweep_epsilons):
            errs.append("sweep.epsilons must be positive")
        if self.sweep_mesh_levels < 2:
            errs.append("sweep.mesh_levels must be at least 2")
        unknown = set(self.thresholds) - set(THRESHOLD_DEFAULTS)
        if unknown:
            errs.append(f"unknown analysis threshold(s): {', '.join(sorted(unknown))}")
        if not errs:
            errs += self.domain_errors()
        if errs:
            raise ConfigErrors(errs)
        return self

    def domain_errors(self, t_max=None):
        """Check that far-field boundaries stay out of reach until t_max."""
        t_max = self.t_max if t_max is None else t_max
        try:
            law, fam, grid = self.law(), self.family(), self.grid()
        except (ValueError, DomainError) as exc:
            return [str(exc)]
        supp = fam.support()
        if supp is None:
            return []
        lo, hi = supp
        u0, _ = fam.evaluate(grid.x_ext)
        if np.min(u0) <= 0:
            return [f"u0 is not positive (min {np.min(u0):.6g})"]
        cmax = float(np.max(law.sound_speed(u0)))
        V = grid.frame_speed
        left_mode, right_mode = grid.boundary_modes()
        errs = []
        if left_mode == "farfield":
            need = lo - max(cmax + V, 0.0) * t_max
            if grid.x_left > need:
                errs.append(f"domain too small for t_max: grid.x_left must be <= {need:.6g}")
        elif grid.x_left > lo:
            errs.append(f"grid.x_left must be <= {lo:.6g} to hold the initial data")
        if right_mode == "farfield":
            need = hi + max(cmax - V, 0.0) * t_max
            if grid.x_right < need:
                errs.append(f"domain too small for t_max: grid.x_right must be >= {need:.6g}")
        elif grid.x_right < hi:
            errs.append(f"grid.x_right must be >= {hi:.6g} to hold the initial data")
        return errs

    def to_text(self):
        lines = []
        for key, attr, _ in _KEYS:
            val = getattr(self, attr)
            lines.append(f"{key} = {_format(attr, val)}")
        return "\n".join(lines) + "\n"


def _float_list(text):
    return tuple(float(p) for p in text.replace(";", ",").split(",") if p.strip())


def _thresholds(text):
    out = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        name, sep, val = part.partition(":")
        if not sep:
            raise ValueError(f"expected name:value, got {part!r}")
        out[name.strip()] = float(val)
    return out


def _auto_float(text):
    return None if text.strip().lower() == "auto" else float(text)


def _int(text):
    val = float(text)
    if val != int(val):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(val)


_KEYS = [
    ("gamma", "gamma", float),
    ("lambda", "lam", float),
    ("mu", "mu", float),
    ("damping.kind", "damping_kind", str),
    ("damping.table", "damping_table", str),
    ("epsilon", "epsilon", float),
    ("shape.phi", "shape_phi", str),
    ("shape.psi", "shape_psi", str),
    ("u_minus", "u_minus", float),
    ("v_minus", "v_minus", float),
    ("delta0", "delta0", float),
    ("grid.x_left", "x_left", float),
    ("grid.x_right", "x_right", float),
    ("grid.n_cells", "n_cells", _int),
    ("grid.frame_speed", "frame_speed", float),
    ("cfl", "cfl", float),
    ("t_max", "t_max", float),
    ("record_interval", "record_interval", float),
    ("gradient_threshold", "gradient_threshold", _auto_float),
    ("vacuum_floor", "vacuum_floor", float),
    ("limiter", "limiter", str),
    ("sweep.epsilons", "sweep_epsilons", _float_list),
    ("sweep.mesh_levels", "sweep_mesh_levels", _int),
    ("analysis.thresholds", "thresholds", _thresholds),
    ("output.dir", "output_dir", str),
]
_BY_KEY = {k: (attr, conv) for k, attr, conv in _KEYS}
KEYS = tuple(k for k, _, _ in _KEYS)


def _format(attr, val):
    if val is None:
        return "auto"
    if isinstance(val, float):
        return repr(val)
    if attr == "sweep_epsilons":
        return ",".join(repr(float(e)) for e in val)
    if attr == "thresholds":
        return ",".join(f"{k}:{float(v)!r}" for k, v in sorted(val.items()) if v is not None)
    return str(val)


def parse_values(text):
    """Return ({attribute: value}, [errors]) for config text without applying defaults."""
    errs = []
    values = {}
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not sep or not key:
            errs.append(f"line {lineno}: expected 'key = value'")
            continue
        if key not in _BY_KEY:
            errs.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in seen:
            errs.append(f"line {lineno}: duplicate key {key!r} (first on line {seen[key]})")
            continue
        seen[key] = lineno
        attr, conv = _BY_KEY[key]
        try:
            values[attr] = conv(val)
        except ValueError as exc:
            errs.append(f"line {lineno}: bad value for {key}: {exc}")
    return values, errs


def parse_config(text, validate=True, overrides=None):
    """Parse config text; raise ConfigErrors listing every problem found.

    ``overrides`` is extra ``key = value`` text whose keys replace the file's.
    """
    values, errs = parse_values(text)
    if overrides:
        extra, more = parse_values(overrides)
        errs += [f"override {e}" for e in more]
        values.update(extra)
    cfg = RunConfig(**values)
    if validate:
        try:
            cfg.validate()
        except ConfigErrors as exc:
            errs += exc.errors
    if errs:
        raise ConfigErrors(errs)
    return cfg


def load_config(path, validate=True, overrides=None):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), validate=validate, overrides=overrides)


def field_names():
    return [f.name for f in fields(RunConfig)]

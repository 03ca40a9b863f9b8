"""Characteristic-form upwind solver for the damped p-system.

The unknowns are the Riemann invariants r = v - eta(u), s = v + eta(u):

    r_t - c r_x = -(a/2)(r + s)
    s_t + c s_x = -(a/2)(r + s)

discretised with limited MUSCL upwind differences (van Leer by default,
minmod available) and Heun (SSP-RK2) in time, the source evaluated
inside each stage. Two ghost cells per side
carry either the far-field state (advanced by the uniform ODE
v_t = -a v) or a zero-gradient copy of the edge cell.

An optional frame speed V shifts the grid along with a travelling pulse:
node i sits at lab position x_i + V t and the advection speeds become
-c - V and c - V. The side the frame moves toward keeps the far-field
ghosts; the trailing side extrapolates.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from . import _kernels, norms
from .damping import NoDamping, amplification
from .thermo import DomainError

NG = 2  # ghost cells per side
OUTFLOW_BAND = 16  # nodes next to an extrapolating edge left out of the blow-up monitor


class SolverEvent(Exception):
    """Terminal condition raised from inside a step."""

    kind = "Event"

    def __init__(self, t, x=math.nan, message=""):
        super().__init__(message or f"{self.kind} at t={t!r}, x={x!r}")
        self.t = t
        self.x = x


class VacuumEvent(SolverEvent):
    kind = "VacuumEvent"


class NonFiniteEvent(SolverEvent):
    kind = "NonFiniteEvent"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Grid1D:
    x_left: float
    x_right: float
    n_cells: int
    frame_speed: float = 0.0

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells < 16:
            raise ConfigError("n_cells >= 16 required")
        if not self.x_right > self.x_left:
            raise ConfigError("x_right must exceed x_left")

    @property
    def dx(self):
        return (self.x_right - self.x_left) / self.n_cells

    @property
    def x(self):
        """Cell centres in the frame."""
        return self.x_left + (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def x_ext(self):
        return self.x_left + (np.arange(-NG, self.n_cells + NG) + 0.5) * self.dx

    def lab(self, xi, t):
        return xi + self.frame_speed * t

    def frame(self, x, t):
        return x - self.frame_speed * t

    def refined(self, factor=2):
        return Grid1D(self.x_left, self.x_right, self.n_cells * factor, self.frame_speed)

    def boundary_modes(self):
        if self.frame_speed > 0:
            return ("extrapolate", "farfield")
        if self.frame_speed < 0:
            return ("farfield", "extrapolate")
        return ("farfield", "farfield")


@dataclass(frozen=True, eq=False)
class FieldState:
    """Snapshot at time t. ``r_ext``/``s_ext`` include the ghost cells."""

    t: float
    grid: Grid1D
    law: object
    r_ext: np.ndarray
    s_ext: np.ndarray
    u: np.ndarray = field(init=False, repr=False)
    v: np.ndarray = field(init=False, repr=False)
    c: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        r = np.asarray(self.r_ext, dtype=float)
        s = np.asarray(self.s_ext, dtype=float)
        if r.shape != (self.grid.n_cells + 2 * NG,) or s.shape != r.shape:
            raise ValueError("r_ext/s_ext must have n_cells + 4 entries")
        half_gap = 0.5 * (s - r)
        if not np.all(half_gap > 0):
            raise DomainError("invalid state: s <= r somewhere (u not positive/finite)")
        u = self.law.eta_inverse(half_gap[NG:-NG])
        for name, arr in (("r_ext", r), ("s_ext", s), ("u", u),
                          ("v", 0.5 * (r + s)[NG:-NG]),
                          ("c", self.law.sound_speed(u))):
            arr = np.array(arr, dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def r(self):
        return self.r_ext[NG:-NG]

    @property
    def s(self):
        return self.s_ext[NG:-NG]

    @property
    def x(self):
        """Node positions in lab coordinates."""
        return self.grid.lab(self.grid.x, self.t)

    @property
    def dx(self):
        return self.grid.dx

    def gradients(self):
        """(r_x, s_x): central differences inside, second-order one-sided at the ends."""
        dx = self.grid.dx
        return np.gradient(self.r, dx, edge_order=2), np.gradient(self.s, dx, edge_order=2)

    def summary(self):
        rx, sx = self.gradients()
        return {
            "t": self.t,
            "sup_u": float(self.u.max()),
            "inf_u": float(self.u.min()),
            "sup_abs_v": float(np.abs(self.v).max()),
            "max_abs_r_x": float(np.abs(rx).max()),
            "max_abs_s_x": float(np.abs(sx).max()),
            "phi_norm": norms.phi_norm(self),
            "psi_norm": norms.psi_norm(self),
        }


@dataclass(frozen=True)
class SmallPerturbation:
    """(u0, v0) = (u_minus + eps*phi, v_minus + eps*psi)."""

    epsilon: float
    phi: object
    psi: object


@dataclass(frozen=True, eq=False)
class Explicit:
    """Tabulated data, linearly interpolated and held constant outside the table."""

    x: np.ndarray
    u0: np.ndarray
    v0: np.ndarray


@dataclass(frozen=True)
class InitialDataFamily:
    variant: object
    u_minus: float = 1.0
    v_minus: float = 0.0
    delta0: float = 0.1

    def __post_init__(self):
        if not self.u_minus > 0:
            raise ConfigError("u_minus must be positive")
        if not self.delta0 > 0:
            raise ConfigError("delta0 must be positive")

    def evaluate(self, x):
        var = self.variant
        x = np.asarray(x, dtype=float)
        if isinstance(var, SmallPerturbation):
            return (self.u_minus + var.epsilon * var.phi(x),
                    self.v_minus + var.epsilon * var.psi(x))
        return np.interp(x, var.x, var.u0), np.interp(x, var.x, var.v0)

    def support(self):
        """Region where the data differ from their limits, or None."""
        var = self.variant
        if isinstance(var, SmallPerturbation):
            if var.epsilon == 0:
                return None
            parts = [p for p in (var.phi.support(), var.psi.support()) if p is not None]
            if not parts:
                return None
            return min(p[0] for p in parts), max(p[1] for p in parts)
        return float(np.min(var.x)), float(np.max(var.x))


def make_initial(family, grid, law):
    """Sample the family on the grid (ghost cells included) at t = 0."""
    supp = family.support()
    if supp is not None and isinstance(family.variant, SmallPerturbation):
        lo, hi = supp
        if grid.x_left > lo or grid.x_right < hi:
            raise ConfigError(f"grid [{grid.x_left}, {grid.x_right}] does not contain the "
                              f"initial support [{lo:.6g}, {hi:.6g}]")
    u0, v0 = family.evaluate(grid.x_ext)
    if np.min(u0) < family.delta0:
        k = int(np.argmin(u0))
        raise ConfigError(f"u0 = {u0[k]:.6g} < delta0 = {family.delta0} at x = {grid.x_ext[k]:.6g}")
    r, s = law.to_riemann(u0, v0)
    return FieldState(0.0, grid, law, r, s)


def cfl_dt(state, cfl=0.4):
    if not 0 < cfl <= 1:
        raise ConfigError("cfl must lie in (0, 1]")
    cmax = float(np.max(state.c))
    speed = cmax + abs(state.grid.frame_speed)
    if not (np.isfinite(speed) and speed > 0):
        raise DomainError("state has no finite positive characteristic speed")
    return cfl * state.grid.dx / speed


def _minmod(dl, dr):
    return np.where(dl * dr > 0, np.sign(dl) * np.minimum(np.abs(dl), np.abs(dr)), 0.0)


def _van_leer(dl, dr):
    prod = dl * dr
    return np.where(prod > 0, 2 * prod / np.where(prod > 0, dl + dr, 1.0), 0.0)


LIMITERS = {"minmod": _minmod, "van_leer": _van_leer}


def _muscl_differences(f, dx, limiter=_van_leer):
    """Left- and right-biased MUSCL derivatives at the interior nodes."""
    d = np.diff(f)
    sig = limiter(d[:-1], d[1:])
    m = f.size
    left = (d[1:m - 3] + 0.5 * (sig[1:m - 3] - sig[0:m - 4])) / dx
    right = (d[2:m - 2] - 0.5 * (sig[2:m - 2] - sig[1:m - 3])) / dx
    return left, right


class _Stepper:
    """Right-hand side and boundary handling for one grid/law/model."""

    def __init__(self, grid, law, model, vacuum_floor=1e-10, limiter="van_leer", compiled=None):
        if limiter not in LIMITERS:
            raise ConfigError(f"unknown limiter {limiter!r}; expected one of {sorted(LIMITERS)}")
        self.limiter = LIMITERS[limiter]
        self._kind = 0 if limiter == "minmod" else 1
        self.compiled = _kernels.HAVE_NUMBA if compiled is None else compiled
        self.grid = grid
        self.law = law
        self.model = model
        self.vacuum_floor = vacuum_floor
        self.xi = grid.x_ext
        self.modes = grid.boundary_modes()
        # outflow edges with copied ghosts give unreliable gradients; keep them out of the monitor
        self.skip = tuple(OUTFLOW_BAND if m == "extrapolate" else 0 for m in self.modes)
        g = law.gamma
        self._c_exp = (g + 1) / (g - 1)
        self._c_base = (g - 1) / 2

    def damping(self, t):
        if self.model.x_independent:
            if isinstance(self.model, NoDamping):
                return 0.0
            return float(self.model.rate(t))
        return self.model.eval(t, self.grid.lab(self.xi, t))[0]

    def check(self, r, s, t):
        gap = s - r
        if not np.all(np.isfinite(gap)) or not np.all(np.isfinite(r + s)):
            bad = ~np.isfinite(gap) | ~np.isfinite(r + s)
            raise NonFiniteEvent(t, float(self.grid.lab(self.xi[np.argmax(bad)], t)))
        if np.any(gap <= self.vacuum_floor):
            k = int(np.argmin(gap))
            raise VacuumEvent(t, float(self.grid.lab(self.xi[k], t)))

    def rhs(self, r, s, t):
        self.check(r, s, t)
        if self.compiled:
            a = self._a(t)
            dr = np.empty_like(r)
            ds = np.empty_like(s)
            _kernels.rhs_kernel(r, s, a, self._c_base, self._c_exp, self.grid.frame_speed,
                                self.grid.dx, self._kind, dr, ds)
            return dr, ds
        V = self.grid.frame_speed
        dx = self.grid.dx
        c = (self._c_base * 0.5 * (s - r)) ** self._c_exp
        a = self.damping(t)
        src = -0.5 * a * (r + s)
        if np.ndim(src) == 0:
            src = np.full(r.shape, src)
        dr = src.copy()
        ds = src
        ci = c[NG:-NG]
        for f, out, w in ((r, dr, -ci - V), (s, ds, ci - V)):
            left, right = _muscl_differences(f, dx, self.limiter)
            out[NG:-NG] -= np.maximum(w, 0.0) * left + np.minimum(w, 0.0) * right
        return dr, ds

    def apply_boundary(self, r, s):
        if self.modes[0] == "extrapolate":
            r[:NG] = r[NG]
            s[:NG] = s[NG]
        if self.modes[1] == "extrapolate":
            r[-NG:] = r[-NG - 1]
            s[-NG:] = s[-NG - 1]

    def scan(self, r, s):
        """(max c, min sqrt(c) r_x, its index, min sqrt(c) s_x, its index) over the interior."""
        lo, hi = self.skip
        if self.compiled:
            return _kernels.step_monitors(r, s, NG, self.grid.dx, self._c_base, self._c_exp, lo, hi)
        ri, si = r[NG:-NG], s[NG:-NG]
        c = (self._c_base * 0.5 * (si - ri)) ** self._c_exp
        rc = np.sqrt(c)
        rx = rc * np.gradient(ri, self.grid.dx, edge_order=2)
        sx = rc * np.gradient(si, self.grid.dx, edge_order=2)
        rx, sx = rx[lo:rx.size - hi], sx[lo:sx.size - hi]
        kr, ks = int(np.argmin(rx)), int(np.argmin(sx))
        return float(np.max(c)), float(rx[kr]), kr + lo, float(sx[ks]), ks + lo

    def weight(self, t):
        """A(t) for time-only damping; 1 when the damping depends on x."""
        if self.model.x_independent and not isinstance(self.model, NoDamping):
            return float(amplification(self.model, t))
        return 1.0

    def _a(self, t):
        return np.atleast_1d(np.asarray(self.damping(t), dtype=float))

    def advance(self, r, s, t, dt):
        if self.compiled:
            code, k, r2, s2 = _kernels.heun_kernel(
                r, s, self._a(t), self._a(t + dt), self._c_base, self._c_exp,
                self.grid.frame_speed, self.grid.dx, self._kind, dt,
                self.modes[0] == "extrapolate", self.modes[1] == "extrapolate",
                self.vacuum_floor)
            if code:
                stage_t = t if k < r.size else t + dt
                x = float(self.grid.lab(self.xi[k % r.size], stage_t))
                raise (NonFiniteEvent if code == 1 else VacuumEvent)(t + dt, x)
            return r2, s2
        k1r, k1s = self.rhs(r, s, t)
        r1 = r + dt * k1r
        s1 = s + dt * k1s
        self.apply_boundary(r1, s1)
        k2r, k2s = self.rhs(r1, s1, t + dt)
        r2 = 0.5 * (r + r1 + dt * k2r)
        s2 = 0.5 * (s + s1 + dt * k2s)
        self.apply_boundary(r2, s2)
        self.check(r2, s2, t + dt)
        return r2, s2


def step(state, model, law=None, dt=None, vacuum_floor=1e-10, limiter="van_leer"):
    """Advance one Heun step. Raises VacuumEvent / NonFiniteEvent."""
    law = state.law if law is None else law
    if dt is None:
        dt = cfl_dt(state, 0.4)
    if dt > cfl_dt(state, 1.0) * (1 + 1e-12):
        raise ConfigError("dt exceeds the CFL limit")
    stepper = _Stepper(state.grid, law, model, vacuum_floor, limiter)
    r, s = stepper.advance(state.r_ext, state.s_ext, state.t, dt)
    return FieldState(state.t + dt, state.grid, law, r, s)


TRAJECTORY_COLUMNS = ("t", "min_u", "max_u", "max_abs_v", "max_grad_r", "max_grad_s",
                      "phi_norm", "psi_norm", "max_abs_dp")

# events a run can end with, in tie-breaking order
EVENTS = ("GradientBlowup", "VacuumEvent", "PressureDerivativeBlowup", "NonFiniteEvent",
          "HorizonReached")

GRADIENT_FLOOR = 1e-6  # auto threshold never drops below kappa times this


def _monitors(t, r, s, u, v, c, dx):
    rx = np.gradient(r, dx, edge_order=2)
    sx = np.gradient(s, dx, edge_order=2)
    return (t, float(u.min()), float(u.max()), float(np.abs(v).max()),
            float(np.abs(rx).max()), float(np.abs(sx).max()),
            norms.phi_norm(r, s), norms.psi_norm(r, s), float(np.max(c * c)))


def _fmt(x):
    return format(x, ".17g")


@dataclass(eq=False)
class Trajectory:
    """Monitor time series plus the terminal event of one run."""

    config: object
    law: object
    model: object
    grid: Grid1D
    records: np.ndarray          # one row per record, columns TRAJECTORY_COLUMNS
    event: str
    t_end: float
    witness_x: float
    gradient_threshold: float
    initial: FieldState
    final: FieldState
    snapshots: list
    n_steps: int
    message: str = ""

    def column(self, name):
        return self.records[:, TRAJECTORY_COLUMNS.index(name)]

    @property
    def t(self):
        return self.column("t")

    @property
    def dx(self):
        return self.grid.dx

    def report(self):
        wx = float(self.witness_x)
        return {"event": self.event, "t_end": float(self.t_end),
                "witness_x": wx if math.isfinite(wx) else None}

    def to_csv(self):
        import json
        lines = [",".join(TRAJECTORY_COLUMNS)]
        for row in self.records:
            lines.append(",".join(_fmt(float(x)) for x in row))
        lines.append(json.dumps(self.report()))
        return "\n".join(lines) + "\n"


def _auto_threshold(g0, kappa):
    return kappa * max(g0, GRADIENT_FLOOR)


def run(config, snapshot_every=0, t_max=None):
    """Integrate a RunConfig until an event or the horizon.

    The blow-up monitor is the weighted compressive steepness
    G = A(t) sqrt(c) max(-r_x, -s_x), the quantity that follows the Riccati
    law (A = 1 for space-dependent damping); only negative gradients can
    blow up. G is compared against ``config.gradient_threshold``
    (auto: kappa times its initial value).
    The crossing time is interpolated linearly in 1/G between the two
    bracketing steps. ``snapshot_every`` > 0 keeps every n-th step state
    (plus the first and last) for characteristic tracing.
    """
    t_max = config.t_max if t_max is None else float(t_max)
    errs = config.domain_errors(t_max)
    if errs:
        raise ConfigError("; ".join(errs))
    law = config.law()
    model = config.damping_model()
    grid = config.grid()
    state0 = make_initial(config.family(), grid, law)
    stepper = _Stepper(grid, law, model, config.vacuum_floor, config.limiter)
    dx = grid.dx

    rec0 = _monitors(0.0, state0.r, state0.s, state0.u, state0.v, state0.c, dx)
    _, mr0, _, ms0, _ = stepper.scan(state0.r_ext, state0.s_ext)
    g0 = max(0.0, -mr0, -ms0)
    if config.gradient_threshold is None:
        g_th = _auto_threshold(g0, config.threshold("kappa"))
    else:
        g_th = float(config.gradient_threshold)
    dp_th = config.threshold("dp") * max(1.0, rec0[8])

    records = [rec0]
    snapshots = [state0] if snapshot_every else []
    interval = config.record_interval
    k_rec = 1
    t = 0.0
    r, s = np.array(state0.r_ext), np.array(state0.s_ext)
    g_prev = g0
    cmax = float(np.max(state0.c))
    n = 0
    event, t_end, wx, msg = "HorizonReached", t_max, math.nan, ""
    last = state0
    while True:
        if t >= t_max * (1 - 1e-14):
            t = t_max
            break
        dt = config.cfl * dx / (cmax + abs(grid.frame_speed))
        t_rec = k_rec * interval
        dt = min(dt, t_rec - t, t_max - t)
        try:
            r_new, s_new = stepper.advance(r, s, t, dt)
        except SolverEvent as ev:
            event, t_end, wx, msg = ev.kind, ev.t, ev.x, str(ev)
            break
        n += 1
        t_new = t + dt
        if abs(t_new - t_rec) <= 1e-12 * max(1.0, t_rec):
            t_new = t_rec
        if abs(t_new - t_max) <= 1e-12 * max(1.0, t_max):
            t_new = t_max
        t = t_new
        r, s = r_new, s_new
        cmax, mr, kr, ms, ks = stepper.scan(r, s)
        g = stepper.weight(t) * max(-mr, -ms)
        dp = cmax * cmax
        if g >= g_th:
            event = "GradientBlowup"
            k = kr if mr <= ms else ks
            wx = float(grid.lab(grid.x[k], t))
            if g_prev > 0 and g > g_prev:
                frac = (1 / g_prev - 1 / g_th) / (1 / g_prev - 1 / g)
                t_end = t - dt + dt * min(max(frac, 0.0), 1.0)
            else:
                t_end = t
        elif dp >= dp_th:
            event = "PressureDerivativeBlowup"
            k = int(np.argmax(s[NG:-NG] - r[NG:-NG]))  # smallest u
            wx = float(grid.lab(grid.x[k], t))
            t_end = t
        if event != "HorizonReached" or t >= t_max or t == t_rec or (snapshot_every and n % snapshot_every == 0):
            last = FieldState(t, grid, law, r.copy(), s.copy())
            if snapshot_every and (n % snapshot_every == 0 or event != "HorizonReached" or t >= t_max):
                snapshots.append(last)
        if t == t_rec or event != "HorizonReached" or t >= t_max:
            records.append(_monitors(t, last.r, last.s, last.u, last.v, last.c, dx))
            if t == t_rec:
                k_rec += 1
        if event != "HorizonReached":
            break
        g_prev = g
    if event == "HorizonReached":
        t_end = t_max
    elif last.t != t:
        # event raised mid-step: the last stored state is the last valid one
        last = FieldState(t, grid, law, r.copy(), s.copy())
        if records[-1][0] != t:
            records.append(_monitors(t, last.r, last.s, last.u, last.v, last.c, dx))
        if snapshot_every and snapshots[-1].t != t:
            snapshots.append(last)
    return Trajectory(config, law, model, grid, np.array(records, dtype=float), event,
                      float(t_end), float(wx), float(g_th), state0, last, snapshots, n, msg)

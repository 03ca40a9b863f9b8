"""Characteristic curves through stored snapshots, weighted gradients along them,
the integrated gradient identity, and the Riccati comparison oracle.

Along a minus curve dx/dt = -c the weighted gradient Y = A_- sqrt(c) r_x obeys

    dY/dt = -k(u) Y^2 / A_- - (a/2) A_- sqrt(c) s_x - A_- (a_x/2) sqrt(c) (r + s),

with k(u) = (gamma+1)/4 u^((gamma-3)/4) and A_- = exp(int a/2 along the curve).
Since d(theta)/dt = sqrt(c) s_x there, the s_x term integrates by parts:

    Y(t) = Y(0) - [A_- (a/2) theta]_0^t + int theta d(A_- a/2)/dt
           - int A_- (a_x/2) sqrt(c) (r + s) - int k Y^2 / A_-.

The plus family is the mirror image (s <-> r, -c <-> +c).
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy import integrate, optimize

from . import damping as dmp


class PathLeftDomain(Exception):
    """The curve exited the grid; ``path`` holds the part traced so far."""

    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path


PATH_COLUMNS = ("t", "x", "u", "r", "s", "grad_r", "grad_s", "amplification", "y", "q")


@dataclass(frozen=True, eq=False)
class CharacteristicPath:
    sign: str           # "plus" or "minus"
    t: np.ndarray
    x: np.ndarray
    u: np.ndarray
    r: np.ndarray
    s: np.ndarray
    grad_r: np.ndarray
    grad_s: np.ndarray
    amplification: np.ndarray

    def __post_init__(self):
        if self.sign not in ("plus", "minus"):
            raise ValueError("sign must be 'plus' or 'minus'")

    def __len__(self):
        return len(self.t)

    @property
    def direction(self):
        return 1.0 if self.sign == "plus" else -1.0

    def weighted(self, law):
        """(y, q) = A sqrt(c) (r_x, s_x) at the nodes."""
        w = self.amplification * np.sqrt(law.sound_speed(self.u))
        return w * self.grad_r, w * self.grad_s

    def nodes(self):
        return list(zip(self.t, self.x, self.u, self.r, self.s, self.grad_r, self.grad_s))

    def to_csv(self, law):
        y, q = self.weighted(law)
        cols = (self.t, self.x, self.u, self.r, self.s, self.grad_r, self.grad_s,
                self.amplification, y, q)
        lines = [",".join(PATH_COLUMNS)]
        for row in zip(*cols):
            lines.append(",".join(format(float(v), ".17g") for v in row))
        return "\n".join(lines) + "\n"


def _snapshot_fields(state):
    rx, sx = state.gradients()
    return state.x, (state.u, state.r, state.s, rx, sx, state.c)


def _path_amplification(model, sign, t, x):
    if model.x_independent:
        return np.asarray(dmp.amplification(model, t), dtype=float) * np.ones_like(t)
    return dmp.path_amplification(model, t, x)


def trace(run_output, start_x, sign, t_end=None, model=None):
    """Follow dx/dt = +c (plus) or -c (minus) from (t0, start_x) through the snapshots.

    ``run_output`` is a Trajectory (uses its snapshots and damping model) or a
    list of FieldState. Heun steps go snapshot to snapshot; field values come
    from linear interpolation in x.
    """
    snaps = getattr(run_output, "snapshots", run_output)
    if model is None:
        model = getattr(run_output, "model", None) or dmp.NoDamping()
    if len(snaps) < 2:
        raise ValueError("need at least two snapshots; run with snapshot_every > 0")
    if sign not in ("plus", "minus"):
        raise ValueError("sign must be 'plus' or 'minus'")
    d = 1.0 if sign == "plus" else -1.0
    if t_end is None:
        t_end = snaps[-1].t
    if t_end > snaps[-1].t * (1 + 1e-12) + 1e-300:
        raise ValueError(f"t_end {t_end} beyond the last snapshot at {snaps[-1].t}")

    rows = []
    x = float(start_x)
    k_last = max(k for k, st in enumerate(snaps) if st.t <= t_end * (1 + 1e-12) + 1e-300)
    fields0 = _snapshot_fields(snaps[0])
    for k in range(k_last + 1):
        xl, flds = fields0
        if not xl[0] <= x <= xl[-1]:
            partial = _build(sign, rows, model) if rows else None
            raise PathLeftDomain(f"{sign} path left the grid at t={snaps[k].t!r}, x={x!r}", partial)
        vals = [float(np.interp(x, xl, f)) for f in flds]
        rows.append((snaps[k].t, x, *vals[:5]))
        if k == k_last:
            break
        fields1 = _snapshot_fields(snaps[k + 1])
        dt = snaps[k + 1].t - snaps[k].t
        c0 = vals[5]
        xp = x + dt * d * c0
        xl1, flds1 = fields1
        c1 = float(np.interp(xp, xl1, flds1[5]))
        x = x + 0.5 * dt * d * (c0 + c1)
        fields0 = fields1
    return _build(sign, rows, model)


def _build(sign, rows, model):
    arr = np.array(rows, dtype=float)
    t, x = arr[:, 0], arr[:, 1]
    amp = _path_amplification(model, sign, t, x)
    return CharacteristicPath(sign, t, x, arr[:, 2], arr[:, 3], arr[:, 4], arr[:, 5], arr[:, 6], amp)


def along_path_functionals(path, law, model):
    """Rows (t, y, q, theta) with the path's amplification factor."""
    y, q = path.weighted(law)
    theta = law.theta(path.u)
    return np.column_stack([path.t, y, q, theta])


def riccati_coefficient(law, u):
    """k(u) = (gamma+1)/4 u^((gamma-3)/4)."""
    return law.riccati_weight(u)


def _inverse_reciprocal_integral(model, target):
    """Smallest t with int_0^t A^-1 = target, or inf."""
    if target <= 0:
        return 0.0
    if target >= dmp.amplification_reciprocal_total(model):
        return math.inf
    if isinstance(model, dmp.NoDamping) or model.lam == 0:
        return target
    lam, mu = model.lam, model.mu
    if mu == 1:
        k = 1 - lam / 2
        if k == 0:
            return math.expm1(target)
        return math.expm1(math.log1p(k * target) / k)
    f = lambda t: dmp.amplification_reciprocal_integral(model, t) - target
    hi = max(1.0, target)
    while f(hi) < 0:
        hi *= 4.0
        if hi > 1e300:
            return math.inf
    return optimize.brentq(f, 0.0, hi, xtol=1e-14, rtol=1e-13, maxiter=400)


def riccati_blowup_time(y0, model, coeff=1.0, t0=0.0):
    """Explosion time of F' = -coeff F^2 / A(t) started from F(t0) = y0.

    Returns inf when y0 >= 0 or when the remaining mass of 1/A is too small.
    """
    if not coeff > 0:
        raise ValueError("coeff must be positive")
    if not model.x_independent:
        raise ValueError("riccati_blowup_time needs x-independent damping")
    if y0 >= 0:
        return math.inf
    base = dmp.amplification_reciprocal_integral(model, t0) if t0 > 0 else 0.0
    return _inverse_reciprocal_integral(model, base + 1.0 / (coeff * -y0))


def riccati_solution(y0, model, t, coeff=1.0):
    """F(t) = y0 / (1 + coeff y0 int_0^t A^-1) (nan past blow-up)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    integ = np.array([dmp.amplification_reciprocal_integral(model, tt) for tt in t])
    den = 1.0 + coeff * y0 * integ
    out = np.where(den > 0, y0 / np.where(den > 0, den, 1.0), np.nan)
    return out if out.size > 1 else float(out[0])


def identity_terms(path, law, model):
    """Cumulative terms of the integrated gradient identity at every node.

    Returns a dict with keys lhs, initial, boundary, damping_rate, space, riccati.
    """
    t, x, u = path.t, path.x, path.u
    d = path.direction
    A = path.amplification
    c = law.sound_speed(u)
    rc = np.sqrt(c)
    own = path.grad_r if path.sign == "minus" else path.grad_s
    Y = A * rc * own
    theta = law.theta(u)
    a, a_t, a_x = (np.asarray(v, dtype=float) * np.ones_like(t) for v in model.eval(t, x))
    # d/dt (A a / 2) along the curve
    dAa = A * (0.25 * a * a + 0.5 * (a_t + d * c * a_x))
    cum = lambda f: integrate.cumulative_trapezoid(f, t, initial=0.0)
    boundary = -(0.5 * A * a * theta - 0.5 * A[0] * a[0] * theta[0])
    rate = cum(theta * dAa)
    space = -cum(A * 0.5 * a_x * rc * (path.r + path.s))
    ric = -cum(law.riccati_weight(u) * Y * Y / A)
    return {"lhs": Y, "initial": np.full_like(Y, Y[0]), "boundary": boundary,
            "damping_rate": rate, "space": space, "riccati": ric}


def lax_identity_residual(path, law, model):
    """max over nodes of |lhs - rhs| in the integrated gradient identity."""
    if len(path) < 2:
        return 0.0
    terms = identity_terms(path, law, model)
    rhs = terms["initial"] + terms["boundary"] + terms["damping_rate"] + terms["space"] + terms["riccati"]
    return float(np.max(np.abs(terms["lhs"] - rhs)))

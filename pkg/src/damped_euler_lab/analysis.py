"""A-priori bound checks, blow-up detection with mesh extrapolation,
lifespan sweeps, scaling fits and blow-up hypothesis checks.

Lifespan per mesh: the run stops once max(|r_x|, |s_x|) crosses its
threshold at some t_c. From there the steepest weighted gradient
Y_c = A sqrt(c) grad follows the Riccati comparison ODE
Y' = -k(u) Y^2 / A, so the mesh estimate is the time this ODE explodes
from (t_c, Y_c), with k and, for space-dependent damping, a frozen at the
witness point. Estimates from successive dyadic meshes are Richardson
extrapolated with the order measured from the three finest.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import math
import os

import numpy as np
from scipy import integrate, stats

from . import damping as dmp
from .characteristics import riccati_blowup_time
from .norms import phi_norm, psi_norm
from .solver import NG, ConfigError, run

__all__ = ["phi_norm", "psi_norm", "check_apriori", "detect_blowup", "estimate_lifespan_sweep",
           "fit_scaling", "check_blowup_hypothesis", "BlowupReport", "ScalingFit", "Verdict",
           "InconsistentClassification", "InsufficientData", "RangeError"]

BOUND_FACTOR = 10.0  # "bounded at blow-up" means below this multiple of the t = 0 value
SWEEP_COLUMNS = ("epsilon", "dx", "t_star", "event", "witness_x")


class InconsistentClassification(RuntimeError):
    pass


class InsufficientData(ValueError):
    pass


class RangeError(ValueError):
    pass


# ---------------------------------------------------------------- a-priori checks

@dataclass
class Check:
    name: str
    passed: bool
    margin: float       # >= 0 when passed; the worst slack over the run
    detail: str = ""


@dataclass
class AprioriReport:
    checks: list

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {"passed": self.passed,
                "checks": [{"name": c.name, "passed": c.passed, "margin": c.margin,
                            "detail": c.detail} for c in self.checks]}


def box_from_norms(law, phi0, psi0, eta_far):
    """(m1, delta1) implied by non-increasing norms.

    s - r <= Psi(0) gives u >= delta1; pairing every node with the far field,
    s - r >= 2 (eta_far - Phi(0)) gives u <= m1 (inf if Phi(0) >= eta_far).
    """
    delta1 = float(law.eta_inverse(0.5 * psi0))
    low_eta = eta_far - phi0
    m1 = float(law.eta_inverse(low_eta)) if low_eta > 0 else math.inf
    return m1, delta1


def check_apriori(trajectory, law=None, model=None, tolerance_per_dx=5.0):
    law = trajectory.law if law is None else law
    model = trajectory.model if model is None else model
    cfg = trajectory.config
    dx = trajectory.dx
    tol = tolerance_per_dx * dx
    checks = []
    for name in ("phi_norm", "psi_norm"):
        col = trajectory.column(name)
        excess = col - (col[0] + tol)
        worst = int(np.argmax(excess))
        checks.append(Check(name + "_nonincreasing", bool(excess[worst] <= 0), float(-excess[worst]),
                            f"worst at t={trajectory.t[worst]:.6g}: {col[worst]:.6g} vs {col[0]:.6g}"))

    st0 = trajectory.initial
    eta_far = float(law.eta(cfg.u_minus))
    m1, delta1 = box_from_norms(law, phi_norm(st0) + tol, psi_norm(st0) + tol, eta_far)
    umax, umin = trajectory.column("max_u"), trajectory.column("min_u")
    margin = min(m1 - umax.max(), umin.min() - delta1)
    checks.append(Check("u_box", bool(margin >= 0), float(margin),
                        f"u in [{umin.min():.6g}, {umax.max():.6g}] vs [{delta1:.6g}, {m1:.6g}]"))

    g = law.gamma
    if 1 < g < 3 and isinstance(model, (dmp.PowerTime, dmp.NoDamping)):
        lam = getattr(model, "lam", 0.0)
        mu = getattr(model, "mu", 1.0)
        if mu == 1 and 0 <= lam < 2:
            t = trajectory.t
            env = (1 + t) ** (1 - lam / 2)
            w = umax ** ((3 - g) / 4) / env
            first = t <= max(10.0, t[min(len(t) - 1, 1)])
            k_fit = float(w[first].max())
            slack = k_fit * (1 + 1e-9) - w
            checks.append(Check("u_power_envelope", bool(slack.min() >= 0), float(slack.min()),
                                f"K~ = {k_fit:.6g} fitted on t <= 10"))

    if not model.x_independent:
        lo, hi = cfg.u_minus / 4, 4 * cfg.u_minus
        margin = min(hi - umax.max(), umin.min() - lo)
        checks.append(Check("u_quarter_band", bool(margin >= 0), float(margin),
                            f"u in [{umin.min():.6g}, {umax.max():.6g}] vs [{lo:.6g}, {hi:.6g}]"))
    return AprioriReport(checks)


# ---------------------------------------------------------------- blow-up detection

@dataclass
class MeshResult:
    n_cells: int
    dx: float
    event: str
    t_cross: float
    t_star: float
    witness_x: float
    n_steps: int


@dataclass
class BlowupReport:
    event: str
    t_star_estimate: float
    extrapolation: list                 # (dx, t_star at dx); dx = 0 is the extrapolated value
    witness_x: float
    bounded_confirmed: dict             # name -> {"ok", "value", "initial"}
    box_constants: tuple                # (m1, delta1) measured on the finest mesh
    meshes: list = field(default_factory=list)
    order: float = math.nan

    @property
    def dx(self):
        return self.meshes[-1].dx if self.meshes else math.nan

    def to_dict(self):
        return {
            "event": self.event,
            "t_star_estimate": self.t_star_estimate,
            "extrapolation": [list(p) for p in self.extrapolation],
            "witness_x": self.witness_x,
            "bounded_confirmed": self.bounded_confirmed,
            "box_constants": list(self.box_constants),
            "order": self.order,
            "meshes": [vars(m) for m in self.meshes],
        }


def _frozen_explosion_time(model, x_w, t_c, y_c, coef):
    """Explosion time of Y' = -coef Y^2 exp(-int_{t_c}^t a(tau, x_w)/2) from Y(t_c) = y_c."""
    target = 1.0 / (coef * -y_c)

    def rhs(t, z):
        a = float(model.eval(t, x_w)[0])
        return [0.5 * a, math.exp(-z[0])]

    def hit(t, z):
        return z[1] - target
    hit.terminal = True
    hit.direction = 1
    t_hi = t_c + max(10.0 * target, 1.0)
    for _ in range(12):
        sol = integrate.solve_ivp(rhs, (t_c, t_hi), [0.0, 0.0], events=hit, rtol=1e-10, atol=1e-12)
        if sol.t_events[0].size:
            return float(sol.t_events[0][0])
        t_hi = t_c + 10.0 * (t_hi - t_c)
    return math.inf


def continuation_time(trajectory):
    """Riccati explosion time from the final (post-crossing) state of a run."""
    st = trajectory.final
    law, model = trajectory.law, trajectory.model
    rx, sx = st.gradients()
    rc = np.sqrt(st.c)
    z = np.minimum(rc * rx, rc * sx)
    k = int(np.argmin(z))
    if not z[k] < 0:
        return st.t
    coef = float(law.riccati_weight(st.u[k]))
    if model.x_independent:
        y_c = dmp.amplification(model, st.t) * z[k]
        return float(riccati_blowup_time(y_c, model, coef, t0=st.t))
    return _frozen_explosion_time(model, float(st.x[k]), st.t, z[k], coef)


def _mesh_result(traj):
    if traj.event == "GradientBlowup":
        t_star = continuation_time(traj)
    elif traj.event == "HorizonReached":
        t_star = math.inf
    else:
        t_star = traj.t_end
    return MeshResult(traj.grid.n_cells, traj.dx, traj.event, traj.t_end, t_star,
                      traj.witness_x, traj.n_steps)


def richardson(times, ratio=2.0, min_order=0.5, max_order=4.0):
    """Extrapolate (coarse -> fine) samples; returns (estimate, order).

    The order is measured from the last three samples; outside
    [min_order, max_order] (or with two samples) the finest value is returned
    unextrapolated, except that two samples use order 2.
    """
    t = [float(x) for x in times]
    if len(t) < 2 or not all(math.isfinite(x) for x in t[-2:]):
        return t[-1], math.nan
    if len(t) == 2:
        p = 2.0
    else:
        d1, d2 = t[-3] - t[-2], t[-2] - t[-1]
        if d2 == 0:
            return t[-1], math.inf
        rho = d1 / d2
        if not rho > 0 or not math.isfinite(rho):
            return t[-1], math.nan
        p = math.log(rho, ratio)
        if not min_order <= p <= max_order:
            return t[-1], p
    return t[-1] + (t[-1] - t[-2]) / (ratio ** p - 1.0), p


def _bounded(traj):
    st0, st = traj.initial, traj.final
    amp = max(float(np.abs(st0.v).max()),
              0.5 * float(np.ptp(st0.r)), 0.5 * float(np.ptp(st0.s)))
    pairs = {
        "u_upper": (float(st.u.max()), float(st0.u.max())),
        "u_lower": (1.0 / float(st.u.min()), 1.0 / float(st0.u.min())),
        "v_sup": (float(np.abs(st.v).max()), amp),
        "dp_sup": (float(np.max(st.c ** 2)), float(np.max(st0.c ** 2))),
    }
    return {k: {"ok": bool(val < BOUND_FACTOR * ref), "value": val, "initial": ref}
            for k, (val, ref) in pairs.items()}


def _run_level(args):
    config, t_max = args
    return run(config, t_max=t_max)


def detect_blowup(config, mesh_levels=None, t_max=None, jobs=1, keep_runs=False):
    """Run ``mesh_levels`` dyadic refinements starting at config.n_cells."""
    levels = config.sweep_mesh_levels if mesh_levels is None else int(mesh_levels)
    if levels < 2:
        raise ValueError("mesh_levels must be at least 2")
    cfgs = [config.with_(n_cells=config.n_cells * 2 ** k) for k in range(levels)]
    jobs = _jobs(jobs)
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            trajs = list(pool.map(_run_level, [(c, t_max) for c in cfgs]))
    else:
        trajs = [run(c, t_max=t_max) for c in cfgs]
    meshes = [_mesh_result(tr) for tr in trajs]
    kinds = {m.event for m in meshes}
    if len(kinds) > 1:
        raise InconsistentClassification(
            "meshes disagree on the event: " + ", ".join(f"n={m.n_cells}: {m.event}" for m in meshes))
    event = meshes[-1].event
    finest = trajs[-1]
    est, order = richardson([m.t_star for m in meshes])
    extrap = [(m.dx, m.t_star) for m in meshes] + [(0.0, est)]
    m1 = float(finest.column("max_u").max())
    d1 = float(finest.column("min_u").min())
    report = BlowupReport(event, est, extrap, meshes[-1].witness_x, _bounded(finest), (m1, d1),
                          meshes, order)
    if keep_runs:
        report.runs = trajs
    return report


# ---------------------------------------------------------------- sweeps and fits

def _jobs(jobs=None):
    env = os.environ.get("DAMPED_EULER_LAB_JOBS")
    if env:
        return max(1, int(env))
    if jobs is None:
        return os.cpu_count() or 1
    return max(1, int(jobs))


def oracle_lifespan(config):
    """Riccati prediction from the initial data: steepest sqrt(c0) grad, k at u_minus."""
    law, model = config.law(), config.damping_model()
    grid = config.grid()
    fam = config.family()
    x = grid.x
    u0, v0 = fam.evaluate(x)
    r0, s0 = law.to_riemann(u0, v0)
    rc = np.sqrt(law.sound_speed(u0))
    y0 = float(np.min(np.minimum(rc * np.gradient(r0, grid.dx), rc * np.gradient(s0, grid.dx))))
    coef = float(law.riccati_weight(config.u_minus))
    if not model.x_independent:
        model = dmp.NoDamping()
    return riccati_blowup_time(y0, model, coef) if y0 < 0 else math.inf


@dataclass
class SweepEntry:
    epsilon: float
    report: BlowupReport = None
    error: str = ""
    t_max: float = math.nan

    @property
    def t_star(self):
        return self.report.t_star_estimate if self.report else math.nan

    def row(self):
        if self.report is None:
            return (self.epsilon, math.nan, math.nan, "Error: " + self.error, math.nan)
        r = self.report
        return (self.epsilon, r.dx, r.t_star_estimate, r.event, r.witness_x)


def _sweep_one(args):
    config, eps, t_max_factor, t_cap, levels = args
    cfg = config.with_(epsilon=eps)
    try:
        t_pred = oracle_lifespan(cfg)
        t_max = min(t_max_factor * t_pred, t_cap)
        if not math.isfinite(t_max):
            t_max = cfg.t_max
        cfg = cfg.with_(t_max=t_max)
        errs = cfg.domain_errors()
        if errs:
            raise ConfigError("; ".join(errs))
        return SweepEntry(eps, detect_blowup(cfg, levels, jobs=1), t_max=t_max)
    except Exception as exc:  # recorded inline, the sweep goes on
        return SweepEntry(eps, None, f"{type(exc).__name__}: {exc}")


def estimate_lifespan_sweep(base_config, epsilons, t_max_factor=10.0, t_cap=math.inf,
                            mesh_levels=None, jobs=1):
    """detect_blowup for each epsilon with t_max = min(t_max_factor * oracle, t_cap)."""
    eps = sorted(float(e) for e in epsilons)
    if any(not e > 0 for e in eps):
        raise ValueError("epsilons must be positive")
    args = [(base_config, e, t_max_factor, t_cap, mesh_levels) for e in eps]
    jobs = min(_jobs(jobs), max(1, len(args)))
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(_sweep_one, args))
    return [_sweep_one(a) for a in args]


def sweep_csv(entries):
    lines = [",".join(SWEEP_COLUMNS)]
    for e in entries:
        row = e.row()
        lines.append(",".join(v if isinstance(v, str) else format(float(v), ".17g") for v in row))
    return "\n".join(lines) + "\n"


@dataclass
class ScalingFit:
    samples: list
    regime: str
    slope: float                 # exponent (PowerLaw) or coefficient C (ExpLaw)
    fitted_log_coefficient: float
    r_squared: float

    @property
    def fitted_exponent(self):
        return self.slope

    @property
    def exponent_or_coefficient(self):
        return self.slope

    def to_dict(self):
        return {"regime": self.regime, "exponent_or_coefficient": self.slope,
                "r_squared": self.r_squared, "n_samples": len(self.samples)}


def fit_scaling(sweep_result, regime="PowerLaw"):
    """Least squares of log T vs log eps (PowerLaw) or vs 1/eps (ExpLaw)."""
    if regime not in ("PowerLaw", "ExpLaw"):
        raise ValueError("regime must be PowerLaw or ExpLaw")
    pts = []
    for item in sweep_result:
        if isinstance(item, SweepEntry):
            eps, t = item.epsilon, item.t_star
        else:
            eps, t = item
            t = getattr(t, "t_star_estimate", t)
        if t is not None and math.isfinite(t) and t > 0:
            pts.append((float(eps), float(t)))
    if len(pts) < 3:
        raise InsufficientData(f"need at least 3 finite lifespans, got {len(pts)}")
    e = np.array([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    xs = np.log(e) if regime == "PowerLaw" else 1.0 / e
    fit = stats.linregress(xs, y)
    r2 = float(min(1.0, max(0.0, fit.rvalue ** 2)))
    return ScalingFit(pts, regime, float(fit.slope), float(fit.intercept), r2)


# ---------------------------------------------------------------- hypothesis checks

@dataclass
class Verdict:
    kind: str                      # PredictsBlowup | NoPrediction | HypothesisViolated
    witness_x: np.ndarray = None
    reason: str = ""

    def to_dict(self):
        w = [] if self.witness_x is None else [float(x) for x in self.witness_x]
        return {"verdict": self.kind, "witness_x": w, "reason": self.reason}


HYPOTHESIS_VARIANTS = ("gradient_threshold", "weighted_gradient", "space_time")


def check_blowup_hypothesis(state0, law, model, variant="gradient_threshold", K=None,
                            smallness=None, u_minus=1.0):
    """Pointwise blow-up criteria on initial data.

    gradient_threshold / space_time: min(r_x, s_x) <= -K somewhere, given
        sup |r(x) + s(y)| below ``smallness`` (default 1/(gamma-1) u_minus^{-(gamma-1)/2}).
    weighted_gradient: sqrt(c0) r_x < -(lam/2) theta(u0) or the same for s_x;
        only for 1 < gamma < 3 with time-only damping lam/(1+t)^mu, mu >= 1, lam <= 2.
    """
    if variant not in HYPOTHESIS_VARIANTS:
        raise ValueError(f"variant must be one of {HYPOTHESIS_VARIANTS}")
    g = law.gamma
    rx, sx = state0.gradients()
    x = state0.x
    if variant == "weighted_gradient":
        lam = getattr(model, "lam", 0.0) if not isinstance(model, dmp.NoDamping) else 0.0
        mu = getattr(model, "mu", 1.0) if not isinstance(model, dmp.NoDamping) else 1.0
        if not model.x_independent:
            raise RangeError("weighted_gradient needs time-only damping")
        if not 1 < g < 3:
            raise RangeError(f"weighted_gradient needs 1 < gamma < 3, got {g}")
        if mu < 1:
            raise RangeError(f"weighted_gradient needs mu >= 1, got {mu}")
        if lam > 2:
            raise RangeError(f"weighted_gradient needs lambda <= 2, got {lam}")
        rc = np.sqrt(state0.c)
        bound = -(lam / 2) * law.theta(state0.u)
        hit = (rc * rx < bound) | (rc * sx < bound)
        if hit.any():
            return Verdict("PredictsBlowup", x[hit])
        return Verdict("NoPrediction")

    if variant == "space_time" and model.x_independent:
        raise RangeError("space_time variant expects space-dependent damping")
    if variant == "gradient_threshold" and not model.x_independent:
        raise RangeError("gradient_threshold variant expects time-only damping; use space_time")
    K = REFERENCE_K if K is None else K
    if smallness is None:
        smallness = u_minus ** (-(g - 1) / 2) / (g - 1)
    phi0 = phi_norm(state0)
    if not phi0 < smallness:
        return Verdict("HypothesisViolated", reason=f"sup|r + s| = {phi0:.6g} not below {smallness:.6g}")
    hit = (rx <= -K) | (sx <= -K)
    if hit.any():
        return Verdict("PredictsBlowup", x[hit])
    return Verdict("NoPrediction")


REFERENCE_K = 0.1 * math.sqrt(2.0) * math.exp(-0.5)

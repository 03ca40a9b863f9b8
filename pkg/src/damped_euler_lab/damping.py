"""Damping coefficients a(t, x) >= 0 and the amplification factors built from them.

Builtin variants return exact analytic derivatives. ``Tabulated`` uses a
bilinear interpolant with clamped extrapolation; its derivative slots are
the interpolant's slopes (zero in a clamped direction).
"""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy import integrate, special


class DampingModel:
    """Base class. Subclasses implement :meth:`eval`."""

    x_independent = False

    def eval(self, t, x):
        """Return ``(a, a_t, a_x)`` broadcast over ``t`` and ``x``."""
        raise NotImplementedError

    def __call__(self, t, x):
        return self.eval(t, x)[0]


@dataclass(frozen=True)
class NoDamping(DampingModel):
    x_independent = True

    def eval(self, t, x):
        z = np.zeros(np.broadcast(np.asarray(t), np.asarray(x)).shape)
        if z.ndim == 0:
            return 0.0, 0.0, 0.0
        return z, z.copy(), z.copy()

    def rate(self, t):
        return 0.0 * np.asarray(t, dtype=float)


@dataclass(frozen=True)
class PowerTime(DampingModel):
    """a(t) = lam / (1 + t)**mu."""

    lam: float
    mu: float
    x_independent = True

    def __post_init__(self):
        if self.lam < 0 or self.mu < 0:
            raise ValueError("PowerTime needs lam >= 0 and mu >= 0")

    def rate(self, t):
        return self.lam / (1.0 + np.asarray(t, dtype=float)) ** self.mu

    def eval(self, t, x):
        t = np.asarray(t, dtype=float)
        shape = np.broadcast(t, np.asarray(x)).shape
        a = self.lam / (1.0 + t) ** self.mu
        a_t = -self.mu * self.lam / (1.0 + t) ** (self.mu + 1)
        z = np.zeros(shape)
        if not shape:
            return float(a), float(a_t), 0.0
        return np.broadcast_to(a, shape).copy(), np.broadcast_to(a_t, shape).copy(), z


SPACE_TIME_KINDS = ("space_decay", "space_smooth", "time_front")


@dataclass(frozen=True)
class SpaceTimeBuiltin(DampingModel):
    """Space or space-time dependent coefficients.

    kinds:
      space_decay   amplitude * (1 + |x|)**-mu   (kink at x = 0, a_x taken as 0 there)
      space_smooth  amplitude * (1 + x**2)**(-mu/2)
      time_front    amplitude * (1 + t)**-mu * (1 + tanh(x / length)) / 2
    """

    kind: str
    amplitude: float
    mu: float
    length: float = 1.0

    def __post_init__(self):
        if self.kind not in SPACE_TIME_KINDS:
            raise ValueError(f"unknown space-time damping kind {self.kind!r}")
        if self.amplitude < 0:
            raise ValueError("damping amplitude must be non-negative")
        if self.length <= 0:
            raise ValueError("length must be positive")

    def eval(self, t, x):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        t, x = np.broadcast_arrays(t, x)
        A, mu = self.amplitude, self.mu
        if self.kind == "space_decay":
            ax = 1.0 + np.abs(x)
            a = A * ax ** -mu
            a_t = np.zeros_like(a)
            a_x = -mu * A * ax ** (-mu - 1) * np.sign(x)
        elif self.kind == "space_smooth":
            q = 1.0 + x * x
            a = A * q ** (-mu / 2)
            a_t = np.zeros_like(a)
            a_x = -mu * A * x * q ** (-mu / 2 - 1)
        else:
            L = self.length
            th = np.tanh(x / L)
            decay = (1.0 + t) ** -mu
            a = A * decay * (1.0 + th) / 2
            a_t = -mu * A * (1.0 + t) ** (-mu - 1) * (1.0 + th) / 2
            a_x = A * decay * (1.0 - th * th) / (2 * L)
        if a.ndim == 0:
            return float(a), float(a_t), float(a_x)
        return a, a_t, a_x


@dataclass(frozen=True, eq=False)
class Tabulated(DampingModel):
    """Bilinear table over a (t, x) lattice; rows are times."""

    t_grid: np.ndarray
    x_grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        tg = np.asarray(self.t_grid, dtype=float)
        xg = np.asarray(self.x_grid, dtype=float)
        vals = np.asarray(self.values, dtype=float).reshape(tg.size, xg.size)
        if tg.size < 2 or xg.size < 2:
            raise ValueError("tabulated damping needs at least 2 points per axis")
        if np.any(np.diff(tg) <= 0) or np.any(np.diff(xg) <= 0):
            raise ValueError("table grids must be strictly increasing")
        if np.any(vals < 0):
            raise ValueError("tabulated damping must be non-negative")
        object.__setattr__(self, "t_grid", tg)
        object.__setattr__(self, "x_grid", xg)
        object.__setattr__(self, "values", vals)

    @staticmethod
    def _locate(grid, q):
        qc = np.clip(q, grid[0], grid[-1])
        i = np.clip(np.searchsorted(grid, qc, side="right") - 1, 0, grid.size - 2)
        h = grid[i + 1] - grid[i]
        w = (qc - grid[i]) / h
        inside = (q >= grid[0]) & (q <= grid[-1])
        return i, w, h, inside

    def eval(self, t, x):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        t, x = np.broadcast_arrays(t, x)
        i, wt, ht, in_t = self._locate(self.t_grid, t)
        j, wx, hx, in_x = self._locate(self.x_grid, x)
        V = self.values
        a00, a01 = V[i, j], V[i, j + 1]
        a10, a11 = V[i + 1, j], V[i + 1, j + 1]
        a = (1 - wt) * ((1 - wx) * a00 + wx * a01) + wt * ((1 - wx) * a10 + wx * a11)
        a_t = ((1 - wx) * (a10 - a00) + wx * (a11 - a01)) / ht * in_t
        a_x = ((1 - wt) * (a01 - a00) + wt * (a11 - a10)) / hx * in_x
        if a.ndim == 0:
            return float(a), float(a_t), float(a_x)
        return a, a_t, a_x

    @classmethod
    def from_text(cls, text):
        """Parse ``nt nx`` then the t-grid, the x-grid and nt*nx row-major values."""
        tokens = text.split()
        if len(tokens) < 2:
            raise ValueError("damping table: missing header")
        nt, nx = int(tokens[0]), int(tokens[1])
        nums = np.array([float(tok) for tok in tokens[2:]])
        need = nt + nx + nt * nx
        if nums.size != need:
            raise ValueError(f"damping table: expected {need} numbers after header, got {nums.size}")
        return cls(nums[:nt], nums[nt:nt + nx], nums[nt + nx:].reshape(nt, nx))

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    def to_text(self):
        lines = [f"{self.t_grid.size} {self.x_grid.size}",
                 " ".join(repr(float(v)) for v in self.t_grid),
                 " ".join(repr(float(v)) for v in self.x_grid)]
        lines += [" ".join(repr(float(v)) for v in row) for row in self.values]
        return "\n".join(lines) + "\n"


def _require_x_independent(model):
    if not model.x_independent:
        raise ValueError("amplification(t) is only defined for x-independent damping; "
                         "use path_amplification")


def _log_amplification(model, t):
    t = np.asarray(t, dtype=float)
    if isinstance(model, NoDamping) or model.lam == 0:
        return np.zeros_like(t)
    lam, mu = model.lam, model.mu
    if mu == 1:
        return lam / 2 * np.log1p(t)
    return lam * ((1.0 + t) ** (1 - mu) - 1.0) / (2 * (1 - mu))


def amplification(model, t):
    """A(t) = exp(int_0^t a(tau)/2 dtau) for time-only damping."""
    _require_x_independent(model)
    out = np.exp(_log_amplification(model, t))
    return float(out) if out.ndim == 0 else out


def _segments(t):
    # geometric breakpoints keep quad accurate over many decades
    edges = [0.0]
    b = 1.0
    while b < t:
        edges.append(b)
        b *= 10.0
    edges.append(t)
    return edges


def _reciprocal_integral_quad(model, t, tol=1e-10):
    f = lambda tau: math.exp(-float(_log_amplification(model, tau)))
    total = 0.0
    edges = _segments(t)
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=tol, limit=200)
        total += val
    return total


def amplification_reciprocal_integral(model, t):
    """int_0^t A(tau)**-1 dtau; closed form for mu = 1 or no damping, quadrature otherwise."""
    _require_x_independent(model)
    t = float(t)
    if t < 0:
        raise ValueError("t must be non-negative")
    if isinstance(model, NoDamping) or model.lam == 0:
        return t
    lam, mu = model.lam, model.mu
    if mu == 1:
        k = 1 - lam / 2
        if k == 0:
            return math.log1p(t)
        return math.expm1(k * math.log1p(t)) / k
    return _reciprocal_integral_quad(model, t)


def amplification_reciprocal_total(model):
    """Limit of the reciprocal integral as t -> infinity (may be inf)."""
    _require_x_independent(model)
    if isinstance(model, NoDamping) or model.lam == 0:
        return math.inf
    lam, mu = model.lam, model.mu
    if mu > 1 or (mu == 1 and lam <= 2):
        return math.inf
    if mu == 1:
        return 1.0 / (lam / 2 - 1)
    # mu < 1: with w = (1+t)^(1-mu) the integral is an upper incomplete gamma function
    kap = lam / (2 * (1 - mu))
    b = 1.0 / (1 - mu)
    q = special.gammaincc(b, kap)
    if q > 0:
        return math.exp(kap - math.log(1 - mu) - b * math.log(kap) + special.gammaln(b) + math.log(q))
    f = lambda tau: math.exp(-float(_log_amplification(model, tau)))
    val, _ = integrate.quad(f, 0, math.inf, epsabs=0.0, epsrel=1e-10, limit=400)
    return val


def path_amplification(model, path, x=None):
    """exp of the cumulative trapezoid of a(tau, x(tau))/2 along a path.

    ``path`` is a CharacteristicPath, or a time array when ``x`` is given.
    """
    if x is None:
        t, x = path.t, path.x
    else:
        t = path
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if t.size == 0:
        raise ValueError("empty path")
    half_a = 0.5 * np.asarray(model.eval(t, x)[0], dtype=float)
    return np.exp(integrate.cumulative_trapezoid(half_a, t, initial=0.0))


@dataclass(frozen=True)
class TimeDecay:
    """0 <= a <= A1 (1+t)^-mu and |a_t| + |a_x| <= A2 (1+t)^-mu, plus a far-field limit in x."""

    A1: float
    A2: float
    mu: float


@dataclass(frozen=True)
class SpaceDecay:
    """0 <= a <= A3 (1+|x|)^-mu and |a_t| + |a_x| <= A4 (1+|x|)^-mu."""

    A3: float
    A4: float
    mu: float


@dataclass
class BoundCheck:
    name: str
    worst_ratio: float
    witness: tuple
    passed: bool


@dataclass
class ValidationReport:
    hypothesis: object
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def to_dict(self):
        return {
            "hypothesis": type(self.hypothesis).__name__,
            "passed": self.passed,
            "checks": [
                {"name": c.name, "worst_ratio": c.worst_ratio,
                 "witness_t": c.witness[0], "witness_x": c.witness[1], "passed": c.passed}
                for c in self.checks
            ],
        }


def _worst(name, ratio, T, X, limit=1.0):
    k = np.unravel_index(np.argmax(ratio), ratio.shape)
    worst = float(ratio[k])
    return BoundCheck(name, worst, (float(T[k]), float(X[k])), worst <= limit * (1 + 1e-12))


def validate_bounds(model, hypothesis, t_grid=None, x_grid=None, far_field_tol=1e-3):
    """Sample a on a (t, x) lattice and test the decay hypothesis pointwise."""
    if hypothesis.mu <= 1:
        raise ValueError("decay hypotheses require mu > 1")
    if t_grid is None:
        t_grid = np.linspace(0.0, 100.0, 401)
    if x_grid is None:
        x_grid = np.linspace(-200.0, 200.0, 401)
    T, X = np.meshgrid(np.asarray(t_grid, float), np.asarray(x_grid, float), indexing="ij")
    a, a_t, a_x = (np.broadcast_to(q, T.shape) for q in model.eval(T, X))
    report = ValidationReport(hypothesis)

    neg = np.maximum(-a, 0.0)
    report.checks.append(_worst("nonnegative", neg, T, X, limit=0.0))
    if isinstance(hypothesis, TimeDecay):
        env = (1.0 + T) ** -hypothesis.mu
        report.checks.append(_worst("a_bound", a / (hypothesis.A1 * env), T, X))
        report.checks.append(_worst("derivative_bound", (np.abs(a_t) + np.abs(a_x)) / (hypothesis.A2 * env), T, X))
        # far-field limit: the leftmost tenth of the lattice should already be flat in x
        k = max(2, x_grid.size // 10)
        spread = np.ptp(a[:, :k], axis=1) / np.maximum(hypothesis.A1 * env[:, 0], 1e-300)
        i = int(np.argmax(spread))
        report.checks.append(BoundCheck("far_field_limit", float(spread[i]),
                                        (float(T[i, 0]), float(X[i, 0])), spread[i] <= far_field_tol))
    elif isinstance(hypothesis, SpaceDecay):
        env = (1.0 + np.abs(X)) ** -hypothesis.mu
        report.checks.append(_worst("a_bound", a / (hypothesis.A3 * env), T, X))
        report.checks.append(_worst("derivative_bound", (np.abs(a_t) + np.abs(a_x)) / (hypothesis.A4 * env), T, X))
    else:
        raise TypeError(f"unknown hypothesis {hypothesis!r}")
    return report

"""Compiled right-hand side for the characteristic scheme (numba).

Mirrors ``solver._Stepper.rhs`` exactly; ``HAVE_NUMBA`` is False when numba
is missing and the solver then uses its numpy path.
"""
import numpy as np

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f
        return wrap(args[0]) if args and callable(args[0]) else wrap


@njit(cache=True, inline="always")
def _limit(dl, dr, kind):
    p = dl * dr
    if p <= 0.0:
        return 0.0
    if kind == 0:  # minmod
        if dl > 0:
            return min(dl, dr)
        return max(dl, dr)
    return 2.0 * p / (dl + dr)


@njit(cache=True)
def rhs_kernel(r, s, a, c_base, c_exp, V, dx, kind, dr, ds):
    """Fill dr, ds (ghosts included). ``a`` has length 1 (uniform) or len(r)."""
    m = r.shape[0]
    uniform = a.shape[0] == 1
    for i in range(m):
        ai = a[0] if uniform else a[i]
        src = -0.5 * ai * (r[i] + s[i])
        dr[i] = src
        ds[i] = src
    for i in range(2, m - 2):
        c = (c_base * 0.5 * (s[i] - r[i])) ** c_exp
        for which in range(2):
            f = r if which == 0 else s
            w = (-c - V) if which == 0 else (c - V)
            if w > 0:
                # left-biased: (f_i - f_{i-1}) + (sig_i - sig_{i-1})/2
                sig_i = _limit(f[i] - f[i - 1], f[i + 1] - f[i], kind)
                sig_m = _limit(f[i - 1] - f[i - 2], f[i] - f[i - 1], kind)
                der = (f[i] - f[i - 1] + 0.5 * (sig_i - sig_m)) / dx
            else:
                sig_p = _limit(f[i + 1] - f[i], f[i + 2] - f[i + 1], kind)
                sig_i = _limit(f[i] - f[i - 1], f[i + 1] - f[i], kind)
                der = (f[i + 1] - f[i] - 0.5 * (sig_p - sig_i)) / dx
            if which == 0:
                dr[i] -= w * der
            else:
                ds[i] -= w * der


@njit(cache=True)
def check_kernel(r, s, floor):
    """0 if valid, else (1 non-finite | 2 vacuum, index of the worst node)."""
    worst = 0
    gap_min = np.inf
    for i in range(r.shape[0]):
        g = s[i] - r[i]
        if not (np.isfinite(g) and np.isfinite(r[i] + s[i])):
            return 1, i
        if g < gap_min:
            gap_min = g
            worst = i
    if gap_min <= floor:
        return 2, worst
    return 0, worst


@njit(cache=True)
def _extrapolate(r, s, left, right):
    m = r.shape[0]
    if left:
        r[0] = r[2]
        r[1] = r[2]
        s[0] = s[2]
        s[1] = s[2]
    if right:
        r[m - 1] = r[m - 3]
        r[m - 2] = r[m - 3]
        s[m - 1] = s[m - 3]
        s[m - 2] = s[m - 3]


@njit(cache=True)
def heun_kernel(r, s, a0, a1, c_base, c_exp, V, dx, kind, dt, left, right, floor):
    """One Heun step; returns (code, index, r_new, s_new) with code as in check_kernel.

    code 1/2 from the intermediate stage is reported with index + len(r)."""
    m = r.shape[0]
    dr = np.empty(m)
    ds = np.empty(m)
    code, k = check_kernel(r, s, floor)
    if code:
        return code, k, r, s
    rhs_kernel(r, s, a0, c_base, c_exp, V, dx, kind, dr, ds)
    r1 = r + dt * dr
    s1 = s + dt * ds
    _extrapolate(r1, s1, left, right)
    code, k = check_kernel(r1, s1, floor)
    if code:
        return code, k + m, r1, s1
    rhs_kernel(r1, s1, a1, c_base, c_exp, V, dx, kind, dr, ds)
    r2 = 0.5 * (r + r1 + dt * dr)
    s2 = 0.5 * (s + s1 + dt * ds)
    _extrapolate(r2, s2, left, right)
    code, k = check_kernel(r2, s2, floor)
    return code, k, r2, s2


@njit(cache=True)
def _grad_at(f, i, lo, hi, dx):
    # np.gradient(edge_order=2) on f[lo:hi], evaluated at absolute index i
    if i == lo:
        return (-3.0 * f[lo] + 4.0 * f[lo + 1] - f[lo + 2]) / (2.0 * dx)
    if i == hi - 1:
        return (3.0 * f[hi - 1] - 4.0 * f[hi - 2] + f[hi - 3]) / (2.0 * dx)
    return (f[i + 1] - f[i - 1]) / (2.0 * dx)


@njit(cache=True)
def step_monitors(r, s, ng, dx, c_base, c_exp, skip_lo, skip_hi):
    """(max c, min sqrt(c) r_x, argmin, min sqrt(c) s_x, argmin) over the interior.

    The gradient minima ignore ``skip_lo``/``skip_hi`` nodes at either end."""
    lo = ng
    hi = r.shape[0] - ng
    cmax = 0.0
    mr = np.inf
    ms = np.inf
    kr = 0
    ks = 0
    for i in range(lo, hi):
        c = (c_base * 0.5 * (s[i] - r[i])) ** c_exp
        if c > cmax:
            cmax = c
        if i < lo + skip_lo or i >= hi - skip_hi:
            continue
        rc = np.sqrt(c)
        gr = rc * _grad_at(r, i, lo, hi, dx)
        gs = rc * _grad_at(s, i, lo, hi, dx)
        if gr < mr:
            mr = gr
            kr = i - lo
        if gs < ms:
            ms = gs
            ks = i - lo
    return cmax, mr, kr, ms, ks

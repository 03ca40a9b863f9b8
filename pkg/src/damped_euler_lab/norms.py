"""Sup norms of r(x) + s(y) and s(x) - r(y) over all node pairs."""
import numpy as np


def _rs(state_or_r, s=None):
    if s is None:
        return np.asarray(state_or_r.r, dtype=float), np.asarray(state_or_r.s, dtype=float)
    return np.asarray(state_or_r, dtype=float), np.asarray(s, dtype=float)


def phi_norm(state, s=None):
    """sup |r(x) + s(y)|, attained at a pair of extremes."""
    r, s = _rs(state, s)
    return float(max(r.max() + s.max(), -(r.min() + s.min())))


def psi_norm(state, s=None):
    """sup |s(x) - r(y)|, attained at a pair of extremes."""
    r, s = _rs(state, s)
    return float(max(abs(s.max() - r.min()), abs(r.max() - s.min())))

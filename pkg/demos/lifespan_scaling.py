"""Lifespan against amplitude for a = lam/(1+t)^mu, gamma = 2.

T*(eps) ~ eps^-1 for mu > 1, eps^(-2/(2-lam)) for mu = 1 and lam < 2,
and exp(C/eps) for mu = 1, lam = 2. Each point is a three-mesh blow-up
detection in a window moving with the left-going pulse.

    python demos/lifespan_scaling.py          # mu=2, lam=1 only (~40 s)
    python demos/lifespan_scaling.py --all    # all four cases (~6 min on one core)
"""
import sys

from damped_euler_lab import RunConfig
from damped_euler_lab.analysis import estimate_lifespan_sweep, fit_scaling

EPS = (0.05, 0.0707, 0.1, 0.1414, 0.2, 0.2828, 0.4)
CASES = [  # (mu, lam, pulse width, regime, predicted exponent)
    (2.0, 1.0, 4.0, "PowerLaw", -1.0),
    (1.0, 1.0, 4.0, "PowerLaw", -2.0),
    (1.0, 0.5, 4.0, "PowerLaw", -4 / 3),
    (1.0, 2.0, 0.2, "ExpLaw", None),
]

for mu, lam, w, regime, want in CASES if "--all" in sys.argv else CASES[:1]:
    cfg = RunConfig(gamma=2.0, lam=lam, mu=mu, shape_psi=f"0.9610582*odd_gaussian({w})",
                    x_left=-14 * w, x_right=9 * w, n_cells=1000, frame_speed=-1.0,
                    record_interval=1.0)
    res = estimate_lifespan_sweep(cfg, EPS, t_cap=1e5)
    print(f"\nmu={mu:g} lambda={lam:g}")
    for e in res:
        print(f"  eps={e.epsilon:<7g} T*={e.t_star:12.4f}  {e.report.event if e.report else e.error}")
    fit = fit_scaling(res, regime)
    if want is None:
        power = fit_scaling(res, "PowerLaw")
        print(f"  ExpLaw C={fit.slope:.3f} r2={fit.r_squared:.4f}  (PowerLaw r2={power.r_squared:.4f})")
    else:
        print(f"  exponent {fit.slope:.3f} (predicted {want:.3f}), r2={fit.r_squared:.4f}")

"""Command-line front end: ``damped-euler-lab <subcommand> ...``.

Exit status: 0 success, 1 config error, 2 classification differs from
``--expect``, 64 usage error (including unknown subcommands).
"""
import argparse
import math
import os
import sys

from . import analysis, characteristics, damping
from .config import ConfigErrors, RunConfig, load_config, parse_config
from .solver import ConfigError, run
from .thermo import DomainError

EXIT_OK, EXIT_CONFIG, EXIT_EXPECT, EXIT_USAGE = 0, 1, 2, 64

EXPECT = {"blowup": {"GradientBlowup"}, "horizon": {"HorizonReached"},
          "vacuum": {"VacuumEvent"}, "pressure": {"PressureDerivativeBlowup"}}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def dumps(obj):
    """Deterministic JSON with floats at 17 significant digits (inf/nan as null)."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None:
        return {True: "true", False: "false", None: "null"}[obj]
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format(obj, ".17g") if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        import json
        return json.dumps(obj)
    if hasattr(obj, "__float__"):
        return dumps(float(obj))
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _config(args):
    overrides = "\n".join(args.set or [])
    if args.config:
        return load_config(args.config, overrides=overrides)
    return parse_config("", overrides=overrides)


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _check_expect(args, event):
    if args.expect and event not in EXPECT[args.expect]:
        sys.stderr.write(f"expected {args.expect}, got {event}\n")
        return EXIT_EXPECT
    return EXIT_OK


def cmd_simulate(args):
    cfg = _config(args)
    traj = run(cfg)
    _emit(traj.to_csv(), args.out)
    if args.out:
        print(dumps(traj.report()))
    return _check_expect(args, traj.event)


def cmd_trace(args):
    cfg = _config(args)
    traj = run(cfg, snapshot_every=args.snapshot_every)
    path = characteristics.trace(traj, args.x0, args.sign, t_end=args.t_end)
    _emit(path.to_csv(traj.law), args.out)
    return EXIT_OK


def _time_model(lam, mu):
    return damping.NoDamping() if lam == 0 else damping.PowerTime(lam, mu)


def cmd_oracle(args):
    model = _time_model(args.lam, args.mu)
    t = characteristics.riccati_blowup_time(args.y0, model, args.coeff, t0=args.t0)
    print(dumps({"t_blowup": t, "finite": math.isfinite(t), "y0": args.y0, "lambda": args.lam,
                 "mu": args.mu, "coeff": args.coeff}))
    return EXIT_OK


def cmd_check(args):
    from .solver import make_initial
    cfg = _config(args)
    law = cfg.law()
    st0 = make_initial(cfg.family(), cfg.grid(), law)
    variant = args.variant
    model = cfg.damping_model()
    if variant is None:
        variant = "gradient_threshold" if model.x_independent else "space_time"
    try:
        verdict = analysis.check_blowup_hypothesis(
            st0, law, model, variant, K=cfg.threshold("K"), smallness=cfg.smallness(),
            u_minus=cfg.u_minus)
    except analysis.RangeError as exc:
        print(dumps({"verdict": "RangeError", "reason": str(exc)}))
        return EXIT_CONFIG
    print(dumps(verdict.to_dict()))
    if args.expect:
        want = {"blowup": "PredictsBlowup", "horizon": "NoPrediction"}.get(args.expect)
        if verdict.kind != want:
            return EXIT_EXPECT
    return EXIT_OK


def cmd_sweep(args):
    cfg = _config(args)
    eps = [float(e) for e in args.epsilons.split(",")] if args.epsilons else list(cfg.sweep_epsilons)
    res = analysis.estimate_lifespan_sweep(cfg, eps, t_max_factor=args.t_max_factor,
                                           t_cap=args.t_cap, jobs=args.jobs)
    _emit(analysis.sweep_csv(res), args.out)
    try:
        fit = analysis.fit_scaling(res, args.regime).to_dict()
    except analysis.InsufficientData as exc:
        fit = {"regime": args.regime, "exponent_or_coefficient": None, "r_squared": None,
               "n_samples": sum(1 for e in res if math.isfinite(e.t_star)), "error": str(exc)}
    print(dumps(fit))
    return EXIT_OK


def cmd_validate_damping(args):
    cfg = _config(args)
    model = cfg.damping_model()
    if args.hypothesis == "time":
        hyp = damping.TimeDecay(args.A1, args.A2, args.hyp_mu)
    else:
        hyp = damping.SpaceDecay(args.A1, args.A2, args.hyp_mu)
    report = damping.validate_bounds(model, hyp)
    print(dumps(report.to_dict()))
    return EXIT_OK if report.passed or not args.strict else EXIT_EXPECT


def build_parser():
    p = _Parser(prog="damped-euler-lab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", metavar="{simulate,trace,oracle,check,sweep,validate-damping}",
                           parser_class=_Parser)

    def with_config(sp):
        sp.add_argument("--config", help="key = value config file (defaults if omitted)")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
        sp.add_argument("--out", help="write CSV here instead of stdout")
        return sp

    sp = with_config(sub.add_parser("simulate", help="run the solver; trajectory CSV + event JSON"))
    sp.add_argument("--expect", choices=sorted(EXPECT))
    sp.set_defaults(func=cmd_simulate)

    sp = with_config(sub.add_parser("trace", help="trace a characteristic; path CSV"))
    sp.add_argument("--x0", type=float, required=True)
    sp.add_argument("--sign", choices=("plus", "minus"), required=True)
    sp.add_argument("--t-end", type=float)
    sp.add_argument("--snapshot-every", type=int, default=10)
    sp.set_defaults(func=cmd_trace)

    sp = sub.add_parser("oracle", help="Riccati blow-up time for y0 under lam/(1+t)^mu damping")
    sp.add_argument("--y0", type=float, required=True)
    sp.add_argument("--lambda", dest="lam", type=float, default=0.0)
    sp.add_argument("--mu", type=float, default=1.0)
    sp.add_argument("--coeff", type=float, default=1.0)
    sp.add_argument("--t0", type=float, default=0.0)
    sp.set_defaults(func=cmd_oracle)

    sp = with_config(sub.add_parser("check", help="blow-up hypothesis verdict JSON"))
    sp.add_argument("--variant", choices=analysis.HYPOTHESIS_VARIANTS)
    sp.add_argument("--expect", choices=("blowup", "horizon"))
    sp.set_defaults(func=cmd_check)

    sp = with_config(sub.add_parser("sweep", help="lifespan sweep; CSV + scaling fit JSON"))
    sp.add_argument("--epsilons", help="comma list (default: sweep.epsilons)")
    sp.add_argument("--regime", choices=("PowerLaw", "ExpLaw"), default="PowerLaw")
    sp.add_argument("--jobs", type=int, default=None, help="parallel workers (default: all cores)")
    sp.add_argument("--t-max-factor", type=float, default=10.0)
    sp.add_argument("--t-cap", type=float, default=math.inf)
    sp.set_defaults(func=cmd_sweep)

    sp = with_config(sub.add_parser("validate-damping", help="check a(t, x) against a decay hypothesis"))
    sp.add_argument("--hypothesis", choices=("time", "space"), default="time")
    sp.add_argument("--A1", type=float, required=True, help="bound constant for a")
    sp.add_argument("--A2", type=float, required=True, help="bound constant for |a_t| + |a_x|")
    sp.add_argument("--hyp-mu", type=float, required=True, help="decay exponent (> 1)")
    sp.add_argument("--strict", action="store_true", help="exit 2 when a bound fails")
    sp.set_defaults(func=cmd_validate_damping)
    return p


def dispatch(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            raise UsageError(parser.format_usage() + "damped-euler-lab: error: missing subcommand")
    except UsageError as exc:
        sys.stderr.write(str(exc) + "\n")
        return EXIT_USAGE
    try:
        return args.func(args)
    except ConfigErrors as exc:
        for e in exc.errors:
            sys.stderr.write(f"config error: {e}\n")
        return EXIT_CONFIG
    except (ConfigError, DomainError, ValueError, OSError) as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()

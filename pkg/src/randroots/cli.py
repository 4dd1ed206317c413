"""Command-line interface.

Exit codes: 0 = success / all statistical checks pass; 1 = a statistical
check failed; 2 = configuration error.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import complexsphere, fekete, harness, sysroots
from .ensembles import EnsembleSpec, SeedStream, sample
from .harness import ExperimentSpec, ParseError
from .polyalg import MonomialPoly, poly_to_json
from .realroots import Interval, count_roots_interval, count_roots_line, isolate_roots

EXIT_OK = 0
EXIT_STAT_FAIL = 1
EXIT_CONFIG = 2


def _parse_coeffs(text: str) -> MonomialPoly:
    try:
        return MonomialPoly(tuple(float(t) for t in text.split(",")))
    except ValueError as e:
        raise ParseError(f"--coeffs: {e}") from e


def _print(obj, out):
    text = json.dumps(obj, indent=2) if not isinstance(obj, str) else obj
    if out in (None, "-"):
        print(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def _report_lines(rep) -> str:
    s = rep.stats
    bits = [f"experiment={rep.spec.name}", f"n={s.n}", f"mean={s.mean:.6g}",
            f"stderr={s.stderr:.3g}"]
    if s.theoretical is not None:
        bits.append(f"theoretical={s.theoretical:.6g}")
    if s.z is not None:
        bits.append(f"z={s.z:+.2f}")
    if rep.flagged:
        bits.append(f"flagged={rep.flagged}")
    if not rep.reliable:
        bits.append("UNRELIABLE")
    return "  ".join(bits)


def cmd_sample(args) -> int:
    spec = EnsembleSpec(args.kind, args.m, tuple(args.degree))
    rng = SeedStream(args.seed, args.stream)
    drawn = sample(spec, rng)
    polys = drawn if isinstance(drawn, list) else [drawn]
    _print([poly_to_json(p) for p in polys], args.out)
    return EXIT_OK


def cmd_roots(args) -> int:
    p = _parse_coeffs(args.coeffs)
    if args.lo is not None or args.hi is not None:
        lo = args.lo if args.lo is not None else float("-inf")
        hi = args.hi if args.hi is not None else float("inf")
        rc = count_roots_interval(p, Interval(lo, hi), method=args.method)
    else:
        rc = count_roots_line(p, method=args.method)
    payload = {"count": rc.count, "method": rc.method}
    if args.isolate:
        payload["intervals"] = [[iv.lo, iv.hi] for iv in isolate_roots(p)]
    _print(payload, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    specs = []
    if args.spec:
        specs.append(harness.read_spec(args.spec))
    else:
        raise ParseError("verify needs --spec <path>")
    reports = []
    ok = True
    for spec in specs:
        if args.trials:
            spec = ExperimentSpec(spec.name, spec.ensemble, args.trials,
                                  spec.region, spec.seed, spec.params)
        if args.seed is not None:
            spec = ExperimentSpec(spec.name, spec.ensemble, spec.trials,
                                  spec.region, args.seed, spec.params)
        rep = harness.run_experiment(spec, threads=args.threads)
        reports.append(rep)
        print(_report_lines(rep))
        ok = ok and harness.report_passes(rep)
    if args.out:
        harness.write_report(reports, args.out, format=args.format)
    return EXIT_OK if ok else EXIT_STAT_FAIL


def cmd_energy(args) -> int:
    if args.uniform:
        spec = ExperimentSpec("uniform-energy", None, args.trials,
                              None, args.seed, {"N": args.n})
    else:
        spec = ExperimentSpec("kostlan-energy",
                              EnsembleSpec("KostlanComplex", 1, (args.n,)),
                              args.trials, None, args.seed)
    rep = harness.run_experiment(spec, threads=args.threads)
    print(_report_lines(rep))
    if args.out:
        harness.write_report(rep, args.out, format=args.format)
    return EXIT_OK if harness.report_passes(rep) else EXIT_STAT_FAIL


def cmd_fekete(args) -> int:
    best = None
    for i in range(args.restarts):
        rng = SeedStream(args.seed, i)
        est = fekete.minimize_energy(fekete.sample_uniform_sphere(args.n, rng))
        if best is None or est.V < best.V:
            best = est
    est = fekete.FeketeEstimate(best.config, best.V, best.C_N,
                                args.restarts, best.converged)
    print(f"N={args.n}  V={est.V:.10g}  C_N={est.C_N:.6g}  "
          f"restarts={args.restarts}  converged={est.converged}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(complexsphere.config_to_csv(est.config))
    return EXIT_OK


def cmd_smoothed(args) -> int:
    template = _parse_coeffs(args.template)
    m_list = [int(t) for t in args.m.split(",")]
    rows = harness.smoothed_decay_experiment(
        template, m_list, args.sigma, args.trials, seed=args.seed)
    for row in rows:
        print(json.dumps(row))
    if args.out:
        _print(rows, args.out)
    return EXIT_OK


def cmd_measure(args) -> int:
    if args.region == "simplex":
        region = "simplex"
    elif args.region == "interval":
        region = Interval(args.lo, args.hi)
    elif args.region == "line":
        region = None
    else:
        raise ParseError(f"--region {args.region!r} not recognized")
    spec = ExperimentSpec("projective-measure", None, args.samples,
                          region, args.seed, {"m": args.m})
    rep = harness.run_experiment(spec)
    print(_report_lines(rep))
    if args.out:
        harness.write_report(rep, args.out, format=args.format)
    return EXIT_OK if harness.report_passes(rep) else EXIT_STAT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="randroots",
                                 description="random polynomial ensembles, real "
                                 "root counting, sphere energies")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, trials_default=None):
        p.add_argument("--seed", type=int, default=harness.default_seed())
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--threads", type=int, default=1)
        if trials_default is not None:
            p.add_argument("--trials", type=int, default=trials_default)

    p = sub.add_parser("sample", help="draw from an ensemble")
    p.add_argument("--kind", required=True,
                   choices=["Kac", "ShubSmale", "BernsteinGauss",
                            "KostlanComplex"])
    p.add_argument("--degree", type=int, nargs="+", required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--stream", type=int, default=0)
    common(p)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("roots", help="count/isolate real roots of a polynomial")
    p.add_argument("--coeffs", required=True,
                   help="comma-separated, ascending powers")
    p.add_argument("--lo", type=float, default=None)
    p.add_argument("--hi", type=float, default=None)
    p.add_argument("--method", default=None,
                   choices=["SturmExact", "DescartesBisect", "CompanionFiltered"])
    p.add_argument("--isolate", action="store_true")
    common(p)
    p.set_defaults(fn=cmd_roots)

    p = sub.add_parser("verify", help="run an experiment spec and check its law")
    p.add_argument("--spec", required=True)
    p.add_argument("--trials", type=int, default=None)
    common(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("energy", help="log-energy of lifted roots or uniform points")
    p.add_argument("--n", type=int, required=True, help="degree / point count")
    p.add_argument("--uniform", action="store_true")
    common(p, trials_default=200)
    p.set_defaults(fn=cmd_energy)

    p = sub.add_parser("fekete", help="minimize the log-energy from random starts")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--restarts", type=int, default=20)
    common(p)
    p.set_defaults(fn=cmd_fekete)

    p = sub.add_parser("smoothed", help="signal-plus-noise root count table")
    p.add_argument("--template", default="-1,0,1",
                   help="univariate signal coefficients, ascending")
    p.add_argument("--m", default="1,2")
    p.add_argument("--sigma", type=float, default=1.0)
    common(p, trials_default=400)
    p.set_defaults(fn=cmd_smoothed)

    p = sub.add_parser("measure", help="estimate the projective measure of a region")
    p.add_argument("--region", required=True,
                   choices=["interval", "simplex", "line"])
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--lo", type=float, default=0.0)
    p.add_argument("--hi", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=10 ** 6)
    common(p)
    p.set_defaults(fn=cmd_measure)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (ParseError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

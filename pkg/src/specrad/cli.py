"""Command-line frontend: ``specrad <subcommand> [flags]``.

Exit codes: 0 success, 1 usage error, 2 numeric failure, 3 acceptance failure.
Machine output (JSON or CSV) goes to stdout or to ``--out``; messages go to stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import acceptance, eig, mde, theory
from .entrylaws import parse_law
from .harness import ExperimentConfig, _jsonable, run
from .profiles import PROFILE_KINDS, build_profile, params
from .rng import SeedPath
from .sampler import FLAG_REAL_LAW, sample, write_dump
from .traceoracle import InfiniteMoment, SizeGuard, trace_moment_exact, trace_moment_mc

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_ACCEPTANCE = 0, 1, 2, 3

NUMERIC_ERRORS = (
    eig.NonConvergence,
    InfiniteMoment,
    mde.Degenerate,
    mde.BranchAmbiguity,
    theory.GammaNonpositive,
    ArithmeticError,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _set_pair(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    k, v = text.split("=", 1)
    try:
        return k.strip(), float(v)
    except ValueError:
        return k.strip(), v


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("SPECRAD_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise UsageError(f"SPECRAD_THREADS must be an integer, got {env!r}")
        if n < 1:
            raise UsageError("SPECRAD_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def _check_writable(path: str | None, directory: bool = False) -> None:
    if not path:
        return
    target = path if directory else (os.path.dirname(os.path.abspath(path)) or ".")
    if directory and not os.path.exists(path):
        target = os.path.dirname(os.path.abspath(path)) or "."
    if not os.path.isdir(target) or not os.access(target, os.W_OK):
        raise UsageError(f"output path {path!r} is not writable")


def _emit(args, doc) -> None:
    text = json.dumps(_jsonable(doc), indent=2, sort_keys=True)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _profile_from_args(args):
    if args.kind is None or args.n is None:
        raise UsageError("--kind and --n are required")
    spec = {"kind": args.kind}
    n = args.n
    kind = args.kind.replace("-", "_")
    if kind == "block_band" and args.blocks:
        spec["b"] = n // args.blocks
        if spec["b"] * args.blocks != n:
            raise UsageError(f"--blocks {args.blocks} does not divide --n {n}")
    if kind == "diag_block" and args.blocks:
        if n % args.blocks:
            raise UsageError(f"--blocks {args.blocks} does not divide --n {n}")
        spec["d"] = n // args.blocks
    if kind == "periodic_band" and args.bandwidth:
        spec["d"] = args.bandwidth
    if kind == "product":
        if args.p:
            spec["p"] = args.p
        if args.q and args.p and args.p * args.q != n:
            raise UsageError("--n must equal --p times --q for the product profile")
    for k, v in args.set or []:
        spec[k] = v
    return build_profile(spec, n)


def _seed_path(args, label: str) -> SeedPath:
    return SeedPath(args.seed, args.experiment_id or label, args.trial)


# subcommands ----------------------------------------------------------------


def cmd_profile(args):
    prof = _profile_from_args(args)
    doc = {"label": prof.label, "n": prof.n}
    doc.update(params(prof, K=args.K).to_dict())
    _emit(args, doc)
    return EXIT_OK


def cmd_sample(args):
    if not args.out:
        raise UsageError("sample needs --out for the binary dump")
    prof = _profile_from_args(args)
    sp = _seed_path(args, "cli-sample")
    ms = sample(prof, args.law, sp)
    flags = 0 if parse_law(args.law).is_complex else FLAG_REAL_LAW
    write_dump(args.out, ms.a, flags=flags)
    hi, lo = sp.split()
    print(json.dumps({"out": args.out, "n": prof.n, "law": args.law, "seed_hi": hi, "seed_lo": lo}))
    return EXIT_OK


def cmd_rho(args):
    prof = _profile_from_args(args)
    a = sample(prof, args.law, _seed_path(args, "cli-rho")).a
    rep = eig.spectral_report(a, engine=args.engine, z=args.z)
    _emit(args, rep.to_dict())
    return EXIT_OK if rep.converged else EXIT_NUMERIC


def cmd_moments(args):
    prof = _profile_from_args(args)
    if not args.p:
        raise UsageError("moments needs --p")
    if args.trials:
        est = trace_moment_mc(prof, args.law, args.p, args.trials, _seed_path(args, "cli-moments"))
    else:
        est = trace_moment_exact(prof, args.law, args.p, strict=args.strict)
    _emit(args, est.to_dict())
    return EXIT_OK


def cmd_mde(args):
    if args.z is not None and args.v is not None:
        z, v = complex(args.z), complex(args.v)
        doc = {"z": [z.real, z.imag], "v": [v.real, v.imag], "roots": []}
        for s in mde.solve_cubic(z, v):
            doc["roots"].append({"a": [s.a.real, s.a.imag], "b": [s.b.real, s.b.imag],
                                 "residual": s.residual, "branch": s.branch})
        if v.imag > 0:
            h = mde.herglotz_root(z, v)
            doc["herglotz"] = {"a": [h.a.real, h.a.imag], "b": [h.b.real, h.b.imag]}
        if v.imag == 0 and abs(v.real) < mde.V_WINDOW:
            doc["support_indicator"] = mde.support_indicator(z, v.real)
            doc["sufficient_condition"] = mde.sufficient_condition(z, v.real)
        if abs(z) > 1:
            doc["sigma_min_lower"] = mde.sigma_min_lower(z)
        _emit(args, doc)
        return EXIT_OK
    moduli = args.a or list(np.linspace(0.0, 2.0, 21))
    vs = args.t or list(np.linspace(-0.3, 0.3, 13))
    rows = mde.scan(moduli, vs)
    cols = list(rows[0])
    lines = [",".join(cols)]
    for r in rows:
        lines.append(",".join("" if r[c] is None else repr(r[c]) for c in cols))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_curve(args):
    if not args.name:
        raise UsageError(f"curve needs --name (one of {', '.join(theory.CURVE_NAMES)})")
    p = dict(args.set or [])
    for key in ("q", "n", "p"):
        val = getattr(args, key)
        if val is not None:
            p[key] = val
    if args.name in ("thm14", "thm15") and "n" not in p:
        raise UsageError(f"{args.name} needs --n")
    if args.name == "thm18" and "q" not in p:
        raise UsageError("thm18 needs --q")
    if args.name in ("thm11", "thm16", "eq15") and "sigma_star" not in p:
        raise UsageError(f"{args.name} needs --set sigma_star=VALUE")
    if args.name == "ginibre_cdf" and "n" not in p:
        raise UsageError("ginibre_cdf needs --n")
    try:
        c = theory.curve(args.name, **p)
    except ValueError as exc:
        raise UsageError(str(exc))
    xs = args.t if args.t is not None else args.a
    if not xs:
        raise UsageError("curve needs evaluation points via --t (or --a for ginibre_cdf)")
    table = c.tabulate(xs)
    doc = {"name": c.name, "params": c.params, "points": [[t, f] for t, f in table]}
    if len(table) == 1:
        doc["t"], doc["value"] = table[0]
    _emit(args, doc)
    return EXIT_OK


def cmd_run(args):
    if not args.config:
        raise UsageError("run needs --config")
    if not os.path.isfile(args.config):
        raise UsageError(f"config file {args.config!r} not found")
    _check_writable(args.out, directory=True)
    try:
        cfg = ExperimentConfig.from_json(args.config)
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        raise UsageError(f"invalid config: {exc}")
    if args.threads or os.environ.get("SPECRAD_THREADS"):
        cfg.worker_count = _threads(args)
    res = run(cfg)
    if args.out:
        res.write(args.out)
        print(json.dumps({"results": os.path.join(args.out, "results.csv"),
                          "summary": os.path.join(args.out, "summary.json"), "passed": res.passed}))
    else:
        print(json.dumps(_jsonable(res.summary()), indent=2, sort_keys=True))
    frac = res.aggregates.get("flagged_fraction", 0.0)
    return EXIT_NUMERIC if frac > 0.01 else EXIT_OK


def cmd_verify(args):
    only = [int(x) for x in args.only.split(",")] if args.only else None
    echo = None if args.out else (lambda line: print(line, flush=True))
    outcomes = acceptance.run_all(workers=_threads(args), only=only, echo=echo)
    if args.out:
        _emit(args, [o.__dict__ for o in outcomes])
    ok = all(o.passed for o in outcomes)
    print(f"{sum(o.passed for o in outcomes)}/{len(outcomes)} criteria passed", file=sys.stderr)
    return EXIT_OK if ok else EXIT_ACCEPTANCE


# parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="specrad", description="Spectral radius laboratory for random non-Hermitian matrices.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, *, profile=True, law=True, seed=True):
        if profile:
            sp.add_argument("--kind", choices=PROFILE_KINDS + tuple(k.replace("_", "-") for k in PROFILE_KINDS))
            sp.add_argument("--n", type=int)
            sp.add_argument("--blocks", type=int, help="number of blocks (block_band, diag_block)")
            sp.add_argument("--bandwidth", type=int, help="odd bandwidth (periodic_band)")
            sp.add_argument("--p", type=int)
            sp.add_argument("--q", type=int)
            sp.add_argument("--set", type=_set_pair, action="append", metavar="KEY=VALUE",
                            help="extra profile parameter, e.g. lambda1=4")
        if law:
            sp.add_argument("--law", default="complex-gaussian")
        if seed:
            sp.add_argument("--seed", type=int, default=0)
            sp.add_argument("--trial", type=int, default=0)
            sp.add_argument("--experiment-id", dest="experiment_id", default=None)
        sp.add_argument("--out")

    sp = sub.add_parser("profile", help="construct a profile and print its parameters")
    common(sp, law=False, seed=False)
    sp.add_argument("--K", type=int, default=8)
    sp.set_defaults(fn=cmd_profile)

    sp = sub.add_parser("sample", help="write one realization as a binary dump")
    common(sp)
    sp.set_defaults(fn=cmd_sample)

    sp = sub.add_parser("rho", help="spectral report of one realization")
    common(sp)
    sp.add_argument("--engine", choices=("auto", "native", "lapack"), default="auto")
    sp.add_argument("--z", type=complex, default=None)
    sp.set_defaults(fn=cmd_rho)

    sp = sub.add_parser("moments", help="exact (default) or Monte Carlo trace moment")
    common(sp)
    sp.add_argument("--trials", type=int, help="Monte Carlo trials; omit for exact enumeration")
    sp.add_argument("--strict", action="store_true", help="error instead of inf for divergent moments")
    sp.set_defaults(fn=cmd_moments)

    sp = sub.add_parser("mde", help="point solve (--z and --v) or grid scan (--a moduli, --t values of v)")
    sp.add_argument("--z", type=complex)
    sp.add_argument("--v", type=complex)
    sp.add_argument("--a", type=_floats)
    sp.add_argument("--t", type=_floats)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_mde)

    sp = sub.add_parser("curve", help="tabulate a theory curve")
    sp.add_argument("--name")
    sp.add_argument("--t", type=_floats)
    sp.add_argument("--a", type=_floats)
    sp.add_argument("--q", type=float)
    sp.add_argument("--n", type=float)
    sp.add_argument("--p", type=float)
    sp.add_argument("--set", type=_set_pair, action="append", metavar="KEY=VALUE")
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_curve)

    sp = sub.add_parser("run", help="execute an experiment config")
    sp.add_argument("--config")
    sp.add_argument("--threads", type=int)
    sp.add_argument("--out", help="output directory for results.csv and summary.json")
    sp.set_defaults(fn=cmd_run)

    sp = sub.add_parser("verify", help="run the acceptance suite")
    sp.add_argument("--threads", type=int)
    sp.add_argument("--only", help="comma-separated criterion numbers")
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            raise UsageError("a subcommand is required")
        if getattr(args, "threads", None) is not None and args.threads < 1:
            raise UsageError("--threads must be >= 1")
        if args.command != "run":
            _check_writable(getattr(args, "out", None))
        return args.fn(args)
    except UsageError as exc:
        print(f"specrad: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SizeGuard as exc:
        print(f"specrad: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERIC_ERRORS as exc:
        print(f"specrad: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"specrad: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

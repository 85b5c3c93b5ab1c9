"""Command-line interface.

Subcommands:
  family info       parameters and Friedrichs data of a family
  measure build     construct an N-extremal (or explicit-family) measure
  classify          determinacy verdict for a measure file, optionally after
                    a (1+x^2)^{-alpha} reweighting
  nevanlinna eval   the entire quadruple A, B, C, D at a complex point
  verify            run an identity check and emit a report

Exit codes: 0 all checks passed, 1 usage error, 2 at least one check failed,
3 no failures but at least one inconclusive result.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from mpmath import mp, mpf, workprec

from . import families as fam
from .harness import THEOREM_IDS, verify
from .measures import (DensitySpec, DiscreteMeasure, apply_density,
                       moment_sequence)
from .moments import normalize, recurrence_from_moments
from .nevanlinna import classify, friedrichs_parameter, nevanlinna_eval
from .numerics import Inconclusive, PrecisionContext

EXIT_PASS, EXIT_USAGE, EXIT_FAIL, EXIT_INCONCLUSIVE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    p = _Parser(prog="nextremal",
                description="Construct and classify solutions of indeterminate "
                            "moment problems on explicit families.")
    p.add_argument("--bits", type=int, default=None, help="working precision (default 256)")
    p.add_argument("--max-terms", type=int, default=None, help="series cap (default 4096)")
    p.add_argument("--tail-tol", type=float, default=None, help="tail tolerance (default 1e-30)")
    p.add_argument("--config", type=Path, default=None,
                   help="JSON file with the same keys as the global flags")
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   help="report format for `verify`")
    sub = p.add_subparsers(dest="command")

    p_family = sub.add_parser("family", help="family-level queries")
    family_sub = p_family.add_subparsers(dest="subcommand")
    p_info = family_sub.add_parser("info", help="print parameters, F(s), alpha(s)")
    _family_flags(p_info)

    p_measure = sub.add_parser("measure", help="measure construction")
    measure_sub = p_measure.add_subparsers(dest="subcommand")
    p_build = measure_sub.add_parser("build", help="build and export a measure")
    _family_flags(p_build)
    p_build.add_argument("--solution", required=True,
                         help="friedrichs | krein | t=<value> | c=<value>")
    p_build.add_argument("--count", type=int, default=24, help="number of atoms")
    p_build.add_argument("--out", type=Path, required=True,
                         help="output path (.json or .csv)")

    p_classify = sub.add_parser("classify", help="determinacy verdict for a measure file")
    p_classify.add_argument("--in", dest="infile", type=Path, required=True)
    p_classify.add_argument("--alpha", type=str, default=None,
                            help="first reweight by (1+x^2)^(-alpha)")

    p_nev = sub.add_parser("nevanlinna", help="Nevanlinna function evaluation")
    nev_sub = p_nev.add_subparsers(dest="subcommand")
    p_eval = nev_sub.add_parser("eval", help="evaluate A, B, C, D at a point")
    _family_flags(p_eval)
    p_eval.add_argument("--z", required=True, help="point as re,im")
    p_eval.add_argument("--t", type=str, default=None,
                        help="also report B+tD and the transform value")

    p_verify = sub.add_parser("verify", help="run an identity check")
    p_verify.add_argument("--theorem", required=True,
                          help=f"one of {', '.join(THEOREM_IDS)}")
    _family_flags(p_verify)
    p_verify.add_argument("--t", type=str, default=None)
    p_verify.add_argument("--tprime", type=str, default=None)
    p_verify.add_argument("--count", type=int, default=None)
    p_verify.add_argument("--report", type=Path, default=None,
                          help="write the report to this path")
    return p


def _family_flags(p):
    p.add_argument("--family", required=True,
                   choices=("quartic", "al_salam_carlitz", "stieltjes_wigert"))
    p.add_argument("--q", type=str, default=None)
    p.add_argument("--a", type=str, default=None)


def _context(args) -> PrecisionContext:
    settings = {"bits": 256, "max_terms": 4096, "tail_tol": 1e-30}
    if args.config is not None:
        with open(args.config, "r", encoding="utf-8") as fh:
            loaded = json.load(fh)
        for key in settings:
            flag_key = key  # config keys mirror the flag names
            if flag_key in loaded:
                settings[key] = loaded[flag_key]
    if args.bits is not None:
        settings["bits"] = args.bits
    if args.max_terms is not None:
        settings["max_terms"] = args.max_terms
    if args.tail_tol is not None:
        settings["tail_tol"] = args.tail_tol
    return PrecisionContext(bits=int(settings["bits"]),
                            max_terms=int(settings["max_terms"]),
                            tail_tol=float(settings["tail_tol"]))


def _handle(args, count=None) -> fam.FamilyHandle:
    kwargs = {}
    if args.q is not None:
        kwargs["q"] = mpf(args.q)
    if args.a is not None:
        kwargs["a"] = mpf(args.a)
    if count is not None:
        kwargs["atom_count"] = count
    return fam.FamilyHandle(family=args.family, **kwargs)


def _family_rc(handle, ctx, depth=64):
    if handle.family == "stieltjes_wigert":
        return fam.sw_recurrence(handle.q, depth, ctx)
    if handle.family == "al_salam_carlitz":
        m = fam.asc_friedrichs(handle.a, handle.q, depth + 16, ctx)
    else:
        m = fam.quartic_friedrichs(3 * depth, ctx)
        depth = min(depth, 32)
    seq = moment_sequence(m, 2 * depth + 1, ctx)
    return recurrence_from_moments(seq, depth, ctx)


def _cmd_family_info(args, ctx) -> int:
    handle = _handle(args)
    with workprec(ctx.bits + 16):
        print(f"family: {handle.family}")
        if handle.q is not None:
            print(f"q = {mp.nstr(handle.q, 17)}")
        if handle.a is not None:
            print(f"a = {mp.nstr(handle.a, 17)}")
        rc = _family_rc(handle, ctx)
        sc = friedrichs_parameter(rc, ctx)
        if not sc.converged:
            print("alpha(s): did not settle within the recurrence depth")
            print("F(s): unknown")
            return EXIT_INCONCLUSIVE
        print(f"alpha(s) = {mp.nstr(sc.alpha, 17)}")
        print(f"F(s) = {mp.nstr(sc.F, 17) if sc.F != mp.inf else 'infinity'}")
        if handle.family == "al_salam_carlitz":
            series = fam.asc_F(handle.a, handle.q, ctx)
            print(f"F(s) series form = {mp.nstr(series, 17)}")
    return EXIT_PASS


def _cmd_measure_build(args, ctx) -> int:
    handle = _handle(args, count=args.count)
    solution = args.solution
    count = args.count
    if solution in ("friedrichs", "krein"):
        if handle.family == "stieltjes_wigert":
            m = fam.sw_nextremal(solution, handle.q, count, ctx)
        elif handle.family == "al_salam_carlitz":
            builder = fam.asc_friedrichs if solution == "friedrichs" else fam.asc_krein
            m = builder(handle.a, handle.q, count, ctx)
        else:
            builder = fam.quartic_friedrichs if solution == "friedrichs" else fam.quartic_krein
            m = builder(count, ctx)
    elif solution.startswith("t="):
        t = mpf(solution[2:])
        if handle.family == "stieltjes_wigert" and t == 1:
            m = fam.sw_nextremal("t_one", handle.q, count, ctx)
        else:
            m = _general_t_measure(handle, t, count, ctx)
    elif solution.startswith("c="):
        if handle.family != "quartic":
            print("error: c=<v> solutions exist only for the quartic family",
                  file=sys.stderr)
            return EXIT_USAGE
        m = fam.quartic_mu_c(mpf(solution[2:]), count, ctx)
    else:
        print(f"error: unknown solution {solution!r}", file=sys.stderr)
        return EXIT_USAGE
    text = m.to_csv(ctx.bits) if args.out.suffix == ".csv" else m.to_json(ctx.bits)
    args.out.write_text(text, encoding="utf-8")
    print(f"wrote {len(m)} atoms to {args.out}")
    return EXIT_PASS


def _general_t_measure(handle, t, count, ctx):
    from .nevanlinna import mass_at, nextremal_support
    if handle.family == "quartic":
        raise SystemExit(
            "quartic t-solutions need polynomially-tailed Nevanlinna series; "
            "only friedrichs/krein/c=<v> are constructible")
    depth = 2 * count + 32
    rc = _family_rc(handle, ctx, depth=depth)
    # a finite recurrence certifies series tails only down to ~decay^depth
    L = float(-mp.log(mpf(handle.q), 2))
    nev_ctx = ctx.with_tail_tol(max(float(ctx.tail_tol), 2.0 ** (-0.8 * depth * L)))
    ref = (fam.sw_nextremal("krein", handle.q, count + 2, ctx)
           if handle.family == "stieltjes_wigert"
           else fam.asc_krein(handle.a, handle.q, count + 2, ctx))
    window = (mpf(-1) / 4, ref.atoms[count + 1])
    grid_factor = mpf(handle.q) ** (mpf(-1) / 4)
    atoms = nextremal_support(rc, t, window, nev_ctx, grid_factor=grid_factor)[:count]
    masses = [mass_at(rc, x, nev_ctx).value for x in atoms]
    return DiscreteMeasure(atoms=tuple(atoms), masses=tuple(masses),
                           tail_mass_bound=mp.zero, tail_moment_bounds={},
                           label=f"{handle.family}-t({mp.nstr(t, 8)})")


def _cmd_classify(args, ctx) -> int:
    m = DiscreteMeasure.from_json(args.infile.read_text(encoding="utf-8"))
    if args.alpha is not None:
        m = apply_density(
            m, DensitySpec(kind="inv_sqrt_one_plus_x2_pow_alpha", alpha=mpf(args.alpha)))
    degrees = max(m.tail_moment_bounds) if m.tail_moment_bounds else 0
    depth = min(48, (degrees - 1) // 2, len(m) - 8)
    if depth < 32:
        print(f"error: measure supports depth {depth} < 32 "
              "(more atoms / tail data needed)", file=sys.stderr)
        return EXIT_USAGE
    seq = normalize(moment_sequence(m, 2 * depth + 1, ctx))
    try:
        rc = recurrence_from_moments(seq, depth, ctx)
        v = classify(rc, ctx)
    except Inconclusive as exc:
        print(f"verdict: inconclusive ({exc})")
        return EXIT_INCONCLUSIVE
    print(f"verdict: {v.verdict}")
    print(f"stieltjes class: {v.stieltjes_class}")
    ev = v.evidence
    print(f"evidence: fitted ratio {mp.nstr(ev['fitted_ratio'], 8)}, "
          f"margin {mp.nstr(ev['margin'], 6)}, "
          f"terms examined {ev['terms_examined']}")
    return EXIT_PASS if v.verdict != "inconclusive" else EXIT_INCONCLUSIVE


def _cmd_nevanlinna_eval(args, ctx) -> int:
    handle = _handle(args)
    if handle.family == "quartic":
        print("error: quartic Nevanlinna series decay polynomially; "
              "evaluation is supported for the q-lattice families",
              file=sys.stderr)
        return EXIT_USAGE
    re_str, _, im_str = args.z.partition(",")
    with workprec(ctx.bits + 16):
        z = mp.mpc(mpf(re_str), mpf(im_str or "0"))
        depth = 128
        rc = _family_rc(handle, ctx, depth=depth)
        L = float(-mp.log(mpf(handle.q), 2))
        nev_ctx = ctx.with_tail_tol(max(float(ctx.tail_tol), 2.0 ** (-0.8 * depth * L)))
        try:
            quad = nevanlinna_eval(rc, z, nev_ctx)
        except Inconclusive as exc:
            print(f"inconclusive: {exc}")
            return EXIT_INCONCLUSIVE
        for name in "ABCD":
            print(f"{name}(z) = {mp.nstr(getattr(quad, name), 17)}")
        print(f"AD - BC - 1 = {mp.nstr(quad.determinant_defect(), 6)}")
        print(f"terms used: {quad.terms_used}, tail bound: {mp.nstr(quad.tail_bound, 6)}")
        if args.t is not None:
            t = mp.inf if args.t in ("inf", "infinity") else mpf(args.t)
            denom = quad.D if t == mp.inf else quad.B + t * quad.D
            numer = quad.C if t == mp.inf else quad.A + t * quad.C
            print(f"B + tD = {mp.nstr(denom, 17)}")
            print(f"transform -(A + tC)/(B + tD) = {mp.nstr(-numer / denom, 17)}")
    return EXIT_PASS


def _cmd_verify(args, ctx) -> int:
    handle = _handle(args)
    params = {}
    if args.t is not None:
        params["t"] = mpf(args.t)
    if args.tprime is not None:
        params["t_prime"] = mpf(args.tprime)
    theorem = "T3.6" if args.theorem == "T3.6/C3.7" else args.theorem
    try:
        report = verify(theorem, handle, ctx, count=args.count, **params)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = report.to_csv() if args.format == "csv" else report.to_json()
    if args.report is not None:
        args.report.write_text(text, encoding="utf-8")
    for c in report.checks:
        mark = {"pass": "ok  ", "fail": "FAIL", "inconclusive": "?   "}[c.status]
        line = f"[{mark}] {c.description}"
        if c.expected:
            line += f": expected {c.expected}, observed {c.observed}"
        print(line)
    print(f"overall: {report.overall} "
          f"({report.runtime_seconds:.2f}s at {report.precision_bits} bits)")
    if report.overall == "fail":
        return EXIT_FAIL
    if report.overall == "inconclusive":
        return EXIT_INCONCLUSIVE
    return EXIT_PASS


def cli_main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_USAGE
    try:
        ctx = _context(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "family":
        if args.subcommand != "info":
            print("error: usage: family info ...", file=sys.stderr)
            return EXIT_USAGE
        return _cmd_family_info(args, ctx)
    if args.command == "measure":
        if args.subcommand != "build":
            print("error: usage: measure build ...", file=sys.stderr)
            return EXIT_USAGE
        return _cmd_measure_build(args, ctx)
    if args.command == "classify":
        return _cmd_classify(args, ctx)
    if args.command == "nevanlinna":
        if args.subcommand != "eval":
            print("error: usage: nevanlinna eval ...", file=sys.stderr)
            return EXIT_USAGE
        return _cmd_nevanlinna_eval(args, ctx)
    if args.command == "verify":
        return _cmd_verify(args, ctx)
    return EXIT_USAGE


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()

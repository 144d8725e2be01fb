"""Command-line front end for the exact pentagram-map laboratory.

Subcommands: gen (random twisted polygons as JSON), trace (iterate a map
and classify the height growth), check (exact duality round trips,
universal-map inverses, corrugated restrictions, Lax conservation), and
tables (rerun the full catalogue of experiment rows).

Exit codes: 0 success or pass, 1 check failure, 2 usage error, 3 a
degeneracy or generation failure that prevented the check from running.
All outputs are deterministic given a full flag set; every subcommand
accepts --format json.
"""

import argparse
import json
import random
import sys
from fractions import Fraction

from .polygon import (
    GenerationFailed,
    equal_up_to_shift,
    is_corrugated,
    polygon_to_json,
    random_corrugated_strip,
    random_strip,
    random_twisted,
)
from .pentagram_maps import (
    Corrugated,
    DegenerateImage,
    Universal,
    apply,
    apply_strip,
    apply_universal,
    dented,
    format_map_name,
    Generalized,
    inverse_spec,
    parse_map_name,
    short_diagonal,
    spec_to_json,
    universal_inverse_spec,
)
from .lax import (
    DEFAULT_CONSERVATION_TOL,
    DEFAULT_LIFT_TOL,
    DEFAULT_PRECISION,
    GcdObstruction,
    IllConditioned,
    SignObstruction,
    conservation_check,
)
from .height_lab import (
    AllSeedsDegenerate,
    ExperimentConfig,
    classify,
    reproduce_tables,
    run_trace,
    write_trace_csv,
    DEFAULT_DIGIT_BUDGET,
    TABLE_ROWS,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_DEGENERATE = 3


def _parse_tuple(s: str) -> tuple:
    try:
        return tuple(int(e) for e in s.split(","))
    except ValueError:
        raise ValueError(f"expected a comma-separated integer list, got {s!r}")


def _parse_range(s: str) -> tuple:
    pair = _parse_tuple(s)
    if len(pair) != 2 or pair[0] > pair[1]:
        raise ValueError(f"expected lo,hi with lo <= hi, got {s!r}")
    return pair


def _emit(args, text_lines, doc):
    if args.format == "json":
        print(json.dumps(doc, indent=2))
    else:
        for line in text_lines:
            print(line)


# ---------------------------------------------------------------------------
# gen


def cmd_gen(args) -> int:
    p = random_twisted(args.d, args.n, args.seed, coord_range=args.coord_range)
    doc = polygon_to_json(p)
    payload = json.dumps(doc, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)
    return EXIT_OK


# ---------------------------------------------------------------------------
# trace


def cmd_trace(args) -> int:
    spec = parse_map_name(args.map, args.d)
    cfg = ExperimentConfig(
        spec=spec,
        d=args.d,
        n=args.n,
        iterations=args.iters,
        seed=args.seed,
        coord_range=args.coord_range,
        digit_budget=args.budget,
    )
    trace = run_trace(cfg)
    verdict = classify(trace)
    if args.out:
        with open(args.out, "w") as fh:
            write_trace_csv(trace, fh)
    final = trace.records[-1]
    doc = {
        "map": format_map_name(spec),
        "d": args.d,
        "n": args.n,
        "seed": args.seed,
        "seed_used": trace.seed_used,
        "iterations": args.iters,
        "truncated": trace.truncated,
        "label": verdict.label,
        "sigma": verdict.sigma,
        "sigma_r2": verdict.sigma_r2,
        "alpha": verdict.alpha,
        "alpha_r2": verdict.alpha_r2,
        "final_t": final.t,
        "final_log10_height": final.log10_height,
        "records": [
            {
                "t": r.t,
                "log10_height": r.log10_height,
                "digits": r.digits,
                "elapsed_ms": r.elapsed_ms,
            }
            for r in trace.records
        ],
    }
    fit = ""
    if verdict.label == "super-exponential" and verdict.sigma is not None:
        fit = f" (sigma {verdict.sigma:.3f}, R^2 {verdict.sigma_r2:.4f})"
    elif verdict.alpha is not None:
        fit = f" (alpha {verdict.alpha:.3f}, R^2 {verdict.alpha_r2:.4f})"
    lines = [
        f"map {doc['map']} d {args.d} n {args.n} seed {trace.seed_used}: "
        f"{verdict.label}{fit}; final log10 height {final.log10_height:.1f} "
        f"at t={final.t}" + (" [truncated]" if trace.truncated else "")
    ]
    _emit(args, lines, doc)
    return EXIT_OK


# ---------------------------------------------------------------------------
# check duality


def cmd_check_duality(args) -> int:
    spec = Generalized(args.d, args.I, args.J)
    dual, _note = inverse_spec(spec)
    expected = sum(args.I) + sum(args.J)
    seed = args.seed
    regenerated = 0
    passed = 0
    for _trial in range(args.trials):
        while True:
            p = random_twisted(args.d, args.n, seed, coord_range=(1, 10))
            seed += 1
            try:
                back = apply(dual, apply(spec, p))
            except DegenerateImage:
                regenerated += 1
                continue
            break
        shift_found = equal_up_to_shift(p, back, max_shift=expected + 2)
        if shift_found != expected:
            doc = {
                "check": "duality",
                "d": args.d,
                "I": list(args.I),
                "J": list(args.J),
                "trial": _trial,
                "expected_shift": expected,
                "found_shift": shift_found,
                "pass": False,
            }
            _emit(args, [f"duality FAIL at trial {_trial}: expected shift "
                         f"{expected}, found {shift_found}"], doc)
            return EXIT_FAIL
        passed += 1
    doc = {
        "check": "duality",
        "d": args.d,
        "n": args.n,
        "I": list(args.I),
        "J": list(args.J),
        "trials": args.trials,
        "passed": passed,
        "shift": expected,
        "regenerated": regenerated,
        "pass": True,
    }
    lines = [
        f"duality d={args.d} I={args.I} J={args.J}: {passed}/{args.trials} "
        f"round trips equal the index shift by {expected} exactly"
        + (f" ({regenerated} degenerate draws regenerated)" if regenerated else ""),
        "PASS",
    ]
    _emit(args, lines, doc)
    return EXIT_OK


# ---------------------------------------------------------------------------
# check universal-duality


def _random_universal_spec(rng: random.Random, d: int) -> Universal:
    # distinct rows per matrix: repeated rows make the dual sequences
    # coincide, which degenerates the inverse structurally
    def mat():
        while True:
            rows = tuple(
                tuple(rng.randint(-3, 3) for _ in range(d)) for _ in range(d)
            )
            if len(set(rows)) == d:
                return rows

    return Universal(d, mat(), mat())


def cmd_check_universal(args) -> int:
    rng = random.Random(args.seed)
    strip_seed = args.seed * 1000 + 1
    regenerated = 0
    replaced = 0
    passed = 0
    lo, hi = -20, 21
    for _trial in range(args.trials):
        while True:
            spec = _random_universal_spec(rng, args.d)
            inv = universal_inverse_spec(spec)
            ok = False
            for _attempt in range(8):
                strips = []
                for _ in range(args.d):
                    strips.append(
                        random_strip(args.d, lo, hi, strip_seed, coord_range=(1, 100))
                    )
                    strip_seed += 1
                try:
                    back = apply_universal(inv, apply_universal(spec, strips))
                except DegenerateImage:
                    regenerated += 1
                    continue
                ok = True
                break
            if ok:
                break
            replaced += 1
        shifts = [equal_up_to_shift(s, b, max_shift=2) for s, b in zip(strips, back)]
        if any(s != 0 for s in shifts):
            doc = {
                "check": "universal-duality",
                "d": args.d,
                "trial": _trial,
                "spec": spec_to_json(spec),
                "shifts": shifts,
                "pass": False,
            }
            _emit(args, [f"universal duality FAIL at trial {_trial}: "
                         f"round trip is not the identity (shifts {shifts})"], doc)
            return EXIT_FAIL
        passed += 1
    doc = {
        "check": "universal-duality",
        "d": args.d,
        "trials": args.trials,
        "passed": passed,
        "regenerated": regenerated,
        "specs_replaced": replaced,
        "pass": True,
    }
    lines = [
        f"universal duality d={args.d}: {passed}/{args.trials} round trips are "
        f"the exact identity"
        + (f" ({regenerated} degenerate draws regenerated, "
           f"{replaced} specs replaced)" if regenerated or replaced else ""),
        "PASS",
    ]
    _emit(args, lines, doc)
    return EXIT_OK


# ---------------------------------------------------------------------------
# check corrugated


def cmd_check_corrugated(args) -> int:
    d = args.d
    maps = [dented(d, m) for m in range(1, d)]
    cor = Corrugated(d)
    seed = args.seed
    regenerated = 0
    discovered = None
    for _trial in range(args.trials):
        while True:
            if d == 2:
                strip = random_strip(d, -6, 26, seed, coord_range=(1, 10))
            else:
                strip = random_corrugated_strip(d, -6, 26, seed,
                                                coord_range=(1, 10)).strip
            seed += 1
            try:
                cor_out = apply_strip(cor, strip)
                dent_outs = [apply_strip(mp, strip) for mp in maps]
            except DegenerateImage:
                regenerated += 1
                continue
            break
        shifts = tuple(
            equal_up_to_shift(out, cor_out, max_shift=d + 2) for out in dent_outs
        )
        if any(s is None for s in shifts):
            doc = {
                "check": "corrugated",
                "d": d,
                "trial": _trial,
                "shifts": list(shifts),
                "pass": False,
            }
            _emit(args, [f"corrugated FAIL at trial {_trial}: no shift relates "
                         f"a dented image to the corrugated image ({shifts})"], doc)
            return EXIT_FAIL
        if discovered is None:
            discovered = shifts
        elif shifts != discovered:
            doc = {
                "check": "corrugated",
                "d": d,
                "trial": _trial,
                "shifts": list(shifts),
                "expected": list(discovered),
                "pass": False,
            }
            _emit(args, [f"corrugated FAIL at trial {_trial}: shifts {shifts} "
                         f"differ from first trial {discovered}"], doc)
            return EXIT_FAIL
        if d >= 3 and not is_corrugated(cor_out):
            doc = {"check": "corrugated", "d": d, "trial": _trial,
                   "image_corrugated": False, "pass": False}
            _emit(args, [f"corrugated FAIL at trial {_trial}: image strip is "
                         f"not corrugated"], doc)
            return EXIT_FAIL
    shift_report = ", ".join(
        f"{format_map_name(mp)} -> {s}" for mp, s in zip(maps, discovered)
    )
    doc = {
        "check": "corrugated",
        "d": d,
        "trials": args.trials,
        "shifts": {format_map_name(mp): s for mp, s in zip(maps, discovered)},
        "regenerated": regenerated,
        "image_corrugated": d >= 3,
        "pass": True,
    }
    lines = [
        f"corrugated d={d}: {args.trials}/{args.trials} trials exact; "
        f"discovered shifts: {shift_report}"
        + ("; images stay corrugated" if d >= 3 else "")
        + (f" ({regenerated} degenerate draws regenerated)" if regenerated else ""),
        "PASS",
    ]
    _emit(args, lines, doc)
    return EXIT_OK


# ---------------------------------------------------------------------------
# check lax


def cmd_check_lax(args) -> int:
    spec = parse_map_name(args.map, args.d)
    lams = tuple(Fraction(t) for t in args.lambdas.split(","))
    seed = args.seed
    report = None
    seed_used = None
    skipped = []
    for _attempt in range(args.max_retries):
        try:
            p = random_twisted(args.d, args.n, seed, coord_range=(1, 10))
            report = conservation_check(
                p,
                spec,
                lam_samples=lams,
                precision=args.precision,
                conservation_tol=args.tol,
            )
            seed_used = seed
            break
        except (SignObstruction, DegenerateImage, IllConditioned, GenerationFailed) as e:
            skipped.append((seed, type(e).__name__))
            seed += 1
    if report is None:
        raise AllSeedsDegenerate(
            f"no liftable polygon in {args.max_retries} seeds starting at "
            f"{args.seed}; last: {skipped[-1][1]}"
        )
    doc = {
        "check": "lax",
        "map": format_map_name(spec),
        "d": args.d,
        "n": args.n,
        "seed": args.seed,
        "seed_used": seed_used,
        "seeds_skipped": len(skipped),
        "precision_bits": args.precision,
        "lambda": report["lambda"],
        "max_rel_dev": report["max_rel_dev"],
        "tol": args.tol,
        "pass": report["pass"],
    }
    lines = [
        f"lax {doc['map']} d={args.d} n={args.n} seed_used={seed_used} "
        f"precision={args.precision}: max relative deviation "
        f"{report['max_rel_dev']:.3e} vs tolerance {args.tol:.0e}"
        + (f" ({len(skipped)} seeds skipped on lift obstructions)" if skipped else ""),
        "PASS" if report["pass"] else "FAIL",
    ]
    _emit(args, lines, doc)
    return EXIT_OK if report["pass"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# tables


def _expand_rows(expr: str) -> list:
    rows = []
    for token in expr.split(","):
        token = token.strip()
        if "-" in token.split(":", 1)[-1]:
            prefix, span = token.split(":", 1)
            first, last = span.split("-", 1)
            for i in range(int(first), int(last) + 1):
                rows.append(f"{prefix}:{i}")
        else:
            rows.append(token)
    return rows


def cmd_tables(args) -> int:
    rows = _expand_rows(args.rows) if args.rows else None

    def progress(res):
        row_id, seed, label, final, truncated, err = res[:6]
        if err:
            msg = f"[{row_id} seed {seed}] error: {err}"
        else:
            msg = (f"[{row_id} seed {seed}] {label}, final log10 height "
                   f"{final:.1f}" + (" [truncated]" if truncated else ""))
        print(msg, file=sys.stderr)
        sys.stderr.flush()

    report = reproduce_tables(
        seeds=args.seeds,
        iterations_2d=args.iters_2d,
        iterations_3d=args.iters_3d,
        rows=rows,
        jobs=args.jobs,
        digit_budget=args.budget,
        progress=progress if not args.quiet else None,
    )
    if args.out_dir:
        import os

        os.makedirs(args.out_dir, exist_ok=True)
        with open(os.path.join(args.out_dir, "report.json"), "w") as fh:
            json.dump(report, fh, indent=2)
    lines = []
    for row in report["rows"]:
        mark = "MATCH" if row["match"] else "MISMATCH"
        lines.append(
            f"{row['row_id']:>6}  {row['spec']:<24} expected "
            f"{row['expected_label']:<22} observed {row['observed_label']:<22} "
            f"median final log10 {row['median_final_log10_height']:.1f}  {mark}"
        )
        for err in row["errors"]:
            lines.append(f"        error: {err}")
    lines.append(
        "all rows match: " + ("yes" if report["all_match"] else "no")
    )
    _emit(args, lines, report)
    return EXIT_OK if report["all_match"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pentalab",
        description="Exact-arithmetic experiments with pentagram maps on "
        "twisted polygons",
    )
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def add_common(p):
        p.add_argument("--format", choices=("text", "json"), default="text")

    g = sub.add_parser("gen", help="generate a random twisted polygon")
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--coord-range", type=_parse_range, default=(1, 10),
                   metavar="LO,HI")
    g.add_argument("--out", help="output path; stdout when omitted")
    add_common(g)
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("trace", help="iterate a map and classify height growth")
    t.add_argument("--map", required=True)
    t.add_argument("--d", type=int, required=True)
    t.add_argument("--n", type=int, required=True)
    t.add_argument("--iters", type=int, required=True)
    t.add_argument("--seed", type=int, default=1)
    t.add_argument("--coord-range", type=_parse_range, default=(1, 10),
                   metavar="LO,HI")
    t.add_argument("--budget", type=int, default=DEFAULT_DIGIT_BUDGET,
                   help="digit budget before the trace truncates")
    t.add_argument("--out", help="write the trace CSV here")
    add_common(t)
    t.set_defaults(func=cmd_trace)

    c = sub.add_parser("check", help="exact and numerical verification runs")
    csub = c.add_subparsers(dest="kind", required=True)

    cd = csub.add_parser("duality", help="round trip of a map and its dual")
    cd.add_argument("--d", type=int, required=True)
    cd.add_argument("--I", type=_parse_tuple, required=True, metavar="I1,I2,..")
    cd.add_argument("--J", type=_parse_tuple, required=True, metavar="J1,J2,..")
    cd.add_argument("--n", type=int, default=11)
    cd.add_argument("--trials", type=int, default=50)
    cd.add_argument("--seed", type=int, default=1)
    add_common(cd)
    cd.set_defaults(func=cmd_check_duality)

    cu = csub.add_parser("universal-duality",
                         help="round trip of random universal maps")
    cu.add_argument("--d", type=int, required=True)
    cu.add_argument("--trials", type=int, default=50)
    cu.add_argument("--seed", type=int, default=1)
    add_common(cu)
    cu.set_defaults(func=cmd_check_universal)

    cc = csub.add_parser("corrugated",
                         help="corrugated map vs dented maps on strips")
    cc.add_argument("--d", type=int, required=True)
    cc.add_argument("--trials", type=int, default=50)
    cc.add_argument("--seed", type=int, default=1)
    add_common(cc)
    cc.set_defaults(func=cmd_check_corrugated)

    cl = csub.add_parser("lax", help="spectral conservation over one map step")
    cl.add_argument("--map", required=True)
    cl.add_argument("--d", type=int, required=True)
    cl.add_argument("--n", type=int, required=True)
    cl.add_argument("--seed", type=int, default=1)
    cl.add_argument("--precision", type=int, default=DEFAULT_PRECISION)
    cl.add_argument("--tol", type=float, default=DEFAULT_CONSERVATION_TOL)
    cl.add_argument("--lambdas", default="1/2,1,2",
                    help="comma-separated rational spectral samples")
    cl.add_argument("--max-retries", type=int, default=200,
                    help="seeds to try past lift obstructions")
    add_common(cl)
    cl.set_defaults(func=cmd_check_lax)

    tb = sub.add_parser("tables", help="rerun the catalogued experiment rows")
    tb.add_argument("--seeds", type=_parse_tuple, default=(1, 2, 3, 4, 5),
                    metavar="S1,S2,..")
    tb.add_argument("--rows", help="subset, e.g. 2d:1-4 or 2d:1,3d:12")
    tb.add_argument("--iters-2d", type=int, default=10)
    tb.add_argument("--iters-3d", type=int, default=8)
    tb.add_argument("--jobs", type=int, default=None,
                    help="worker processes; PENTALAB_JOBS is the default")
    tb.add_argument("--budget", type=int, default=DEFAULT_DIGIT_BUDGET)
    tb.add_argument("--out-dir", help="write report.json here")
    tb.add_argument("--quiet", action="store_true",
                    help="suppress per-cell progress on stderr")
    add_common(tb)
    tb.set_defaults(func=cmd_tables)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (GenerationFailed, AllSeedsDegenerate, DegenerateImage,
            GcdObstruction, SignObstruction) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

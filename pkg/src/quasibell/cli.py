"""``quasibell`` command line.

Exit codes: 0 success, 2 invalid input, 3 a property check found a
counterexample (or a selftest criterion failed), 4 optimizer budget exhausted.
"""
import argparse
import csv
import io
import json
import logging
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__, acceptance, joint, quasi_bell, symmetrize, werner
from .config import get_tolerances, reset_tolerances, set_tolerances
from .errors import BudgetExhausted, QuasiBellError
from .optimizer import maximize

log = logging.getLogger("quasibell")


def _warn(msg):
    print(f"quasibell: warning: {msg}", file=sys.stderr)


def _error(msg):
    print(f"quasibell: error: {msg}", file=sys.stderr)

EXIT_OK, EXIT_INVALID, EXIT_COUNTEREXAMPLE, EXIT_BUDGET = 0, 2, 3, 4

# descriptive names of the formulas each command exercises
FORMULA_REFS = {
    "joint": ["noncommuting joint table", "positivity interval", "Frechet bounds"],
    "symmetrize": ["symmetrized product", "hafnian pairing rule", "Moyal exponential product"],
    "bell": ["quasi-Bell operator K_N", "scaled Hadamard contraction", "singlet correlator -a.b"],
    "optimize": ["quasi-Bell operator K_N", "multistart maximization"],
    "werner": ["Werner state scaling", "violation threshold 1/|<K_N>|"],
    "selftest": ["acceptance criteria"],
}


class InvalidInput(Exception):
    pass


def parse_vector(text, name="vector", normalize=True):
    try:
        v = np.array([float(x) for x in str(text).split(",")])
    except ValueError:
        raise InvalidInput(f"{name}: expected comma-separated floats, got {text!r}")
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise InvalidInput(f"{name}: expected three finite components, got {text!r}")
    if normalize:
        n = np.linalg.norm(v)
        if n == 0:
            raise InvalidInput(f"{name}: zero vector has no direction")
        if abs(n - 1) > 1e-6:
            _warn(f"{name} has norm {n:.6g}; normalizing")
        v = v / n
    return v


def parse_floats(text, name):
    try:
        return [float(x) for x in str(text).split(",")]
    except ValueError:
        raise InvalidInput(f"{name}: expected comma-separated floats, got {text!r}")


def to_jsonable(x):
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return to_jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if np.isfinite(x) else None
    return x


def load_instance(path):
    try:
        with open(path) as fh:
            d = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidInput(f"cannot read vectors from {path}: {e}")
    if "result" in d:
        d = d["result"]
    try:
        return quasi_bell.QuasiBellInstance.from_dict(d)
    except KeyError as e:
        raise InvalidInput(f"{path}: missing key {e}")


def _pretty(obj, indent=0):
    pad = "  " * indent
    lines = []
    for k, v in obj.items():
        if isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines.extend(_pretty(v, indent + 1))
        elif isinstance(v, list) and v and isinstance(v[0], list):
            lines.append(f"{pad}{k}:")
            for row in v:
                lines.append(pad + "  " + "  ".join(_fmt(x) for x in row))
        elif isinstance(v, list):
            lines.append(f"{pad}{k}: " + "  ".join(_fmt(x) for x in v))
        else:
            lines.append(f"{pad}{k}: {_fmt(v)}")
    return lines


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def _rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def emit(args, result, csv_rows=None, headline=None):
    """Write ``result`` in the requested format to ``--out`` or stdout."""
    result = to_jsonable(result)
    if args.format == "csv":
        if csv_rows is None:
            raise InvalidInput(f"{args.command} has no tabular output; use json or pretty")
        text = csv_rows if isinstance(csv_rows, str) else _rows_to_csv(csv_rows)
    elif args.format == "pretty":
        lines = [headline] if headline else []
        lines.extend(_pretty(result))
        text = "\n".join(lines) + "\n"
    else:
        doc = {"provenance": provenance(args), "result": result}
        text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        if headline:
            print(headline)
    else:
        sys.stdout.write(text)


def provenance(args):
    skip = {"func", "command", "config", "out", "format", "tol"}
    config = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    tols = get_tolerances()
    return {
        "version": __version__,
        "seed": getattr(args, "seed", None),
        "config": to_jsonable({"command": args.command, **config, "tolerances": tols.__dict__}),
        "paper_eq_refs": FORMULA_REFS[args.command],
    }


# -- commands ----------------------------------------------------------------

def _order(args):
    if args.order is None:
        raise InvalidInput("--order is required")
    if not 0 <= args.order <= 10:
        raise InvalidInput("--order must lie in 0..10")
    return args.order


def cmd_joint(args):
    if args.check_frechet and args.random:
        run = joint.frechet_property_run(args.random, seed=args.seed)
        d = run.to_dict()
        emit(args, d, headline=f"{run.counterexamples} counterexamples over {args.random} pair "
                               f"and {args.random} triple instances")
        return EXIT_COUNTEREXAMPLE if run.counterexamples else EXIT_OK
    if args.random:
        raise InvalidInput("--random is only used together with --check-frechet")

    if args.a0 is None or args.a1 is None:
        raise InvalidInput("--a0 and --a1 are required")
    u = parse_vector(args.u, "u", normalize=False)
    dirs = [parse_vector(args.a0, "a0"), parse_vector(args.a1, "a1")]
    if args.a2 is not None:
        dirs.append(parse_vector(args.a2, "a2"))
    arity = len(dirs)

    if args.mode == "explicit":
        if args.correlator is None:
            raise InvalidInput("--mode explicit needs --correlator")
        vals = parse_floats(args.correlator, "correlator")
        need = 1 if arity == 2 else 4
        if len(vals) != need:
            raise InvalidInput(f"arity {arity} needs {need} correlator value(s)")
        c = joint.CorrelatorSpec.for_pair(*vals) if arity == 2 else joint.CorrelatorSpec.for_triple(*vals)
    elif args.mode == "independence":
        c = joint.independence_correlators(u, dirs)
    elif args.mode == "mixed":
        if arity != 2:
            raise InvalidInput("mixed mode is defined for two observables")
        c = joint.CorrelatorSpec.for_pair(joint.mixed_state_correlator(u, *dirs))
    else:
        if arity == 2:
            c = joint.CorrelatorSpec.for_pair(float(dirs[0] @ dirs[1]))
        else:
            c = symmetrize.symmetrized_correlators(dirs)(u)

    if arity == 2:
        table = joint.noncommuting_pair_table(u, dirs[0], dirs[1], c)
    else:
        table = joint.noncommuting_triple_table(u, dirs, c)
    out = {"mode": args.mode, "table": table.to_dict(), "min_entry": table.min_entry(),
           "nonnegative": table.is_nonnegative()}
    if arity == 2:
        iv = joint.positivity_interval(u, *dirs)
        out["positivity_interval"] = [iv.lo, iv.hi]
    bad = False
    if args.check_frechet:
        if arity == 2:
            rep = joint.frechet_pair_check(table)
            bad = not rep.equivalent
        else:
            rep = joint.frechet_triple_check(table, joint.pair_tables_of(u, dirs, c))
            bad = not (rep.upper_equivalent and rep.lower_implied and rep.rewritten_consistent)
        out["frechet"] = rep.to_dict()

    rows = [["outcome", "probability"]] + [[k, v] for k, v in out["table"]["entries"].items()]
    emit(args, out, rows, headline=_table_headline(out["table"]["entries"]))
    return EXIT_COUNTEREXAMPLE if bad else EXIT_OK


def _table_headline(entries):
    return "  ".join(f"p{k}={v:+.4f}" for k, v in entries.items())


def cmd_symmetrize(args):
    rng = np.random.default_rng(args.seed)
    if args.random:
        if not args.k:
            raise InvalidInput("--random needs --k")
        dirs = joint.random_unit(rng, args.k)
    else:
        if not args.a:
            raise InvalidInput("give directions with --a (repeatable) or use --k K --random")
        dirs = np.array([parse_vector(a, f"a{i}") for i, a in enumerate(args.a)])
        if args.k and args.k != len(dirs):
            raise InvalidInput(f"--k {args.k} but {len(dirs)} directions given")
    methods = {
        "pairing": lambda d: symmetrize.symmetrize_pairing(d),
        "bruteforce": lambda d: symmetrize.symmetrize_bruteforce(d),
        "moyal": lambda d: symmetrize.moyal_product_operator(d, step=args.step),
    }
    primary = methods[args.method](dirs)
    out = {"k": len(dirs), "directions": dirs, "method": args.method,
           "scalar": primary.scalar, "vector": primary.vector}
    if args.u is not None:
        out["expectation"] = primary.expectation(parse_vector(args.u, "u", normalize=False))
    bad = False
    if args.compare:
        names = [m.strip() for m in args.compare.split(",") if m.strip()]
        unknown = set(names) - set(methods)
        if unknown:
            raise InvalidInput(f"unknown method(s): {', '.join(sorted(unknown))}")
        ref = symmetrize.symmetrize_pairing(dirs)
        cmp = {}
        for m in names:
            r = methods[m](dirs)
            res = max(abs(r.scalar - ref.scalar), float(np.max(np.abs(r.vector - ref.vector))))
            cmp[m] = {"scalar": r.scalar, "vector": r.vector, "residual_vs_pairing": res}
        worst = max(c["residual_vs_pairing"] for c in cmp.values())
        out["comparison"] = cmp
        out["max_residual"] = worst
        out["residual_tolerance"] = args.residual_tol
        bad = worst > args.residual_tol
    head = f"k={len(dirs)} scalar={primary.scalar:.10g} vector=" + ",".join(f"{x:.10g}" for x in primary.vector)
    if "max_residual" in out:
        head += f" max residual {out['max_residual']:.2e}"
    rows = [["component", "value"], ["scalar", primary.scalar]]
    rows += [[c, v] for c, v in zip("xyz", primary.vector)]
    emit(args, out, rows, headline=head)
    return EXIT_COUNTEREXAMPLE if bad else EXIT_OK


def cmd_bell(args):
    N = _order(args)
    out = {"N": N, "classical_bound": 1}
    rows = None
    heads = []
    bad = False
    if args.table1:
        grid = quasi_bell.test_expressions(N)
        out["test_expressions"] = grid
        rows = [[f"b{i}" for i in range(grid.shape[1])]] + grid.tolist()
        heads.append("test expressions:\n" + "\n".join(" ".join(f"{x:+d}" for x in r) for r in grid))
    if args.enumerate:
        rep = quasi_bell.classical_bound_verify(N, cap=args.cap)
        out["enumeration"] = rep.to_dict()
        bad |= not rep.all_unit
        heads.append(f"min {rep.min_value:+d} max {rep.max_value:+d} over {rep.assignments} assignments")
    if args.sample:
        rep = quasi_bell.classical_bound_sample(N, samples=args.sample, seed=args.seed)
        out["sampling"] = rep.to_dict()
        bad |= not rep.all_unit
        heads.append(f"sampled min {rep.min_value:+d} max {rep.max_value:+d} over {rep.assignments} assignments")
    inst = None
    if args.evaluate:
        inst = load_instance(args.evaluate)
    elif args.settings:
        inst = {"chsh": quasi_bell.chsh_settings, "hexagonal": quasi_bell.hexagonal_settings}[args.settings]()
    if inst is not None:
        if inst.N != N:
            raise InvalidInput(f"vectors are for order {inst.N}, not {N}")
        q = quasi_bell.quantum_value(inst)
        out["instance"] = inst.to_dict()
        out["quantum_value"] = q
        out["abs_quantum_value"] = abs(q)
        out["violates"] = abs(q) > 1
        if args.werner_z is not None:
            out["werner_z"] = args.werner_z
            out["werner_value"] = quasi_bell.werner_value(inst, args.werner_z)
        heads.append(f"<K_{N}> = {q:.12g}")
    if len(out) == 2:
        raise InvalidInput("nothing to do: pass --table1, --enumerate, --sample, --evaluate or --settings")
    emit(args, out, rows, headline="\n".join(heads))
    return EXIT_COUNTEREXAMPLE if bad else EXIT_OK


def cmd_optimize(args):
    try:
        r = maximize(_order(args), restarts=args.restarts, seed=args.seed, tol=args.objective_tol,
                     max_evals=args.max_evals, ansatz=args.ansatz, jobs=args.jobs)
    except BudgetExhausted as e:
        r = e.result
    out = r.to_dict(traces=True)
    rows = [["party", "index", "x", "y", "z"]]
    rows += [["a", i, *v] for i, v in enumerate(r.a_dirs)] + [["b", i, *v] for i, v in enumerate(r.b_dirs)]
    emit(args, out, rows, headline=f"N={r.N} best |<K_N>| = {r.best_value:.6f} "
                                   f"({r.restarts_used} restarts, {r.evaluations} evaluations)")
    return EXIT_BUDGET if r.budget_exhausted else EXIT_OK


def _grid(text):
    try:
        return werner.parse_grid(text)
    except ValueError:
        raise InvalidInput(f"--sweep: expected start:stop:step, got {text!r}")


def cmd_werner(args):
    N = _order(args)
    if args.vectors:
        inst = load_instance(args.vectors)
        if inst.N != N:
            raise InvalidInput(f"vectors are for order {inst.N}, not {N}")
        source = args.vectors
    elif N == 1:
        inst, source = quasi_bell.chsh_settings(), "chsh settings"
    elif N == 2:
        inst, source = quasi_bell.hexagonal_settings(), "hexagonal settings"
    else:
        r = maximize(N, restarts=args.restarts, seed=args.seed, jobs=args.jobs)
        inst, source = r.instance(), f"optimized (seed {args.seed})"
    thr = werner.violation_threshold(N, inst)
    sw = werner.sweep(N, inst, _grid(args.sweep))
    out = {"N": N, "source": source, "quantum_value": quasi_bell.quantum_value(inst),
           "threshold": thr, "sweep": sw.to_dict(),
           "literature_annotations": werner.LITERATURE_ANNOTATIONS, "caveat": werner.CAVEAT}
    emit(args, out, sw.to_csv(), headline=f"N={N} violation for z > {thr:.6f}")
    return EXIT_OK


def cmd_selftest(args):
    results = acceptance.run_all(skip_slow=args.skip_slow, echo=print if args.format != "json" else None)
    failed = [c for c in results if not c.passed]
    summary = {"passed": len(results) - len(failed), "failed": len(failed),
               "checks": [{"number": c.number, "name": c.name, "passed": c.passed,
                           "detail": c.detail, "seconds": round(c.seconds, 3)} for c in results]}
    if args.format == "json" or args.out:
        saved_format = args.format
        args.format = "json"
        emit(args, summary)
        args.format = saved_format
    else:
        print(f"{summary['passed']} passed, {summary['failed']} failed")
    return EXIT_COUNTEREXAMPLE if failed else EXIT_OK


# -- parser ------------------------------------------------------------------

def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--format", choices=["json", "csv", "pretty"],
                   help="output format (default json; pretty for selftest)")
    p.add_argument("--config", help="JSON or YAML file with default values for flags")
    p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                   help="override a numerical tolerance (algebra, exponential, unit_norm, positivity, physical)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (1 = deterministic sequential)")
    return p


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(prog="quasibell", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"quasibell {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("joint", parents=[common], help="joint tables of noncommuting observables")
    p.add_argument("--u", default="0,0,0", help="Bloch vector of the qubit (not normalized)")
    p.add_argument("--a0")
    p.add_argument("--a1")
    p.add_argument("--a2", help="third direction for an arity-3 table")
    p.add_argument("--mode", choices=["explicit", "independence", "mixed", "symmetrized"], default="symmetrized")
    p.add_argument("--correlator", help="explicit correlators: c01 or c01,c02,c12,c012")
    p.add_argument("--check-frechet", action="store_true")
    p.add_argument("--random", type=int, default=0, metavar="COUNT",
                   help="with --check-frechet: random property run over COUNT instances")
    p.set_defaults(func=cmd_joint)

    p = sub.add_parser("symmetrize", parents=[common], help="symmetrized products of spin observables")
    p.add_argument("--a", action="append", help="direction (repeat for each factor)")
    p.add_argument("--k", type=int)
    p.add_argument("--random", action="store_true", help="draw --k random directions")
    p.add_argument("--method", choices=["pairing", "bruteforce", "moyal"], default="pairing")
    p.add_argument("--compare", help="comma list of methods to check against pairing")
    p.add_argument("--step", type=float, help="Moyal finite-difference step")
    p.add_argument("--residual-tol", type=float, default=1e-5)
    p.add_argument("--u", help="also report the expectation in this Bloch state")
    p.set_defaults(func=cmd_symmetrize)

    p = sub.add_parser("bell", parents=[common], help="quasi-Bell operator: bounds and quantum values")
    p.add_argument("--order", type=int, help="order N (required)")
    p.add_argument("--table1", action="store_true", help="test expressions for every b assignment")
    p.add_argument("--enumerate", action="store_true", help="exhaustive classical bound check")
    p.add_argument("--cap", type=int, default=quasi_bell.DEFAULT_ENUMERATION_CAP)
    p.add_argument("--sample", type=int, metavar="COUNT", help="random classical assignments")
    p.add_argument("--evaluate", metavar="VECTORS_JSON")
    p.add_argument("--settings", choices=["chsh", "hexagonal"], help="built-in measurement settings")
    p.add_argument("--werner-z", type=float)
    p.set_defaults(func=cmd_bell)

    p = sub.add_parser("optimize", parents=[common], help="maximize the quantum violation")
    p.add_argument("--order", type=int, help="order N (required)")
    p.add_argument("--restarts", type=int)
    p.add_argument("--ansatz", choices=["full", "reduced"], default="full")
    p.add_argument("--max-evals", type=int)
    p.add_argument("--objective-tol", type=float, default=1e-9, help="simplex tolerance on the objective")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("werner", parents=[common], help="Werner-state thresholds and sweeps")
    p.add_argument("--order", type=int, help="order N (required)")
    p.add_argument("--sweep", default="0:1:0.05", help="start:stop:step grid in z")
    p.add_argument("--vectors", metavar="VECTORS_JSON")
    p.add_argument("--restarts", type=int, help="restarts when optimizing settings for N > 2")
    p.set_defaults(func=cmd_werner)

    p = sub.add_parser("selftest", parents=[common], help="run the acceptance criteria")
    p.add_argument("--skip-slow", action="store_true", help="skip the multistart reproduction")
    p.set_defaults(func=cmd_selftest)
    return parser, sub.choices


_NEG_VECTOR = re.compile(r"^-[\d.]")


def _join_negative_vectors(argv):
    # "--a0 -1,0,0" would be read as an option; rewrite to "--a0=-1,0,0"
    out = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and _NEG_VECTOR.match(tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def _load_config(path):
    text = Path(path).read_text()
    if path.endswith((".yaml", ".yml")):
        try:
            import yaml
        except ImportError:
            raise InvalidInput("YAML config needs PyYAML (pip install quasibell[yaml])")
        data = yaml.safe_load(text) or {}
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise InvalidInput(f"{path}: config must be a mapping")
    return {k.replace("-", "_"): v for k, v in data.items()}


def _apply_tolerances(items):
    overrides = {}
    for item in items:
        name, _, value = item.partition("=")
        try:
            overrides[name.strip().replace("-", "_")] = float(value)
        except ValueError:
            raise InvalidInput(f"--tol expects NAME=VALUE, got {item!r}")
    try:
        set_tolerances(**overrides)
    except TypeError as e:
        raise InvalidInput(str(e))


def parse_args(argv=None):
    parser, subparsers = build_parser()
    argv = _join_negative_vectors(list(sys.argv[1:] if argv is None else argv))
    args = parser.parse_args(argv)
    if args.config:
        try:
            cfg = _load_config(args.config)
        except (OSError, json.JSONDecodeError) as e:
            raise InvalidInput(f"cannot read config {args.config}: {e}")
        sp = subparsers[args.command]
        known = {a.dest for a in sp._actions}
        unknown = set(cfg) - known
        if unknown:
            raise InvalidInput(f"unknown config key(s): {', '.join(sorted(unknown))}")
        # config values become defaults, so explicit flags still win
        sp.set_defaults(**cfg)
        args = parser.parse_args(argv)
    if args.format is None:
        args.format = "pretty" if args.command == "selftest" else "json"
    return args


def main(argv=None):
    logging.basicConfig(format="quasibell: %(levelname)s: %(message)s", level=logging.WARNING)
    try:
        args = parse_args(argv)
    except InvalidInput as e:
        _error(str(e))
        return EXIT_INVALID
    except SystemExit as e:
        return EXIT_INVALID if e.code else EXIT_OK
    if args.verbose:
        log.setLevel(logging.INFO)
    try:
        _apply_tolerances(args.tol)
        return args.func(args)
    except (InvalidInput, QuasiBellError) as e:
        _error(str(e))
        return EXIT_INVALID
    finally:
        reset_tolerances()


if __name__ == "__main__":
    sys.exit(main())

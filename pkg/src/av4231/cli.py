"""Command-line front end.

Data goes to standard output (or ``--out``); run metadata and progress go
to standard error.  Exit codes: 0 success, 1 usage error, 2 invalid input,
3 resource limit, 4 power iteration did not converge.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
import warnings

from . import __version__
from .errors import NotConverged, ResourceLimit, ValidationError

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_RESOURCE, EXIT_NOT_CONVERGED = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p, *names):
    if "k" in names:
        p.add_argument("--k", type=int, required=True)
    if "k?" in names:
        p.add_argument("--k", type=int)
    if "n" in names:
        p.add_argument("--n", type=int, required=True)
    if "n?" in names:
        p.add_argument("--n", type=int)
    if "iter" in names:
        p.add_argument("--tol", type=float, default=1e-6)
        p.add_argument("--max-iter", type=int, default=100_000)
    if "mode" in names:
        p.add_argument("--mode", choices=["csr", "matrix-free", "auto"], default="auto")
        p.add_argument("--memory-budget", type=int, default=8 * 2**30)
        p.add_argument("--threads", type=int)
    p.add_argument("--format", choices=["json", "csv", "text"], default="text")
    p.add_argument("--out")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="av4231", description="Automata, counts and growth-rate bounds "
                                                "for 4231-avoiding permutations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="<command>", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("states", help="number of states of Aut_k, or the states of length --n")
    _common(p, "k?", "n?")
    p = sub.add_parser("rank", help="index of a lock sequence")
    p.add_argument("--seq", required=True)
    _common(p, "k?")
    p = sub.add_parser("unrank", help="lock sequence with index --n")
    _common(p, "n", "k?")
    p = sub.add_parser("build", help="export the transfer matrix A_k")
    _common(p, "k", "mode")
    p = sub.add_parser("stats", help="structural statistics of Aut_k")
    _common(p, "k", "mode")
    p = sub.add_parser("eig", help="dominant eigenvalue of A_k by power iteration")
    _common(p, "k", "iter", "mode")
    p = sub.add_parser("certify", help="verify A_k v >= c v exactly")
    p.add_argument("--c", required=True)
    p.add_argument("--vector", help="certificate file supplying v (default: from power iteration)")
    p.add_argument("--save", help="write the certificate file here")
    _common(p, "k", "iter", "mode")
    p = sub.add_parser("count", help="exact word counts (A_k^n)_{1,1} for n = 0..--n")
    _common(p, "k", "n", "mode")
    p = sub.add_parser("oracle", help="brute-force count of 4231-avoiders of length --n")
    p.add_argument("--max-n", type=int, default=11)
    _common(p, "n", "k?")
    p = sub.add_parser("encode", help="insertion encoding of a permutation")
    p.add_argument("--perm", required=True)
    _common(p)
    p = sub.add_parser("decode", help="permutation with a given insertion encoding")
    p.add_argument("--word", required=True)
    _common(p)
    p = sub.add_parser("accepts", help="does Aut_k accept the word?")
    p.add_argument("--word", required=True)
    _common(p, "k")
    p = sub.add_parser("table", help="lambda_k for k = 1..--k")
    _common(p, "k", "iter", "mode")
    p = sub.add_parser("extrapolate", help="fit lambda_k ~ a + b/sqrt(k) (a diagnostic, not a bound)")
    p.add_argument("--table", help="CSV with columns k,lambda (e.g. from the table command)")
    p.add_argument("--published", action="store_true",
                   help="use the growth rates reported for k = 1..13")
    _common(p, "k?", "n?", "iter", "mode")
    return parser


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _fmt(args, value: dict, text: str | None = None) -> str:
    if args.format == "json":
        return json.dumps(value) + "\n"
    if args.format == "csv":
        return _rows_csv(list(value), [list(value.values())])
    return (text if text is not None else " ".join(str(v) for v in value.values())) + "\n"


def _operator(args):
    from .spectral import Operator
    return Operator(args.k, mode=args.mode, memory_budget=args.memory_budget)


def _progress(it, lower, upper):
    print(f"# iteration {it}: [{lower:.10f}, {upper:.10f}]", file=sys.stderr, flush=True)


def cmd_states(args, meta):
    from .lockmodel import count_states, enumerate_states, format_lock_sequence
    if args.n is not None:
        states = enumerate_states(args.n)
        if args.format == "json":
            return json.dumps([format_lock_sequence(s) for s in states]) + "\n"
        return "".join(format_lock_sequence(s) + "\n" for s in states)
    if args.k is None:
        raise UsageError("states needs --k or --n")
    return _fmt(args, {"k": args.k, "states": count_states(args.k)}, str(count_states(args.k)))


def cmd_rank(args, meta):
    from .lockmodel import parse_lock_sequence, rank
    s = parse_lock_sequence(args.seq)
    if args.k is not None and len(s) > args.k:
        raise ValidationError(f"state of length {len(s)} is not in Aut_{args.k}")
    i = rank(s)
    return _fmt(args, {"seq": ",".join(map(str, s)), "index": i}, str(i))


def cmd_unrank(args, meta):
    from .lockmodel import format_lock_sequence, unrank
    s = format_lock_sequence(unrank(args.n, args.k))
    return _fmt(args, {"index": args.n, "seq": s}, s)


def cmd_build(args, meta):
    op = _operator(args)
    meta["mode"] = op.mode
    if op.matrix is None:
        raise ResourceLimit("export needs the materialized matrix; raise --memory-budget")
    if args.out:
        with open(args.out, "w") as fh:
            op.matrix.export_text(fh)
        return None
    return op.matrix.export_text()


def cmd_stats(args, meta):
    from .automaton import stats
    meta["mode"] = "matrix-free"
    st = stats(args.k)
    if args.format == "json":
        return st.to_json() + "\n"
    value = json.loads(st.to_json())
    if args.format == "csv":
        return _rows_csv(list(value), [list(value.values())])
    return "".join(f"{key} {val}\n" for key, val in value.items())


def cmd_eig(args, meta):
    from .spectral import power_iteration
    op = _operator(args)
    meta["mode"] = op.mode
    try:
        est = power_iteration(args.k, args.tol, args.max_iter, op=op, progress=_progress)
        code = EXIT_OK
    except NotConverged as exc:
        est = exc.estimate
        code = EXIT_NOT_CONVERGED
    value = json.loads(est.to_json())
    text = f"{est.estimate:.10f} [{est.lower:.10f}, {est.upper:.10f}] after {est.iterations} iterations"
    return _fmt(args, value, text), code


def cmd_certify(args, meta):
    from .spectral import certify_lower_bound, parse_rational, read_certificate_vector
    c = parse_rational(args.c)
    v = None
    if args.vector:
        with open(args.vector) as fh:
            k, _, v = read_certificate_vector(fh.read())
        if k != args.k:
            raise ValidationError(f"certificate file is for k={k}, not {args.k}")
    op = _operator(args)
    meta["mode"] = op.mode
    cert = certify_lower_bound(args.k, c, v, tol=min(args.tol, 1e-9), max_iter=args.max_iter, op=op)
    if args.save:
        with open(args.save, "w") as fh:
            fh.write(cert.export_text())
    value = json.loads(cert.to_json())
    text = (f"verified={'true' if cert.verified else 'false'} "
            f"c={cert.c.numerator}/{cert.c.denominator}")
    if cert.violation is not None:
        text += f" violation={cert.violation}"
    return _fmt(args, value, text), (EXIT_OK if cert.verified else EXIT_INVALID)


def cmd_count(args, meta):
    from .spectral import count_words
    op = _operator(args)
    meta["mode"] = op.mode
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        seq = count_words(args.k, args.n, op=op)
    for w in caught:
        print(f"# warning: {w.message}", file=sys.stderr)
    rows = [(n, c, "restricted" if seq.restricted(n) else "") for n, c in enumerate(seq.counts)]
    if args.format == "json":
        return json.dumps({"k": args.k, "counts": [str(c) for c in seq.counts],
                           "restrictedFrom": 2 * args.k}) + "\n"
    return _rows_csv(["n", "count", "flag"], rows)


def cmd_oracle(args, meta):
    from .permcore import count_avoiders
    total = count_avoiders(args.n, args.k, args.max_n)
    return _fmt(args, {"n": args.n, "slotCap": args.k, "count": total}, str(total))


def cmd_encode(args, meta):
    from .permcore import encode, format_word, parse_perm
    w = format_word(encode(parse_perm(args.perm)))
    return _fmt(args, {"perm": args.perm, "word": w}, w)


def cmd_decode(args, meta):
    from .permcore import decode, format_perm, parse_word
    p = format_perm(decode(parse_word(args.word)))
    return _fmt(args, {"word": args.word, "perm": p}, p)


def cmd_accepts(args, meta):
    from .automaton import accepts
    from .permcore import parse_word
    ok = accepts(parse_word(args.word), args.k)
    return _fmt(args, {"word": args.word, "k": args.k, "accepts": ok}, "true" if ok else "false")


def cmd_table(args, meta):
    from .spectral import is_monotone, lambda_table
    rows = lambda_table(args.k, args.tol, args.max_iter, args.mode, args.memory_budget)
    if not is_monotone(rows):
        print("# warning: estimates are not monotone in k", file=sys.stderr)
    if args.format == "json":
        return json.dumps([r.__dict__ for r in rows]) + "\n"
    out = _rows_csv(["k", "lambda", "lower", "upper", "iterations", "error"],
                    [(r.k, "" if r.estimate is None else f"{r.estimate:.10f}",
                      "" if r.lower is None else f"{r.lower:.10f}",
                      "" if r.upper is None else f"{r.upper:.10f}", r.iterations, r.error or "")
                     for r in rows])
    code = EXIT_OK if all(r.error is None for r in rows) else EXIT_RESOURCE
    return out, code


def _read_table(path):
    with open(path, newline="") as fh:
        return [(int(row["k"]), float(row["lambda"])) for row in csv.DictReader(fh)
                if row.get("lambda")]


def cmd_extrapolate(args, meta):
    from .spectral import PUBLISHED_LAMBDA, extrapolate, lambda_table
    if args.table:
        table = _read_table(args.table)
    elif args.published:
        table = sorted(PUBLISHED_LAMBDA.items())
    elif args.n is not None:
        rows = lambda_table(args.n, args.tol, args.max_iter, args.mode, args.memory_budget)
        table = [(r.k, r.estimate) for r in rows if r.estimate is not None]
    else:
        raise UsageError("extrapolate needs --table, --published or --n <kMax>")
    fit = extrapolate(table, args.k or 1)
    value = {"kMin": args.k or 1, "intercept": fit.intercept, "slope": fit.slope,
             "residuals": fit.residuals, "note": "heuristic diagnostic, not a bound"}
    if args.format == "json":
        return json.dumps(value) + "\n"
    if args.format == "csv":
        return _rows_csv(["k", "residual"], zip(fit.ks, fit.residuals))
    return (f"intercept {fit.intercept:.6f}\nslope {fit.slope:.6f}\n"
            f"max_abs_residual {max(abs(r) for r in fit.residuals):.3e}\n"
            "# heuristic diagnostic, not a bound\n")


COMMANDS = {
    "states": cmd_states, "rank": cmd_rank, "unrank": cmd_unrank, "build": cmd_build,
    "stats": cmd_stats, "eig": cmd_eig, "certify": cmd_certify, "count": cmd_count,
    "oracle": cmd_oracle, "encode": cmd_encode, "decode": cmd_decode, "accepts": cmd_accepts,
    "table": cmd_table, "extrapolate": cmd_extrapolate,
}


def run(argv=None) -> int:
    start = time.perf_counter()
    try:
        args = make_parser().parse_args(argv)
    except UsageError as exc:
        print(f"av4231: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    meta = {"version": __version__, "command": args.command, "k": getattr(args, "k", None),
            "mode": getattr(args, "mode", None)}
    if getattr(args, "threads", None):
        import numba
        numba.set_num_threads(max(1, min(args.threads, numba.config.NUMBA_NUM_THREADS)))
    code = EXIT_OK
    try:
        result = COMMANDS[args.command](args, meta)
        if isinstance(result, tuple):
            result, code = result
        if result is not None:
            _emit(args, result)
    except UsageError as exc:
        print(f"av4231: usage error: {exc}", file=sys.stderr)
        code = EXIT_USAGE
    except ValidationError as exc:
        print(f"av4231: invalid input: {exc}", file=sys.stderr)
        code = EXIT_INVALID
    except ResourceLimit as exc:
        print(f"av4231: resource limit: {exc}", file=sys.stderr)
        code = EXIT_RESOURCE
    meta["wall"] = round(time.perf_counter() - start, 3)
    print("# " + json.dumps(meta), file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

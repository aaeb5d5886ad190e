"""Command line entry point: ``salift <command> ...``.

Exit status is 0 when the requested solve or verification succeeded, 1 when
it ran but the answer is negative (rejected certificate, violations found),
and 2 for usage or input errors.  ``--json`` switches every report, including
errors, to JSON on stdout.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from . import __version__

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(args, payload: dict, text: str | None = None):
    if args.json:
        print(json.dumps(payload, indent=None, sort_keys=True, separators=(",", ":")))
    elif text is not None:
        print(text)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _write(path: str | None, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _cnf(args):
    from .principles import encode, from_dimacs
    if getattr(args, "cnf", None):
        return from_dimacs(_read(args.cnf))
    if getattr(args, "principle", None):
        return encode(args.principle, args.encoding, args.n, args.m)
    raise UsageError("give --cnf FILE or --principle/--encoding/--n")


def _add_instance(p, required=False):
    p.add_argument("--cnf", help="DIMACS file written by `salift encode`")
    p.add_argument("--principle", choices=["lnp", "php"], required=required)
    p.add_argument("--encoding", choices=["unary", "unary-eq", "binary"], default="unary")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)


# -- commands --------------------------------------------------------------------

def cmd_encode(args):
    from .principles import binary_php, to_dimacs
    if args.n is None:
        raise UsageError("--n is required")
    if args.holes:
        if args.principle != "php" or args.encoding != "binary":
            raise UsageError("--holes applies to binary PHP only")
        holes = [int(x) for x in args.holes.split(",")]
        cnf = binary_php(args.m or args.n + 1, args.n, holes)
    else:
        cnf = _cnf(args)
    text = to_dimacs(cnf)
    _write(args.output, text)
    if args.json and args.output not in (None, "-"):
        _emit(args, {"clauses": len(cnf.clauses), "variables": cnf.num_vars, "output": args.output})
    return EXIT_OK


def cmd_lift(args):
    from .lift import lift_system, symmetrize
    cnf = _cnf(args)
    sys_ = lift_system(cnf, args.rank, None if args.no_cap else args.term_cap)
    if args.symmetric:
        sys_ = symmetrize(sys_)
    if args.output in (None, "-"):
        n = sys_.to_jsonl(sys.stdout)
    else:
        with open(args.output, "w") as fh:
            n = sys_.to_jsonl(fh)
        _emit(args, {"constraints": n, "output": args.output},
              f"{n} constraints written to {args.output}")
    return EXIT_OK


def cmd_rank(args):
    from .lp import sa_rank
    cnf = _cnf(args)
    cap = None if args.no_cap else args.term_cap
    t0 = time.perf_counter()
    res = sa_rank(cnf, args.rmax, symmetric=args.symmetric, r_min=args.rmin, term_cap=cap,
                  guided=args.guided)
    payload = {"rank": res.rank, "status": res.status, "limit": res.limit,
               "seconds": round(time.perf_counter() - t0, 3),
               "per_rank": {str(r): {"verdict": x.verdict,
                                     "support": x.certificate.support_size if x.certificate else None,
                                     "pivots": x.stats.get("pivots")}
                            for r, x in res.results.items()}}
    if args.certificate and res.rank is not None:
        with open(args.certificate, "w") as fh:
            json.dump(res.results[res.rank].certificate.to_json(), fh)
    _emit(args, payload, f"rank {res}")
    return EXIT_OK if res.status == "ok" else EXIT_NEGATIVE


def _generated(args):
    from . import certificates as C
    from .lp import verify_farkas
    from .sos import verify_sos
    if args.gen == "php-sos":
        m, n = args.m or args.n + 1, args.n
        cert = C.php_sos_degree2(m, n)
        return "sos", cert, C.php_axioms(m, n), verify_sos(cert, C.php_axioms(m, n))
    if args.gen == "lnp-eq":
        cert = C.lnp_eq_rank2(args.n)
        system = C._quotient(args.n)
        return "farkas", cert, system, verify_farkas(cert, system)
    if args.gen == "lnp-binary":
        unary = C.lnp_eq_rank2(args.n)
        cert, system = C.binary_from_unary(unary, args.n)
        return "farkas", cert, system, verify_farkas(cert, system)
    raise UsageError(f"unknown generator {args.gen}")


def cmd_verify_cert(args):
    from .lp import FarkasCertificate, system_for, verify_farkas
    from .sos import SosCertificate, cnf_axioms, verify_sos
    if args.gen:
        if args.n is None:
            raise UsageError("--n is required with --gen")
        kind, cert, system, res = _generated(args)
    else:
        if not args.cert:
            raise UsageError("give --cert FILE or --gen NAME")
        data = json.loads(_read(args.cert))
        cnf = _cnf(args)
        if "products" in data:
            kind, cert = "sos", SosCertificate.from_json(data)
            system = cnf_axioms(cnf)
            res = verify_sos(cert, system)
        else:
            kind, cert = "farkas", FarkasCertificate.from_json(data)
            rank = args.rank if args.rank is not None else cert.meta.get("rank")
            if rank is None:
                raise UsageError("certificate has no rank; give --rank")
            system = system_for(cnf, rank, args.symmetric or bool(cert.meta.get("quotient")),
                                None if args.no_cap else args.term_cap)
            res = verify_farkas(cert, system)
    if args.output:
        with open(args.output, "w") as fh:
            json.dump(cert.to_json(), fh)
    payload = {"kind": kind, "accepted": bool(res), "reason": res.reason}
    if kind == "farkas":
        payload["support"] = cert.support_size
        payload["meta"] = {k: v for k, v in cert.meta.items() if isinstance(v, (int, str, bool))}
    text = f"{'accepted' if res else 'rejected'}: {res.reason}"
    if args.explain and kind == "farkas":
        from .certificates import explain
        text = explain(cert, system, args.explain_limit) + "\n" + text
    _emit(args, payload, text)
    return EXIT_OK if res else EXIT_NEGATIVE


def _valuation(name, n, m=None, holes=None):
    from .valuations import matching_valuation, partial_injection_valuation, permutation_valuation
    if name == "permutation":
        return permutation_valuation(n)
    if name == "partial-injection":
        return partial_injection_valuation(n)
    if name == "matching":
        hs = [int(x) for x in holes.split(",")] if holes else list(range(1, n + 1))
        return matching_valuation(m or len(hs) + 1, hs, n)
    raise UsageError(f"unknown valuation {name}")


def cmd_check_valuation(args):
    from .lift import lift_system
    from .valuations import check_valuation
    cnf = _cnf(args)
    v = _valuation(args.backend, args.n, args.m, args.holes)
    rep = check_valuation(v, lift_system(cnf, args.rank, None), args.degree, args.limit)
    payload = rep.to_json()
    text = (f"{args.backend}: checked {rep.checked}, out of domain {rep.out_of_domain}, "
            f"over degree {rep.skipped_degree}, violations {len(rep.violations)}")
    _emit(args, payload, text)
    return EXIT_OK if rep.ok else EXIT_NEGATIVE


def cmd_psd(args):
    from .principles import Kind, VariableId
    from .sos import moment_matrix, psd_check
    v = _valuation(args.valuation, args.n, args.m, args.holes)
    variables = None
    if args.valuation == "matching":
        variables = [VariableId(Kind.PBit, (i,), k) for i in range(1, v.m + 1)
                     for k in range(1, v.bits + 1)]
    M = moment_matrix(v, args.degree, variables)
    res = psd_check(M)
    payload = res.to_json()
    payload["size"] = len(M)
    if args.matrix:
        payload["matrix"] = M.to_json()
    _emit(args, payload, f"{len(M)}x{len(M)} moment matrix: {'PSD' if res else 'not PSD'}")
    return EXIT_OK if res else EXIT_NEGATIVE


def cmd_restrict(args):
    from .restrictions import RprimeSampler, RSampler, survival_stats, width_term
    n = args.n
    if args.sampler == "R":
        sampler = RSampler(n, args.m or n + 1)
        below, above = [n // 8], [3 * n // 8]
    else:
        sampler = RprimeSampler(args.m or 2 * n, n)
        below, above = [], []
    pigeons = range(1, min(args.width, sampler.m) + 1)
    terms = [width_term(pigeons)] if args.width else []
    st = survival_stats(terms, sampler, args.trials, args.seed, below, above, args.jobs)
    if args.csv:
        rows = ["statistic,count,trials,frequency"]
        for k, v in st.below.items():
            rows.append(f"size<{k},{v},{st.trials},{v / st.trials}")
        for k, v in st.above.items():
            rows.append(f"size>{k},{v},{st.trials},{v / st.trials}")
        for i, v in enumerate(st.survive):
            rows.append(f"survive[{i}],{v},{st.trials},{v / st.trials}")
        _write(args.csv, "\n".join(rows) + "\n")
    _emit(args, st.to_json(), json.dumps(st.to_json(), sort_keys=True))
    return EXIT_OK


def _table_cell(task):
    kind, n = task
    from . import certificates as C
    from .lp import sa_rank, verify_farkas
    from .principles import unary_lnp, unary_php, unary_php_eq
    from .sos import verify_sos
    from .valuations import check_valuation, permutation_valuation
    from .lift import lift_system
    if kind == "lnp-sa":
        return str(sa_rank(unary_lnp(n), n, symmetric=n >= 4))
    if kind == "lnp-eq":
        try:
            cert = C.lnp_eq_rank2(n)
        except C.Rank2Feasible:
            return "> 2"
        return "2" if verify_farkas(cert, C._quotient(n)) else "?"
    if kind == "lnp-sos":
        d = (n - 3) // 2
        # constraints of degree d come from rank d - 1 lifts
        rep = check_valuation(permutation_valuation(n), lift_system(unary_lnp(n), d - 1, None), d)
        return f"> {d}" if rep.ok else "?"
    if kind == "php-sa":
        return str(sa_rank(unary_php(n + 1, n), n, symmetric=n >= 3))
    if kind == "php-eq":
        return str(sa_rank(unary_php_eq(n + 1, n), n, symmetric=n >= 3))
    if kind == "php-sos":
        cert = C.php_sos_degree2(n + 1, n)
        return "2" if verify_sos(cert, C.php_axioms(n + 1, n)) else "?"
    raise ValueError(kind)


TABLE_ROWS = [
    ("PHP", [("SA", "php-sa", "linear"), ("SA-with-equalities", "php-eq", "linear"),
             ("SA+Squares", "php-sos", "constant")]),
    ("LNP", [("SA", "lnp-sa", "linear"), ("SA-with-equalities", "lnp-eq", "constant"),
             ("SA+Squares", "lnp-sos", "linear")]),
]


def cmd_table1(args):
    sizes = {"php-sa": [1, 2, 3], "php-eq": [1, 2, 3], "php-sos": [2, 4, 8],
             "lnp-sa": [2, 3, 4], "lnp-eq": [4, 6, 8], "lnp-sos": [5, 7]}
    if args.quick:
        sizes.update({"php-sa": [1, 2], "php-eq": [1, 2], "lnp-sa": [2, 3], "lnp-eq": [4, 6]})
    tasks = [(k, n) for _, cells in TABLE_ROWS for _, k, _ in cells for n in sizes[k]]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            values = list(ex.map(_table_cell, tasks))
    else:
        values = [_table_cell(t) for t in tasks]
    got = dict(zip(tasks, values))
    report = {}
    lines = ["unary case | " + " | ".join(c for c, _, _ in TABLE_ROWS[0][1]), "-" * 72]
    for row, cells in TABLE_ROWS:
        parts = []
        for col, k, trend in cells:
            ms = {str(n): got[(k, n)] for n in sizes[k]}
            report[f"{row}/{col}"] = {"expected": trend, "measured": ms}
            parts.append(f"{trend} ({', '.join(f'n={n}: {v}' for n, v in ms.items())})")
        lines.append(f"{row} | " + " | ".join(parts))
    lines.append("cells: rank (SA columns) or refuting degree (squares); "
                 "'> d' means a valuation survives degree d")
    _emit(args, report, "\n".join(lines))
    return EXIT_OK


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="salift", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--json", action="store_true", help="machine-readable output")
    ap.add_argument("--jobs", type=int, default=1, help="worker processes")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        p = sub.add_parser(name, **kw)
        p.set_defaults(fn=fn)
        p.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
        p.add_argument("--jobs", type=int, default=argparse.SUPPRESS)
        return p

    p = add("encode", cmd_encode, help="write a CNF as DIMACS")
    _add_instance(p, required=True)
    p.add_argument("--holes", help="comma-separated hole subset (binary PHP)")
    p.add_argument("-o", "--output")

    def caps(p):
        p.add_argument("--term-cap", type=int, default=2_000_000)
        p.add_argument("--no-cap", action="store_true", help="disable the term-universe cap")

    p = add("lift", cmd_lift, help="write the rank-r lifted system as JSON lines")
    _add_instance(p)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--symmetric", action="store_true")
    p.add_argument("-o", "--output")
    caps(p)

    p = add("rank", cmd_rank, help="smallest refuting SA rank")
    _add_instance(p)
    p.add_argument("--rmax", type=int, required=True)
    p.add_argument("--rmin", type=int, default=0)
    p.add_argument("--symmetric", action="store_true")
    p.add_argument("--certificate", help="write the refuting certificate here")
    p.add_argument("--guided", action="store_true",
                   help="let a float LP propose supports/vertices (answers still exact)")
    caps(p)

    p = add("verify-cert", cmd_verify_cert, help="check a certificate")
    _add_instance(p)
    p.add_argument("--cert")
    p.add_argument("--gen", choices=["php-sos", "lnp-eq", "lnp-binary"])
    p.add_argument("--rank", type=int)
    p.add_argument("--symmetric", action="store_true")
    p.add_argument("--explain", action="store_true", help="print every step")
    p.add_argument("--explain-limit", type=int)
    p.add_argument("-o", "--output", help="save the certificate as JSON")
    caps(p)

    p = add("check-valuation", cmd_check_valuation, help="evaluate a valuation on a lift")
    _add_instance(p)
    p.add_argument("--backend", choices=["matching", "permutation", "partial-injection"],
                   required=True)
    p.add_argument("--holes")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--degree", type=int)
    p.add_argument("--limit", type=int)

    p = add("psd", cmd_psd, help="exact PSD test of a moment matrix")
    p.add_argument("--valuation", choices=["matching", "permutation", "partial-injection"],
                   required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--holes")
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--matrix", action="store_true", help="include the matrix")

    p = add("restrict", cmd_restrict, help="Monte Carlo restriction statistics")
    p.add_argument("--sampler", choices=["R", "Rprime"], default="R")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--width", type=int, default=0, help="track a term over this many pigeons")
    p.add_argument("--csv", help="also write CSV here")

    p = add("table1", cmd_table1, help="small-n rank grid shaped like the results table")
    p.add_argument("--quick", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    from .certificates import Rank2Feasible
    try:
        return args.fn(args)
    except Rank2Feasible as e:
        # a definite negative answer, not a usage problem
        if args.json:
            print(json.dumps({"error": str(e), "type": type(e).__name__, "n": e.n}))
        else:
            print(f"salift: {e}", file=sys.stderr)
        return EXIT_NEGATIVE
    except (UsageError, ValueError, OSError, KeyError) as e:
        if args.json:
            print(json.dumps({"error": str(e), "type": type(e).__name__}))
        else:
            print(f"salift: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point.

Exit codes: 0 every identity passed, 1 some identity failed, 2 usage or
configuration error.  Every report embeds a run manifest; the mathematical
payload is deterministic, timings are kept apart in the manifest.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import re
import sys
import time
from pathlib import Path

from . import __version__
from .characters import DirChar, from_conrey

OUT_DIR_ENV = "ARTIFACT_OUT_DIR"


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# characters on the command line

_IMAGES = re.compile(r"^(\d+):\[?([0-9/,\s]*)\]?$")


def parse_char(text):
    """A character from one of:

    ``1`` or ``trivial``; ``M:j/n,...`` or the label form ``M:[j/n,...]``
    (generator images, generators as in ``unit_generators``);
    ``conrey:M.i``; a JSON object as written by DirChar.to_json.
    """
    text = text.strip()
    try:
        if text in ("1", "trivial"):
            return DirChar.trivial(1)
        if text.startswith("{"):
            return DirChar.from_json(json.loads(text))
        if text.startswith("conrey:"):
            M, i = text[len("conrey:"):].split(".")
            return from_conrey(int(M), int(i))
        m = _IMAGES.match(text)
        if m:
            M = int(m.group(1))
            body = m.group(2).strip()
            imgs = []
            for part in filter(None, (x.strip() for x in body.split(","))):
                j, n = part.split("/")
                imgs.append((int(j), int(n)))
            return DirChar.from_images(M, imgs)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"bad character {text!r}: {exc}") from exc
    raise UsageError(f"bad character {text!r}")


# ---------------------------------------------------------------------------
# manifests and emission

def _spec_hash():
    path = Path.cwd() / "spec.md"
    if path.is_file():
        return hashlib.sha256(path.read_bytes()).hexdigest()
    return None


def make_manifest(args, timings, outputs):
    inputs = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "format")}
    return {
        "command": " ".join(sys.argv[1:]) if args is not None else "",
        "inputs": inputs,
        "outputs": outputs,
        "timings": timings,
        "versions": {"artifact": __version__, "spec_sha256": _spec_hash()},
    }


def _flat(v):
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True, default=str)
    return v


def _rows(report):
    rows = report.get("rows")
    if rows is None:
        rows = [{"key": k, "value": _flat(v)} for k, v in report.items() if k != "manifest"]
    return rows


def emit_table(report, fmt):
    """Serialize a report: json (whole report), csv or markdown (its rows)."""
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True, default=str) + "\n"
    rows = _rows(report)
    cols = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _flat(r.get(k, "")) for k in cols})
        return buf.getvalue()
    if fmt == "markdown":
        lines = ["| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
        for r in rows:
            lines.append("| " + " | ".join(str(_flat(r.get(k, ""))) for k in cols) + " |")
        return "\n".join(lines) + "\n"
    raise UsageError(f"unknown format {fmt!r}")


def _write(args, report):
    ext = {"json": "json", "csv": "csv", "markdown": "md"}[args.format]
    dest = args.out
    if dest is None and os.environ.get(OUT_DIR_ENV):
        dest = str(Path(os.environ[OUT_DIR_ENV]) / f"{args.command}-{args.action}.{ext}")
    report["manifest"]["outputs"] = [dest] if dest else ["<stdout>"]
    text = emit_table(report, args.format)
    if dest:
        try:
            Path(dest).parent.mkdir(parents=True, exist_ok=True)
            Path(dest).write_text(text)
        except OSError as exc:
            raise UsageError(f"cannot write {dest}: {exc}") from exc
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands; each returns (payload, ok)

def cmd_localsums_verify(args):
    from .localsums import verify
    rep = verify(args.max_modulus, args.max_level)
    rows = [{"identity": r["identity"], "params": r["params"], "pass": r["pass"],
             "residual": r["residual"]} for r in rep["records"]]
    return {"count": rep["count"], "pass": rep["pass"], "rows": rows}, rep["pass"]


def _pair(args):
    return parse_char(args.chi1), parse_char(args.chi2)


def cmd_eis_qexp(args):
    from .eisenstein import eisenstein_qexp, eisenstein_qexp_stabilized
    c1, c2 = _pair(args)
    if args.stabilize:
        f = eisenstein_qexp_stabilized(c1, c2, args.weight, args.bound, args.stabilize)
    else:
        f = eisenstein_qexp(c1, c2, args.weight, args.bound, allow_trivial=True)
    rows = [{"n": n, "coeff": str(c)} for n, c in f.coeffs.items()]
    return {"qexp": f.to_json(), "rows": rows}, True


def cmd_eis_hecke(args):
    from .eisenstein import eisenstein_qexp, hecke_eigenvalue, hecke_T
    c1, c2 = _pair(args)
    f = eisenstein_qexp(c1, c2, args.weight, args.bound * args.ell, allow_trivial=True)
    g = hecke_T(f, args.ell)
    lam = hecke_eigenvalue(c1, c2, args.weight, args.ell)
    rows = []
    for n in range(1, args.bound + 1):
        rows.append({"n": n, "T_coeff": str(g.coeff(n)), "lambda_coeff": str(lam * f.coeff(n)),
                     "equal": g.coeff(n) == lam * f.coeff(n)})
    ok = all(r["equal"] for r in rows)
    return {"eigenvalue": str(lam), "pass": ok, "rows": rows}, ok


def cmd_eis_congruence(args):
    """delta against E_12 mod 691 on every n; f11 against 1 + ell mod 5 on primes ell != 11."""
    from .eisenstein import QExpansion, check_congruence, eisenstein_qexp, eta_product_cuspform
    from .exactmath import CycNum, primes_upto
    B = args.bound
    f = eta_product_cuspform(args.partner, B)
    if args.partner == "delta":
        one = DirChar.trivial(1)
        e = eisenstein_qexp(one, one, 12, B, allow_trivial=True)
        modulus, indices = args.modulus or 691, None
    else:
        e = QExpansion(2, 11, B, lambda n: CycNum.rational(1 + n), label="1+ell")
        modulus, indices = args.modulus or 5, [q for q in primes_upto(B) if q != 11]
    rep = check_congruence(f, e, modulus, indices=indices)
    ok = not rep["mismatches"] and not rep["nonintegral"]
    return dict(rep, partner=args.partner, all_congruent=ok), ok


def cmd_cusps_list(args):
    from .cusps import enumerate_cusps, orbit_count_oracle
    cs = enumerate_cusps(args.level, args.group)
    oracle = orbit_count_oracle(args.level, args.group)
    rows = [{"cusp": s.label(), "a": s.a, "c": s.c, "width": s.width, "witness": list(s.witness)}
            for s in cs]
    return {"level": args.level, "group": args.group, "count": len(cs), "oracle_count": oracle,
            "rows": rows}, len(cs) == oracle


def cmd_cusps_constants(args):
    from .cusps import constant_term_adelic, constant_term_classical, enumerate_cusps
    c1, c2 = _pair(args)
    N = args.level or c1.primitive().modulus * c2.primitive().modulus
    rows, ok = [], True
    for s in enumerate_cusps(N):
        b = constant_term_adelic(c1, c2, args.weight, s)
        row = {"cusp": s.label(), "adelic": str(b)}
        if args.both_formulas:
            a = constant_term_classical(c1, c2, args.weight, s)
            row = {"cusp": s.label(), "classical": str(a), "adelic": str(b), "equal": a == b}
            ok &= a == b
        rows.append(row)
    return {"level": N, "weight": args.weight, "rows": rows, "pass": ok}, ok


def cmd_cusps_ordinary(args):
    from .cusps import projector_report
    level = args.level * args.p ** args.r
    rep = projector_report(level, args.p, args.precision, args.direction)
    ok = rep["kills_support"] and rep["rank_ok"] and rep["idempotent"]
    return dict(rep, rows=[rep]), ok


def cmd_lambda_eis(args):
    from .lambda_adic import lambda_eisenstein
    c1, c2 = _pair(args)
    F = lambda_eisenstein(c1, c2, args.p, args.prec, args.tdeg, args.bound, level=args.level)
    payload = F.to_json()
    payload["rows"] = [{"n": i, "coeffs": c.to_json()["coeffs"]} for i, c in F.coeffs.items()]
    return payload, True


def cmd_lambda_lp(args):
    from .lambda_adic import kl_residual, kubota_leopoldt
    chi = parse_char(args.char)
    G = kubota_leopoldt(chi, args.p, args.prec, args.tdeg)
    nodes = set(G.info["nodes"])
    held = [k for k in range(2, 60) if k not in nodes][: args.held_out]
    rows = [{"k": k, "residual": list(kl_residual(G, k))} for k in held]
    ok = all(not any(r["residual"]) for r in rows)
    return {"G": G.to_json(), "rows": rows, "pass": ok}, ok


def cmd_lambda_congmod(args):
    from .eisenstein import eta_product_cuspform
    from .lambda_adic import (congruence_module_order, default_nodes, eisenstein_A,
                              lambda_eisenstein)
    from .characters import teichmuller_char
    one = DirChar.trivial(1)
    if args.partner == "delta":
        p, m, n, B, k, level = 691, args.prec or 2, 2, args.bound, 12, None
        chi1 = teichmuller_char(p, 10)
        nodes = default_nodes(p, m, n, k0=12)
    elif args.partner == "f11":
        p, m, n, B, k, level = 5, args.prec or 3, 3, args.bound, 2, 11
        chi1 = one
        nodes = None
    else:
        raise UsageError("partner must be delta or f11")
    if args.fiber is not None and args.fiber != k:
        raise UsageError(f"the {args.partner} partner lives at fiber k={k}")
    E = lambda_eisenstein(chi1, one, p, m, n, B, level=level, nodes=nodes)
    A = eisenstein_A(chi1, one, p, m, n, level=level, form=args.form, nodes=nodes)
    rep = congruence_module_order(E, eta_product_cuspform(args.partner, B), k, A)
    return dict(rep, rows=[rep]), rep["consistent"]


def cmd_run(args):
    from .acceptance import SUITES, run_suite
    if args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {sorted(SUITES)}")
    results = run_suite(args.suite, quick=args.quick, echo=lambda s: print(s, file=sys.stderr))
    rows = [{"criterion": r.number, "title": r.title, "passed": r.passed,
             "instances": r.instances, "failures": len(r.failures)} for r in results]
    ok = all(r.passed for r in results)
    return {"suite": args.suite, "quick": args.quick, "pass": ok, "rows": rows,
            "criteria": [r.to_json() for r in results]}, ok


# ---------------------------------------------------------------------------
# parser

def _common(p):
    p.add_argument("--out", help="output file (default: stdout, or $%s/<command>.<ext>)" % OUT_DIR_ENV)
    p.add_argument("--format", choices=["json", "csv", "markdown"], default="json")
    p.add_argument("--threads", type=int, default=1, help="recorded; batteries run serially")


def _chars(p):
    p.add_argument("--chi1", required=True)
    p.add_argument("--chi2", default="1")


def build_parser():
    ap = argparse.ArgumentParser(prog="artifact", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    ls = sub.add_parser("localsums").add_subparsers(dest="action", required=True)
    p = ls.add_parser("verify")
    p.add_argument("--max-modulus", type=int, default=27)
    p.add_argument("--max-level", type=int, default=125)
    p.set_defaults(func=cmd_localsums_verify)
    _common(p)

    eis = sub.add_parser("eis").add_subparsers(dest="action", required=True)
    p = eis.add_parser("qexp")
    _chars(p)
    p.add_argument("--weight", type=int, required=True)
    p.add_argument("--bound", type=int, default=20)
    p.add_argument("--stabilize", type=int, default=0, metavar="P")
    p.set_defaults(func=cmd_eis_qexp)
    _common(p)
    p = eis.add_parser("hecke")
    _chars(p)
    p.add_argument("--weight", type=int, required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--bound", type=int, default=50)
    p.set_defaults(func=cmd_eis_hecke)
    _common(p)
    p = eis.add_parser("congruence")
    p.add_argument("--partner", choices=["delta", "f11"], default="delta")
    p.add_argument("--modulus", type=int, default=0)
    p.add_argument("--bound", type=int, default=500)
    p.set_defaults(func=cmd_eis_congruence)
    _common(p)

    cu = sub.add_parser("cusps").add_subparsers(dest="action", required=True)
    p = cu.add_parser("list")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--group", choices=["g1", "g0"], default="g1")
    p.set_defaults(func=cmd_cusps_list)
    _common(p)
    p = cu.add_parser("constants")
    _chars(p)
    p.add_argument("--weight", type=int, required=True)
    p.add_argument("--level", type=int, default=0)
    p.add_argument("--both-formulas", action="store_true")
    p.set_defaults(func=cmd_cusps_constants)
    _common(p)
    p = cu.add_parser("ordinary")
    p.add_argument("--level", type=int, required=True, help="N; the module lives on Gamma_1(N p^r)")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--precision", type=int, default=6)
    p.add_argument("--direction", choices=["T", "T*"], default="T")
    p.set_defaults(func=cmd_cusps_ordinary)
    _common(p)

    la = sub.add_parser("lambda").add_subparsers(dest="action", required=True)
    p = la.add_parser("eis")
    _chars(p)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--prec", type=int, default=6)
    p.add_argument("--tdeg", type=int, default=6)
    p.add_argument("--bound", type=int, default=20)
    p.add_argument("--level", type=int, default=None)
    p.set_defaults(func=cmd_lambda_eis)
    _common(p)
    p = la.add_parser("Lp")
    p.add_argument("--char", required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--prec", type=int, default=6)
    p.add_argument("--tdeg", type=int, default=6)
    p.add_argument("--held-out", type=int, default=3)
    p.set_defaults(func=cmd_lambda_lp)
    _common(p)
    p = la.add_parser("congmod")
    p.add_argument("--partner", choices=["delta", "f11"], required=True)
    p.add_argument("--fiber", type=int, default=None)
    p.add_argument("--prec", type=int, default=0)
    p.add_argument("--bound", type=int, default=500)
    p.add_argument("--form", choices=["displayed", "constant_term"], default="displayed")
    p.set_defaults(func=cmd_lambda_congmod)
    _common(p)

    p = sub.add_parser("run")
    p.add_argument("suite")
    p.add_argument("--quick", action="store_true")
    p.set_defaults(func=cmd_run, action="suite")
    _common(p)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    t0 = time.perf_counter()
    try:
        payload, ok = args.func(args)
        elapsed = time.perf_counter() - t0
        report = dict(payload)
        report["manifest"] = make_manifest(args, {"total_seconds": round(elapsed, 3)}, [])
        _write(args, report)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # precondition failures on user-supplied data
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())

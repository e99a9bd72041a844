"""Command-line front end: `dtoda lax|project|derive|check|hbe`.

Configuration precedence is flags > `--config` JSON file > defaults (n = 4, eps order 4,
depth 4). Every JSON document starts with a `config` header. The exit code is 0 iff all
requested checks pass; 2 signals a usage or configuration error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import re
import sys as _sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from importlib.metadata import PackageNotFoundError, version

from gmpy2 import mpq

from .emit import SCHEMA_VERSION, op_json, op_latex, op_text
from .flows import (
    FlowLabel,
    appendix_label_set,
    commutativity_check,
    derive_flow,
    ext_rel_check,
    field_names,
    zs_check,
)
from .hbe import TAU_SCHEMA, TauModel, bilinear_check, field_extract, load_tau
from .lax import LaxSystem, structural_checks
from .opalg import WindowError
from .projection import KINDS
from .ring import ConfigError

DEFAULTS = {"n": 4, "eps_order": 4, "depth": 4}
SUITES = ("appendix", "structural", "zs", "commutativity", "extrel", "hbe")


def _version():
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


class UsageError(Exception):
    pass


# configuration ---------------------------------------------------------------


def resolve_config(args):
    """Merge flags over the config file over the defaults."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(data) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(data)
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    for key in DEFAULTS:
        if not isinstance(cfg[key], int) or isinstance(cfg[key], bool):
            raise UsageError(f"{key} must be an integer")
    if cfg["n"] < 4:
        raise UsageError("n must be >= 4")
    if cfg["eps_order"] < 1 or cfg["depth"] < 1:
        raise UsageError("eps order and depth must be >= 1")
    return cfg


def header(cfg, **extra):
    return {"version": _version(), "schema": SCHEMA_VERSION, **cfg, **extra}


# operator parsing ------------------------------------------------------------

_FACTOR = re.compile(r"(Lambda|Lax|L|d2|d3)(?:\^\(?(-?\d+)\)?)?")
_COEFF = re.compile(r"-?\d+(?:/\d+)?")


def parse_op(sys, text):
    """Parse sums of terms like "3/2*d2^2*L^-1", "d3", "Lax" into an operator.

    L and Lambda denote the shift, Lax the Lax operator; d2 and d3 need exponents >= 0.
    """
    alg, R = sys.alg, sys.ring
    src = text.replace(" ", "")
    if not src:
        raise UsageError("empty operator")
    pieces = [p for p in re.split(r"(?<![\^(])(?=[+-])", src) if p]
    if any(p in "+-" for p in pieces):
        raise UsageError(f"cannot parse operator {text!r}")
    total = None
    for piece in pieces:
        sign = -1 if piece.startswith("-") else 1
        body = piece.lstrip("+-")
        coeff = Fraction(sign)
        factors = body.split("*")
        op = None
        for f in factors:
            if _COEFF.fullmatch(f):
                coeff *= Fraction(f)
                continue
            m = _FACTOR.fullmatch(f)
            if not m:
                raise UsageError(f"cannot parse factor {f!r} in {text!r}")
            name, e = m.group(1), int(m.group(2) or 1)
            if name == "Lax":
                if e < 0:
                    raise UsageError("negative powers of the Lax operator are not supported")
                X = alg.mono()
                for _ in range(e):
                    X = _mul(X, sys.L)
            elif name in ("L", "Lambda"):
                X = alg.mono(e)
            else:
                if e < 0:
                    raise UsageError(f"{name} needs a non-negative exponent")
                X = alg.mono(0, e, 0) if name == "d2" else alg.mono(0, 0, e)
            op = X if op is None else _mul(op, X)
        if op is None:
            op = alg.mono()
        op = op.scale(R.const(mpq(coeff.numerator, coeff.denominator)))
        total = op if total is None else total + op
    return total


def _mul(A, B):
    from .opalg import compose

    return compose(A, B)


# output ----------------------------------------------------------------------


def _emit(doc, text, args, out):
    payload = json.dumps(doc, indent=2, sort_keys=True) + "\n" if args.format == "json" else text.rstrip("\n") + "\n"
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(payload)
    else:
        out.write(payload)


def _render_op(A, fmt):
    if fmt == "latex":
        return op_latex(A)
    return op_text(A)


# subcommands -------------------------------------------------------------------


def cmd_lax(args, cfg, out):
    sys = LaxSystem(cfg["n"], cfg["eps_order"], cfg["depth"])
    if args.pi:
        A = sys.lax_projection(args.pi, cfg["depth"])
        what = f"pi_{args.pi}(Lax)"
    else:
        A = sys.L
        what = "Lax"
    doc = {"config": header(cfg), "operator": what, "value": op_json(A)}
    _emit(doc, f"{what} =\n  {_render_op(A, args.format)}", args, out)
    return 0


def _as_atom_multiple(sys, g):
    """(c, name) with g = c*atom mod eps^N for atom in 1, q1, q2, q3, c2, c3; else None."""
    if g.is_zero():
        return mpq(0), None
    atoms = [("1", sys.ring.one()), ("q1", sys.q1), ("q2", sys.q2), ("q3", sys.q3), ("c2", sys.c2), ("c3", sys.c3)]
    for name, u in atoms:
        u = u.flatten()
        key = min(u.terms, key=lambda k: (k[1], str(k[0])))
        c = g.terms.get(key)
        if c and g.eq_mod_eps(u.scale(c / u.terms[key])):
            return c / u.terms[key], name
    return None


def right_factored(sys, A, axis):
    """Render A = sum_j d_a^j o g_j when every g_j is a rational multiple of one field.

    Returns {"text", "latex"} or None. The rewriting is checked by recomposing.
    """
    from .opalg import adjoint, compose

    if any(j[0] or j[4 - axis] for j in A.terms):
        return None
    B = adjoint(A)
    parts, back = [], A.alg.zero(A.ctx, A.cut)
    for j in sorted({j[axis - 1] for j in B.terms}, reverse=True):
        key = (0, j, 0) if axis == 2 else (0, 0, j)
        g = B.coeff(*key).scale(-1 if j % 2 else 1)
        back = back + compose(A.alg.mono(*key, ctx=A.ctx), A.alg.scalar(g, A.ctx), A.cut)
        hit = _as_atom_multiple(sys, g)
        if hit is None:
            return None
        if hit[1] is not None:
            parts.append((j, *hit))
    if not back.eq_window(A):
        return None
    text, tex = [], []
    for j, c, name in parts:
        sign = "-" if c < 0 else "+"
        c = abs(c)
        ct = "" if c == 1 else f"{c}*"
        cl = "" if c == 1 else (f"\\frac{{{c.numerator}}}{{{c.denominator}}} " if c.denominator != 1 else f"{c} ")
        dt = "" if j == 0 else (f"d{axis}*" if j == 1 else f"d{axis}^({j})*")
        dl = "" if j == 0 else (f"\\partial_{axis} " if j == 1 else f"\\partial_{axis}^{{{j}}} ")
        at = "" if name == "1" else name
        al = "" if name == "1" else f"{name[0]}_{name[1]}"
        body_t = (ct + dt + at).rstrip("*") or "1"
        body_l = (cl + dl + al).strip() or "1"
        text.append((sign, body_t))
        tex.append((sign, body_l))

    def join(items):
        if not items:
            return "0"
        s = " ".join(f"{sg} {b}" for sg, b in items)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]

    cut = A.cut[axis - 1]
    tail_t = "" if cut is None else f" + O(d{axis}^({cut - 1}))"
    tail_l = "" if cut is None else f" + O(\\partial_{axis}^{{{cut - 1}}})"
    return {"text": join(text) + tail_t, "latex": join(tex) + tail_l}


def cmd_project(args, cfg, out):
    sys = LaxSystem(cfg["n"], cfg["eps_order"], cfg["depth"])
    X = parse_op(sys, args.op)
    A = sys.projector(args.pi, cfg["depth"])(X)
    what = f"pi_{args.pi}({args.op})"
    doc = {"config": header(cfg), "operator": what, "value": op_json(A)}
    text = f"{what} =\n  {_render_op(A, args.format)}"
    if args.pi in ("2", "3"):
        fac = right_factored(sys, A, int(args.pi))
        if fac is not None:
            doc["factored"] = fac
            text += "\n" + ("  = " + fac["latex"] if args.format == "latex" else "  = " + fac["text"])
    _emit(doc, text, args, out)
    return 0


def closed_form_block(sys, res, fmt):
    """Verified factored forms (n = 4 reference tables); returns (lines, {field: verified})."""
    from .appendix import CLOSED_FORM_LEGEND, flow_closed_forms
    from .ring import eq_mod_eps

    if sys.n != 4:
        return [], {}
    forms = flow_closed_forms(sys, (res.label.i, res.label.k))
    if not forms:
        return [], {}
    T = res.derivation(sys)
    i, k = res.label.i, res.label.k
    verified, lines = {}, []
    for name, form in forms.items():
        g = sys.a[1] if name == "a" else sys.ring.gen(name)
        verified[name] = eq_mod_eps(T(g), form.value)
        if fmt == "latex":
            sym = {"a": "a", "c2": "c_2", "c3": "c_3", "q2": "q_2", "q3": "q_3"}[name]
            lines.append(f"\\partial_{{{i},{k}}}({sym}) &= {form.tex}")
        else:
            flag = "" if verified[name] else "   [MISMATCH]"
            lines.append(f"d_{{{i},{k}}}({name}) = {form.txt}{flag}")
    if fmt == "latex":
        body = [CLOSED_FORM_LEGEND["latex"], "\\begin{align*}", " \\\\\n".join(lines), "\\end{align*}"]
    else:
        body = [CLOSED_FORM_LEGEND["text"], *lines]
    return body, verified


def cmd_derive(args, cfg, out):
    label = FlowLabel.parse(args.flow)
    if args.shifted and label.i == 0:
        raise UsageError("the shifted presentation is not available for t_{0,k}; omit --shifted")
    sys = LaxSystem(cfg["n"], cfg["eps_order"], cfg["depth"])
    res = derive_flow(sys, label, cfg["depth"])
    ok = all(v for v in res.meta.values() if isinstance(v, bool))
    ok &= all(res.meta.get("residuals_zero", {}).values())
    shown = res
    if args.shifted:
        shown = derive_flow(LaxSystem(cfg["n"], cfg["eps_order"], cfg["depth"], flat=False), label, cfg["depth"])
    fmt = args.format if args.format != "json" else "text"
    closed, verified = closed_form_block(sys, res, fmt)
    ok &= all(verified.values())
    doc = {"config": header(cfg, shifted=args.shifted), **shown.to_json(), "ok": ok}
    if verified:
        doc["closed_forms"] = {k: {"text": v, "verified": verified[k]} for k, v in _closed_texts(sys, label).items()}
    text = shown.to_latex() if args.format == "latex" else shown.to_text()
    if closed:
        text += "\n" + "\n".join(closed)
    _emit(doc, text, args, out)
    return 0 if ok else 1


def _closed_texts(sys, label):
    from .appendix import flow_closed_forms

    return {k: v.txt for k, v in flow_closed_forms(sys, (label.i, label.k)).items()}


def _suite(name, cfg, opts):
    """Run one suite; returns (ok, entries) with entries JSON-ready dicts."""
    n, N, depth = cfg["n"], cfg["eps_order"], cfg["depth"]
    entries = []
    if name == "appendix":
        from . import appendix

        ok, es = appendix.run(N, depth, n=n)
        return ok, [e.to_json() for e in es]
    if name == "structural":
        rep = structural_checks(LaxSystem(n, N, depth), depth)
        entries = [{"name": k, "status": "pass" if v else "fail"} for k, v in sorted(rep.items())]
    elif name in ("zs", "commutativity"):
        sys = LaxSystem(n, N, depth)
        labels = appendix_label_set()
        for l1, l2 in itertools.product(labels, labels):
            if name == "zs":
                ok = zs_check(sys, l1, l2, depth)
                entries.append({"name": f"zs({l1};{l2})", "status": "pass" if ok else "fail"})
            else:
                for f in field_names(n):
                    ok = commutativity_check(sys, l1, l2, f, depth)
                    entries.append({"name": f"[d_{{{l1}}},d_{{{l2}}}]({f})", "status": "pass" if ok else "fail"})
    elif name == "extrel":
        sys = LaxSystem(n, N, depth)
        for k in opts.get("ks", (0, 1)):
            ok = ext_rel_check(sys, k, depth)
            entries.append({"name": f"ext_rel(k={k})", "status": "pass" if ok else "fail"})
    elif name == "hbe":
        tau = opts.get("tau") or TauModel.one(n=n, eps_order=N)
        rep = bilinear_check(tau, ks=opts.get("ks", (0, 1)), m_range=opts.get("m_range", (-2, 2)), delta_degree=opts.get("delta_degree"))
        for key, good in itertools.chain(rep.to_json()["hqe"].items(), rep.to_json()["dressing"].items(), rep.to_json()["annihilator"].items()):
            entries.append({"name": key, "status": "pass" if good else "fail"})
        fails = {f["check"]: f for f in rep.failures()}
        for e in entries:
            key = e["name"]
            hq = key.replace("k=", "hqe k=").replace(",m=", " m=")
            d = fails.get(key) or fails.get(hq)
            if d:
                e["diff"] = {k: v for k, v in d.items() if k != "check"}
    else:
        raise UsageError(f"unknown suite {name!r}")
    return all(e["status"] == "pass" for e in entries), entries


def _suite_job(job):
    name, cfg, opts = job
    try:
        return name, *_suite(name, cfg, opts), None
    except (ConfigError, WindowError) as exc:
        return name, False, [], str(exc)


def cmd_check(args, cfg, out):
    names = list(dict.fromkeys(args.suite or ["appendix"]))
    opts = {}
    if args.k is not None:
        opts["ks"] = tuple(args.k)
    if args.m_range is not None:
        opts["m_range"] = args.m_range
    if args.delta_degree is not None:
        opts["delta_degree"] = args.delta_degree
    if args.tau:
        opts["tau"] = load_tau(args.tau)
    jobs = [(s, cfg, opts) for s in names]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(_suite_job, jobs))
    else:
        results = [_suite_job(j) for j in jobs]
    doc = {"config": header(cfg), "suites": {}, "ok": True}
    lines = []
    for name, ok, entries, err in results:
        doc["suites"][name] = {"ok": ok, "entries": entries}
        if err:
            doc["suites"][name]["error"] = err
        doc["ok"] &= ok
        lines.append(f"[{'PASS' if ok else 'FAIL'}] suite {name}" + (f": {err}" if err else ""))
        for e in entries:
            tag = e["status"].upper()
            if not e.get("gating", True) and tag == "REPORT":
                tag = "DIFF"
            line = f"  {tag:6} {e.get('group', name)}: {e['name']}"
            if "diff" in e and e["status"] != "pass":
                d = e["diff"]
                line += "  " + ", ".join(f"{k}={v}" for k, v in d.items())
            lines.append(line)
    _emit(doc, "\n".join(lines), args, out)
    return 0 if doc["ok"] else 1


def cmd_hbe(args, cfg, out):
    if args.print_schema:
        out.write(json.dumps(TAU_SCHEMA, indent=2, sort_keys=True) + "\n")
        return 0
    tau = load_tau(args.tau) if args.tau else TauModel.one(n=cfg["n"], eps_order=cfg["eps_order"])
    ks = tuple(args.k) if args.k is not None else (0, 1)
    m_range = args.m_range or (-2, 2)
    rep = bilinear_check(tau, ks=ks, m_range=m_range, delta_degree=args.delta_degree)
    fields = field_extract(tau)
    doc = {
        "config": header({"n": tau.n, "eps_order": tau.eps_order, "depth": cfg["depth"]}, degree=tau.degree),
        "tau": tau.to_json(),
        "fields": {k: v.to_text() for k, v in sorted(fields.items())},
        "report": rep.to_json(),
    }
    lines = [f"{k} = {v}" for k, v in doc["fields"].items()]
    for (k, m), d in sorted(rep.hqe.items()):
        lines.append(f"  {'PASS' if d is None else 'FAIL'} hqe k={k} m={m}" + ("" if d is None else f"  {d}"))
    for name, d in sorted({**rep.dressing, **rep.annihilator}.items()):
        lines.append(f"  {'PASS' if d is None else 'FAIL'} {name}" + ("" if d is None else f"  {d}"))
    lines.append("ok" if rep.ok else "FAILED")
    _emit(doc, "\n".join(lines), args, out)
    return 0 if rep.ok else 1


# argument parsing ------------------------------------------------------------


def _range(text):
    m = re.fullmatch(r"(-?\d+)\.\.(-?\d+)", text)
    if not m or int(m.group(1)) > int(m.group(2)):
        raise argparse.ArgumentTypeError(f"expected a..b with a <= b, got {text!r}")
    return int(m.group(1)), int(m.group(2))


def build_parser():
    p = argparse.ArgumentParser(prog="dtoda", description="Lax operator calculus for the extended Toda-type hierarchy.")
    p.add_argument("--version", action="version", version=f"dtoda {_version()}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt=("text", "latex", "json")):
        sp.add_argument("--n", type=int, help="lattice order n (default 4)")
        sp.add_argument("--eps-order", dest="eps_order", type=int, help="work modulo eps^N (default 4)")
        sp.add_argument("--depth", type=int, help="truncation depth (default 4)")
        sp.add_argument("--config", help="JSON file with keys n, eps_order, depth")
        sp.add_argument("--format", choices=fmt, default="text")
        sp.add_argument("--out", help="write to this file instead of stdout")

    sp = sub.add_parser("lax", help="print the Lax operator or one of its projections")
    common(sp)
    sp.add_argument("--pi", choices=KINDS)
    sp.set_defaults(func=cmd_lax)

    sp = sub.add_parser("project", help="project an operator expression")
    common(sp)
    sp.add_argument("--op", required=True, help='e.g. "d3", "L^-1", "3/2*d2^2", "Lax"')
    sp.add_argument("--pi", choices=KINDS, required=True)
    sp.set_defaults(func=cmd_project)

    sp = sub.add_parser("derive", help="derive the flow d_{i,k} on the generators")
    common(sp)
    sp.add_argument("--flow", required=True, help="i,k")
    sp.add_argument("--shifted", action="store_true", help="display lattice shifts instead of canonical jets")
    sp.set_defaults(func=cmd_derive)

    sp = sub.add_parser("check", help="run verification suites")
    common(sp, ("text", "json"))
    sp.add_argument("--suite", action="append", choices=SUITES, help="repeatable; default appendix")
    sp.add_argument("--jobs", type=int, default=1, help="run suites in parallel processes")
    sp.add_argument("--k", type=int, action="append", help="k values for extrel/hbe (repeatable)")
    sp.add_argument("--m-range", dest="m_range", type=_range)
    sp.add_argument("--delta-degree", dest="delta_degree", type=int)
    sp.add_argument("--tau", help="tau JSON file for the hbe suite")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("hbe", help="bilinear identities for a tau polynomial")
    common(sp, ("text", "json"))
    sp.add_argument("--tau", help="tau JSON file (default: tau = 1)")
    sp.add_argument("--k", type=int, action="append")
    sp.add_argument("--m-range", dest="m_range", type=_range)
    sp.add_argument("--delta-degree", dest="delta_degree", type=int)
    sp.add_argument("--print-schema", action="store_true", help="print the tau JSON schema and exit")
    sp.set_defaults(func=cmd_hbe)
    return p


def main(argv=None, out=None):
    out = out or _sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return args.func(args, cfg, out)
    except (UsageError, ConfigError, WindowError, OSError, json.JSONDecodeError) as exc:
        print(f"dtoda: error: {exc}", file=_sys.stderr)
        return 2


if __name__ == "__main__":
    _sys.exit(main())

"""Text, LaTeX and JSON renderings of ring elements and operator series."""

from __future__ import annotations

from gmpy2 import mpq

from .ring import EXP, RingElem, _mono_sort_key

SCHEMA_VERSION = "1"


def _frac(c):
    return str(c) if c.denominator != 1 else str(c.numerator)


def _factor_text(ring, key, p):
    s, sh, d = key
    if s == EXP:
        w = "alpha" if p == 1 else f"{p}*alpha"
        return f"e^({w}{f'[{sh}]' if sh else ''})"
    base = ring.name_of(s)
    if d:
        base += f"^({d})"
    if sh:
        base += f"[{sh}]"
    return base if p == 1 else f"{base}**{p}"


def _factor_latex(ring, key, p):
    s, sh, d = key
    shift = f"[{sh}]" if sh else ""
    if s == EXP:
        w = r"\alpha" if p == 1 else (r"-\alpha" if p == -1 else f"{p}\\alpha")
        return f"e^{{{w}{shift}}}"
    name = ring.name_of(s)
    if name == "alpha":
        base = r"\alpha"
    elif name[0] in "acq" and name[1:].isdigit():
        base = f"{name[0]}_{{{name[1:]}}}"
    else:
        base = r"\mathrm{" + name + "}"
    if d:
        base += f"^{{({d})}}"
    base += shift
    if p != 1:
        base = f"({base})^{{{p}}}" if (d or shift) else f"{base}^{{{p}}}"
    return base


def _grouped(P):
    by_eps = {}
    for (m, k), c in P.terms.items():
        by_eps.setdefault(k, []).append((m, c))
    for k in by_eps:
        by_eps[k].sort(key=lambda mc: _mono_sort_key(mc[0]))
    return sorted(by_eps.items())


def _poly(items, factor, times, ring):
    parts = []
    for m, c in items:
        body = times.join(factor(ring, key, p) for key, p in m)
        if not body:
            parts.append((c < 0, _frac(abs(c))))
        elif abs(c) == 1:
            parts.append((c < 0, body))
        else:
            parts.append((c < 0, f"{_frac(abs(c))}{times}{body}"))
    out = ""
    for i, (neg, s) in enumerate(parts):
        if i == 0:
            out = ("-" if neg else "") + s
        else:
            out += (" - " if neg else " + ") + s
    return out or "0"


def ring_text(P):
    if not P.terms:
        return "0"
    chunks = []
    for k, items in _grouped(P):
        body = _poly(items, _factor_text, "*", P.ring)
        if k == 0:
            chunks.append(body)
        else:
            e = "eps" if k == 1 else f"eps^{k}"
            chunks.append(f"{e}*({body})")
    return " + ".join(chunks)


def ring_latex(P):
    if not P.terms:
        return "0"
    chunks = []
    for k, items in _grouped(P):
        body = _poly(items, _factor_latex, " ", P.ring)
        if k == 0:
            chunks.append(body)
        else:
            e = r"\epsilon" if k == 1 else f"\\epsilon^{{{k}}}"
            chunks.append(f"{e}\\left({body}\\right)")
    return " + ".join(chunks)


def ring_json(P):
    terms = []
    for m, ser in sorted(P.series().items(), key=lambda kv: _mono_sort_key(kv[0])):
        terms.append({
            "monomial": [[P.ring.name_of(s), d, sh, p] for (s, sh, d), p in m],
            "coeffs": [_frac(c) if c.denominator != 1 else f"{c.numerator}/1" for c in ser.coeffs],
        })
    return {"terms": terms, "valid_order": P.valid}


def ring_from_json(ring, data):
    terms = {}
    for t in data["terms"]:
        mono = []
        for name, d, sh, p in t["monomial"]:
            s = EXP if name == "exp_alpha" else ring.sym(name)
            mono.append(((s, sh, d), p))
        mono = tuple(sorted(mono))
        for k, c in enumerate(t["coeffs"]):
            c = mpq(c)
            if c:
                terms[(mono, k)] = c
    return RingElem(ring, terms, data.get("valid_order", ring.N))


def _op_text_monomial(j):
    j1, j2, j3 = j
    parts = []
    for sym, e in (("L", j1), ("d2", j2), ("d3", j3)):
        if e == 1:
            parts.append(sym)
        elif e:
            parts.append(f"{sym}^({e})")
    return "*".join(parts)


def _op_latex_monomial(j):
    j1, j2, j3 = j
    parts = []
    for sym, e in ((r"\Lambda", j1), (r"\partial_2", j2), (r"\partial_3", j3)):
        if e == 1:
            parts.append(sym)
        elif e:
            parts.append(f"{sym}^{{{e}}}")
    return " ".join(parts)


def op_text(A):
    lines = []
    for j in sorted(A.terms, reverse=True):
        mono = _op_text_monomial(j)
        coeff = ring_text(A.terms[j])
        lines.append(f"({coeff})" + (f"*{mono}" if mono else ""))
    body = "\n  + ".join(lines) if lines else "0"
    tail = A.window_text()
    return body + (f"\n  + {tail}" if tail else "")


def op_latex(A):
    parts = []
    for j in sorted(A.terms, reverse=True):
        mono = _op_latex_monomial(j)
        parts.append(f"\\left({ring_latex(A.terms[j])}\\right){(' ' + mono) if mono else ''}")
    body = " + ".join(parts) if parts else "0"
    tail = A.window_latex()
    return body + (f" + {tail}" if tail else "")


def op_json(A):
    return {
        "context": A.ctx_name(),
        "guarantee": A.guarantee_json(),
        "terms": [
            {"j1": j[0], "j2": j[1], "j3": j[2], "coeff": ring_json(A.terms[j])}
            for j in sorted(A.terms, reverse=True)
        ],
    }

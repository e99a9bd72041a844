"""Hypothesis strategies for small random ring elements and finite operators."""

from hypothesis import strategies as st

FIELDS = ("q2", "q3", "c2", "c3", "alpha")

coeffs = st.fractions(min_value=-3, max_value=3, max_denominator=4).filter(lambda c: c != 0)


@st.composite
def monomials(draw, ring, max_shift=1, max_deriv=1):
    names = FIELDS + tuple(f"a{i}" for i in range(1, ring.n - 3))
    out = ring.one()
    for _ in range(draw(st.integers(0, 2))):
        name = draw(st.sampled_from(names))
        out = out * ring.gen(name, draw(st.integers(0, max_deriv)), draw(st.integers(-max_shift, max_shift)))
    w = draw(st.integers(-1, 1))
    if w:
        out = out * ring.exp_alpha(w, draw(st.integers(-max_shift, max_shift)))
    return out


@st.composite
def ring_elems(draw, ring, max_terms=3, **kw):
    out = ring.zero()
    for _ in range(draw(st.integers(1, max_terms))):
        c = draw(coeffs)
        k = draw(st.integers(0, ring.N - 1))
        out = out + draw(monomials(ring, **kw)) * ring.eps(k, c)
    return out


@st.composite
def flat_elems(draw, ring, **kw):
    return draw(ring_elems(ring, max_shift=0, **kw))


@st.composite
def finite_ops(draw, sys, max_terms=2, lam=(-1, 1), d=(0, 1), coeff=None):
    """Finite operator sum f_j Lambda^j1 d2^j2 d3^j3 with flat coefficients."""
    alg, R = sys.alg, sys.ring
    coeff = coeff or flat_elems(R, max_terms=2, max_deriv=0)
    terms = {}
    for _ in range(draw(st.integers(1, max_terms))):
        j = (draw(st.integers(*lam)), draw(st.integers(*d)), draw(st.integers(*d)))
        terms[j] = terms.get(j, R.zero()) + draw(coeff)
    return alg.series(terms)

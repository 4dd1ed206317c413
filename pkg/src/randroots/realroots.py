"""Validated counting and isolation of real roots of univariate polynomials.

Two engines sit behind one API:

* ``SturmExact`` — Sturm sequences over exact integers.  Double coefficients
  are scaled by a power of two into integers (exactly), the primitive
  pseudo-remainder chain is built with positive multipliers, and sign
  variations are evaluated at exact dyadic rationals.  Eligible when the
  (stripped) degree is at most 64 and the coefficient exponent span fits a
  fixed bit budget.
* ``DescartesBisect`` — de Casteljau subdivision on unit-interval Bernstein
  pieces with certified coefficient signs (see _kernels).  The real line is
  decomposed into [0,1], [-1,0] (via x -> -x) and the outer regions (via the
  reversal x -> 1/x), each an exact coefficient transform; region seams are
  counted once by certified evaluation.

Counts follow the distinct-root convention: a multiple root, or a cluster
tighter than the certification tolerance, counts once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from . import _kernels
from .polyalg import BernsteinPoly, MonomialPoly, _monomial_to_bernstein_matrix

STURM_EXACT = "SturmExact"
DESCARTES_BISECT = "DescartesBisect"
COMPANION_FILTERED = "CompanionFiltered"
METHODS = (STURM_EXACT, DESCARTES_BISECT, COMPANION_FILTERED)

REL_TOL = 1e-13
STURM_MAX_DEGREE = 64
STURM_SPAN_BITS = 128
_EPS = np.finfo(float).eps


class ZeroPolynomial(ValueError):
    """Every coefficient is exactly zero; root counting is meaningless."""


class PrecisionExhausted(ArithmeticError):
    """A sign could not be certified at the working tolerance."""


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class RootCount:
    count: int
    region: Interval
    method: str


REAL_LINE = Interval(-math.inf, math.inf)


def _tol_for(degree: int) -> float:
    # 1e-13 relative, widened once accumulated rounding would overtake it
    return max(REL_TOL, 2.0 * (degree + 80) * _EPS)


# ---------------------------------------------------------------------------
# exact integer machinery (Sturm path)


def _strip_exact_zeros(coeffs):
    """Drop exactly-zero leading coefficients; [] if identically zero."""
    k = len(coeffs)
    while k > 0 and coeffs[k - 1] == 0.0:
        k -= 1
    return coeffs[:k]


def _scale_to_ints(coeffs):
    """Exact float -> int scaling by a power of two, or None past the bit budget."""
    ms, es = [], []
    for c in coeffs:
        m, e = math.frexp(c)
        ms.append(int(m * (1 << 53)))
        es.append(e)
    nz = [e for m, e in zip(ms, es) if m]
    if not nz:
        return None
    if max(nz) - min(nz) > STURM_SPAN_BITS:
        return None
    shift = min(nz) - 53
    return [m << (e - 53 - shift) if m else 0 for m, e in zip(ms, es)]


def _trim_int(f):
    k = len(f)
    while k > 0 and f[k - 1] == 0:
        k -= 1
    return f[:k]


def _primitive(f):
    g = reduce(math.gcd, (abs(c) for c in f), 0)
    if g > 1:
        return [c // g for c in f]
    return list(f)


def _deriv_int(f):
    return [k * f[k] for k in range(1, len(f))]


def _pseudo_rem(A, B):
    """prem(A, B) normalized so the implied multiplier of A is positive."""
    da, db = len(A) - 1, len(B) - 1
    lb = B[-1]
    R = list(A)
    for d in range(da, db - 1, -1):
        c = R[d]
        for i in range(d):
            R[i] = lb * R[i]
        if c:
            sh = d - db
            for i in range(db):
                R[i + sh] -= c * B[i]
        R.pop()
    if lb < 0 and (da - db + 1) % 2 == 1:
        R = [-r for r in R]
    return _trim_int(R)


def _pseudo_quo(A, B):
    """Pseudo-quotient: lb^(da-db+1) * A = Q*B + R; returns primitive Q."""
    da, db = len(A) - 1, len(B) - 1
    lb = B[-1]
    R = list(A)
    Q = [0] * (da - db + 1)
    for d in range(da, db - 1, -1):
        c = R[d]
        for i in range(len(Q)):
            Q[i] = lb * Q[i]
        Q[d - db] += c
        for i in range(d):
            R[i] = lb * R[i]
        if c:
            sh = d - db
            for i in range(db):
                R[i + sh] -= c * B[i]
        R.pop()
    return _primitive(Q)


def _sturm_chain(f):
    """Primitive Sturm chain of a primitive integer polynomial.

    Returns (chain, squarefree) where squarefree is the primitive squarefree
    part used for exact root-membership tests.
    """
    chain = [f, _primitive(_trim_int(_deriv_int(f)))]
    if len(chain[1]) == 0:  # constant input
        return [f], f
    while len(chain[-1]) - 1 > 0:
        R = _pseudo_rem(chain[-2], chain[-1])
        if not R:
            break
        chain.append([-c for c in _primitive(R)])
    g = chain[-1]
    if len(g) - 1 > 0:
        # non-squarefree input: divide out the gcd and rebuild once
        sf = _primitive(_pseudo_quo(f, g))
        return _sturm_chain(sf)
    return chain, f


def _sign(n) -> int:
    return (n > 0) - (n < 0)


def _sign_at_dyadic(f, num, shift):
    """Sign of f(num * 2^shift) for integer coefficients f."""
    d = len(f) - 1
    if d < 0:
        return 0
    if shift >= 0:
        X = num << shift if num >= 0 else -((-num) << shift)
        acc = 0
        for c in reversed(f):
            acc = acc * X + c
        return _sign(acc)
    k = -shift  # value is num / 2^k; evaluate f * 2^(k d) instead
    acc = f[d]
    for i in range(d - 1, -1, -1):
        acc = acc * num + (f[i] << (k * (d - i)))
    return _sign(acc)


def _float_to_dyadic(x: float):
    m, e = math.frexp(x)
    return int(m * (1 << 53)), e - 53


def _variations(signs) -> int:
    v = 0
    last = 0
    for s in signs:
        if s == 0:
            continue
        if s * last < 0:
            v += 1
        last = s
    return v


def _variations_at(chain, x: float) -> int:
    if math.isinf(x):
        up = x > 0
        signs = []
        for f in chain:
            d = len(f) - 1
            s = _sign(f[-1])
            if not up and d % 2 == 1:
                s = -s
            signs.append(s)
        return _variations(signs)
    num, shift = _float_to_dyadic(x)
    return _variations([_sign_at_dyadic(f, num, shift) for f in chain])


def _sturm_count(coeffs, lo: float, hi: float):
    """Exact distinct-root count in [lo, hi]; None if outside the budget."""
    stripped = _strip_exact_zeros(coeffs)
    if len(stripped) - 1 > STURM_MAX_DEGREE:
        return None
    ints = _scale_to_ints(stripped)
    if ints is None:
        return None
    ints = _primitive(_trim_int(ints))
    if len(ints) <= 1:
        return 0
    chain, sf = _sturm_chain(ints)
    count = _variations_at(chain, lo) - _variations_at(chain, hi)
    if not math.isinf(lo):
        num, shift = _float_to_dyadic(lo)
        if _sign_at_dyadic(sf, num, shift) == 0:
            count += 1
    return count


# ---------------------------------------------------------------------------
# bisection machinery


def _certified_eval(coeffs, x: float):
    """(value, tau): sign and is-zero tests on p(x) that never overflow.

    |computed - exact| is well below tau = tolerance * running magnitude.  For
    |x| > 1 the reversed polynomial is evaluated at 1/x instead (same zero
    set away from 0; the sign flips with the degree parity for negative x),
    so the returned value is a scaled surrogate: valid for sign comparisons
    and |value| <= tau root marks, not as p(x) itself.
    """
    if abs(x) <= 1.0:
        seq = tuple(reversed(coeffs))
        z = x
        flip = 1.0
    else:
        seq = coeffs  # p(x) = x^d * q(1/x) with q the reversed coefficients
        z = 1.0 / x
        flip = 1.0 if (x > 0.0 or (len(coeffs) - 1) % 2 == 0) else -1.0
    acc = 0.0
    mag = 0.0
    az = abs(z)
    for c in seq:
        acc = acc * z + c
        mag = mag * az + abs(c)
    tau = _tol_for(len(coeffs)) * mag
    return flip * acc, tau


def _phi(x: float) -> float:
    """Involution u = x/(2x-1): maps R minus [0,1] onto (0,1) minus {1/2}."""
    if math.isinf(x):
        return 0.5
    return x / (2.0 * x - 1.0)


def _run_kernel(piece, u_lo, u_hi, lskip, rskip, tol):
    cap = piece.shape[0] + 8
    out_iv = np.empty((cap, 2))
    count, niv, status = _kernels.count_open_unit(
        piece, u_lo, u_hi, 1 if lskip else 0, 1 if rskip else 0, tol, out_iv)
    if status == 1:
        raise PrecisionExhausted(
            f"cannot certify a sign at tolerance {tol:.3e} in ({u_lo}, {u_hi})")
    if status == 2:
        raise RuntimeError("subdivision capacity exceeded (internal)")
    return count, [(out_iv[i, 0], out_iv[i, 1]) for i in range(niv)]


def _bisect_regions(a: np.ndarray, lo: float, hi: float):
    """Count distinct roots of the monomial polynomial a in [lo, hi] by region
    decomposition.  Returns (count, x_intervals)."""
    d = len(a) - 1
    M = _monomial_to_bernstein_matrix(d)

    pts = set()
    for c in (-1.0, 0.0, 1.0):
        if lo < c < hi:
            pts.add(c)
    if not math.isinf(lo):
        pts.add(lo)
    if not math.isinf(hi):
        pts.add(hi)
    pts = sorted(pts)

    rootmark = {}
    count = 0
    intervals = []
    for s in pts:
        val, tau = _certified_eval(a, s)
        rootmark[s] = abs(val) <= tau
        if rootmark[s]:
            count += 1
            w = 1e-12 * (1.0 + abs(s))
            intervals.append((s - w, s + w))

    segs = []
    if math.isinf(lo):
        segs.append((lo, pts[0]))
    for c1, c2 in zip(pts, pts[1:]):
        segs.append((c1, c2))
    if math.isinf(hi):
        segs.append((pts[-1], hi))

    a_neg = a * np.where(np.arange(d + 1) % 2 == 0, 1.0, -1.0)
    scale = float(np.max(np.abs(a)))
    coef_tol = _tol_for(d) * scale
    bases = {}

    def base(key):
        if key not in bases:
            if key == "pos":
                bases[key] = M @ a
            elif key == "neg":
                bases[key] = M @ a_neg
            elif key == "rev":
                bases[key] = M @ a[::-1]
            else:
                bases[key] = M @ a_neg[::-1]
        return bases[key]

    def mark(c):  # boundary-root flag; infinity is the phantom root of reversal
        if math.isinf(c):
            return abs(a[d]) <= coef_tol
        return rootmark[c]

    for c1, c2 in segs:
        if c1 >= 0.0 and c2 <= 1.0:
            b = base("pos")
            u1, u2 = c1, c2
            piece_map = lambda t: t
        elif c2 <= 0.0 and c1 >= -1.0:
            b = base("neg")
            u1, u2 = -c2, -c1
            piece_map = lambda t: -t
        elif c1 >= 1.0:
            b = base("rev")
            u1 = 1.0 / c2 if not math.isinf(c2) else 0.0
            u2 = 1.0 / c1
            piece_map = lambda t: 1.0 / t if t != 0.0 else math.inf
        else:  # c2 <= -1.0
            b = base("negrev")
            u1 = -1.0 / c1 if not math.isinf(c1) else 0.0
            u2 = -1.0 / c2
            piece_map = lambda t: -1.0 / t if t != 0.0 else -math.inf
        if not u1 < u2:  # degenerate after rounding
            continue
        # skip flags: which x-endpoint each u-endpoint corresponds to
        if c1 >= 0.0 and c2 <= 1.0:
            lmark, rmark = mark(c1), mark(c2)
        elif c2 <= 0.0 and c1 >= -1.0:
            lmark, rmark = mark(c2), mark(c1)
        elif c1 >= 1.0:
            lmark, rmark = mark(c2), mark(c1)
        else:
            lmark, rmark = mark(c1), mark(c2)
        piece = _kernels.restrict(np.ascontiguousarray(b), u1, u2)
        pscale = float(np.max(np.abs(piece)))
        if pscale == 0.0:
            continue
        tol = _tol_for(d) * pscale
        c, ivs = _run_kernel(piece, u1, u2, lmark, rmark, tol)
        count += c
        for t1, t2 in ivs:
            x1, x2 = piece_map(t1), piece_map(t2)
            if x1 > x2:
                x1, x2 = x2, x1
            intervals.append((x1, x2))
    return count, intervals


# ---------------------------------------------------------------------------
# public API


def _validate(p: MonomialPoly):
    if all(c == 0.0 for c in p.coeffs):
        raise ZeroPolynomial("all coefficients are exactly zero")


def _companion_real_roots(p: MonomialPoly):
    coeffs = _strip_exact_zeros(list(p.coeffs))
    if len(coeffs) <= 1:
        return []
    z = np.roots(coeffs[::-1])
    real = sorted(z[np.abs(z.imag) < 1e-8 * (1.0 + np.abs(z.real))].real)
    out = []
    for x in real:
        if not out or abs(x - out[-1]) > 1e-7 * (1.0 + abs(x)):
            out.append(float(x))
    return out


def count_roots_companion(p: MonomialPoly, region: Interval = REAL_LINE) -> RootCount:
    """Eigenvalue cross-check: companion-matrix roots filtered to the real axis."""
    _validate(p)
    roots = [x for x in _companion_real_roots(p) if region.lo <= x <= region.hi]
    return RootCount(len(roots), region, COMPANION_FILTERED)


def count_roots_interval(p: MonomialPoly, region: Interval,
                         method: str | None = None) -> RootCount:
    """Exact count of distinct real roots in the closed interval.

    method=None picks SturmExact when the degree/coefficient budget allows,
    falling back to DescartesBisect; an explicit method is honored or raises
    ValueError when infeasible.
    """
    _validate(p)
    if method not in (None,) + METHODS:
        raise ValueError(f"unknown method {method!r}")
    if method == COMPANION_FILTERED:
        return count_roots_companion(p, region)
    if method in (None, STURM_EXACT):
        count = _sturm_count(list(p.coeffs), region.lo, region.hi)
        if count is not None:
            return RootCount(count, region, STURM_EXACT)
        if method == STURM_EXACT:
            raise ValueError(
                f"degree {p.degree} / coefficient span outside the exact budget")
    a = np.asarray(p.coeffs)
    count, _ = _bisect_regions(a, region.lo, region.hi)
    return RootCount(count, region, DESCARTES_BISECT)


def count_roots_line(p: MonomialPoly, method: str | None = None) -> RootCount:
    """Distinct real roots over (-inf, inf) via the Cauchy bound B = 1 + max|a_k/a_d|."""
    _validate(p)
    coeffs = _strip_exact_zeros(list(p.coeffs))
    lead = abs(coeffs[-1])
    if lead < 1e-300:
        raise ValueError("leading coefficient below 1e-300; degree is ambiguous")
    if len(coeffs) == 1:
        return RootCount(0, REAL_LINE, method or STURM_EXACT)
    B = 1.0 + max(abs(c) for c in coeffs[:-1]) / lead
    # round up to a power of two: exact dyadic endpoint, still a root bound
    B = math.ldexp(1.0, math.frexp(B)[1])
    inner = count_roots_interval(MonomialPoly(coeffs), Interval(-B, B), method)
    return RootCount(inner.count, REAL_LINE, inner.method)


def count_roots_bernstein(p: BernsteinPoly, region: Interval) -> RootCount:
    """Count distinct roots of a Bernstein-form polynomial over any interval,
    working on Bernstein coefficients only.

    Outside [0,1] the involution u = x/(2x-1) maps both unbounded branches
    into (0,1) and transforms the coefficients by pure sign flips
    q_k = (-1)^(d-k) b_k; u = 1/2 is the image of infinity and is excluded
    (that is where a degree-dropped polynomial's phantom root would land).
    """
    b = np.asarray(p.coeffs)
    if not np.any(b != 0.0):
        raise ZeroPolynomial("all coefficients are exactly zero")
    d = len(b) - 1
    lo, hi = region.lo, region.hi
    scale = float(np.max(np.abs(b)))
    tol = _tol_for(d) * scale
    signs = np.where((d - np.arange(d + 1)) % 2 == 0, 1.0, -1.0)
    q = np.ascontiguousarray(b * signs)

    def value(x: float) -> float:
        if 0.0 <= x <= 1.0:
            return float(_kernels.value_at(np.ascontiguousarray(b), x))
        return float(_kernels.value_at(q, _phi(x)))

    pts = set()
    for c in (0.0, 1.0):
        if lo < c < hi:
            pts.add(c)
    if not math.isinf(lo):
        pts.add(lo)
    if not math.isinf(hi):
        pts.add(hi)
    pts = sorted(pts)

    rootmark = {}
    count = 0
    for s in pts:
        rootmark[s] = abs(value(s)) <= tol
        if rootmark[s]:
            count += 1

    phantom = abs(float(_kernels.value_at(q, 0.5))) <= tol

    segs = []
    if math.isinf(lo):
        segs.append((lo, pts[0]))
    for c1, c2 in zip(pts, pts[1:]):
        segs.append((c1, c2))
    if math.isinf(hi):
        segs.append((pts[-1], hi))

    def mark(c):
        return phantom if math.isinf(c) else rootmark[c]

    for c1, c2 in segs:
        if c1 >= 0.0 and c2 <= 1.0:
            piece = _kernels.restrict(np.ascontiguousarray(b), c1, c2)
            u1, u2, lmark, rmark = c1, c2, mark(c1), mark(c2)
        else:
            # either branch: phi is decreasing, so u-order flips the x-order
            u1, u2 = _phi(c2), _phi(c1)
            lmark, rmark = mark(c2), mark(c1)
            if not u1 < u2:
                continue
            piece = _kernels.restrict(q, u1, u2)
        pscale = float(np.max(np.abs(piece)))
        if pscale == 0.0:
            continue
        c, _ = _run_kernel(piece, u1, u2, lmark, rmark, _tol_for(d) * pscale)
        count += c
    return RootCount(count, region, DESCARTES_BISECT)


def isolate_roots(p: MonomialPoly) -> list:
    """Disjoint intervals, one distinct real root each; union matches
    count_roots_line.  Widths are refined toward 1e-10 * (1 + |root|)."""
    _validate(p)
    coeffs = _strip_exact_zeros(list(p.coeffs))
    if len(coeffs) == 1:
        return []
    lead = abs(coeffs[-1])
    if lead < 1e-300:
        raise ValueError("leading coefficient below 1e-300")
    B = 1.0 + max(abs(c) for c in coeffs[:-1]) / lead
    B = math.ldexp(1.0, math.frexp(B)[1])
    _, raw = _bisect_regions(np.asarray(coeffs), -B, B)
    out = []
    for x1, x2 in sorted(raw):
        r1, r2 = _refine(coeffs, x1, x2)
        if r1 >= r2:  # collapsed to one float; widen by an ulp on each side
            r1 = math.nextafter(r1, -math.inf)
            r2 = math.nextafter(r2, math.inf)
        out.append((r1, r2))
    return [Interval(x1, x2) for x1, x2 in out]


def _refine(coeffs, a: float, b: float):
    va, ta = _certified_eval(coeffs, a)
    vb, tb = _certified_eval(coeffs, b)
    if abs(va) <= ta or abs(vb) <= tb or va * vb > 0:
        return a, b  # cluster/seam interval: already tiny, or sign not usable
    while b - a > 1e-10 * (1.0 + 0.5 * (abs(a) + abs(b))):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        vm, tm = _certified_eval(coeffs, m)
        if abs(vm) <= tm:
            w = 0.5 * (b - a)
            return max(a, m - 1e-11 * w), min(b, m + 1e-11 * w)
        if (vm > 0) == (va > 0):
            a, va = m, vm
        else:
            b, vb = m, vm
    return a, b

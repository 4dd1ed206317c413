"""Polynomial value types and basis plumbing.

Four immutable coefficient containers (univariate monomial, univariate
Bernstein, dense multivariate, univariate complex) plus evaluation,
differentiation, basis change and a small JSON schema.  Everything here is a
pure function over plain floats; the only exact-arithmetic corner is the
Bernstein -> monomial change, which runs over scaled integers so the
conversion itself introduces no rounding beyond the final float cast.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

# Exact binomial coefficients stop fitting comfortably in doubles past ~C(60,30).
MAX_CONVERT_DEGREE = 60


class DegreeTooLarge(ValueError):
    """Requested an exact-binomial basis change past the degree guard."""


class DimensionMismatch(ValueError):
    """Point dimension does not match the polynomial's variable count."""


def _as_float_tuple(seq) -> tuple:
    out = tuple(float(c) for c in seq)
    if not out:
        raise ValueError("coefficient sequence must be non-empty")
    return out


@dataclass(frozen=True)
class MonomialPoly:
    """sum_k a_k x^k with coeffs[k] = a_k.

    Degree is structural (len - 1); trailing coefficients may be numerically
    tiny and are never silently dropped.
    """

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_float_tuple(self.coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


@dataclass(frozen=True)
class BernsteinPoly:
    """Coefficients in b_{d,k}(x) = C(d,k) x^k (1-x)^(d-k) on [0,1]."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_float_tuple(self.coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


@dataclass(frozen=True)
class ComplexPoly:
    """f(z) = sum_k a_k z^k with complex a_k; degree N structural."""

    coeffs: tuple

    def __post_init__(self):
        out = tuple(complex(c) for c in self.coeffs)
        if not out:
            raise ValueError("coefficient sequence must be non-empty")
        object.__setattr__(self, "coeffs", out)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


@dataclass(frozen=True, eq=False)
class MultiPoly:
    """Dense real polynomial in m variables, total degree <= degree.

    coeffs maps multi-index tuples (len m, entries >= 0) to floats.  Treat the
    mapping as immutable after construction.
    """

    m: int
    degree: int
    coeffs: Mapping[tuple, float]

    def __post_init__(self):
        clean = {}
        for j, a in self.coeffs.items():
            j = tuple(int(v) for v in j)
            if len(j) != self.m or any(v < 0 for v in j):
                raise ValueError(f"bad multi-index {j} for m={self.m}")
            if sum(j) > self.degree:
                raise ValueError(f"multi-index {j} exceeds total degree {self.degree}")
            clean[j] = float(a)
        object.__setattr__(self, "coeffs", clean)


@dataclass(frozen=True, eq=False)
class BernsteinMulti:
    """Simplex Bernstein form: coeffs over multi-indices j with ||j|| <= d,
    basis B_{d,j}(x) = (d! / (j_1!...j_m!(d-||j||)!)) x^j (1 - sum x_i)^(d-||j||).
    """

    m: int
    degree: int
    coeffs: Mapping[tuple, float]

    def __post_init__(self):
        clean = {}
        for j, a in self.coeffs.items():
            j = tuple(int(v) for v in j)
            if len(j) != self.m or any(v < 0 for v in j) or sum(j) > self.degree:
                raise ValueError(f"bad multi-index {j}")
            clean[j] = float(a)
        object.__setattr__(self, "coeffs", clean)


# ---------------------------------------------------------------------------
# evaluation


def eval_monomial(p: MonomialPoly, x: float) -> float:
    acc = 0.0
    for a in reversed(p.coeffs):
        acc = acc * x + a
    return acc


def eval_monomial_many(p: MonomialPoly, xs: np.ndarray) -> np.ndarray:
    """Vectorized Horner over an array of abscissae."""
    xs = np.asarray(xs, dtype=float)
    acc = np.zeros_like(xs)
    for a in reversed(p.coeffs):
        acc = acc * xs + a
    return acc


def eval_bernstein(p: BernsteinPoly, x: float) -> float:
    """de Casteljau; algebraically valid for x outside [0,1] as well."""
    b = list(p.coeffs)
    n = len(b)
    u = 1.0 - x
    for j in range(1, n):
        for k in range(n - j):
            b[k] = u * b[k] + x * b[k + 1]
    return b[0]


def eval_complex(p: ComplexPoly, z: complex) -> complex:
    acc = 0j
    for a in reversed(p.coeffs):
        acc = acc * z + a
    return acc


def eval_multi(f: MultiPoly, x: Sequence) -> float:
    if len(x) != f.m:
        raise DimensionMismatch(f"point has dim {len(x)}, polynomial has m={f.m}")
    # incremental power tables per coordinate
    pows = [[1.0] * (f.degree + 1) for _ in range(f.m)]
    for v in range(f.m):
        xv = float(x[v])
        row = pows[v]
        for k in range(1, f.degree + 1):
            row[k] = row[k - 1] * xv
    acc = 0.0
    for j, a in f.coeffs.items():
        t = a
        for v, e in enumerate(j):
            if e:
                t *= pows[v][e]
        acc += t
    return acc


def eval_multi_many(f: MultiPoly, X: np.ndarray) -> np.ndarray:
    """Evaluate f at rows of X (shape (n, m)); power tables keep it O(terms) array ops."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != f.m:
        raise DimensionMismatch(f"expected (n, {f.m}) array, got {X.shape}")
    pows = []
    for v in range(f.m):
        col = X[:, v]
        table = [np.ones_like(col)]
        for _ in range(f.degree):
            table.append(table[-1] * col)
        pows.append(table)
    acc = np.zeros(X.shape[0])
    for j, a in f.coeffs.items():
        if a == 0.0:
            continue
        t = np.full(X.shape[0], a)
        for v, e in enumerate(j):
            if e:
                t = t * pows[v][e]
        acc += t
    return acc


def eval_bernstein_multi(f: BernsteinMulti, x: Sequence) -> float:
    if len(x) != f.m:
        raise DimensionMismatch(f"point has dim {len(x)}, polynomial has m={f.m}")
    d = f.degree
    if d > MAX_CONVERT_DEGREE:
        raise DegreeTooLarge(f"simplex Bernstein evaluation capped at d={MAX_CONVERT_DEGREE}")
    s = 1.0 - float(sum(x))
    acc = 0.0
    for j, a in f.coeffs.items():
        r = d - sum(j)
        w = float(_multinomial(d, j))
        t = a * w * (s ** r)
        for v, e in enumerate(j):
            t *= float(x[v]) ** e
        acc += t
    return acc


# ---------------------------------------------------------------------------
# differentiation


def derivative(p: MonomialPoly) -> MonomialPoly:
    if p.degree == 0:
        return MonomialPoly((0.0,))
    return MonomialPoly(tuple(k * p.coeffs[k] for k in range(1, len(p.coeffs))))


def derivative_complex(p: ComplexPoly) -> ComplexPoly:
    if p.degree == 0:
        return ComplexPoly((0j,))
    return ComplexPoly(tuple(k * p.coeffs[k] for k in range(1, len(p.coeffs))))


def partial_derivative(f: MultiPoly, var: int) -> MultiPoly:
    if not 0 <= var < f.m:
        raise DimensionMismatch(f"variable index {var} out of range for m={f.m}")
    out = {}
    for j, a in f.coeffs.items():
        e = j[var]
        if e == 0:
            continue
        jj = j[:var] + (e - 1,) + j[var + 1:]
        out[jj] = out.get(jj, 0.0) + e * a
    if not out:
        out = {(0,) * f.m: 0.0}
    return MultiPoly(f.m, max(f.degree - 1, 0), out)


def gradient(f: MultiPoly, x: Sequence) -> np.ndarray:
    return np.array([eval_multi(partial_derivative(f, v), x) for v in range(f.m)])


# ---------------------------------------------------------------------------
# basis change


def _scaled_ints(values) -> tuple:
    """Represent floats exactly as (ints, shift) with value = int * 2^-shift."""
    ms, es = [], []
    for v in values:
        m, e = math.frexp(float(v))
        ms.append(int(m * (1 << 53)))
        es.append(e - 53)
    if not any(ms):
        return [0] * len(ms), 0
    emin = min(e for m, e in zip(ms, es) if m)
    out = [m << (e - emin) if m else 0 for m, e in zip(ms, es)]
    return out, -emin


def _int_times_pow2(n: int, shift: int) -> float:
    """n * 2^shift as a float without overflowing the int->float cast."""
    sign = -1 if n < 0 else 1
    n = abs(n)
    if n == 0:
        return 0.0
    bl = n.bit_length()
    if bl <= 53:
        return math.ldexp(sign * n, shift)
    top = n >> (bl - 53)
    if (n >> (bl - 54)) & 1:  # round to nearest on the dropped bits
        top += 1
    return math.ldexp(sign * top, shift + bl - 53)


def bernstein_to_monomial(p: BernsteinPoly) -> MonomialPoly:
    """Exact basis change via integer forward differences: a_i = C(d,i) Δ^i b_0."""
    d = p.degree
    if d > MAX_CONVERT_DEGREE:
        raise DegreeTooLarge(f"bernstein_to_monomial capped at d={MAX_CONVERT_DEGREE}, got {d}")
    ints, shift = _scaled_ints(p.coeffs)
    out = []
    diffs = list(ints)
    for i in range(d + 1):
        out.append(_int_times_pow2(math.comb(d, i) * diffs[0], -shift))
        diffs = [diffs[k + 1] - diffs[k] for k in range(len(diffs) - 1)]
    return MonomialPoly(tuple(out))


@lru_cache(maxsize=32)
def _monomial_to_bernstein_matrix(d: int) -> np.ndarray:
    # M[k, i] = C(k, i) / C(d, i); Pascal recurrence keeps every entry in [0, 1].
    # M[k,i] = M[k-1,i] + M[k-1,i-1] * C(d,i-1)/C(d,i), the ratio being i/(d-i+1).
    M = np.zeros((d + 1, d + 1))
    M[0, 0] = 1.0
    if d == 0:
        return M
    i = np.arange(1, d + 1)
    ratio = i / (d - i + 1.0)
    for k in range(1, d + 1):
        M[k, :] = M[k - 1, :]
        M[k, 1:] += M[k - 1, :-1] * ratio
    return M


def monomial_to_bernstein(p: MonomialPoly) -> BernsteinPoly:
    """b = M a with M[k,i] = C(k,i)/C(d,i); entries bounded by 1, no big binomials,
    so this is safe at any degree (used by the subdivision counter up to d ~ 1000)."""
    d = p.degree
    M = _monomial_to_bernstein_matrix(d)
    b = M @ np.asarray(p.coeffs)
    return BernsteinPoly(tuple(b))


def _multinomial(d: int, j: tuple) -> int:
    r = d
    out = 1
    for e in j:
        out *= math.comb(r, e)
        r -= e
    return out


def bernstein_multi_to_multi(f: BernsteinMulti) -> MultiPoly:
    """Expand the simplex Bernstein form into the dense monomial MultiPoly."""
    d = f.degree
    if d > MAX_CONVERT_DEGREE:
        raise DegreeTooLarge(f"simplex Bernstein expansion capped at d={MAX_CONVERT_DEGREE}")
    out: dict = {}
    for j, b in f.coeffs.items():
        if b == 0.0:
            continue
        r = d - sum(j)
        w = b * _multinomial(d, j)
        # (1 - x_1 - ... - x_m)^r expanded multinomially
        for k in multi_index_set(f.m, r):
            t = sum(k)
            c = w * ((-1) ** t) * _multinomial(r, k)
            jj = tuple(a + b2 for a, b2 in zip(j, k))
            out[jj] = out.get(jj, 0.0) + c
    if not out:
        out = {(0,) * f.m: 0.0}
    return MultiPoly(f.m, d, out)


def embed_univariate(T: MonomialPoly, m: int, var: int) -> MultiPoly:
    """Lift a univariate polynomial to m variables as T(x_var)."""
    if not 0 <= var < m:
        raise DimensionMismatch(f"variable index {var} out of range for m={m}")
    out = {}
    for k, a in enumerate(T.coeffs):
        j = [0] * m
        j[var] = k
        out[tuple(j)] = a
    return MultiPoly(m, T.degree, out)


@lru_cache(maxsize=256)
def multi_index_set(m: int, d: int) -> tuple:
    """All multi-indices j in N^m with ||j||_1 <= d, lexicographic order."""
    if m == 0:
        return ((),)
    out = []
    for e in range(d + 1):
        for rest in multi_index_set(m - 1, d - e):
            out.append((e,) + rest)
    return tuple(sorted(out))


# ---------------------------------------------------------------------------
# JSON schema: {"basis": ..., "m": int, "degree": int, "coeffs": [...]}


def poly_to_json(p) -> dict:
    if isinstance(p, MonomialPoly):
        return {"basis": "monomial", "m": 1, "degree": p.degree, "coeffs": list(p.coeffs)}
    if isinstance(p, BernsteinPoly):
        return {"basis": "bernstein", "m": 1, "degree": p.degree, "coeffs": list(p.coeffs)}
    if isinstance(p, ComplexPoly):
        return {"basis": "complex", "m": 1, "degree": p.degree,
                "coeffs": [[c.real, c.imag] for c in p.coeffs]}
    if isinstance(p, MultiPoly):
        return {"basis": "multi", "m": p.m, "degree": p.degree,
                "coeffs": {",".join(map(str, j)): a for j, a in sorted(p.coeffs.items())}}
    if isinstance(p, BernsteinMulti):
        return {"basis": "bernstein", "m": p.m, "degree": p.degree,
                "coeffs": {",".join(map(str, j)): a for j, a in sorted(p.coeffs.items())}}
    raise TypeError(f"not a polynomial: {type(p).__name__}")


def poly_from_json(obj: dict):
    basis = obj.get("basis")
    m = int(obj.get("m", 1))
    if basis == "monomial":
        return MonomialPoly(tuple(obj["coeffs"]))
    if basis == "complex":
        return ComplexPoly(tuple(complex(re, im) for re, im in obj["coeffs"]))
    if basis == "bernstein" and m == 1:
        return BernsteinPoly(tuple(obj["coeffs"]))
    if basis in ("multi", "bernstein"):
        coeffs = {tuple(int(s) for s in key.split(",")): float(a)
                  for key, a in obj["coeffs"].items()}
        cls = MultiPoly if basis == "multi" else BernsteinMulti
        return cls(m, int(obj["degree"]), coeffs)
    raise ValueError(f"unknown polynomial basis {basis!r}")

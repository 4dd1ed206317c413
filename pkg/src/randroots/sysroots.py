"""Real solutions of small multivariate systems and the signal functionals.

The bivariate solver is classical elimination: the Sylvester resultant in y is
expanded by evaluation–interpolation at Chebyshev nodes (no symbolic
determinants), its real roots are isolated by realroots, and each x-slice is
finished by companion roots plus 2-D Newton polishing.  m = 3 is supported
only for separable (per-coordinate) systems.

The functionals H, K, L of the smoothed-analysis hypotheses are numerical
sup/inf estimates over a radial-angular grid with local refinement — estimates
with a declared resolution, never certified bounds.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import chebyshev
from scipy.optimize import minimize

from .polyalg import (
    MonomialPoly,
    MultiPoly,
    embed_univariate,
    eval_multi,
    eval_multi_many,
    partial_derivative,
)
from .realroots import (PrecisionExhausted, Interval, count_roots_line,
                        isolate_roots)

log = logging.getLogger(__name__)

RESIDUAL_REL = 1e-9
DEDUP_RADIUS = 1e-7
MAX_SOLVE_DEGREE = 6


class DegenerateResultant(ArithmeticError):
    """Resultant numerically indistinguishable from zero."""


class NewtonDivergence(ArithmeticError):
    """A polish iteration left the basin; the candidate is dropped."""


class OddDegree(ValueError):
    pass


class NotFullySplit(ValueError):
    """The product-signal template does not have d distinct real roots."""


@dataclass(frozen=True, eq=False)
class PolySystem:
    m: int
    equations: tuple

    def __post_init__(self):
        eqs = tuple(self.equations)
        if not eqs:
            raise ValueError("empty system")
        for f in eqs:
            if f.m != self.m:
                raise ValueError("all equations must share the variable count")
        object.__setattr__(self, "equations", eqs)

    @property
    def degrees(self) -> tuple:
        return tuple(f.degree for f in self.equations)

    @property
    def bezout(self) -> int:
        out = 1
        for d in self.degrees:
            out *= d
        return out


@dataclass(frozen=True, eq=False)
class SolutionSet:
    points: tuple          # tuples in R^m
    residual_max: float
    bezout: int


@dataclass(frozen=True, eq=False)
class SignalFunctionals:
    H: tuple               # per equation
    K: tuple
    L_at: Callable         # L_at(i, r) -> float
    A_m: float
    B_m: float
    grid_points: int


# ---------------------------------------------------------------------------
# signals


def signal_sphere(d: int, r: float, m: int) -> MultiPoly:
    """(x_1^2 + ... + x_m^2)^(d/2) - r^d, expanded dense."""
    if d % 2 != 0 or d < 2:
        raise OddDegree(f"sphere signal needs a positive even degree, got {d}")
    if r <= 0:
        raise ValueError("r must be positive")
    h = d // 2
    out: dict = {}

    # multinomial expansion of (sum x_i^2)^h
    def gen(prefix, left):
        if len(prefix) == m - 1:
            yield prefix + [left]
            return
        for k in range(left + 1):
            yield from gen(prefix + [k], left - k)
    for idx in gen([], h):
        c = math.factorial(h)
        for e in idx:
            c //= math.factorial(e)
        key = tuple(2 * e for e in idx)
        out[key] = float(c)
    zero = (0,) * m
    out[zero] = out.get(zero, 0.0) - float(r) ** d
    return MultiPoly(m, d, out)


def signal_product(T: MonomialPoly, m: int) -> PolySystem:
    """P_i(x) = T(x_i); requires T to have deg(T) distinct real roots."""
    d = T.degree
    if count_roots_line(T).count != d:
        raise NotFullySplit(f"template must have {d} distinct real roots")
    return PolySystem(m, tuple(embed_univariate(T, m, v) for v in range(m)))


# ---------------------------------------------------------------------------
# bivariate elimination


def _y_coeffs_at(f: MultiPoly, x: np.ndarray, dy: int) -> np.ndarray:
    """Coefficients in y of f(x_t, y) for every node x_t: shape (len(x), dy+1)."""
    out = np.zeros((x.size, dy + 1))
    pows = {0: np.ones_like(x)}
    for e in range(1, f.degree + 1):
        pows[e] = pows[e - 1] * x
    for (jx, jy), a in f.coeffs.items():
        if a != 0.0:
            out[:, jy] += a * pows[jx]
    return out


def _actual_y_degree(f: MultiPoly) -> int:
    dy = 0
    for (jx, jy), a in f.coeffs.items():
        if a != 0.0 and jy > dy:
            dy = jy
    return dy


def _sylvester_dets(c1: np.ndarray, c2: np.ndarray, d1: int, d2: int):
    """Determinant and Hadamard scale of the Sylvester matrix per node."""
    nodes = c1.shape[0]
    size = d1 + d2
    dets = np.empty(nodes)
    scales = np.empty(nodes)
    M = np.zeros((size, size))
    for t in range(nodes):
        M[:] = 0.0
        for r in range(d2):          # rows of f1 coefficients (descending in y)
            M[r, r:r + d1 + 1] = c1[t, ::-1]
        for r in range(d1):
            M[d2 + r, r:r + d2 + 1] = c2[t, ::-1]
        dets[t] = np.linalg.det(M)
        rn = np.linalg.norm(M, axis=1)
        scales[t] = float(np.prod(np.where(rn > 0, rn, 1.0)))
    return dets, scales


def _resultant_x(sys: PolySystem):
    """Univariate resultant in x (y eliminated), via Chebyshev interpolation."""
    f1, f2 = sys.equations
    d1, d2 = sys.degrees
    dy1, dy2 = _actual_y_degree(f1), _actual_y_degree(f2)
    if dy1 == 0 and dy2 == 0:
        raise DegenerateResultant("neither equation involves y")
    if dy1 == 0 or dy2 == 0:
        # one equation is y-free: its own x-roots are the candidates
        g = f1 if dy1 == 0 else f2
        coeffs = np.zeros(g.degree + 1)
        for (jx, jy), a in g.coeffs.items():
            coeffs[jx] += a
        return MonomialPoly(tuple(coeffs)), None
    nodes = 2 * d1 * d2 + 1
    k = np.arange(nodes)
    x = np.cos(np.pi * (2 * k + 1) / (2 * nodes))  # Chebyshev points of [-1, 1]
    # scale nodes outward for conditioning; the fitted polynomial is exact, so
    # roots beyond the window are still recovered
    span = 8.0
    xs = span * x
    c1 = _y_coeffs_at(f1, xs, dy1)
    c2 = _y_coeffs_at(f2, xs, dy2)
    dets, scales = _sylvester_dets(c1, c2, dy1, dy2)
    rel = np.abs(dets) / np.where(scales > 0, scales, 1.0)
    if float(np.max(rel)) < 1e-12:
        raise DegenerateResultant(
            f"resultant / Hadamard scale <= {float(np.max(rel)):.2e} at all nodes")
    deg = min(dy1 * d2 + dy2 * d1, d1 * d2, nodes - 1)
    cfit = chebyshev.chebfit(x, dets, deg)
    mono = chebyshev.cheb2poly(cfit)
    # undo the node scaling: R(x) sampled at span*x means coefficients shrink
    mono = mono / span ** np.arange(mono.size)
    top = float(np.max(np.abs(mono)))
    keep = mono.size
    while keep > 1 and abs(mono[keep - 1]) <= 1e-10 * top:
        keep -= 1
    return MonomialPoly(tuple(mono[:keep])), (f1, f2)


def _newton_polish(eqs, jac, x0, y0, tol_abs):
    p = np.array([x0, y0])
    for _ in range(60):
        F = np.array([eval_multi(eqs[0], p), eval_multi(eqs[1], p)])
        if np.max(np.abs(F)) <= tol_abs:
            return p
        J = np.array([[eval_multi(jac[i][v], p) for v in range(2)]
                      for i in range(2)])
        try:
            step = np.linalg.solve(J, F)
        except np.linalg.LinAlgError as e:
            raise NewtonDivergence(f"singular Jacobian at {p}") from e
        if not np.all(np.isfinite(step)) or np.linalg.norm(step) > 1e8:
            raise NewtonDivergence(f"step blew up at {p}")
        p = p - step
        if not np.all(np.isfinite(p)):
            raise NewtonDivergence("iterate left the finite plane")
    F = np.array([eval_multi(eqs[0], p), eval_multi(eqs[1], p)])
    if np.max(np.abs(F)) <= tol_abs:
        return p
    raise NewtonDivergence(f"residual {np.max(np.abs(F)):.3e} after 60 steps")


def solve_bivariate(sys: PolySystem) -> SolutionSet:
    """All real solutions of an m=2 system with degrees <= 6."""
    if sys.m != 2 or len(sys.equations) != 2:
        raise ValueError("solve_bivariate needs exactly two equations in two variables")
    d1, d2 = sys.degrees
    if max(d1, d2) > MAX_SOLVE_DEGREE:
        raise ValueError(f"degrees {sys.degrees} exceed the solver cap {MAX_SOLVE_DEGREE}")
    f1, f2 = sys.equations
    coeff_scale = max(max(abs(a) for a in f1.coeffs.values()),
                      max(abs(a) for a in f2.coeffs.values()))
    tol_abs = RESIDUAL_REL * (1.0 + coeff_scale)
    R, _ = _resultant_x(sys)
    if all(c == 0.0 for c in R.coeffs):
        raise DegenerateResultant("interpolated resultant is identically zero")
    if R.degree == 0:
        return SolutionSet((), 0.0, sys.bezout)
    try:
        xs = [0.5 * (iv.lo + iv.hi) for iv in isolate_roots(R)]
    except PrecisionExhausted:
        # resultants with (near-)multiple roots defeat certified isolation;
        # companion candidates are fine because Newton polish plus the final
        # residual gate validate every candidate anyway
        rr = np.roots(np.asarray(R.coeffs[::-1]))
        xs = sorted({float(r.real) for r in rr
                     if abs(r.imag) <= 1e-6 * (1.0 + abs(r.real))})
    jac = [[partial_derivative(f, v) for v in range(2)] for f in (f1, f2)]
    dy1, dy2 = _actual_y_degree(f1), _actual_y_degree(f2)
    cands = []
    for x0 in xs:
        # back-substitute into the better-conditioned y-slice
        best = None
        for f, dy in ((f1, dy1), (f2, dy2)):
            if dy == 0:
                continue
            cy = np.zeros(dy + 1)
            for (jx, jy), a in f.coeffs.items():
                if a != 0.0:
                    cy[jy] += a * x0 ** jx
            lead = abs(cy[dy])
            if best is None or lead > best[0]:
                best = (lead, cy)
        if best is None or best[0] == 0.0:
            continue
        roots = np.roots(best[1][::-1])
        for yr in roots[np.abs(roots.imag) < 1e-6 * (1.0 + np.abs(roots.real))].real:
            cands.append((x0, float(yr)))
    pts = []
    for x0, y0 in cands:
        try:
            p = _newton_polish((f1, f2), jac, x0, y0, tol_abs)
        except NewtonDivergence as e:
            log.debug("dropped candidate (%g, %g): %s", x0, y0, e)
            continue
        pts.append(p)
    # dedupe
    uniq = []
    for p in sorted(pts, key=lambda q: (q[0], q[1])):
        if all(np.hypot(p[0] - q[0], p[1] - q[1]) > DEDUP_RADIUS for q in uniq):
            uniq.append(p)
    if len(uniq) > sys.bezout:
        log.debug("solution count %d exceeded Bezout %d; keeping best residuals",
                  len(uniq), sys.bezout)
        uniq.sort(key=lambda p: max(abs(eval_multi(f1, p)), abs(eval_multi(f2, p))))
        uniq = uniq[:sys.bezout]
        uniq.sort(key=lambda q: (q[0], q[1]))
    res = 0.0
    for p in uniq:
        res = max(res, abs(eval_multi(f1, p)), abs(eval_multi(f2, p)))
    return SolutionSet(tuple((float(p[0]), float(p[1])) for p in uniq),
                       float(res), sys.bezout)


def _separable_vars(sys: PolySystem) -> Optional[list]:
    """Per-equation single variable if the system is coordinate-separable."""
    vars_used = []
    for f in sys.equations:
        used = set()
        for j, a in f.coeffs.items():
            if a != 0.0:
                used.update(v for v, e in enumerate(j) if e > 0)
        if len(used) != 1:
            return None
        vars_used.append(used.pop())
    if sorted(vars_used) != list(range(sys.m)):
        return None
    return vars_used


def _as_univariate(f: MultiPoly, var: int) -> MonomialPoly:
    coeffs = [0.0] * (f.degree + 1)
    for j, a in f.coeffs.items():
        coeffs[j[var]] += a
    return MonomialPoly(tuple(coeffs))


def count_real_solutions(sys: PolySystem, region=None) -> int:
    """Number of real solutions, optionally restricted to a box.

    region: None (full space) or a sequence of (lo, hi) pairs, one per variable.
    Coordinate-separable systems (any m) are counted per coordinate; general
    systems are solved for m = 2 only.
    """
    sep = _separable_vars(sys)
    if sep is not None:
        total = 1
        for f, v in zip(sys.equations, sep):
            uni = _as_univariate(f, v)
            if region is None:
                total *= count_roots_line(uni).count
            else:
                lo, hi = region[v]
                from .realroots import count_roots_interval
                total *= count_roots_interval(uni, Interval(lo, hi)).count
        return total
    if sys.m == 1:
        uni = _as_univariate(sys.equations[0], 0)
        if region is None:
            return count_roots_line(uni).count
        lo, hi = region[0]
        from .realroots import count_roots_interval
        return count_roots_interval(uni, Interval(lo, hi)).count
    if sys.m != 2:
        raise ValueError("general solving is implemented for m = 2 only")
    sol = solve_bivariate(sys)
    if region is None:
        return len(sol.points)
    return sum(1 for p in sol.points
               if all(lo <= c <= hi for c, (lo, hi) in zip(p, region)))


# ---------------------------------------------------------------------------
# H / K / L functionals


def _grid(m: int, r_min: float = 1e-6, r_max: float = 1e3,
          n_total: int = 12000) -> np.ndarray:
    """Radial-angular grid, radii log-spaced, >= n_total points."""
    if m == 1:
        r = np.geomspace(r_min, r_max, n_total // 2)
        return np.concatenate([-r[::-1], [0.0], r])[:, None]
    if m == 2:
        nr = int(math.sqrt(n_total / 2.0)) + 1
        na = 2 * nr
        r = np.concatenate([[0.0], np.geomspace(r_min, r_max, nr)])
        a = np.linspace(0.0, 2.0 * np.pi, na, endpoint=False)
        R, A = np.meshgrid(r, a)
        return np.column_stack([(R * np.cos(A)).ravel(), (R * np.sin(A)).ravel()])
    if m == 3:
        nd = 128
        nr = max(2, n_total // nd)
        i = np.arange(nd)
        ga = math.pi * (3.0 - math.sqrt(5.0))
        zc = 1.0 - 2.0 * (i + 0.5) / nd        # Fibonacci sphere directions
        rho = np.sqrt(1.0 - zc * zc)
        dirs = np.column_stack([rho * np.cos(ga * i), rho * np.sin(ga * i), zc])
        r = np.concatenate([[0.0], np.geomspace(r_min, r_max, nr)])
        return (r[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
    raise ValueError("functionals support m <= 3")


def _normalized_field(P: MultiPoly, d: int, X: np.ndarray):
    """value and gradient of P/(1+||x||^2)^(d/2) at rows of X."""
    n2 = np.sum(X * X, axis=1)
    w = (1.0 + n2) ** (d / 2.0)
    pv = eval_multi_many(P, X)
    grads = np.column_stack([eval_multi_many(partial_derivative(P, v), X)
                             for v in range(P.m)])
    # grad(P/w) = (grad P - d P x/(1+||x||^2)) / w
    g = (grads - (d * pv / (1.0 + n2))[:, None] * X) / w[:, None]
    return pv / w, g


def _refine_sup(obj, x0: np.ndarray) -> float:
    res = minimize(lambda x: -obj(x), x0, method="Nelder-Mead",
                   options={"maxiter": 200, "xatol": 1e-10, "fatol": 1e-12})
    return max(float(-res.fun), float(obj(x0)))


def _shell_points(m: int, r: float, n: int = 512) -> list:
    if m == 1:
        return [np.array([[r]]), np.array([[-r]])]
    if m == 2:
        a = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        return [r * np.column_stack([np.cos(a), np.sin(a)])]
    i = np.arange(n)
    ga = math.pi * (3.0 - math.sqrt(5.0))
    zc = 1.0 - 2.0 * (i + 0.5) / n
    rho = np.sqrt(1.0 - zc * zc)
    return [r * np.column_stack([rho * np.cos(ga * i), rho * np.sin(ga * i), zc])]


def functionals(P: MultiPoly, d: int, n_points: int = 12000):
    """(H, K, L) estimates for one signal equation.

    H = sup (1+||x||) ||grad(P/(1+||x||^2)^(d/2))||
    K = sup (1+||x||^2) |radial derivative of the same field|
    L(r) = inf over ||x|| >= r of P^2/(1+||x||^2)^d
    """
    m = P.m
    X = _grid(m, n_total=n_points)
    norms = np.linalg.norm(X, axis=1)
    pv, g = _normalized_field(P, d, X)
    gn = np.linalg.norm(g, axis=1)
    h_vals = (1.0 + norms) * gn
    nz = norms > 0
    radial = np.zeros(len(X))
    radial[nz] = np.abs(np.sum(g[nz] * X[nz], axis=1) / norms[nz])
    k_vals = (1.0 + norms ** 2) * radial

    def h_obj(x):
        xx = np.atleast_2d(x)
        _, gg = _normalized_field(P, d, xx)
        return float((1.0 + np.linalg.norm(x)) * np.linalg.norm(gg[0]))

    def k_obj(x):
        nx = np.linalg.norm(x)
        if nx == 0:
            return 0.0
        xx = np.atleast_2d(x)
        _, gg = _normalized_field(P, d, xx)
        return float((1.0 + nx * nx) * abs(np.dot(gg[0], x) / nx))

    H = _refine_sup(h_obj, X[int(np.argmax(h_vals))])
    K = _refine_sup(k_obj, X[int(np.argmax(k_vals))])

    l_base = pv * pv  # already normalized: P^2/(1+||x||^2)^d

    def L(r: float) -> float:
        mask = norms >= r
        if not np.any(mask):
            return float("inf")
        i = int(np.argmin(np.where(mask, l_base, np.inf)))

        def obj(x):
            nx = np.linalg.norm(x)
            if nx < r:
                return math.inf
            vv, _ = _normalized_field(P, d, np.atleast_2d(x))
            return float(vv[0] * vv[0])

        res = minimize(obj, X[i], method="Nelder-Mead",
                       options={"maxiter": 200, "xatol": 1e-10, "fatol": 1e-14})
        best = min(float(l_base[i]), float(res.fun))
        # the infimum often sits exactly on the shell ||x|| = r
        for S in _shell_points(m, r):
            vv, _ = _normalized_field(P, d, S)
            best = min(best, float(np.min(vv * vv)))
        return best

    return H, K, L


def compute_functionals(signals: Sequence, degrees: Sequence,
                        n_points: int = 12000) -> SignalFunctionals:
    """Full per-equation H/K/L record with the decay aggregates A_m, B_m."""
    m = len(signals)
    if m == 0 or len(degrees) != m:
        raise ValueError("need one degree per signal equation")
    Hs, Ks, Ls = [], [], []
    for P, d in zip(signals, degrees):
        H, K, L = functionals(P, int(d), n_points=n_points)
        Hs.append(H)
        Ks.append(K)
        Ls.append(L)
    A_m = sum(h * h / (i + 1) for i, h in enumerate(Hs)) / m
    B_m = sum(k * k / (i + 1) for i, k in enumerate(Ks)) / m
    return SignalFunctionals(tuple(Hs), tuple(Ks),
                             lambda i, r: Ls[i](r), A_m, B_m, n_points)


def hypothesis_check(signals: Sequence, degrees: Sequence, r0: float,
                     ell: float):
    """(A_m, B_m, verdict): decay aggregates plus the lower-bound check.

    A_m = (1/m) sum_i H(P_i)^2/i, B_m likewise with K; the verdict is
    min_i L(P_i, r) >= ell at every probe radius r in {r0, 2 r0, 10 r0}.
    """
    sf = compute_functionals(signals, degrees)
    m = len(signals)
    verdict = all(min(sf.L_at(i, r) for i in range(m)) >= ell
                  for r in (r0, 2.0 * r0, 10.0 * r0))
    return sf.A_m, sf.B_m, verdict

"""Complex roots, the stereographic lift to S^2, and the logarithmic energy.

The root finder is Aberth–Ehrlich simultaneous iteration: O(N^2) per sweep,
no linear algebra dependency, comfortably reaches N = 200.  Companion-matrix
eigenvalues stay available as a cross-check oracle for small N.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .polyalg import ComplexPoly

MAX_SWEEPS = 500
RESIDUAL_REL = 4e-14  # per-coefficient backward-error budget (a few hundred ulp)
COINCIDENT_TOL = 1e-14


class DegreeDrop(ArithmeticError):
    """Leading coefficient numerically vanishes; the degree is not trustworthy."""


class NonConvergence(ArithmeticError):
    """Aberth iteration failed the residual target within the sweep cap."""


class CoincidentPoints(ArithmeticError):
    """Two configuration points closer than the coincidence tolerance."""


@dataclass(frozen=True, eq=False)
class Configuration:
    """N points on the unit sphere, rows of an (N, 3) array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 2:
            raise ValueError(f"expected (N>=2, 3) points array, got {pts.shape}")
        norms = np.linalg.norm(pts, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            raise ValueError("configuration points must lie on the unit sphere")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]


# ---------------------------------------------------------------------------
# root finding


def _horner_pair(a: np.ndarray, ad: np.ndarray, z: np.ndarray):
    """p(z) and p'(z) for all z at once (a ascending, ad its derivative)."""
    pv = np.zeros_like(z)
    for c in a[::-1]:
        pv = pv * z + c
    dv = np.zeros_like(z)
    for c in ad[::-1]:
        dv = dv * z + c
    return pv, dv


def _initial_points(a: np.ndarray) -> np.ndarray:
    """Deterministic starting points on annuli matched to the coefficients.

    Radii come from the upper convex hull of (k, log|a_k|): the hull edge
    joining exponents k1 < k2 contributes k2 - k1 starting points of modulus
    (|a_k1|/|a_k2|)^(1/(k2-k1)), an a-priori estimate for that block of root
    moduli.  A single enclosing circle stalls when the moduli span orders of
    magnitude (large spherical-variance draws, dominant middle coefficients);
    annulus seeding keeps every block of roots reachable in few sweeps.
    """
    N = len(a) - 1
    mags = np.abs(a)
    logs = np.where(mags > 0.0, np.log(np.where(mags > 0.0, mags, 1.0)), -np.inf)
    hull: list[int] = []
    for k in range(N + 1):
        if logs[k] == -np.inf:
            continue
        while len(hull) >= 2:
            k1, k2 = hull[-2], hull[-1]
            # keep k2 only while it lies strictly above the chord k1 -> k
            if (logs[k2] - logs[k1]) * (k - k1) <= (logs[k] - logs[k1]) * (k2 - k1):
                hull.pop()
            else:
                break
        hull.append(k)
    blocks: list[tuple[int, float]] = []
    if hull[0] > 0:  # exact roots at the origin: seed just inside everything
        blocks.append((hull[0], 1e-12))
    for k1, k2 in zip(hull[:-1], hull[1:]):
        blocks.append((k2 - k1, float((mags[k1] / mags[k2]) ** (1.0 / (k2 - k1)))))
    z = np.empty(N, dtype=complex)
    pos = 0
    for b, (n, radius) in enumerate(blocks):
        j = np.arange(n)
        # irrational offsets break conjugate symmetry and inter-annulus locking
        angles = 2.0 * np.pi * (j + 0.35999 + 0.618033988749895 * b) / n
        radii = radius * (1.0 + 1e-3 * ((j * 0.618033988749895) % 1.0 - 0.5))
        z[pos:pos + n] = radii * np.exp(1j * angles)
        pos += n
    return z


def _residual_pass(a: np.ndarray, aabs: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Backward-error certificate |p(z)| <= tol * sum_k |a_k||z|^k, per point.

    A point passing this test is an exact root of a polynomial whose
    coefficients are each relatively perturbed by at most tol, the strongest
    certificate floating-point evaluation can support.  Points beyond the
    unit circle are tested through the reversed polynomial at 1/z, which
    leaves the ratio unchanged and never overflows.
    """
    r = np.abs(z)
    outer = r > 1.0
    safe = np.where(r == 0.0, 1.0, z)
    zz = np.where(outer, 1.0 / safe, z)
    rr = np.abs(zz)
    pv = np.zeros_like(z)
    qv = np.zeros_like(z)
    mp = np.zeros_like(r)
    mq = np.zeros_like(r)
    for c, cc, ca, cca in zip(a[::-1], a, aabs[::-1], aabs):
        pv = pv * zz + c  # p at zz (inner points)
        qv = qv * zz + cc  # reversed polynomial at zz = 1/z (outer points)
        mp = mp * rr + ca
        mq = mq * rr + cca
    num = np.where(outer, np.abs(qv), np.abs(pv))
    den = np.where(outer, mq, mp)
    tol = RESIDUAL_REL * len(a)
    return num <= tol * den


def roots_complex(p: ComplexPoly, max_sweeps: int = MAX_SWEEPS) -> np.ndarray:
    """All N roots (with multiplicity) by Aberth–Ehrlich iteration.

    Every returned point satisfies the relative backward-error certificate of
    _residual_pass; converged points are frozen while the rest keep moving.
    """
    a = np.asarray(p.coeffs, dtype=complex)
    N = len(a) - 1
    amax = float(np.max(np.abs(a)))
    if amax == 0.0:
        raise DegreeDrop("zero polynomial")
    if abs(a[-1]) <= 1e-12 * amax:
        raise DegreeDrop(
            f"|a_N| = {abs(a[-1]):.3e} <= 1e-12 * max|a_k| = {1e-12 * amax:.3e}")
    if N == 0:
        return np.empty(0, dtype=complex)
    aabs = np.abs(a)
    ad = a[1:] * np.arange(1, N + 1)
    z = _initial_points(a)
    for _ in range(max_sweeps):
        ok = _residual_pass(a, aabs, z)
        if np.all(ok):
            return z
        pv, dv = _horner_pair(a, ad, z)
        tiny = dv == 0
        if np.any(tiny):
            dv = np.where(tiny, 1e-300, dv)
        w = pv / dv
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        near = np.abs(diff) < 1e-300
        if np.any(near):
            diff = np.where(near, 1e-300, diff)
        S = np.sum(1.0 / diff, axis=1) - 1.0  # subtract the diagonal 1/1 terms
        denom = 1.0 - w * S
        denom = np.where(np.abs(denom) < 1e-300, 1e-300, denom)
        step = w / denom
        step = np.where(np.isfinite(step), step, 0.0)
        z = np.where(ok, z, z - step)
    if np.all(_residual_pass(a, aabs, z)):
        return z
    raise NonConvergence(f"residual target missed after {max_sweeps} sweeps")


def roots_companion(p: ComplexPoly) -> np.ndarray:
    """Eigenvalue oracle (numpy companion matrix); cross-check for small N."""
    a = np.asarray(p.coeffs, dtype=complex)
    return np.roots(a[::-1])


# ---------------------------------------------------------------------------
# lift and energy


def lift(z: complex) -> np.ndarray:
    """Stereographic lift X = (2 Re z, 2 Im z, 1-|z|^2)/(1+|z|^2); unit norm."""
    z = complex(z)
    if abs(z) <= 1.0:
        s = 1.0 + z.real * z.real + z.imag * z.imag
        return np.array([2.0 * z.real / s, 2.0 * z.imag / s,
                         (2.0 - s) / s])
    w = 1.0 / z  # same point computed from the other chart; no overflow
    s = 1.0 + w.real * w.real + w.imag * w.imag
    return np.array([2.0 * w.real / s, -2.0 * w.imag / s, (s - 2.0) / s])


def lift_many(zs: np.ndarray) -> np.ndarray:
    zs = np.asarray(zs, dtype=complex)
    out = np.empty((zs.size, 3))
    small = np.abs(zs) <= 1.0
    zin = zs[small]
    s = 1.0 + zin.real ** 2 + zin.imag ** 2
    out[small, 0] = 2.0 * zin.real / s
    out[small, 1] = 2.0 * zin.imag / s
    out[small, 2] = (2.0 - s) / s
    w = 1.0 / zs[~small]
    s = 1.0 + w.real ** 2 + w.imag ** 2
    out[~small, 0] = 2.0 * w.real / s
    out[~small, 1] = -2.0 * w.imag / s
    out[~small, 2] = (s - 2.0) / s
    return out


def log_energy(c: Configuration) -> float:
    """V = -sum_(i<j) ln ||x_i - x_j||, compensated summation in pdist order."""
    d = pdist(c.points)
    if np.any(d < COINCIDENT_TOL):
        raise CoincidentPoints(f"minimum pairwise distance {d.min():.3e}")
    return -math.fsum(np.log(d))


def log_energy_or_inf(c: Configuration):
    """(V, coincident_flag): +inf instead of raising, for samplers/line searches."""
    d = pdist(c.points)
    if np.any(d < COINCIDENT_TOL):
        return math.inf, True
    return -math.fsum(np.log(d)), False


def polynomial_to_config(p: ComplexPoly) -> Configuration:
    """Lift every root of p, in solver output order."""
    return Configuration(lift_many(roots_complex(p)))


# ---------------------------------------------------------------------------
# CSV export


def config_to_csv(c: Configuration) -> str:
    lines = ["x,y,z"]
    for x, y, z in c.points:
        lines.append(f"{x:.17g},{y:.17g},{z:.17g}")
    return "\n".join(lines) + "\n"


def config_from_csv(text: str) -> Configuration:
    rows = [ln for ln in text.strip().splitlines() if ln and not ln.startswith("x,")]
    pts = np.array([[float(v) for v in ln.split(",")] for ln in rows])
    return Configuration(pts)

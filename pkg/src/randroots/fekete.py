"""Closed-form energy expectations, the C_N parametrization, and a projected
gradient minimizer for empirical Fekete baselines on S^2.

The two expectation laws:

    e_uniform(N) = -((N^2 - N)/4) ln(4/e)          (iid uniform points)
    e_kostlan(N) = e_uniform(N) - (N ln N)/4        (lifted Kostlan roots)

and the parametrization V = -(N^2/4) ln(4/e) - (N ln N)/4 + C*N, whose C
isolates the O(N) term of an energy value.  The true minimal V_N is unknown;
every gap here is measured against a caller-supplied reference.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .complexsphere import (
    CoincidentPoints,
    Configuration,
    log_energy,
    log_energy_or_inf,
)
from .ensembles import SeedStream

LN_4_OVER_E = math.log(4.0) - 1.0
KOSTLAN_MEAN_C = LN_4_OVER_E / 4.0  # C-value of the Kostlan expectation itself


@dataclass(frozen=True)
class EnergyLaw:
    N: int
    e_uniform: float
    e_kostlan: float


@dataclass(frozen=True, eq=False)
class FeketeEstimate:
    config: Configuration
    V: float
    C_N: float
    restarts: int
    converged: bool


def expected_energy_uniform(N: int) -> float:
    if N < 2:
        raise ValueError("need N >= 2")
    return -((N * N - N) / 4.0) * LN_4_OVER_E


def expected_energy_kostlan(N: int) -> float:
    if N < 2:
        raise ValueError("need N >= 2")
    return expected_energy_uniform(N) - N * math.log(N) / 4.0


def energy_law(N: int) -> EnergyLaw:
    return EnergyLaw(N, expected_energy_uniform(N), expected_energy_kostlan(N))


def cn_from_v(N: int, V: float) -> float:
    if N < 2:
        raise ValueError("need N >= 2")
    return (V + (N * N / 4.0) * LN_4_OVER_E + N * math.log(N) / 4.0) / N


def vn_from_cn(N: int, C: float) -> float:
    if N < 2:
        raise ValueError("need N >= 2")
    return -(N * N / 4.0) * LN_4_OVER_E - N * math.log(N) / 4.0 + C * N


def sample_uniform_sphere(N: int, rng: SeedStream) -> Configuration:
    """N iid uniform points: normalized triples of standard normals."""
    if N < 1:
        raise ValueError("need N >= 1")
    g = rng.normals(3 * N).reshape(N, 3)
    norms = np.linalg.norm(g, axis=1)
    while np.any(norms < 1e-12):  # probability-zero guard
        bad = norms < 1e-12
        g[bad] = rng.normals(3 * int(bad.sum())).reshape(-1, 3)
        norms = np.linalg.norm(g, axis=1)
    return Configuration(g / norms[:, None])


def energy_gradient(points: np.ndarray) -> np.ndarray:
    """grad_i V = -sum_(j != i) (x_i - x_j)/||x_i - x_j||^2, compensated per row."""
    n = points.shape[0]
    diff = points[:, None, :] - points[None, :, :]
    d2 = np.sum(diff * diff, axis=2)
    np.fill_diagonal(d2, 1.0)
    w = -1.0 / d2
    np.fill_diagonal(w, 0.0)
    terms = w[:, :, None] * diff
    out = np.empty((n, 3))
    for i in range(n):  # fixed-order compensated accumulation
        for c in range(3):
            out[i, c] = math.fsum(terms[i, :, c])
    return out


def _tangential(points: np.ndarray, g: np.ndarray) -> np.ndarray:
    radial = np.sum(points * g, axis=1, keepdims=True)
    return g - radial * points


def minimize_energy(c0: Configuration, max_iters: int = 5000,
                    tol: float = 1e-9) -> FeketeEstimate:
    """Projected gradient descent with Armijo backtracking; monotone in V.

    Stops when the tangential gradient sup-norm falls below tol (converged)
    or on max_iters / a stalled line search (not converged).  The returned V
    never exceeds V(c0).
    """
    x = c0.points.copy()
    n = x.shape[0]
    V = log_energy(Configuration(x))
    eta = 0.5 / n
    converged = False
    try:
        for _ in range(max_iters):
            g = energy_gradient(x)
            gt = _tangential(x, g)
            gnorm = float(np.max(np.linalg.norm(gt, axis=1)))
            if gnorm < tol:
                converged = True
                break
            g2 = float(np.sum(gt * gt))
            eta = min(eta * 1.3, 10.0 / n)
            accepted = False
            for _ in range(60):
                trial = x - eta * gt
                trial /= np.maximum(np.linalg.norm(trial, axis=1), 1e-300)[:, None]
                Vt, bad = log_energy_or_inf(Configuration(trial))
                if not bad and Vt <= V - 1e-4 * eta * g2:
                    x, V = trial, Vt
                    accepted = True
                    break
                eta *= 0.5
            if not accepted:
                break
    except CoincidentPoints:
        pass  # abort with best-so-far
    cfg = Configuration(x)
    return FeketeEstimate(cfg, V, cn_from_v(n, V), 1, converged)


def smale7_gap(c: Configuration, vn_reference: float) -> float:
    """(V(c) - reference)/ln N; the reference is the caller's best minimizer
    value, never a claimed true optimum."""
    N = c.n
    return (log_energy(c) - vn_reference) / math.log(N)


def fekete_to_json(est: FeketeEstimate, points_csv: str | None = None) -> dict:
    return {
        "N": est.config.n,
        "V": est.V,
        "C_N": est.C_N,
        "restarts": est.restarts,
        "converged": est.converged,
        "points_csv": points_csv,
    }

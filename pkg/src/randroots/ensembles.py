"""Seeded samplers for the Gaussian coefficient ensembles.

Every sampler is a pure function of (parameters, SeedStream).  A SeedStream is
a counter-based generator keyed by (master_seed, stream_index): distinct
indices give independent streams, so parallel trials stay reproducible no
matter how work is scheduled.  Normals come from the polar (Marsaglia) method
on top of the uniform stream.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .polyalg import (
    BernsteinMulti,
    BernsteinPoly,
    ComplexPoly,
    MonomialPoly,
    MultiPoly,
    embed_univariate,
    multi_index_set,
    poly_from_json,
    poly_to_json,
)

KINDS = ("Kac", "ShubSmale", "BernsteinGauss", "KostlanComplex", "Perturbed")


class DegreeMismatch(ValueError):
    """Perturbation noise degree is below the signal degree."""


@dataclass
class SeedStream:
    """Counter-based random stream; (master_seed, stream_index) fully determine
    every draw.  Successive calls consume the stream sequentially."""

    master_seed: int
    stream_index: int
    _gen: Optional[np.random.Generator] = field(default=None, repr=False, compare=False)

    def _generator(self) -> np.random.Generator:
        if self._gen is None:
            # Philox key = (master_seed, stream_index): cheap independent streams
            bits = np.random.Philox(key=np.array(
                [self.master_seed % (1 << 64), self.stream_index % (1 << 64)],
                dtype=np.uint64))
            self._gen = np.random.Generator(bits)
        return self._gen

    def uniforms(self, n: int) -> np.ndarray:
        return self._generator().random(n)

    def normals(self, n: int) -> np.ndarray:
        """Standard normals via the vectorized polar method (pairs, rejection)."""
        gen = self._generator()
        chunks = []
        have = 0
        while have < n:
            # ~78.5% acceptance; the batch size formula depends only on the
            # deficit, so a fixed call sequence is bitwise reproducible.
            k = max(128, (n - have) * 3 // 4 + 16)
            u = gen.random((2, k))
            v1 = 2.0 * u[0] - 1.0
            v2 = 2.0 * u[1] - 1.0
            s = v1 * v1 + v2 * v2
            ok = (s > 0.0) & (s < 1.0)
            s, v1, v2 = s[ok], v1[ok], v2[ok]
            f = np.sqrt(-2.0 * np.log(s) / s)
            pair = np.empty(2 * s.size)
            pair[0::2] = v1 * f
            pair[1::2] = v2 * f
            chunks.append(pair)
            have += pair.size
        return np.concatenate(chunks)[:n]


@dataclass(frozen=True)
class EnsembleSpec:
    """Which coefficient law to draw from.

    sigma and signal are only meaningful for kind="Perturbed"; signal is the
    deterministic system P being perturbed.
    """

    kind: str
    m: int
    degrees: tuple
    sigma: Optional[float] = None
    signal: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        if any(d < 1 for d in self.degrees):
            raise ValueError("degrees must all be >= 1")
        if (self.kind == "Perturbed") != (self.sigma is not None):
            raise ValueError("sigma must be present exactly when kind is Perturbed")
        if self.sigma is not None and self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.signal is not None:
            object.__setattr__(self, "signal", tuple(self.signal))


# ---------------------------------------------------------------------------
# variance factors (log-space so d = 1000 survives)


def shub_smale_sd(d: int, indices) -> np.ndarray:
    """sqrt of Var a_j = d!/(j_1!...j_m!(d-||j||)!) for each multi-index j."""
    lg = math.lgamma
    out = np.empty(len(indices))
    base = lg(d + 1)
    for t, j in enumerate(indices):
        s = base - lg(d - sum(j) + 1)
        for e in j:
            s -= lg(e + 1)
        out[t] = math.exp(0.5 * s)
    return out


def binomial_sd(N: int) -> np.ndarray:
    """sqrt(C(N,k)) for k = 0..N, via lgamma."""
    lg = math.lgamma
    k = np.arange(N + 1)
    logc = lg(N + 1) - np.array([lg(v + 1) + lg(N - v + 1) for v in k])
    return np.exp(0.5 * logc)


# ---------------------------------------------------------------------------
# samplers


def sample_kac(d: int, rng: SeedStream) -> MonomialPoly:
    """d+1 iid N(0,1) monomial coefficients."""
    if d < 1:
        raise ValueError("degree must be >= 1")
    return MonomialPoly(tuple(rng.normals(d + 1)))


def sample_shub_smale(degrees: Sequence, m: int, rng: SeedStream):
    """System of m centered Gaussians with the multinomial variance law."""
    out = []
    for d in degrees:
        idx = multi_index_set(m, int(d))
        z = rng.normals(len(idx)) * shub_smale_sd(int(d), idx)
        out.append(MultiPoly(m, int(d), dict(zip(idx, z))))
    return out


def sample_bernstein(degrees: Sequence, m: int, rng: SeedStream):
    """System of centered Gaussians in the (simplex) Bernstein basis.

    Coefficient variances are 1/C(d,j) against the C(d,j)-weighted basis
    functions, i.e. standard Gaussians against sqrt(C(d,j))-weighted ones.
    This is the normalization with square-root-Bezout mean counts: the
    substitution t = x/(1-x) carries it exactly onto the Shub-Smale monomial
    law (whose t-coefficient variances are the multinomials C(d,j)).
    """
    out = []
    for d in degrees:
        d = int(d)
        if m == 1:
            out.append(BernsteinPoly(tuple(rng.normals(d + 1) / binomial_sd(d))))
        else:
            idx = multi_index_set(m, d)
            z = rng.normals(len(idx)) / shub_smale_sd(d, idx)
            out.append(BernsteinMulti(m, d, dict(zip(idx, z))))
    return out


def sample_kostlan_complex(N: int, rng: SeedStream) -> ComplexPoly:
    """Re a_k, Im a_k independent N(0, C(N,k)); real parts drawn first."""
    if N < 1:
        raise ValueError("degree must be >= 1")
    sd = binomial_sd(N)
    re = rng.normals(N + 1) * sd
    im = rng.normals(N + 1) * sd
    return ComplexPoly(tuple(re + 1j * im))


def _pad_to_degree(p: MultiPoly, d: int) -> MultiPoly:
    if p.degree == d:
        return p
    return MultiPoly(p.m, d, dict(p.coeffs))


def sample_perturbed(signal: Sequence, sigma: float, noise_degrees: Sequence,
                     rng: SeedStream):
    """signal + sigma * (fresh Shub-Smale noise); signal is zero-padded into the
    noise degree.  sigma = 0 returns the signal coefficients exactly."""
    signal = list(signal)
    noise_degrees = [int(d) for d in noise_degrees]
    if len(signal) != len(noise_degrees):
        raise DegreeMismatch("one noise degree per signal equation required")
    for p, d in zip(signal, noise_degrees):
        if p.degree > d:
            raise DegreeMismatch(f"signal degree {p.degree} exceeds noise degree {d}")
    m = signal[0].m
    noise = sample_shub_smale(noise_degrees, m, rng)
    out = []
    for p, x, d in zip(signal, noise, noise_degrees):
        p = _pad_to_degree(p, d)
        coeffs = dict(x.coeffs)
        for j in coeffs:
            coeffs[j] = sigma * coeffs[j]
        for j, a in p.coeffs.items():
            coeffs[j] = coeffs.get(j, 0.0) + a
        out.append(MultiPoly(m, d, coeffs))
    return out


def sample(spec: EnsembleSpec, rng: SeedStream):
    """Dispatch on spec.kind; returns what the underlying sampler returns."""
    if spec.kind == "Kac":
        return sample_kac(spec.degrees[0], rng)
    if spec.kind == "ShubSmale":
        return sample_shub_smale(spec.degrees, spec.m, rng)
    if spec.kind == "BernsteinGauss":
        return sample_bernstein(spec.degrees, spec.m, rng)
    if spec.kind == "KostlanComplex":
        return sample_kostlan_complex(spec.degrees[0], rng)
    if spec.kind == "Perturbed":
        if spec.signal is None:
            raise ValueError("Perturbed spec requires a signal system")
        return sample_perturbed(list(spec.signal), float(spec.sigma),
                                spec.degrees, rng)
    raise ValueError(f"unknown ensemble kind {spec.kind!r}")


# ---------------------------------------------------------------------------
# JSON


def spec_to_json(spec: EnsembleSpec) -> dict:
    return {
        "kind": spec.kind,
        "m": spec.m,
        "degrees": list(spec.degrees),
        "sigma": spec.sigma,
        "signal": [poly_to_json(p) for p in spec.signal] if spec.signal else None,
    }


def spec_from_json(obj: dict) -> EnsembleSpec:
    m = int(obj.get("m", 1))
    signal = obj.get("signal")
    if signal is not None:
        if isinstance(signal, dict):
            signal = [signal]
        polys = [poly_from_json(s) for s in signal]
        # a single univariate signal T means the product system T(x_1),...,T(x_m)
        if len(polys) == 1 and isinstance(polys[0], MonomialPoly):
            T = polys[0]
            polys = [embed_univariate(T, m, v) for v in range(m)]
        signal = tuple(polys)
    return EnsembleSpec(
        kind=obj["kind"],
        m=m,
        degrees=tuple(obj["degrees"]),
        sigma=obj.get("sigma"),
        signal=signal,
    )

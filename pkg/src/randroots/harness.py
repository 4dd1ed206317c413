"""Monte Carlo experiment runner: seeded trials, Welford statistics, reports.

Every trial is a pure function of (experiment spec, master seed, trial index):
trial i draws from SeedStream(seed, i).  Workers may compute trials in any
order, but the per-trial statistics are always reduced in trial-index order,
so a report is bitwise reproducible at any thread count.

Trials that hit a measure-zero numerical failure (degenerate resultant,
leading-coefficient drop, iteration failure) are retried once on a reserved
stream index and counted as flagged; more than 1% flags marks the whole
report unreliable.
"""
from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass, field
from multiprocessing import get_context
from typing import Callable, Optional, Sequence

import numpy as np

from . import complexsphere, fekete, sysroots
from .ensembles import (
    EnsembleSpec,
    SeedStream,
    sample,
    spec_from_json,
    spec_to_json,
)
from .polyalg import MonomialPoly, MultiPoly
from .realroots import (
    DESCARTES_BISECT,
    Interval,
    PrecisionExhausted,
    REAL_LINE,
    count_roots_bernstein,
    count_roots_interval,
    count_roots_line,
)

EXPERIMENT_NAMES = (
    "shubsmale-uni",
    "shubsmale-biv",
    "kac-asym",
    "bernstein-line",
    "bernstein-interval",
    "bernstein-simplex",
    "kostlan-energy",
    "uniform-energy",
    "smoothed-decay",
    "fekete-min",
    "projective-measure",
)

FLAG_LIMIT = 0.01
RETRY_BASE = 2 ** 32  # reserved stream range for flagged-trial resampling

FLAGGABLE = (
    PrecisionExhausted,
    sysroots.DegenerateResultant,
    complexsphere.DegreeDrop,
    complexsphere.NonConvergence,
    complexsphere.CoincidentPoints,
)


class ParseError(ValueError):
    """A spec or report file failed validation; the message names the field."""


class TooManyFlaggedTrials(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# types


@dataclass(frozen=True, eq=False)
class ExperimentSpec:
    name: str
    ensemble: Optional[EnsembleSpec]
    trials: int
    region: Optional[object] = None     # Interval | box tuple | "simplex" | None
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in EXPERIMENT_NAMES:
            raise ParseError(f"unknown experiment name {self.name!r}")
        if self.trials < 1:
            raise ParseError("trials must be positive")


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    variance: float
    stderr: float
    theoretical: Optional[float] = None
    z: Optional[float] = None


@dataclass(frozen=True, eq=False)
class Report:
    spec: ExperimentSpec
    stats: SummaryStats
    flagged: int
    flag_reasons: tuple
    wall_ms: float
    reliable: bool
    extra: dict = field(default_factory=dict)


def welford(values: Sequence) -> tuple:
    """(n, mean, sample variance), accumulated in the given order."""
    n = 0
    mean = 0.0
    m2 = 0.0
    for v in values:
        n += 1
        delta = v - mean
        mean += delta / n
        m2 += delta * (v - mean)
    var = m2 / (n - 1) if n > 1 else 0.0
    return n, mean, var


def summarize(values: Sequence, theoretical: Optional[float] = None) -> SummaryStats:
    n, mean, var = welford(values)
    stderr = math.sqrt(var / n) if n > 0 else 0.0
    z = None
    if theoretical is not None:
        if stderr > 0.0:
            z = (mean - theoretical) / stderr
        else:
            z = 0.0 if mean == theoretical else math.inf
    return SummaryStats(n, mean, var, stderr, theoretical, z)


# ---------------------------------------------------------------------------
# per-trial statistics


def _as_univariate(f) -> MonomialPoly:
    if isinstance(f, MonomialPoly):
        return f
    coeffs = [0.0] * (f.degree + 1)
    for j, a in f.coeffs.items():
        coeffs[j[0]] += a
    return MonomialPoly(tuple(coeffs))


def _region_interval(region) -> Optional[Interval]:
    if region is None:
        return None
    if isinstance(region, Interval):
        return region
    if (isinstance(region, (tuple, list)) and len(region) == 2
            and all(isinstance(c, (int, float)) for c in region)):
        return Interval(float(region[0]), float(region[1]))
    raise ParseError(f"region {region!r} is not an interval")


def _count_univariate(p: MonomialPoly, region, method=None) -> int:
    iv = _region_interval(region)
    if iv is None:
        return count_roots_line(p, method=method).count
    return count_roots_interval(p, iv, method=method).count


def _in_region(point, region) -> bool:
    if region is None:
        return True
    if region == "simplex":
        return all(c >= 0.0 for c in point) and sum(point) <= 1.0
    # box: sequence of (lo, hi)
    return all(lo <= c <= hi for c, (lo, hi) in zip(point, region))


def _to_multi(f):
    from .polyalg import BernsteinMulti, bernstein_multi_to_multi
    if isinstance(f, BernsteinMulti):
        return bernstein_multi_to_multi(f)
    return f


def _trial_statistic(spec: ExperimentSpec, index: int) -> float:
    """The per-trial scalar; raises FLAGGABLE errors for resampling."""
    name = spec.name
    rng = SeedStream(spec.seed, index)
    if name == "shubsmale-uni":
        (p,) = sample(spec.ensemble, rng)
        return float(_count_univariate(_as_univariate(p), spec.region))
    if name == "kac-asym":
        p = sample(spec.ensemble, rng)
        return float(_count_univariate(p, spec.region, method=DESCARTES_BISECT))
    if name == "shubsmale-biv" or name == "smoothed-decay":
        eqs = sample(spec.ensemble, rng)
        if spec.ensemble.m == 1:
            return float(_count_univariate(_as_univariate(eqs[0]), spec.region))
        sys = sysroots.PolySystem(spec.ensemble.m, tuple(eqs))
        sol = sysroots.solve_bivariate(sys)
        return float(sum(1 for p in sol.points if _in_region(p, spec.region)))
    if name == "bernstein-line":
        (p,) = sample(spec.ensemble, rng)
        return float(count_roots_bernstein(p, REAL_LINE).count)
    if name == "bernstein-interval":
        (p,) = sample(spec.ensemble, rng)
        iv = _region_interval(spec.region)
        if iv is None:
            raise ParseError("bernstein-interval needs a region")
        return float(count_roots_bernstein(p, iv).count)
    if name == "bernstein-simplex":
        eqs = sample(spec.ensemble, rng)
        sys = sysroots.PolySystem(spec.ensemble.m, tuple(_to_multi(f) for f in eqs))
        sol = sysroots.solve_bivariate(sys)
        return float(sum(1 for p in sol.points if _in_region(p, "simplex")))
    if name == "kostlan-energy":
        p = sample(spec.ensemble, rng)
        cfg = complexsphere.polynomial_to_config(p)
        return complexsphere.log_energy(cfg)
    if name == "uniform-energy":
        n = int(spec.params["N"])
        cfg = fekete.sample_uniform_sphere(n, rng)
        return complexsphere.log_energy(cfg)
    if name == "fekete-min":
        n = int(spec.params["N"])
        c0 = fekete.sample_uniform_sphere(n, rng)
        est = fekete.minimize_energy(c0,
                                     max_iters=int(spec.params.get("max_iters", 5000)))
        return est.V
    raise ParseError(f"experiment {name!r} has no per-trial statistic")


def run_trial(spec: ExperimentSpec, index: int) -> tuple:
    """(statistic or None, flag reason or None).

    A flagged trial is resampled on reserved stream indices; after three
    failed resamples the trial is dropped (statistic None) but stays flagged.
    """
    try:
        return _trial_statistic(spec, index), None
    except FLAGGABLE as e:
        reason = f"trial {index}: {type(e).__name__}"
        for attempt in range(1, 4):
            try:
                return (_trial_statistic(spec, RETRY_BASE + index * 1024 + attempt),
                        reason)
            except FLAGGABLE:
                continue
        return None, reason


def _worker(args):
    spec_json, index = args
    return run_trial(_spec_from_dict(json.loads(spec_json)), index)


def theoretical_value(spec: ExperimentSpec) -> Optional[float]:
    name = spec.name
    if name in ("shubsmale-uni", "shubsmale-biv"):
        b = 1
        for d in spec.ensemble.degrees:
            b *= d
        if spec.region is None:
            return math.sqrt(b)
        return None
    if name == "kac-asym":
        return (2.0 / math.pi) * math.log(spec.ensemble.degrees[0])
    if name == "bernstein-line":
        b = 1
        for d in spec.ensemble.degrees:
            b *= d
        return math.sqrt(b)
    if name == "bernstein-interval":
        iv = _region_interval(spec.region)
        d = spec.ensemble.degrees[0]
        return (math.sqrt(d) / math.pi) * (math.atan(2.0 * iv.hi - 1.0)
                                           - math.atan(2.0 * iv.lo - 1.0))
    if name == "bernstein-simplex":
        b = 1
        for d in spec.ensemble.degrees:
            b *= d
        return math.sqrt(b) / 2.0 ** spec.ensemble.m
    if name == "kostlan-energy":
        return fekete.expected_energy_kostlan(spec.ensemble.degrees[0])
    if name == "uniform-energy":
        return fekete.expected_energy_uniform(int(spec.params["N"]))
    return None


def run_experiment(spec: ExperimentSpec, threads: int = 1) -> Report:
    """Run all trials, reduce in index order, attach the closed-form target."""
    if spec.name == "projective-measure":
        return _run_projective(spec)
    t0 = time.perf_counter()
    indices = list(range(spec.trials))
    if threads > 1:
        ctx = get_context("fork")
        spec_json = json.dumps(_spec_to_dict(spec))
        with ctx.Pool(threads) as pool:
            results = pool.map(_worker, [(spec_json, i) for i in indices],
                               chunksize=max(1, spec.trials // (threads * 8)))
    else:
        results = [run_trial(spec, i) for i in indices]
    values = [r[0] for r in results if r[0] is not None]
    reasons = tuple(r[1] for r in results if r[1] is not None)
    stats = summarize(values, theoretical_value(spec))
    wall = (time.perf_counter() - t0) * 1000.0
    flagged = len(reasons)
    reliable = flagged <= FLAG_LIMIT * spec.trials
    extra = {}
    if spec.name == "fekete-min":
        best = min(values)
        n = int(spec.params["N"])
        extra = {"best_V": best, "best_C_N": fekete.cn_from_v(n, best)}
    return Report(spec, stats, flagged, reasons, wall, reliable, extra)


# ---------------------------------------------------------------------------
# projective measure


def estimate_projective_measure(region, m: int, samples: int,
                                rng: SeedStream) -> SummaryStats:
    """Fraction of the projective space covered by the region's image.

    Draws y uniform on the unit sphere of R^(m+1); with s = sum(y), the class
    [y] corresponds to x with x_i = y_i / s, which lands in R^m whenever
    s != 0 (both representatives +-y give the same x).
    """
    theoretical = None
    if region == "simplex":
        theoretical = 2.0 ** (-m)
    elif region is None:
        theoretical = 1.0
    elif m == 1:
        iv = _region_interval(region)
        theoretical = (math.atan(2.0 * iv.hi - 1.0)
                       - math.atan(2.0 * iv.lo - 1.0)) / math.pi
    hits = np.zeros(0, dtype=bool)
    remaining = samples
    parts = []
    while remaining > 0:
        k = min(remaining, 1 << 18)
        y = rng.normals(k * (m + 1)).reshape(k, m + 1)
        norms = np.linalg.norm(y, axis=1)
        good = norms > 0
        y = y[good] / norms[good][:, None]
        s = np.sum(y, axis=1)
        nz = s != 0.0
        y = y[nz]
        s = s[nz]
        x = y[:, :m] / s[:, None]
        if region is None:
            inside = np.ones(len(x), dtype=bool)
        elif region == "simplex":
            inside = np.all(x >= 0.0, axis=1) & (np.sum(x, axis=1) <= 1.0)
        elif m == 1:
            iv = _region_interval(region)
            inside = (x[:, 0] >= iv.lo) & (x[:, 0] <= iv.hi)
        else:
            lo = np.array([b[0] for b in region])
            hi = np.array([b[1] for b in region])
            inside = np.all((x >= lo) & (x <= hi), axis=1)
        parts.append(inside)
        remaining -= len(inside)
    hits = np.concatenate(parts).astype(float)
    n = len(hits)
    mean = float(np.mean(hits))
    var = mean * (1.0 - mean) * n / max(n - 1, 1)
    stderr = math.sqrt(var / n)
    z = None
    if theoretical is not None:
        z = (mean - theoretical) / stderr if stderr > 0 else 0.0
    return SummaryStats(n, mean, var, stderr, theoretical, z)


def _run_projective(spec: ExperimentSpec) -> Report:
    t0 = time.perf_counter()
    m = int(spec.params["m"])
    rng = SeedStream(spec.seed, 0)
    stats = estimate_projective_measure(spec.region, m, spec.trials, rng)
    wall = (time.perf_counter() - t0) * 1000.0
    return Report(spec, stats, 0, (), wall, True)


# ---------------------------------------------------------------------------
# smoothed decay


def smoothed_decay_experiment(template: MonomialPoly, m_list: Sequence,
                              sigma: float, trials: int, seed: int = 0) -> list:
    """Per-m rows: exact signal count, perturbed and pure-noise MC estimates.

    Rows are dicts with keys m, N_P, mean_perturbed, stderr_perturbed,
    mean_noise, stderr_noise, ratio, A_m, B_m, H2.  Counting of the perturbed
    system needs m <= 2; larger m report only the exact signal count.
    """
    d = template.degree
    rows = []
    for mi, m in enumerate(m_list):
        system = sysroots.signal_product(template, m)
        n_exact = sysroots.count_real_solutions(system)
        row = {"m": m, "N_P": n_exact, "sigma": sigma}
        degrees = tuple(d for _ in range(m))
        if m <= 2:
            base = ExperimentSpec(
                "smoothed-decay",
                EnsembleSpec("Perturbed", m, degrees, sigma=sigma,
                             signal=system.equations),
                trials, None, seed)
            rep = run_experiment(base)
            noise = ExperimentSpec(
                "shubsmale-uni" if m == 1 else "shubsmale-biv",
                EnsembleSpec("ShubSmale", m, degrees),
                trials, None, seed + 1)
            nrep = run_experiment(noise)
            row.update(mean_perturbed=rep.stats.mean,
                       stderr_perturbed=rep.stats.stderr,
                       mean_noise=nrep.stats.mean,
                       stderr_noise=nrep.stats.stderr,
                       ratio=rep.stats.mean / n_exact,
                       flagged=rep.flagged + nrep.flagged)
        A_m, B_m, verdict = sysroots.hypothesis_check(
            system.equations, degrees, r0=2.0, ell=1e-3)
        row.update(A_m=A_m, B_m=B_m, H2=verdict)
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# serialization


def _region_to_json(region):
    if region is None:
        return None
    if region == "simplex":
        return {"type": "simplex"}
    if isinstance(region, Interval):
        return {"type": "interval", "lo": region.lo, "hi": region.hi}
    return {"type": "box", "bounds": [[float(lo), float(hi)] for lo, hi in region]}


def _region_from_json(obj):
    if obj is None:
        return None
    kind = obj.get("type")
    if kind == "simplex":
        return "simplex"
    if kind == "interval":
        try:
            return Interval(float(obj["lo"]), float(obj["hi"]))
        except (KeyError, ValueError) as e:
            raise ParseError(f"region interval: {e}") from e
    if kind == "box":
        return tuple((float(lo), float(hi)) for lo, hi in obj["bounds"])
    raise ParseError(f"region type {kind!r} not recognized")


def _spec_to_dict(spec: ExperimentSpec) -> dict:
    return {
        "name": spec.name,
        "ensemble": None if spec.ensemble is None else spec_to_json(spec.ensemble),
        "trials": spec.trials,
        "region": _region_to_json(spec.region),
        "seed": spec.seed,
        "params": spec.params,
    }


def _spec_from_dict(obj: dict) -> ExperimentSpec:
    for key in ("name", "trials", "seed"):
        if key not in obj:
            raise ParseError(f"spec is missing field {key!r}")
    ens = obj.get("ensemble")
    ensemble = None if ens is None else spec_from_json(ens)
    return ExperimentSpec(
        name=obj["name"],
        ensemble=ensemble,
        trials=int(obj["trials"]),
        region=_region_from_json(obj.get("region")),
        seed=int(obj["seed"]),
        params=dict(obj.get("params", {})),
    )


def write_spec(spec: ExperimentSpec, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_spec_to_dict(spec), fh, indent=2)
        fh.write("\n")


def read_spec(path: str) -> ExperimentSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}:{e.lineno}: {e.msg}") from e
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: spec must be a JSON object")
    return _spec_from_dict(obj)


CSV_HEADER = "experiment,n,mean,stderr,theoretical,z,flagged,wall_ms"


def report_csv_row(r: Report) -> str:
    s = r.stats
    fmt = lambda x: "" if x is None else repr(float(x))
    return ",".join([r.spec.name, str(s.n), fmt(s.mean), fmt(s.stderr),
                     fmt(s.theoretical), fmt(s.z), str(r.flagged),
                     f"{r.wall_ms:.1f}"])


def write_report(reports, path: str, format: str = "csv") -> None:
    """Serialize one report or a list of them; format 'csv' or 'json'."""
    if isinstance(reports, Report):
        reports = [reports]
    if format == "csv":
        lines = [CSV_HEADER] + [report_csv_row(r) for r in reports]
        text = "\n".join(lines) + "\n"
    elif format == "json":
        text = json.dumps([_report_to_dict(r) for r in reports], indent=2) + "\n"
    else:
        raise ParseError(f"format {format!r} not recognized (csv or json)")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _report_to_dict(r: Report) -> dict:
    s = r.stats
    return {
        "spec": _spec_to_dict(r.spec),
        "stats": {"n": s.n, "mean": s.mean, "variance": s.variance,
                  "stderr": s.stderr, "theoretical": s.theoretical, "z": s.z},
        "flagged": r.flagged,
        "flag_reasons": list(r.flag_reasons),
        "wall_ms": r.wall_ms,
        "reliable": r.reliable,
        "extra": r.extra,
    }


KAC_BAND = (0.0, 1.2)  # admissible mean - (2/pi) ln d, leading-term comparison


def report_passes(r: Report) -> bool:
    """Verdict for exit codes: band check for the asymptotic law, |z| <= 4 else."""
    if not r.reliable:
        return False
    s = r.stats
    if r.spec.name == "kac-asym":
        if s.theoretical is None:
            return False
        gap = s.mean - s.theoretical
        return KAC_BAND[0] <= gap <= KAC_BAND[1]
    if s.z is None:
        return True
    return abs(s.z) <= 4.0


def default_seed() -> int:
    env = os.environ.get("RANDROOTS_SEED")
    return int(env) if env else 0

"""Experiment orchestration: statistics, serialization, reproducibility, CLI."""
import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from randroots.ensembles import EnsembleSpec, SeedStream
from randroots.harness import (
    CSV_HEADER,
    ExperimentSpec,
    ParseError,
    Report,
    SummaryStats,
    estimate_projective_measure,
    read_spec,
    report_csv_row,
    report_passes,
    run_experiment,
    run_trial,
    smoothed_decay_experiment,
    summarize,
    theoretical_value,
    welford,
    write_report,
    write_spec,
)
from randroots.polyalg import MonomialPoly
from randroots.realroots import Interval


def test_welford_matches_numpy():
    x = SeedStream(1, 0).normals(777) * 3.0 + 1.5
    n, mean, var = welford(x)
    assert n == 777
    assert mean == pytest.approx(float(np.mean(x)), rel=1e-12)
    assert var == pytest.approx(float(np.var(x, ddof=1)), rel=1e-10)


def test_summarize_z_score():
    s = summarize([1.0, 2.0, 3.0, 4.0], theoretical=2.0)
    assert s.n == 4
    assert s.mean == pytest.approx(2.5)
    assert s.stderr == pytest.approx(math.sqrt(s.variance / 4.0))
    assert s.z == pytest.approx((2.5 - 2.0) / s.stderr)
    assert summarize([1.0, 2.0]).z is None


def test_spec_validation():
    with pytest.raises(ParseError):
        ExperimentSpec("no-such-experiment", None, 10)
    with pytest.raises(ParseError):
        ExperimentSpec("kac-asym", EnsembleSpec("Kac", 1, (5,)), 0)


def test_theoretical_values_attach_closed_forms():
    uni = ExperimentSpec("shubsmale-uni", EnsembleSpec("ShubSmale", 1, (9,)), 10)
    assert theoretical_value(uni) == pytest.approx(3.0, rel=1e-14)
    biv = ExperimentSpec("shubsmale-biv", EnsembleSpec("ShubSmale", 2, (2, 2)), 10)
    assert theoretical_value(biv) == pytest.approx(2.0, rel=1e-14)
    line = ExperimentSpec("bernstein-line",
                          EnsembleSpec("BernsteinGauss", 1, (9,)), 10)
    assert theoretical_value(line) == pytest.approx(3.0, rel=1e-14)
    seg = ExperimentSpec("bernstein-interval",
                         EnsembleSpec("BernsteinGauss", 1, (9,)), 10,
                         region=Interval(0.0, 1.0))
    assert theoretical_value(seg) == pytest.approx(1.5, rel=1e-14)
    # general interval: sqrt(d)/pi * (atan(2b-1) - atan(2a-1))
    seg2 = ExperimentSpec("bernstein-interval",
                          EnsembleSpec("BernsteinGauss", 1, (9,)), 10,
                          region=Interval(0.25, 0.75))
    want = 3.0 / math.pi * (math.atan(0.5) - math.atan(-0.5))
    assert theoretical_value(seg2) == pytest.approx(want, rel=1e-14)


def test_run_experiment_small_univariate():
    spec = ExperimentSpec("shubsmale-uni", EnsembleSpec("ShubSmale", 1, (4,)),
                          trials=400, seed=0)
    rep = run_experiment(spec)
    assert rep.stats.n == 400
    assert rep.reliable is True
    assert rep.flagged == 0
    assert abs(rep.stats.mean - 2.0) <= 4.0 * rep.stats.stderr
    assert rep.wall_ms >= 0.0
    assert report_passes(rep)


def test_run_trial_is_pure_function_of_spec_seed_index():
    spec = ExperimentSpec("kac-asym", EnsembleSpec("Kac", 1, (50,)),
                          trials=10, seed=9)
    v1, f1 = run_trial(spec, 3)
    v2, f2 = run_trial(spec, 3)
    assert v1 == v2 and f1 == f2
    assert run_trial(spec, 4)[0] is not None


def test_reports_are_bitwise_identical_across_thread_counts():
    spec = ExperimentSpec("kac-asym", EnsembleSpec("Kac", 1, (50,)),
                          trials=120, seed=5)
    rows = {t: report_csv_row(run_experiment(spec, threads=t))
            for t in (1, 2, 4)}
    base = _strip_wall(rows[1])
    assert _strip_wall(rows[2]) == base
    assert _strip_wall(rows[4]) == base


def _strip_wall(row: str) -> str:
    return ",".join(row.split(",")[:-1])  # wall_ms legitimately varies


def test_seed_changes_the_outcome():
    mk = lambda s: ExperimentSpec("shubsmale-uni",
                                  EnsembleSpec("ShubSmale", 1, (9,)),
                                  trials=60, seed=s)
    a = run_experiment(mk(0)).stats.mean
    b = run_experiment(mk(1)).stats.mean
    assert a != b


def test_spec_file_round_trip(tmp_path):
    cases = [
        ExperimentSpec("shubsmale-uni", EnsembleSpec("ShubSmale", 1, (9,)),
                       500, None, 3),
        ExperimentSpec("bernstein-interval",
                       EnsembleSpec("BernsteinGauss", 1, (9,)), 100,
                       Interval(0.0, 1.0), 0),
        ExperimentSpec("bernstein-simplex",
                       EnsembleSpec("BernsteinGauss", 2, (3, 3)), 50,
                       "simplex", 1),
        ExperimentSpec("shubsmale-biv", EnsembleSpec("ShubSmale", 2, (2, 2)),
                       50, ((0.0, 1.0), (0.0, 1.0)), 2),
    ]
    for i, spec in enumerate(cases):
        path = tmp_path / f"spec{i}.json"
        path2 = tmp_path / f"spec{i}b.json"
        write_spec(spec, str(path))
        back = read_spec(str(path))
        # a second serialization must reproduce the file byte-for-byte
        write_spec(back, str(path2))
        assert path.read_text() == path2.read_text()
        assert (back.name, back.trials, back.seed) == (spec.name, spec.trials,
                                                       spec.seed)
        assert back.ensemble == spec.ensemble
        assert back.region == spec.region


def test_read_spec_reports_position_on_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "name": "kac-asym",\n  oops\n}\n')
    with pytest.raises(ParseError) as exc:
        read_spec(str(path))
    assert "broken.json:3" in str(exc.value)
    path2 = tmp_path / "list.json"
    path2.write_text("[1, 2]\n")
    with pytest.raises(ParseError):
        read_spec(str(path2))


def test_write_report_csv_and_json(tmp_path):
    spec = ExperimentSpec("shubsmale-uni", EnsembleSpec("ShubSmale", 1, (4,)),
                          trials=50, seed=0)
    rep = run_experiment(spec)
    csv_path = tmp_path / "r.csv"
    write_report(rep, str(csv_path))
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == CSV_HEADER
    fields = lines[1].split(",")
    assert fields[0] == "shubsmale-uni"
    assert int(fields[1]) == 50
    assert float(fields[2]) == rep.stats.mean  # repr round-trips bitwise
    json_path = tmp_path / "r.json"
    write_report([rep], str(json_path), format="json")
    obj = json.loads(json_path.read_text())
    assert obj[0]["stats"]["n"] == 50
    assert obj[0]["reliable"] is True


def test_report_passes_band_logic():
    kac_spec = ExperimentSpec("kac-asym", EnsembleSpec("Kac", 1, (50,)), 10)
    mk = lambda mean, thy: Report(
        kac_spec, SummaryStats(10, mean, 1.0, 0.1, thy, None),
        0, (), 1.0, True)
    thy = 2.0 / math.pi * math.log(50.0)
    assert report_passes(mk(thy + 0.6, thy)) is True
    assert report_passes(mk(thy - 0.2, thy)) is False    # below the band
    assert report_passes(mk(thy + 1.6, thy)) is False    # above the band
    # unreliable reports never pass
    bad = Report(kac_spec, SummaryStats(10, thy + 0.6, 1.0, 0.1, thy, None),
                 5, ("x",) * 5, 1.0, False)
    assert report_passes(bad) is False


def test_estimate_projective_measure_interval_and_simplex():
    s = estimate_projective_measure(Interval(0.0, 1.0), 1, 200_000,
                                    SeedStream(2, 0))
    assert s.theoretical == pytest.approx(0.5, rel=1e-14)
    assert abs(s.mean - 0.5) <= 4.0 * s.stderr
    t = estimate_projective_measure("simplex", 2, 200_000, SeedStream(2, 1))
    assert t.theoretical == pytest.approx(0.25, rel=1e-14)
    assert abs(t.mean - 0.25) <= 4.0 * t.stderr


def test_smoothed_decay_rows_have_exact_counts_and_estimates():
    rows = smoothed_decay_experiment(MonomialPoly((-1.0, 0.0, 1.0)),
                                     [1], sigma=1.0, trials=80, seed=0)
    (row,) = rows
    assert row["m"] == 1 and row["N_P"] == 2
    assert 0.0 <= row["mean_perturbed"] <= 2.5
    assert row["ratio"] == pytest.approx(row["mean_perturbed"] / 2.0, rel=1e-12)
    assert row["A_m"] > 0.0 and isinstance(row["H2"], bool)


CLI = [sys.executable, "-m", "randroots.cli"]


def _run_cli(*args, check=True):
    proc = subprocess.run(CLI + list(args), capture_output=True, text=True,
                          env={**os.environ, "PYTHONPATH": ""})
    if check:
        assert proc.returncode == 0, proc.stderr
    return proc


def test_cli_sample_and_roots():
    out = _run_cli("sample", "--kind", "Kac", "--degree", "5",
                   "--stream", "3").stdout
    obj = json.loads(out)
    assert len(obj[0]["coeffs"]) == 6
    out = _run_cli("roots", "--coeffs=-1,0,1").stdout
    assert json.loads(out)["count"] == 2


def test_cli_verify_exits_by_verdict(tmp_path):
    spec = ExperimentSpec("shubsmale-uni", EnsembleSpec("ShubSmale", 1, (4,)),
                          trials=300, seed=0)
    path = tmp_path / "s.json"
    write_spec(spec, str(path))
    proc = _run_cli("verify", "--spec", str(path))
    assert "shubsmale-uni" in proc.stdout
    missing = _run_cli("verify", "--spec", str(tmp_path / "nope.json"),
                       check=False)
    assert missing.returncode == 2


def _field(text: str, key: str) -> float:
    for token in text.split():
        if token.startswith(key + "="):
            return float(token.split("=", 1)[1])
    raise AssertionError(f"{key}= not found in {text!r}")


def test_cli_measure_and_fekete():
    out = _run_cli("measure", "--region", "interval", "--lo", "0", "--hi", "1",
                   "--samples", "40000").stdout
    assert abs(_field(out, "mean") - 0.5) < 0.02
    out = _run_cli("fekete", "--n", "2", "--restarts", "3").stdout
    assert abs(_field(out, "V") + math.log(2.0)) < 1e-5

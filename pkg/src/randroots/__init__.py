"""Random polynomial ensembles, certified real-root counting, and the
logarithmic energy of root configurations on the sphere."""

from .polyalg import (
    BernsteinMulti,
    BernsteinPoly,
    ComplexPoly,
    MonomialPoly,
    MultiPoly,
    bernstein_to_monomial,
    monomial_to_bernstein,
    poly_from_json,
    poly_to_json,
)
from .ensembles import EnsembleSpec, SeedStream, sample, sample_kac
from .realroots import (
    COMPANION_FILTERED,
    DESCARTES_BISECT,
    Interval,
    REAL_LINE,
    RootCount,
    STURM_EXACT,
    count_roots_bernstein,
    count_roots_interval,
    count_roots_line,
    isolate_roots,
)
from .sysroots import (
    PolySystem,
    SolutionSet,
    count_real_solutions,
    functionals,
    hypothesis_check,
    signal_product,
    signal_sphere,
    solve_bivariate,
)
from .complexsphere import (
    Configuration,
    config_from_csv,
    config_to_csv,
    lift,
    lift_many,
    log_energy,
    polynomial_to_config,
    roots_companion,
    roots_complex,
)
from .fekete import (
    FeketeEstimate,
    energy_gradient,
    energy_law,
    expected_energy_kostlan,
    expected_energy_uniform,
    minimize_energy,
    sample_uniform_sphere,
)
from .harness import (
    ExperimentSpec,
    Report,
    SummaryStats,
    estimate_projective_measure,
    read_spec,
    run_experiment,
    smoothed_decay_experiment,
    write_report,
)

__version__ = "0.1.0"

__all__ = [
    "BernsteinMulti", "BernsteinPoly", "ComplexPoly", "MonomialPoly",
    "MultiPoly", "bernstein_to_monomial", "monomial_to_bernstein",
    "poly_from_json", "poly_to_json",
    "EnsembleSpec", "SeedStream", "sample", "sample_kac",
    "COMPANION_FILTERED", "DESCARTES_BISECT", "STURM_EXACT", "Interval",
    "REAL_LINE", "RootCount", "count_roots_bernstein", "count_roots_interval",
    "count_roots_line", "isolate_roots",
    "PolySystem", "SolutionSet", "count_real_solutions", "functionals",
    "hypothesis_check", "signal_product", "signal_sphere", "solve_bivariate",
    "Configuration", "config_from_csv", "config_to_csv", "lift", "lift_many",
    "log_energy", "polynomial_to_config", "roots_companion", "roots_complex",
    "FeketeEstimate", "energy_gradient", "energy_law",
    "expected_energy_kostlan", "expected_energy_uniform", "minimize_energy",
    "sample_uniform_sphere",
    "ExperimentSpec", "Report", "SummaryStats", "estimate_projective_measure",
    "read_spec", "run_experiment", "smoothed_decay_experiment", "write_report",
]

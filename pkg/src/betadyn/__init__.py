"""Symbolic dynamics of beta-transformations."""

from .curves import (
    beta_u_search,
    curve_alpha,
    curve_defect_demo,
    kneading_curve,
    verify_constant_coding,
)
from .entropy import WordCount, count_words, entropy_drop_witness, entropy_estimate
from .errors import (
    BetadynError,
    BreakpointHit,
    ConfigError,
    DomainError,
    NotAttainable,
    NumericalError,
    OutsideParameterSpace,
    UndecidableBranch,
)
from .experiments import RunConfig, SweepReport, emit_plotdata, load_config, run_curve_fibration, run_separation_audit, run_sweep
from .interval_maps import GenParams, Params, SignSeq, orbit_floats, t_ab_power, t_ab_power_closed, t_ab_step
from .measures import Histogram, StepDensity, integrate, invariance_defect, parry_density, ulam_density
from .normality import TestSuite, birkhoff, default_suite, normality_defect
from .numerics import QuadraticNumber, golden_ratio, parse_real, sqrt_exact
from .symbolic import (
    EventuallyPeriodic,
    KneadingData,
    Order,
    SymbolStream,
    SymbolWord,
    admissible,
    code,
    kneading,
    kneading_gen,
    order_compare,
    phi_series,
    separation_check,
    separation_check_gen,
)

__version__ = "0.1.0"

__all__ = [
    "beta_u_search",
    "curve_alpha",
    "curve_defect_demo",
    "kneading_curve",
    "verify_constant_coding",
    "WordCount",
    "count_words",
    "entropy_drop_witness",
    "entropy_estimate",
    "BetadynError",
    "BreakpointHit",
    "ConfigError",
    "DomainError",
    "NotAttainable",
    "NumericalError",
    "OutsideParameterSpace",
    "UndecidableBranch",
    "RunConfig",
    "SweepReport",
    "emit_plotdata",
    "load_config",
    "run_curve_fibration",
    "run_separation_audit",
    "run_sweep",
    "GenParams",
    "Params",
    "SignSeq",
    "orbit_floats",
    "t_ab_power",
    "t_ab_power_closed",
    "t_ab_step",
    "Histogram",
    "StepDensity",
    "integrate",
    "invariance_defect",
    "parry_density",
    "ulam_density",
    "TestSuite",
    "birkhoff",
    "default_suite",
    "normality_defect",
    "QuadraticNumber",
    "golden_ratio",
    "parse_real",
    "sqrt_exact",
    "EventuallyPeriodic",
    "KneadingData",
    "Order",
    "SymbolStream",
    "SymbolWord",
    "admissible",
    "code",
    "kneading",
    "kneading_gen",
    "order_compare",
    "phi_series",
    "separation_check",
    "separation_check_gen",
]

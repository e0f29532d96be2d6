"""Discriminating classes of distribution tails from top order statistics."""
from tailsep.conditions import (
    ConditionReport,
    Grid,
    check_b_condition,
    check_c_condition,
    check_delta_domination,
    default_grid,
    epsilon_between,
    estimate_epsilon_max,
)
from tailsep.distributions import (
    Distribution,
    DistributionSpec,
    RngStream,
    SpecError,
    catalog,
    from_spec,
    parse_spec,
    sample,
    sample_top,
)
from tailsep.normal import normal_cdf, normal_logsf, normal_quantile
from tailsep.simulate import (
    ExperimentConfig,
    KSweepResult,
    RejectionSummary,
    TrajectoryResult,
    reproduce_table,
    run_rejection_experiment,
    run_trajectory,
    sweep_k,
)
from tailsep.tailstat import (
    SortedSample,
    SupportError,
    TailTestReport,
    default_k,
    hill_estimator,
    r_statistic,
    run_test,
    test_heavy_vs_light,
    test_light_vs_heavy,
    test_two_sided,
    thresholds,
)

__version__ = "0.1.0"

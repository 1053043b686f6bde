"""Occupation times of Lévy processes, bridges and spherical fractional Brownian motion.

Exact moment formulas built from set partitions, seeded simulators for the
processes involved, and Monte Carlo experiments that check one against the
other.
"""

from .analysis import GeneralizedArcsine, MomentSequence, arcsine_cdf, ks_statistic, z_score
from .combinatorics import (
    BlockProfile,
    DegeneracyError,
    PartitionCapError,
    SetPartition,
    arcsine_walk_moment,
    baxter_unique_shift,
    bell_number,
    block_profiles,
    complete_bell,
    cyclic_shifts,
    enumerate_set_partitions,
    partial_bell,
    rising_factorial,
    stirling_second,
    unsigned_stirling_first,
)
from .moment_engine import (
    Constant,
    ErfDrift,
    MomentResult,
    Tabulated,
    TimeGrid,
    monomial_convolution,
    occupation_moment,
    occupation_moments,
    spitzer_series,
    survival_probability_partition,
)
from .montecarlo import EXPERIMENTS, EstimateWithError, VerificationReport, run_experiment
from .processes import PathGrid, simulate_bm, simulate_bridge, simulate_drifted_half_stable_subordinator, simulate_symmetric_stable
from .sphere import SfbmConfig, geodesic, sample_sfbm_at, sfbm_covariance, to_spherical, from_spherical, uniform_sphere_sample

__version__ = "0.1.0"

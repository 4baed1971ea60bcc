//! Probability measures and the convolution calculus on groups and
//! homogeneous spaces: dense weight vectors over finite carriers, weighted
//! particle ensembles over SO(3) and S².

mod dense;
mod empirical;
mod energy;

pub use dense::{
    average_group, average_space, convolve, convolve_group, convolve_homog,
    convolve_homog_kinv, convolve_power, density_convolve, density_from_measure,
    group_invariance_deviation, is_group_invariant, is_space_invariant, lift_measure,
    measure_from_density, project_measure, pushforward, space_invariance_deviation,
    translate_space, tv_distance, Carrier, DenseMeasure, GroupInvariance, GroupMap,
};
pub use empirical::{
    lift_s2, lift_s2_with_section, project_so3, s2_convolve, s2_convolve_with_section,
    so3_convolve, so3_convolve_power, EmpiricalMeasure, Point,
};
pub use energy::{energy_distance_test, energy_statistic, EnergyTestConfig, EnergyTestResult};

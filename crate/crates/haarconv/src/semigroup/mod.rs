//! One-parameter convolution semigroups: exact compound-Poisson families on
//! finite carriers, the sampled heat semigroup on SO(3), factorization
//! through the initial idempotent, projection to and lifting from G/K, and
//! discrete Markov skeletons.

mod compound_poisson;
mod family;
mod heat;
mod markov;

pub use compound_poisson::CompoundPoissonSemigroup;
pub use family::{
    decompose_semigroup, find_idempotent, lift_semigroup, project_semigroup,
    semigroup_check, semigroup_check_grid, semigroup_deviation, DecomposeReport, DenseFamily,
    GridCheck, IdempotentReport, LiftReport, LiftedFamily, NamedDeviation, PerturbedFamily,
    ProjectedFamily,
};
pub use heat::{HeatSampler, HeatSemigroupSo3, HEAT_TIME_FLOOR};
pub use markov::{markov_skeleton_dense, markov_skeleton_heat, project_path, sample_index};

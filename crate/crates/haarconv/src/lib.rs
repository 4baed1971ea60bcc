//! # haarconv
//!
//! A convolution calculus for probability measures on groups and their
//! homogeneous spaces, exact on finite groups and Monte Carlo on SO(3) and
//! the sphere S² = SO(3)/SO(2).
//!
//! The pieces fit together as follows:
//!
//! - [`group`]: finite groups as validated multiplication tables (with the
//!   full subgroup lattice) and SO(3) as unit quaternions with Haar sampling.
//! - [`homog`]: coset spaces X = G/K, the projection `pi`, section maps with
//!   `pi ∘ S = id`, and the G-action, for finite carriers and the sphere.
//! - [`measure`]: dense weight-vector measures and weighted particle
//!   ensembles; convolution on G and on X, lifting to K-right invariant
//!   measures, projection, invariance averaging and testing, and an energy
//!   distance permutation test for ensembles.
//! - [`semigroup`]: compound-Poisson families evaluated exactly, the SO(3)
//!   heat semigroup via its character series, factorization through the
//!   initial idempotent, projection/lifting of semigroups across `pi`, and
//!   Markov skeletons.
//! - [`divisibility`]: nth roots (canonical compound-Poisson roots and an
//!   exhaustive DFT branch search on small cyclic groups) and embedding
//!   certificates for infinitely divisible targets.
//! - [`verify`]: the named verification suites behind the CLI, one row per
//!   check.
//!
//! ## Determinism
//!
//! Every stochastic operation takes an explicit seed and derives
//! counter-based per-draw streams from it ([`rng`]), so results depend only
//! on inputs, seed, and particle budget — not on thread count. The
//! `parallel` feature (on by default) switches the data-parallel inner loops
//! to rayon; outputs are bit-identical with and without it.

#![forbid(unsafe_code)]

pub mod divisibility;
mod error;
pub mod exec;
pub mod group;
pub mod homog;
pub mod io;
pub mod measure;
pub mod rng;
pub mod semigroup;
pub mod util;
pub mod verify;

pub use error::{Error, Result};
pub use group::{FiniteGroup, Rotation, Subgroup};
pub use homog::{CosetSpace, S2Point, SphereSpace};
pub use measure::{Carrier, DenseMeasure, EmpiricalMeasure};
pub use semigroup::{CompoundPoissonSemigroup, DenseFamily, HeatSemigroupSo3};

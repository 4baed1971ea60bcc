//! Infinitely divisible distributions at desk scale: root verification,
//! canonical compound-Poisson roots, exhaustive DFT root search on small
//! cyclic groups, and embedding certificates for convolution semigroups.

mod dft;
mod embed;
mod roots;

pub use dft::{nth_root_abelian_dft, DftRootOutcome};
pub use embed::{
    embed_compound_poisson, embed_homogeneous, invariance_of_embedded, EmbeddingCertificate,
    GridDeviation, InvarianceReport,
};
pub use roots::{cp_root, verify_root, RootCheck, RootMap};

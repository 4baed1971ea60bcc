//! Group arithmetic for the concrete carriers: finite groups given by
//! multiplication tables, and SO(3) represented by unit quaternions.

mod builtins;
mod finite;
mod perm;
mod rotation;

pub use builtins::{cyclic, dihedral, group_by_name, symmetric};
pub use finite::{FiniteGroup, Subgroup, MAX_ORDER};
pub use rotation::{haar_rotations, Rotation};

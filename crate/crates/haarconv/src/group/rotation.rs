//! SO(3) as unit quaternions, with q and -q identified.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::exec;
use crate::rng::{purpose, substream};

/// A rotation stored as a unit quaternion `(w, x, y, z)`. The norm is kept
/// within 1e-12 of 1 by renormalizing after every operation; all comparisons
/// identify `q` with `-q`.
#[derive(Clone, Copy, Debug)]
pub struct Rotation {
    q: [f64; 4],
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation { q: [1.0, 0.0, 0.0, 0.0] };

    /// Build from an arbitrary nonzero quaternion, normalizing.
    pub fn from_quaternion(q: [f64; 4]) -> Result<Self> {
        let norm = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "quaternion norm {norm} too small to normalize"
            )));
        }
        Ok(Rotation { q: [q[0] / norm, q[1] / norm, q[2] / norm, q[3] / norm] })
    }

    /// Rotation by `angle` about `axis` (axis need not be normalized).
    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Result<Self> {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        if !n.is_finite() || n < 1e-12 {
            return Err(Error::InvalidArgument("axis norm too small".into()));
        }
        let (s, c) = (angle / 2.0).sin_cos();
        Ok(Rotation { q: [c, s * axis[0] / n, s * axis[1] / n, s * axis[2] / n] })
    }

    /// Rotation about the z-axis; Haar measure on the SO(2) subgroup is the
    /// uniform distribution of this angle.
    pub fn about_z(angle: f64) -> Self {
        let (s, c) = (angle / 2.0).sin_cos();
        Rotation { q: [c, 0.0, 0.0, s] }
    }

    pub fn quaternion(&self) -> [f64; 4] {
        self.q
    }

    /// Hamilton product, renormalized.
    pub fn multiply(&self, rhs: &Rotation) -> Rotation {
        let [a, b, c, d] = self.q;
        let [e, f, g, h] = rhs.q;
        let q = [
            a * e - b * f - c * g - d * h,
            a * f + b * e + c * h - d * g,
            a * g - b * h + c * e + d * f,
            a * h + b * g - c * f + d * e,
        ];
        let norm = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
        Rotation { q: [q[0] / norm, q[1] / norm, q[2] / norm, q[3] / norm] }
    }

    /// Inverse rotation (quaternion conjugate).
    pub fn inverse(&self) -> Rotation {
        Rotation { q: [self.q[0], -self.q[1], -self.q[2], -self.q[3]] }
    }

    /// `g · self · g^{-1}`.
    pub fn conjugated_by(&self, g: &Rotation) -> Rotation {
        g.multiply(self).multiply(&g.inverse())
    }

    /// Rotation angle in `[0, pi]`.
    pub fn angle(&self) -> f64 {
        2.0 * self.q[0].abs().clamp(0.0, 1.0).acos()
    }

    /// Geodesic angle between two rotations, invariant under the sign of
    /// either quaternion.
    pub fn angle_to(&self, other: &Rotation) -> f64 {
        let dot = self.q[0] * other.q[0]
            + self.q[1] * other.q[1]
            + self.q[2] * other.q[2]
            + self.q[3] * other.q[3];
        2.0 * dot.abs().clamp(0.0, 1.0).acos()
    }

    /// Apply the rotation to a 3-vector.
    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        let [w, x, y, z] = self.q;
        // Rotation matrix applied directly; rows from the unit quaternion.
        [
            (1.0 - 2.0 * (y * y + z * z)) * v[0]
                + 2.0 * (x * y - w * z) * v[1]
                + 2.0 * (x * z + w * y) * v[2],
            2.0 * (x * y + w * z) * v[0]
                + (1.0 - 2.0 * (x * x + z * z)) * v[1]
                + 2.0 * (y * z - w * x) * v[2],
            2.0 * (x * z - w * y) * v[0]
                + 2.0 * (y * z + w * x) * v[1]
                + (1.0 - 2.0 * (x * x + y * y)) * v[2],
        ]
    }

    pub fn to_matrix(&self) -> [[f64; 3]; 3] {
        let cols = [
            self.apply([1.0, 0.0, 0.0]),
            self.apply([0.0, 1.0, 0.0]),
            self.apply([0.0, 0.0, 1.0]),
        ];
        let mut m = [[0.0; 3]; 3];
        for (j, col) in cols.iter().enumerate() {
            for i in 0..3 {
                m[i][j] = col[i];
            }
        }
        m
    }

    /// Euclidean quaternion distance modulo sign.
    pub fn quat_distance(&self, other: &Rotation) -> f64 {
        let mut plus = 0.0;
        let mut minus = 0.0;
        for i in 0..4 {
            plus += (self.q[i] - other.q[i]).powi(2);
            minus += (self.q[i] + other.q[i]).powi(2);
        }
        plus.min(minus).sqrt()
    }

    pub fn approx_eq(&self, other: &Rotation, tol: f64) -> bool {
        self.quat_distance(other) <= tol
    }

    /// One Haar-uniform rotation from the given RNG (normalized 4-d Gaussian).
    pub fn haar<R: Rng + ?Sized>(rng: &mut R) -> Rotation {
        loop {
            let q = [
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
            ];
            if let Ok(r) = Rotation::from_quaternion(q) {
                return r;
            }
        }
    }
}

/// `n` i.i.d. Haar-uniform rotations, deterministic given the seed and
/// independent of the degree of parallelism.
pub fn haar_rotations(n: usize, seed: u64) -> Vec<Rotation> {
    exec::map_indexed(n, |i| {
        let mut rng = substream(seed, purpose::HAAR_SO3, i as u64);
        Rotation::haar(&mut rng)
    })
}

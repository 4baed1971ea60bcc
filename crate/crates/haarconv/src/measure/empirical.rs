//! Weighted particle ensembles over the continuous carriers SO(3) and S².
//!
//! Convolutions resample both inputs independently to the particle budget and
//! combine pairs; all randomness is counter-based per output index, so the
//! result depends only on (inputs, seed, budget) and not on parallelism.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::exec;
use crate::group::Rotation;
use crate::homog::{S2Point, SphereSpace};
use crate::rng::{purpose, substream};

/// A carrier point with the metric used by the two-sample tests.
pub trait Point: Clone + Send + Sync + 'static {
    fn distance(&self, other: &Self) -> f64;
}

impl Point for Rotation {
    /// Geodesic rotation angle, invariant under the quaternion sign.
    fn distance(&self, other: &Self) -> f64 {
        self.angle_to(other)
    }
}

impl Point for S2Point {
    fn distance(&self, other: &Self) -> f64 {
        self.chordal_distance(other)
    }
}

/// A probability measure as a weighted particle ensemble. The provenance
/// seed of the generating call is recorded.
#[derive(Clone, Debug)]
pub struct EmpiricalMeasure<P: Point> {
    particles: Vec<(P, f64)>,
    seed: u64,
}

impl<P: Point> EmpiricalMeasure<P> {
    /// Build from weighted particles: zero-weight particles are dropped,
    /// weights normalized; an empty ensemble is a constructor error.
    pub fn new(particles: Vec<(P, f64)>, seed: u64) -> Result<Self> {
        let mut kept: Vec<(P, f64)> = Vec::with_capacity(particles.len());
        let mut sum = 0.0;
        for (p, w) in particles {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::NegativeWeight(w));
            }
            if w > 0.0 {
                sum += w;
                kept.push((p, w));
            }
        }
        if kept.is_empty() || sum <= 0.0 {
            return Err(Error::EmptyMeasure);
        }
        for (_, w) in &mut kept {
            *w /= sum;
        }
        Ok(EmpiricalMeasure { particles: kept, seed })
    }

    /// Equal-weight ensemble from a list of points.
    pub fn from_points(points: Vec<P>, seed: u64) -> Result<Self> {
        let n = points.len();
        Self::new(points.into_iter().map(|p| (p, 1.0 / n as f64)).collect(), seed)
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn particles(&self) -> &[(P, f64)] {
        &self.particles
    }

    pub fn points(&self) -> impl Iterator<Item = &P> {
        self.particles.iter().map(|(p, _)| p)
    }

    fn cumulative_weights(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut cdf = Vec::with_capacity(self.particles.len());
        for (_, w) in &self.particles {
            acc += w;
            cdf.push(acc);
        }
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        cdf
    }

    /// Multinomial resample to `budget` points on the `(seed, purpose)`
    /// stream. Two measures resampled with identical streams draw coupled
    /// uniforms, so identical ensembles produce identical resamples.
    pub fn resample_with(&self, budget: usize, seed: u64, purpose_tag: u64) -> Vec<P> {
        let cdf = self.cumulative_weights();
        exec::map_indexed(budget, |i| {
            let mut rng = substream(seed, purpose_tag, i as u64);
            let u: f64 = rng.random();
            let idx = cdf.partition_point(|&c| c < u).min(self.particles.len() - 1);
            self.particles[idx].0.clone()
        })
    }

    /// Pushforward under a point map; weights are carried along.
    pub fn map<Q: Point, F: Fn(&P) -> Q + Sync + Send>(&self, f: F) -> EmpiricalMeasure<Q> {
        let particles = exec::map_indexed(self.particles.len(), |i| {
            let (p, w) = &self.particles[i];
            (f(p), *w)
        });
        EmpiricalMeasure { particles, seed: self.seed }
    }
}

/// Convolution on SO(3): products of independently resampled particle pairs.
pub fn so3_convolve(
    a: &EmpiricalMeasure<Rotation>,
    b: &EmpiricalMeasure<Rotation>,
    budget: usize,
    seed: u64,
) -> Result<EmpiricalMeasure<Rotation>> {
    if budget == 0 {
        return Err(Error::EmptyMeasure);
    }
    let cdf_a = a.cumulative_weights();
    let cdf_b = b.cumulative_weights();
    let points = exec::map_indexed(budget, |i| {
        let mut rng = substream(seed, purpose::CONV_PAIR, i as u64);
        let ua: f64 = rng.random();
        let ub: f64 = rng.random();
        let x = &a.particles[cdf_a.partition_point(|&c| c < ua).min(a.len() - 1)].0;
        let y = &b.particles[cdf_b.partition_point(|&c| c < ub).min(b.len() - 1)].0;
        x.multiply(y)
    });
    EmpiricalMeasure::from_points(points, seed)
}

/// n-fold convolution power on SO(3) by sequential convolution.
pub fn so3_convolve_power(
    m: &EmpiricalMeasure<Rotation>,
    n: u32,
    budget: usize,
    seed: u64,
) -> Result<EmpiricalMeasure<Rotation>> {
    if n == 0 {
        return EmpiricalMeasure::from_points(vec![Rotation::IDENTITY; budget.max(1)], seed);
    }
    let mut acc = m.clone();
    for step in 1..n {
        acc = so3_convolve(&acc, m, budget, crate::rng::derive_seed(seed, 0x70, step as u64))?;
    }
    Ok(acc)
}

/// Convolution on S² = SO(3)/SO(2) with an explicit section: samples
/// `S(x) k y` with `k` Haar-uniform in the z-rotations, one triple per
/// output particle. `twist_seed` switches to the randomized section.
pub fn s2_convolve_with_section(
    a: &EmpiricalMeasure<S2Point>,
    b: &EmpiricalMeasure<S2Point>,
    budget: usize,
    seed: u64,
    twist_seed: Option<u64>,
) -> Result<EmpiricalMeasure<S2Point>> {
    if budget == 0 {
        return Err(Error::EmptyMeasure);
    }
    let cdf_a = a.cumulative_weights();
    let cdf_b = b.cumulative_weights();
    let points = exec::map_indexed(budget, |i| {
        let mut rng = substream(seed, purpose::CONV_PAIR, i as u64);
        let ua: f64 = rng.random();
        let ub: f64 = rng.random();
        let angle: f64 = rng.random_range(0.0..(2.0 * PI));
        let x = &a.particles[cdf_a.partition_point(|&c| c < ua).min(a.len() - 1)].0;
        let y = &b.particles[cdf_b.partition_point(|&c| c < ub).min(b.len() - 1)].0;
        let section = match twist_seed {
            Some(ts) => SphereSpace::twisted_section(x, ts),
            None => SphereSpace::section(x),
        };
        let g = section.multiply(&Rotation::about_z(angle));
        SphereSpace::action(&g, y)
    });
    EmpiricalMeasure::from_points(points, seed)
}

/// Convolution on S² with the default geodesic section.
pub fn s2_convolve(
    a: &EmpiricalMeasure<S2Point>,
    b: &EmpiricalMeasure<S2Point>,
    budget: usize,
    seed: u64,
) -> Result<EmpiricalMeasure<S2Point>> {
    s2_convolve_with_section(a, b, budget, seed, None)
}

/// Pushforward under the projection SO(3) -> S².
pub fn project_so3(m: &EmpiricalMeasure<Rotation>) -> EmpiricalMeasure<S2Point> {
    m.map(SphereSpace::project)
}

/// Lift a measure on S² to a K-right invariant measure on SO(3) by drawing a
/// Haar z-rotation per particle through the given section.
pub fn lift_s2_with_section(
    m: &EmpiricalMeasure<S2Point>,
    seed: u64,
    twist_seed: Option<u64>,
) -> EmpiricalMeasure<Rotation> {
    let particles = exec::map_indexed(m.len(), |i| {
        let mut rng = substream(seed, purpose::LIFT_FIBER, i as u64);
        let (x, w) = &m.particles()[i];
        let k = SphereSpace::haar_k(&mut rng);
        let section = match twist_seed {
            Some(ts) => SphereSpace::twisted_section(x, ts),
            None => SphereSpace::section(x),
        };
        (section.multiply(&k), *w)
    });
    EmpiricalMeasure::new(particles, seed).expect("lift preserves particle count")
}

/// Lift with the default geodesic section.
pub fn lift_s2(m: &EmpiricalMeasure<S2Point>, seed: u64) -> EmpiricalMeasure<Rotation> {
    lift_s2_with_section(m, seed, None)
}

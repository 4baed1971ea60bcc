//! The heat semigroup on SO(3): a concrete continuous conjugate-invariant
//! convolution semigroup, evaluated through the classical character series
//!
//!   k_t(theta) = sum_{l >= 0} (2l+1) e^{-l(l+1)t} sin((2l+1)theta/2) / sin(theta/2)
//!
//! so that the rotation angle has density p_t(theta) = k_t(theta)(1-cos theta)/pi.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::exec;
use crate::group::Rotation;
use crate::measure::EmpiricalMeasure;
use crate::rng::{purpose, substream};

/// Below this time the truncated series is not trusted; the sampler falls
/// back to composing small Gaussian rotations.
pub const HEAT_TIME_FLOOR: f64 = 0.05;

/// Character value `sin((2l+1) theta/2) / sin(theta/2)`, with the
/// `2l+1` limit at very small angles.
fn character_ratio(l: usize, theta: f64) -> f64 {
    let half = theta / 2.0;
    if half.abs() < 1e-7 {
        (2 * l + 1) as f64
    } else {
        ((2 * l + 1) as f64 * half).sin() / half.sin()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct HeatSemigroupSo3 {
    l_max: usize,
}

impl Default for HeatSemigroupSo3 {
    fn default() -> Self {
        HeatSemigroupSo3 { l_max: 30 }
    }
}

impl HeatSemigroupSo3 {
    pub fn new(l_max: usize) -> Result<Self> {
        if l_max < 10 {
            return Err(Error::InvalidArgument(format!(
                "series truncation l_max = {l_max} below the supported minimum 10"
            )));
        }
        Ok(HeatSemigroupSo3 { l_max })
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    /// Truncated kernel value at rotation angle `theta`, valid for
    /// `t >= HEAT_TIME_FLOOR`.
    pub fn kernel(&self, t: f64, theta: f64) -> Result<f64> {
        if !(t >= HEAT_TIME_FLOOR) {
            return Err(Error::Unsupported(format!(
                "heat kernel series needs t >= {HEAT_TIME_FLOOR}, got {t}"
            )));
        }
        if !(0.0..=PI + 1e-12).contains(&theta) {
            return Err(Error::InvalidArgument(format!("angle {theta} outside [0, pi]")));
        }
        let mut acc = 0.0;
        for l in 0..=self.l_max {
            let weight = (2 * l + 1) as f64 * (-((l * (l + 1)) as f64) * t).exp();
            acc += weight * character_ratio(l, theta);
        }
        Ok(acc)
    }

    /// Density of the rotation angle: `k_t(theta) (1 - cos theta) / pi`.
    pub fn angle_density(&self, t: f64, theta: f64) -> Result<f64> {
        Ok(self.kernel(t, theta)? * (1.0 - theta.cos()) / PI)
    }

    /// Bound on the discarded series mass: `sum_{l > l_max} (2l+1)^2 e^{-l(l+1)t}`.
    pub fn truncation_tail(&self, t: f64) -> f64 {
        (self.l_max + 1..self.l_max + 200)
            .map(|l| ((2 * l + 1) as f64).powi(2) * (-((l * (l + 1)) as f64) * t).exp())
            .sum()
    }

    /// Monotone angle CDF tabulated on `nodes` grid points by trapezoid
    /// accumulation (negative truncation wiggle clipped to zero).
    pub fn angle_cdf(&self, t: f64, nodes: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        if nodes < 16 {
            return Err(Error::InvalidArgument("CDF grid too coarse".into()));
        }
        let thetas: Vec<f64> =
            (0..nodes).map(|j| PI * j as f64 / (nodes - 1) as f64).collect();
        let density: Vec<f64> = thetas
            .iter()
            .map(|&th| self.angle_density(t, th).map(|d| d.max(0.0)))
            .collect::<Result<_>>()?;
        let mut cdf = vec![0.0; nodes];
        for j in 1..nodes {
            let h = thetas[j] - thetas[j - 1];
            cdf[j] = cdf[j - 1] + 0.5 * h * (density[j] + density[j - 1]);
        }
        let total = cdf[nodes - 1];
        if total <= 0.0 {
            return Err(Error::Structure("degenerate angle density".into()));
        }
        for c in &mut cdf {
            *c /= total;
        }
        Ok((thetas, cdf))
    }

    /// Prepare a sampler for time `t`. `t = 0` yields the identity; times
    /// below the validity floor use the random-walk fallback.
    pub fn sampler(&self, t: f64) -> Result<HeatSampler> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidArgument(format!("time {t} must be >= 0")));
        }
        if t == 0.0 {
            return Ok(HeatSampler::Identity);
        }
        if t < HEAT_TIME_FLOOR {
            // Compose small Gaussian axis-angle steps; the per-coordinate
            // variance is 2*tau per step to match the series normalization.
            let steps = 32usize;
            return Ok(HeatSampler::Walk { steps, sigma: (2.0 * t / steps as f64).sqrt() });
        }
        let (thetas, cdf) = self.angle_cdf(t, 2048)?;
        Ok(HeatSampler::InverseCdf { thetas, cdf })
    }

    /// `n` particles at time `t`, deterministic in the seed.
    pub fn sample(&self, t: f64, n: usize, seed: u64) -> Result<EmpiricalMeasure<Rotation>> {
        if n == 0 {
            return Err(Error::EmptyMeasure);
        }
        let sampler = self.sampler(t)?;
        let points = exec::map_indexed(n, |i| {
            let mut rng = substream(seed, purpose::HEAT_ANGLE, i as u64);
            sampler.draw(&mut rng)
        });
        EmpiricalMeasure::from_points(points, seed)
    }
}

/// A prepared per-time sampler.
pub enum HeatSampler {
    Identity,
    InverseCdf { thetas: Vec<f64>, cdf: Vec<f64> },
    Walk { steps: usize, sigma: f64 },
}

fn uniform_axis<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-12 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

impl HeatSampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Rotation {
        match self {
            HeatSampler::Identity => Rotation::IDENTITY,
            HeatSampler::InverseCdf { thetas, cdf } => {
                let u: f64 = rng.random();
                let theta = crate::util::inverse_cdf_interp(thetas, cdf, u);
                let axis = uniform_axis(rng);
                Rotation::from_axis_angle(axis, theta).expect("unit axis")
            }
            HeatSampler::Walk { steps, sigma } => {
                let mut g = Rotation::IDENTITY;
                for _ in 0..*steps {
                    let w = [
                        *sigma * sample_normal(rng),
                        *sigma * sample_normal(rng),
                        *sigma * sample_normal(rng),
                    ];
                    let angle = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
                    if angle > 1e-300 {
                        g = g.multiply(&Rotation::from_axis_angle(w, angle).expect("axis"));
                    }
                }
                g
            }
        }
    }
}

fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

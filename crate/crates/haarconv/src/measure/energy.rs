//! Two-sample energy-distance permutation test for particle ensembles.
//!
//! The statistic is the V-form `2 E|X-Y| - E|X-X'| - E|Y-Y'|` over all pairs,
//! which is zero exactly when the two empirical distributions coincide. For
//! large ensembles both the statistic and the permutation null are computed
//! on seeded subsamples; the null subsample is the smaller, which makes the
//! test slightly conservative for large inputs but keeps a single run cheap.

use rand::Rng;

use crate::error::{Error, Result};
use crate::exec;
use crate::measure::empirical::{EmpiricalMeasure, Point};
use crate::rng::{purpose, substream};

#[derive(Clone, Copy, Debug)]
pub struct EnergyTestConfig {
    /// Subsample size per side for the observed statistic.
    pub stat_points: usize,
    /// Subsample size per side for the permutation null.
    pub null_points: usize,
    /// Number of permutations.
    pub permutations: usize,
    /// Test level; pass iff the statistic sits below the (1-level) null
    /// quantile.
    pub level: f64,
}

impl Default for EnergyTestConfig {
    fn default() -> Self {
        EnergyTestConfig { stat_points: 2048, null_points: 1024, permutations: 200, level: 0.01 }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EnergyTestResult {
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub permutations: usize,
}

/// V-statistic energy distance between two point lists (all pairs, diagonal
/// included in the within-sample means).
pub fn energy_statistic<P: Point>(a: &[P], b: &[P]) -> f64 {
    let (n, m) = (a.len(), b.len());
    let cross = exec::sum_indexed(n, |i| b.iter().map(|y| a[i].distance(y)).sum::<f64>());
    let within_a = exec::sum_indexed(n, |i| a.iter().map(|y| a[i].distance(y)).sum::<f64>());
    let within_b = exec::sum_indexed(m, |i| b.iter().map(|y| b[i].distance(y)).sum::<f64>());
    2.0 * cross / (n * m) as f64
        - within_a / (n * n) as f64
        - within_b / (m * m) as f64
}

/// Permutation test for equality of two particle-represented distributions.
/// Deterministic given the seed. Requires at least 100 particles per side.
pub fn energy_distance_test<P: Point>(
    a: &EmpiricalMeasure<P>,
    b: &EmpiricalMeasure<P>,
    cfg: &EnergyTestConfig,
    seed: u64,
) -> Result<EnergyTestResult> {
    if a.len() < 100 || b.len() < 100 {
        return Err(Error::Unsupported(format!(
            "energy test needs >= 100 particles per side, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if cfg.permutations < 20 || !(0.0..1.0).contains(&cfg.level) {
        return Err(Error::InvalidArgument("bad energy test configuration".into()));
    }

    // Observed statistic on coupled subsamples: identical ensembles draw the
    // same points and score exactly zero.
    let sa = a.resample_with(cfg.stat_points, seed, purpose::ENERGY_STAT);
    let sb = b.resample_with(cfg.stat_points, seed, purpose::ENERGY_STAT);
    let statistic = energy_statistic(&sa, &sb);

    // Pooled null subsample and its distance matrix.
    let m = cfg.null_points;
    let mut pooled = a.resample_with(m, seed, purpose::ENERGY_NULL_A);
    pooled.extend(b.resample_with(m, seed, purpose::ENERGY_NULL_B));
    let n2 = pooled.len();
    let dist = exec::map_indexed(n2, |i| {
        let mut row = Vec::with_capacity(n2);
        for j in 0..n2 {
            row.push(pooled[i].distance(&pooled[j]));
        }
        row
    });
    let row_sums: Vec<f64> = dist.iter().map(|row| row.iter().sum()).collect();
    let total: f64 = row_sums.iter().sum();

    // For an equal split of size m, E * m^2 = 4*S_Arows - 4*S_AA - total.
    let mut null_stats = exec::map_indexed(cfg.permutations, |p| {
        let mut rng = substream(seed, purpose::ENERGY_PERM, p as u64);
        let mut idx: Vec<usize> = (0..n2).collect();
        for i in (1..n2).rev() {
            let j = rng.random_range(0..=i);
            idx.swap(i, j);
        }
        let side_a = &idx[..m];
        let s_rows: f64 = side_a.iter().map(|&i| row_sums[i]).sum();
        let mut s_aa = 0.0;
        for &i in side_a {
            let row = &dist[i];
            for &j in side_a {
                s_aa += row[j];
            }
        }
        (4.0 * s_rows - 4.0 * s_aa - total) / (m * m) as f64
    });
    null_stats.sort_by(|a, b| a.total_cmp(b));
    let rank = ((1.0 - cfg.level) * cfg.permutations as f64).ceil() as usize;
    let threshold = null_stats[rank.clamp(1, cfg.permutations) - 1];

    Ok(EnergyTestResult {
        statistic,
        threshold,
        pass: statistic <= threshold,
        permutations: cfg.permutations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{haar_rotations, Rotation};
    use crate::measure::empirical::EmpiricalMeasure;
    use std::f64::consts::PI;

    #[test]
    fn identical_ensembles_score_exactly_zero_and_pass() {
        let m = EmpiricalMeasure::from_points(haar_rotations(500, 3), 3).unwrap();
        let res = energy_distance_test(&m, &m.clone(), &EnergyTestConfig::default(), 11).unwrap();
        assert_eq!(res.statistic, 0.0);
        assert!(res.pass);
    }

    #[test]
    fn disjoint_point_masses_fail_at_any_level() {
        let a = EmpiricalMeasure::from_points(vec![Rotation::IDENTITY; 300], 1).unwrap();
        let spin = Rotation::from_axis_angle([0.0, 0.0, 1.0], PI).unwrap();
        let b = EmpiricalMeasure::from_points(vec![spin; 300], 2).unwrap();
        for level in [0.2, 0.05, 0.01] {
            let cfg = EnergyTestConfig { level, ..EnergyTestConfig::default() };
            let res = energy_distance_test(&a, &b, &cfg, 5).unwrap();
            assert!(!res.pass, "level {level}: {res:?}");
            assert!(res.statistic > res.threshold);
        }
    }

    #[test]
    fn rejects_small_ensembles() {
        let a = EmpiricalMeasure::from_points(haar_rotations(50, 1), 1).unwrap();
        let b = EmpiricalMeasure::from_points(haar_rotations(500, 2), 2).unwrap();
        assert!(matches!(
            energy_distance_test(&a, &b, &EnergyTestConfig::default(), 1),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn independent_haar_samples_pass_calibration() {
        // Lighter version of the full calibration run in the acceptance
        // suite: independent Haar samples should essentially always pass.
        let mut passes = 0;
        for rep in 0..30u64 {
            let a = EmpiricalMeasure::from_points(haar_rotations(3000, 100 + rep), rep).unwrap();
            let b = EmpiricalMeasure::from_points(haar_rotations(3000, 900 + rep), rep).unwrap();
            let res = energy_distance_test(&a, &b, &EnergyTestConfig::default(), rep).unwrap();
            if res.pass {
                passes += 1;
            }
        }
        assert!(passes >= 28, "only {passes}/30 calibration passes");
    }

    #[test]
    fn detects_a_biased_sampler() {
        // A mixture with 10% identity contamination must be distinguished
        // from Haar.
        let clean = EmpiricalMeasure::from_points(haar_rotations(5000, 41), 41).unwrap();
        let mut pts = haar_rotations(4500, 42);
        pts.extend(vec![Rotation::IDENTITY; 500]);
        let dirty = EmpiricalMeasure::from_points(pts, 42).unwrap();
        let res = energy_distance_test(&clean, &dirty, &EnergyTestConfig::default(), 6).unwrap();
        assert!(!res.pass);
    }
}

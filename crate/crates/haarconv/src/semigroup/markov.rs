//! Discrete Markov skeletons of a semigroup with identity initial measure:
//! right-increment chains `g_{i+1} = g_i h_i` with `h_i ~ mu_{t_{i+1}-t_i}`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::group::Rotation;
use crate::homog::CosetSpace;
use crate::measure::DenseMeasure;
use crate::rng::{purpose, substream};
use crate::semigroup::family::DenseFamily;
use crate::semigroup::heat::HeatSemigroupSo3;

/// One index drawn from a dense measure.
pub fn sample_index<R: Rng + ?Sized>(m: &DenseMeasure, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let w = m.weights();
    for (i, &v) in w.iter().enumerate() {
        acc += v;
        if u < acc {
            return i;
        }
    }
    w.len() - 1
}

fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    if times[0] < 0.0 {
        return Err(Error::InvalidArgument("times must be nonnegative".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("times must be strictly increasing".into()));
    }
    Ok(())
}

/// Skeleton path of a dense family on a finite group. The family must start
/// at the identity mass; increments are independent across steps and the
/// path is deterministic given the seed.
pub fn markov_skeleton_dense(
    family: &dyn DenseFamily,
    times: &[f64],
    start: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    validate_times(times)?;
    let group = family.carrier().as_group()?.clone();
    if start >= group.order() {
        return Err(Error::InvalidArgument(format!("start {start} out of range")));
    }
    let mu0 = family.at(0.0)?;
    if mu0.weight(group.identity()) < 1.0 - 1e-9 {
        return Err(Error::InvalidArgument(
            "skeleton sampling requires an identity initial measure".into(),
        ));
    }
    let mut path = Vec::with_capacity(times.len());
    let mut g = start;
    path.push(g);
    for i in 1..times.len() {
        let mu = family.at(times[i] - times[i - 1])?;
        let mut rng = substream(seed, purpose::MARKOV_STEP, i as u64 - 1);
        let h = sample_index(&mu, &mut rng);
        g = group.multiply(g, h);
        path.push(g);
    }
    Ok(path)
}

/// Skeleton path of the heat semigroup on SO(3).
pub fn markov_skeleton_heat(
    heat: &HeatSemigroupSo3,
    times: &[f64],
    start: Rotation,
    seed: u64,
) -> Result<Vec<Rotation>> {
    validate_times(times)?;
    let mut path = Vec::with_capacity(times.len());
    let mut g = start;
    path.push(g);
    for i in 1..times.len() {
        let sampler = heat.sampler(times[i] - times[i - 1])?;
        let mut rng = substream(seed, purpose::MARKOV_STEP, i as u64 - 1);
        let h = sampler.draw(&mut rng);
        g = g.multiply(&h);
        path.push(g);
    }
    Ok(path)
}

/// Project a group path to X = G/K, giving the G-invariant Markov chain.
pub fn project_path(space: &CosetSpace, path: &[usize]) -> Vec<usize> {
    path.iter().map(|&g| space.project(g)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{group_by_name, Subgroup};
    use crate::measure::{tv_distance, Carrier};
    use crate::rng::derive_seed;
    use crate::semigroup::CompoundPoissonSemigroup;

    fn d4_family() -> CompoundPoissonSemigroup {
        let d4 = group_by_name("D4").unwrap();
        let jump = DenseMeasure::random(Carrier::Group(d4), 15);
        CompoundPoissonSemigroup::new(1.0, jump, None).unwrap()
    }

    fn empirical_histogram(samples: &[usize], n: usize) -> DenseMeasure {
        let mut w = vec![0.0; n];
        for &s in samples {
            w[s] += 1.0;
        }
        DenseMeasure::new(Carrier::Group(group_by_name("D4").unwrap()), w).unwrap()
    }

    #[test]
    fn one_step_marginal_matches_the_semigroup_measure() {
        let family = d4_family();
        let t = 0.8;
        let reps = 200_000;
        let finals: Vec<usize> = (0..reps)
            .map(|r| {
                let path = markov_skeleton_dense(
                    &family,
                    &[0.0, t],
                    0,
                    derive_seed(99, 0x51, r as u64),
                )
                .unwrap();
                *path.last().unwrap()
            })
            .collect();
        let hist = empirical_histogram(&finals, 8);
        let direct = family.measure_at(t).unwrap();
        let tv = tv_distance(&hist, &direct).unwrap();
        assert!(tv < 0.01, "TV = {tv}");
    }

    #[test]
    fn two_half_steps_match_one_full_step() {
        let family = d4_family();
        let reps = 200_000;
        let halves: Vec<usize> = (0..reps)
            .map(|r| {
                *markov_skeleton_dense(
                    &family,
                    &[0.0, 0.4, 0.8],
                    0,
                    derive_seed(7, 0x52, r as u64),
                )
                .unwrap()
                .last()
                .unwrap()
            })
            .collect();
        let hist = empirical_histogram(&halves, 8);
        let direct = family.measure_at(0.8).unwrap();
        let tv = tv_distance(&hist, &direct).unwrap();
        assert!(tv < 0.01, "TV = {tv}");
    }

    #[test]
    fn zero_rate_paths_are_constant() {
        let d4 = group_by_name("D4").unwrap();
        let jump = DenseMeasure::uniform(Carrier::Group(d4));
        let family = CompoundPoissonSemigroup::new(0.0, jump, None).unwrap();
        let path =
            markov_skeleton_dense(&family, &[0.0, 0.5, 1.0, 1.5], 3, 1).unwrap();
        assert_eq!(path, vec![3, 3, 3, 3]);
    }

    #[test]
    fn argument_validation() {
        let family = d4_family();
        assert!(markov_skeleton_dense(&family, &[0.5, 0.5], 0, 1).is_err());
        assert!(markov_skeleton_dense(&family, &[1.0, 0.5], 0, 1).is_err());
        assert!(markov_skeleton_dense(&family, &[], 0, 1).is_err());
        // Non-identity initial measure is rejected.
        let d4 = group_by_name("D4").unwrap();
        let center = Subgroup::new(d4.clone(), &[0, d4.elem_by_name("r2").unwrap()]).unwrap();
        let jump = DenseMeasure::uniform(Carrier::Group(d4));
        let shifted =
            CompoundPoissonSemigroup::new(1.0, jump, Some(DenseMeasure::haar(&center))).unwrap();
        assert!(markov_skeleton_dense(&shifted, &[0.0, 1.0], 0, 1).is_err());
    }

    #[test]
    fn projected_path_is_the_coset_chain() {
        let d4 = group_by_name("D4").unwrap();
        let k = Subgroup::new(d4.clone(), &[0, d4.elem_by_name("s").unwrap()]).unwrap();
        let space = crate::homog::CosetSpace::new(k).unwrap();
        let family = d4_family();
        let path = markov_skeleton_dense(&family, &[0.0, 0.3, 0.6, 1.2], 0, 5).unwrap();
        let projected = project_path(&space, &path);
        for (g, x) in path.iter().zip(&projected) {
            assert_eq!(space.project(*g), *x);
        }
    }

    #[test]
    fn heat_skeleton_marginal_matches_direct_sampling() {
        use crate::measure::{energy_distance_test, EmpiricalMeasure, EnergyTestConfig};
        let heat = HeatSemigroupSo3::default();
        let n = 10_000;
        let finals: Vec<Rotation> = (0..n)
            .map(|r| {
                *markov_skeleton_heat(
                    &heat,
                    &[0.0, 0.15, 0.3],
                    Rotation::IDENTITY,
                    derive_seed(3, 0x53, r as u64),
                )
                .unwrap()
                .last()
                .unwrap()
            })
            .collect();
        let skeleton = EmpiricalMeasure::from_points(finals, 3).unwrap();
        let direct = heat.sample(0.3, n, 12).unwrap();
        let res =
            energy_distance_test(&skeleton, &direct, &EnergyTestConfig::default(), 13).unwrap();
        assert!(res.pass, "{res:?}");
    }
}

//! nth convolution roots: verification, stored root maps, and the canonical
//! compound-Poisson construction.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::measure::{convolve_power, tv_distance, DenseMeasure};
use crate::semigroup::CompoundPoissonSemigroup;

#[derive(Clone, Copy, Debug)]
pub struct RootCheck {
    pub deviation: f64,
    pub pass: bool,
}

/// Check `nu^{*n} = mu` within `tol` in total variation.
pub fn verify_root(mu: &DenseMeasure, nu: &DenseMeasure, n: u32, tol: f64) -> Result<RootCheck> {
    if n == 0 {
        return Err(Error::InvalidArgument("root order must be >= 1".into()));
    }
    let power = convolve_power(nu, n)?;
    let deviation = tv_distance(&power, mu)?;
    Ok(RootCheck { deviation, pass: deviation <= tol })
}

/// A base measure together with chosen nth roots; every stored entry is
/// validated on insertion.
#[derive(Clone, Debug)]
pub struct RootMap {
    base: DenseMeasure,
    entries: BTreeMap<u32, DenseMeasure>,
}

impl RootMap {
    pub fn new(base: DenseMeasure) -> Self {
        RootMap { base, entries: BTreeMap::new() }
    }

    pub fn base(&self) -> &DenseMeasure {
        &self.base
    }

    /// Insert a candidate nth root; rejected unless `root^{*n}` matches the
    /// base within 1e-10.
    pub fn insert(&mut self, n: u32, root: DenseMeasure) -> Result<()> {
        let check = verify_root(&self.base, &root, n, 1e-10)?;
        if !check.pass {
            return Err(Error::InvalidArgument(format!(
                "candidate {n}th root deviates by {:.3e}",
                check.deviation
            )));
        }
        self.entries.insert(n, root);
        Ok(())
    }

    pub fn get(&self, n: u32) -> Option<&DenseMeasure> {
        self.entries.get(&n)
    }

    pub fn orders(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.keys().copied()
    }
}

/// Canonical nth root of the time-1 measure of a compound-Poisson family
/// with identity initial measure: the same family at rate/n, i.e. the time
/// 1/n measure.
pub fn cp_root(spec: &CompoundPoissonSemigroup, n: u32) -> Result<DenseMeasure> {
    if n == 0 {
        return Err(Error::InvalidArgument("root order must be >= 1".into()));
    }
    let identity = DenseMeasure::dirac(
        spec.jump().carrier().clone(),
        spec.jump().carrier().identity_index(),
    )?;
    if tv_distance(spec.initial(), &identity)? > 1e-12 {
        return Err(Error::Unsupported(
            "canonical roots need an identity initial measure; embed through the idempotent instead"
                .into(),
        ));
    }
    spec.measure_at(1.0 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{cyclic, group_by_name, Subgroup};
    use crate::measure::Carrier;

    fn z12_spec() -> CompoundPoissonSemigroup {
        let z12 = cyclic(12).unwrap();
        let jump = DenseMeasure::dirac(Carrier::Group(z12), 1).unwrap();
        CompoundPoissonSemigroup::new(1.0, jump, None).unwrap()
    }

    #[test]
    fn trivial_and_exact_roots() {
        let mu = z12_spec().measure_at(1.0).unwrap();
        let check = verify_root(&mu, &mu, 1, 0.0).unwrap();
        assert!(check.pass);
        assert_eq!(check.deviation, 0.0);
    }

    #[test]
    fn compound_poisson_roots_verify_to_1e10() {
        let spec = z12_spec();
        let mu = spec.measure_at(1.0).unwrap();
        for n in [2u32, 3, 6] {
            let root = cp_root(&spec, n).unwrap();
            let check = verify_root(&mu, &root, n, 1e-10).unwrap();
            assert!(check.pass, "n = {n}: deviation {:.3e}", check.deviation);
        }
        let d4 = group_by_name("D4").unwrap();
        let spec = CompoundPoissonSemigroup::new(
            1.0,
            DenseMeasure::random(Carrier::Group(d4), 3),
            None,
        )
        .unwrap();
        let mu = spec.measure_at(1.0).unwrap();
        let root = cp_root(&spec, 2).unwrap();
        assert!(verify_root(&mu, &root, 2, 1e-10).unwrap().pass);
        // n = 1 returns the measure itself.
        assert!(cp_root(&spec, 1).unwrap().approx_eq(&mu, 1e-14));
    }

    #[test]
    fn perturbed_candidates_fail_with_positive_deviation() {
        let spec = z12_spec();
        let mu = spec.measure_at(1.0).unwrap();
        let root = cp_root(&spec, 3).unwrap();
        let mut w: Vec<f64> = root.weights().to_vec();
        w[0] += 0.05;
        w[1] -= w[1].min(0.05);
        let bad = DenseMeasure::new(root.carrier().clone(), w).unwrap();
        let check = verify_root(&mu, &bad, 3, 1e-10).unwrap();
        assert!(!check.pass);
        assert!(check.deviation > 1e-3);
    }

    #[test]
    fn cp_root_respects_rate_arithmetic() {
        // cp_root(spec, a*b) equals cp_root(spec-at-rate/a, b).
        let spec = z12_spec();
        let direct = cp_root(&spec, 6).unwrap();
        let third = CompoundPoissonSemigroup::new(
            spec.rate() / 3.0,
            spec.jump().clone(),
            None,
        )
        .unwrap();
        let nested = cp_root(&third, 2).unwrap();
        assert!(tv_distance(&direct, &nested).unwrap() < 1e-12);
    }

    #[test]
    fn root_map_validates_entries_and_supports_composition() {
        let spec = z12_spec();
        let mu = spec.measure_at(1.0).unwrap();
        let mut map = RootMap::new(mu.clone());
        for n in [2u32, 3, 6] {
            map.insert(n, cp_root(&spec, n).unwrap()).unwrap();
        }
        assert_eq!(map.orders().collect::<Vec<_>>(), vec![2, 3, 6]);
        // r(mn)^{*m} is an nth root when r comes from one spec: r(6)^{*2} is
        // a cube root.
        let r6 = map.get(6).unwrap();
        let squared = convolve_power(r6, 2).unwrap();
        assert!(verify_root(&mu, &squared, 3, 1e-9).unwrap().pass);
        // Bad entries are rejected.
        let junk = DenseMeasure::random(mu.carrier().clone(), 8);
        assert!(map.insert(4, junk).is_err());
    }

    #[test]
    fn cp_root_requires_identity_initial() {
        let z12 = cyclic(12).unwrap();
        let sub = Subgroup::new(z12.clone(), &[0, 6]).unwrap();
        let spec = CompoundPoissonSemigroup::new(
            1.0,
            DenseMeasure::dirac(Carrier::Group(z12), 1).unwrap(),
            Some(DenseMeasure::haar(&sub)),
        )
        .unwrap();
        assert!(matches!(cp_root(&spec, 2), Err(Error::Unsupported(_))));
    }
}

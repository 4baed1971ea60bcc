//! Dense measures on finite carriers and the exact convolution operations.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, Subgroup};
use crate::homog::{CosetSpace, FiniteSection};
use crate::rng::{purpose, substream};

/// The finite carrier of a dense measure: a group or a coset space.
#[derive(Clone, Debug)]
pub enum Carrier {
    Group(Arc<FiniteGroup>),
    Space(Arc<CosetSpace>),
}

impl Carrier {
    pub fn len(&self) -> usize {
        match self {
            Carrier::Group(g) => g.order(),
            Carrier::Space(x) => x.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn label(&self) -> String {
        match self {
            Carrier::Group(g) => g.name().to_string(),
            Carrier::Space(x) => x.label().to_string(),
        }
    }

    /// Index of the identity element / the origin coset.
    pub fn identity_index(&self) -> usize {
        match self {
            Carrier::Group(g) => g.identity(),
            Carrier::Space(x) => x.origin(),
        }
    }

    pub fn same(&self, other: &Carrier) -> bool {
        match (self, other) {
            (Carrier::Group(a), Carrier::Group(b)) => {
                Arc::ptr_eq(a, b) || (a.name() == b.name() && a.order() == b.order())
            }
            (Carrier::Space(a), Carrier::Space(b)) => {
                Arc::ptr_eq(a, b) || (a.label() == b.label() && a.len() == b.len())
            }
            _ => false,
        }
    }

    pub fn as_group(&self) -> Result<&Arc<FiniteGroup>> {
        match self {
            Carrier::Group(g) => Ok(g),
            Carrier::Space(x) => Err(Error::CarrierMismatch {
                lhs: x.label().to_string(),
                rhs: "a finite group".into(),
            }),
        }
    }

    pub fn as_space(&self) -> Result<&Arc<CosetSpace>> {
        match self {
            Carrier::Space(x) => Ok(x),
            Carrier::Group(g) => Err(Error::CarrierMismatch {
                lhs: g.name().to_string(),
                rhs: "a coset space".into(),
            }),
        }
    }
}

fn mismatch(a: &Carrier, b: &Carrier) -> Error {
    Error::CarrierMismatch { lhs: a.label(), rhs: b.label() }
}

/// A probability measure as a normalized weight vector over a finite
/// carrier. Weights are renormalized after every operation.
#[derive(Clone, Debug)]
pub struct DenseMeasure {
    carrier: Carrier,
    weights: Vec<f64>,
}

impl DenseMeasure {
    /// Build from raw nonnegative weights (normalized here). Weights below
    /// `-1e-12` are rejected; tiny negative values are clipped to zero.
    pub fn new(carrier: Carrier, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != carrier.len() || weights.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        let mut w = weights;
        let mut sum = 0.0;
        for v in &mut w {
            if !v.is_finite() || *v < -1e-12 {
                return Err(Error::NegativeWeight(*v));
            }
            if *v < 0.0 {
                *v = 0.0;
            }
            sum += *v;
        }
        if sum <= 0.0 {
            return Err(Error::EmptyMeasure);
        }
        for v in &mut w {
            *v /= sum;
        }
        Ok(DenseMeasure { carrier, weights: w })
    }

    /// Internal constructor for operation outputs: asserts the mass drift
    /// stays below 1e-9 before renormalizing, which catches convolution bugs
    /// in debug builds.
    fn from_op(carrier: Carrier, weights: Vec<f64>) -> Self {
        let sum: f64 = weights.iter().sum();
        debug_assert!(
            (sum - 1.0).abs() < 1e-9,
            "normalization drift {:.3e} on {}",
            (sum - 1.0).abs(),
            carrier.label()
        );
        let mut w = weights;
        for v in &mut w {
            *v /= sum;
        }
        DenseMeasure { carrier, weights: w }
    }

    /// Point mass at the given index.
    pub fn dirac(carrier: Carrier, index: usize) -> Result<Self> {
        if index >= carrier.len() {
            return Err(Error::InvalidArgument(format!(
                "index {index} out of range for {}",
                carrier.label()
            )));
        }
        let mut w = vec![0.0; carrier.len()];
        w[index] = 1.0;
        Ok(DenseMeasure { carrier, weights: w })
    }

    /// Normalized Haar measure of a subgroup, carried by the parent group.
    pub fn haar(subgroup: &Subgroup) -> Self {
        let group = subgroup.parent().clone();
        let mut w = vec![0.0; group.order()];
        let mass = 1.0 / subgroup.order() as f64;
        for &k in subgroup.members() {
            w[k] = mass;
        }
        DenseMeasure { carrier: Carrier::Group(group), weights: w }
    }

    /// Uniform measure over the whole carrier (Haar when the carrier is a
    /// group).
    pub fn uniform(carrier: Carrier) -> Self {
        let n = carrier.len();
        DenseMeasure { carrier, weights: vec![1.0 / n as f64; n] }
    }

    /// Random measure with i.i.d. exponential weights, deterministic in the
    /// seed. Almost surely has full support and no invariances.
    pub fn random(carrier: Carrier, seed: u64) -> Self {
        let mut rng = substream(seed, purpose::RANDOM_MEASURE, 0);
        let w: Vec<f64> = (0..carrier.len())
            .map(|_| -(1.0 - rng.random::<f64>()).ln())
            .collect();
        Self::new(carrier, w).expect("exponential weights are valid")
    }

    /// Random measure supported on at most `max_support` points.
    pub fn random_sparse(carrier: Carrier, max_support: usize, seed: u64) -> Self {
        let mut rng = substream(seed, purpose::RANDOM_MEASURE, 1);
        let n = carrier.len();
        let support = rng.random_range(1..=max_support.clamp(1, n));
        let mut w = vec![0.0; n];
        for _ in 0..support {
            let idx = rng.random_range(0..n);
            w[idx] += rng.random::<f64>() + 0.05;
        }
        Self::new(carrier, w).expect("sparse weights are valid")
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Indices carrying more than `eps` mass.
    pub fn support(&self, eps: f64) -> Vec<usize> {
        (0..self.weights.len()).filter(|&i| self.weights[i] > eps).collect()
    }

    pub fn approx_eq(&self, other: &DenseMeasure, tol: f64) -> bool {
        matches!(tv_distance(self, other), Ok(d) if d <= tol)
    }
}

/// Total variation distance: half the L1 distance between weight vectors.
pub fn tv_distance(a: &DenseMeasure, b: &DenseMeasure) -> Result<f64> {
    if !a.carrier.same(&b.carrier) {
        return Err(mismatch(&a.carrier, &b.carrier));
    }
    let sum: f64 = a.weights.iter().zip(&b.weights).map(|(x, y)| (x - y).abs()).sum();
    Ok(0.5 * sum)
}

/// Convolution on a finite group: the distribution of the product of
/// independent draws.
pub fn convolve_group(a: &DenseMeasure, b: &DenseMeasure) -> Result<DenseMeasure> {
    if !a.carrier.same(&b.carrier) {
        return Err(mismatch(&a.carrier, &b.carrier));
    }
    let g = a.carrier.as_group()?;
    let n = g.order();
    let mut w = vec![0.0; n];
    for x in 0..n {
        let wx = a.weights[x];
        if wx == 0.0 {
            continue;
        }
        for y in 0..n {
            let wy = b.weights[y];
            if wy != 0.0 {
                w[g.multiply(x, y)] += wx * wy;
            }
        }
    }
    Ok(DenseMeasure::from_op(a.carrier.clone(), w))
}

/// Convolution on a coset space X = G/K: integrates `f(S(x) k y)` over
/// `a(dx) rho_K(dk) b(dy)` by an exact triple loop.
pub fn convolve_homog(
    a: &DenseMeasure,
    b: &DenseMeasure,
    section: &FiniteSection,
) -> Result<DenseMeasure> {
    if !a.carrier.same(&b.carrier) {
        return Err(mismatch(&a.carrier, &b.carrier));
    }
    let space = a.carrier.as_space()?;
    if !Carrier::Space(section.space().clone()).same(&a.carrier) {
        return Err(mismatch(&Carrier::Space(section.space().clone()), &a.carrier));
    }
    let group = space.group();
    let k_members = space.k().members();
    let k_mass = 1.0 / k_members.len() as f64;
    let n = space.len();
    let mut w = vec![0.0; n];
    for x in 0..n {
        let wx = a.weights[x];
        if wx == 0.0 {
            continue;
        }
        let sx = section.apply(x);
        for &k in k_members {
            let sxk = group.multiply(sx, k);
            for y in 0..n {
                let wy = b.weights[y];
                if wy != 0.0 {
                    w[space.action(sxk, y)] += wx * k_mass * wy;
                }
            }
        }
    }
    Ok(DenseMeasure::from_op(a.carrier.clone(), w))
}

/// Fast path for K-invariant right factors: integrates `f(S(x) y)` without
/// the rho_K average. Checks the invariance precondition and reports the
/// measured deviation on failure.
pub fn convolve_homog_kinv(
    a: &DenseMeasure,
    b: &DenseMeasure,
    tol: f64,
) -> Result<DenseMeasure> {
    if !a.carrier.same(&b.carrier) {
        return Err(mismatch(&a.carrier, &b.carrier));
    }
    let space = a.carrier.as_space()?.clone();
    let deviation = space_invariance_deviation(b)?;
    if deviation > tol {
        return Err(Error::InvarianceViolated { kind: "K-action".into(), deviation });
    }
    let section = space.section();
    let n = space.len();
    let mut w = vec![0.0; n];
    for x in 0..n {
        let wx = a.weights[x];
        if wx == 0.0 {
            continue;
        }
        let sx = section.apply(x);
        for y in 0..n {
            let wy = b.weights[y];
            if wy != 0.0 {
                w[space.action(sx, y)] += wx * wy;
            }
        }
    }
    Ok(DenseMeasure::from_op(a.carrier.clone(), w))
}

/// Carrier-dispatching convolution: group convolution on groups, the
/// canonical-section convolution on coset spaces.
pub fn convolve(a: &DenseMeasure, b: &DenseMeasure) -> Result<DenseMeasure> {
    match &a.carrier {
        Carrier::Group(_) => convolve_group(a, b),
        Carrier::Space(x) => convolve_homog(a, b, &x.section()),
    }
}

/// n-fold convolution power by repeated squaring; `n = 0` returns the point
/// mass at the identity (origin).
pub fn convolve_power(m: &DenseMeasure, n: u32) -> Result<DenseMeasure> {
    if n == 0 {
        return DenseMeasure::dirac(m.carrier.clone(), m.carrier.identity_index());
    }
    let mut base = m.clone();
    let mut acc: Option<DenseMeasure> = None;
    let mut k = n;
    loop {
        if k & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(a) => convolve(&a, &base)?,
            });
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        base = convolve(&base, &base)?;
    }
    Ok(acc.expect("n >= 1"))
}

/// Translation and conjugation maps on a group carrier.
#[derive(Clone, Copy, Debug)]
pub enum GroupMap {
    /// `x -> g x`
    Left(usize),
    /// `x -> x g`
    Right(usize),
    /// `x -> g x g^{-1}`
    Conjugate(usize),
}

/// Pushforward of a group measure under a translation/conjugation map.
pub fn pushforward(m: &DenseMeasure, map: GroupMap) -> Result<DenseMeasure> {
    let g = m.carrier.as_group()?;
    let n = g.order();
    let mut w = vec![0.0; n];
    for x in 0..n {
        let wx = m.weights[x];
        if wx == 0.0 {
            continue;
        }
        let image = match map {
            GroupMap::Left(a) => g.multiply(a, x),
            GroupMap::Right(a) => g.multiply(x, a),
            GroupMap::Conjugate(a) => g.conjugate(a, x),
        };
        w[image] += wx;
    }
    Ok(DenseMeasure::from_op(m.carrier.clone(), w))
}

/// Pushforward of a space measure under the action of a group element.
pub fn translate_space(m: &DenseMeasure, g: usize) -> Result<DenseMeasure> {
    let space = m.carrier.as_space()?;
    let n = space.len();
    let mut w = vec![0.0; n];
    for x in 0..n {
        let wx = m.weights[x];
        if wx != 0.0 {
            w[space.action(g, x)] += wx;
        }
    }
    Ok(DenseMeasure::from_op(m.carrier.clone(), w))
}

/// Pushforward under the natural projection G -> G/K.
pub fn project_measure(m: &DenseMeasure, space: &Arc<CosetSpace>) -> Result<DenseMeasure> {
    let g = m.carrier.as_group()?;
    if !Carrier::Group(space.group().clone()).same(&m.carrier) {
        return Err(mismatch(&Carrier::Group(space.group().clone()), &m.carrier));
    }
    let mut w = vec![0.0; space.len()];
    for x in 0..g.order() {
        w[space.project(x)] += m.weights[x];
    }
    Ok(DenseMeasure::from_op(Carrier::Space(space.clone()), w))
}

/// Lift a measure on X to the unique K-right invariant measure on G that
/// projects back to it: spreads each coset mass over the K-fiber through the
/// section.
pub fn lift_measure(m: &DenseMeasure, section: &FiniteSection) -> Result<DenseMeasure> {
    let space = m.carrier.as_space()?;
    if !Arc::ptr_eq(space, section.space()) && space.label() != section.space().label() {
        return Err(mismatch(
            &m.carrier,
            &Carrier::Space(section.space().clone()),
        ));
    }
    let group = space.group();
    let k_members = space.k().members();
    let k_mass = 1.0 / k_members.len() as f64;
    let mut w = vec![0.0; group.order()];
    for x in 0..space.len() {
        let wx = m.weights[x];
        if wx == 0.0 {
            continue;
        }
        let sx = section.apply(x);
        for &k in k_members {
            w[group.multiply(sx, k)] += wx * k_mass;
        }
    }
    Ok(DenseMeasure::from_op(Carrier::Group(group.clone()), w))
}

/// Invariance notions for measures on a group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupInvariance {
    Left,
    Right,
    Conjugate,
    Bi,
}

impl GroupInvariance {
    pub fn label(&self) -> &'static str {
        match self {
            GroupInvariance::Left => "K-left",
            GroupInvariance::Right => "K-right",
            GroupInvariance::Conjugate => "K-conjugate",
            GroupInvariance::Bi => "K-bi",
        }
    }
}

/// Average the pushforwards of a group measure over a subgroup. The right
/// average equals `m * rho_K`, the left average `rho_K * m`; the output has
/// the corresponding invariance exactly.
pub fn average_group(
    m: &DenseMeasure,
    k: &Subgroup,
    kind: GroupInvariance,
) -> Result<DenseMeasure> {
    let g = m.carrier.as_group()?;
    if !Carrier::Group(k.parent().clone()).same(&m.carrier) {
        return Err(mismatch(&Carrier::Group(k.parent().clone()), &m.carrier));
    }
    let n = g.order();
    let members = k.members();
    let mut w = vec![0.0; n];
    match kind {
        GroupInvariance::Left | GroupInvariance::Right | GroupInvariance::Conjugate => {
            let mass = 1.0 / members.len() as f64;
            for &kk in members {
                for x in 0..n {
                    let wx = m.weights[x];
                    if wx == 0.0 {
                        continue;
                    }
                    let image = match kind {
                        GroupInvariance::Left => g.multiply(kk, x),
                        GroupInvariance::Right => g.multiply(x, kk),
                        GroupInvariance::Conjugate => g.conjugate(kk, x),
                        GroupInvariance::Bi => unreachable!(),
                    };
                    w[image] += wx * mass;
                }
            }
        }
        GroupInvariance::Bi => {
            let mass = 1.0 / (members.len() * members.len()) as f64;
            for &k1 in members {
                for &k2 in members {
                    for x in 0..n {
                        let wx = m.weights[x];
                        if wx != 0.0 {
                            w[g.multiply(g.multiply(k1, x), k2)] += wx * mass;
                        }
                    }
                }
            }
        }
    }
    Ok(DenseMeasure::from_op(m.carrier.clone(), w))
}

/// Average a space measure over the K-action; the output is K-invariant.
pub fn average_space(m: &DenseMeasure) -> Result<DenseMeasure> {
    let space = m.carrier.as_space()?.clone();
    let members = space.k().members();
    let mass = 1.0 / members.len() as f64;
    let mut w = vec![0.0; space.len()];
    for &k in members {
        for x in 0..space.len() {
            let wx = m.weights[x];
            if wx != 0.0 {
                w[space.action(k, x)] += wx * mass;
            }
        }
    }
    Ok(DenseMeasure::from_op(m.carrier.clone(), w))
}

/// Max total-variation deviation of a group measure from invariance over all
/// elements of K.
pub fn group_invariance_deviation(
    m: &DenseMeasure,
    k: &Subgroup,
    kind: GroupInvariance,
) -> Result<f64> {
    m.carrier.as_group()?;
    let mut worst = 0.0f64;
    for &kk in k.members() {
        match kind {
            GroupInvariance::Left => {
                worst = worst.max(tv_distance(&pushforward(m, GroupMap::Left(kk))?, m)?);
            }
            GroupInvariance::Right => {
                worst = worst.max(tv_distance(&pushforward(m, GroupMap::Right(kk))?, m)?);
            }
            GroupInvariance::Conjugate => {
                worst = worst.max(tv_distance(&pushforward(m, GroupMap::Conjugate(kk))?, m)?);
            }
            GroupInvariance::Bi => {
                worst = worst.max(tv_distance(&pushforward(m, GroupMap::Left(kk))?, m)?);
                worst = worst.max(tv_distance(&pushforward(m, GroupMap::Right(kk))?, m)?);
            }
        }
    }
    Ok(worst)
}

pub fn is_group_invariant(
    m: &DenseMeasure,
    k: &Subgroup,
    kind: GroupInvariance,
    tol: f64,
) -> Result<(bool, f64)> {
    let d = group_invariance_deviation(m, k, kind)?;
    Ok((d <= tol, d))
}

/// Max TV deviation of a space measure from K-invariance under the action.
pub fn space_invariance_deviation(m: &DenseMeasure) -> Result<f64> {
    let space = m.carrier.as_space()?.clone();
    let mut worst = 0.0f64;
    for &k in space.k().members() {
        worst = worst.max(tv_distance(&translate_space(m, k)?, m)?);
    }
    Ok(worst)
}

pub fn is_space_invariant(m: &DenseMeasure, tol: f64) -> Result<(bool, f64)> {
    let d = space_invariance_deviation(m)?;
    Ok((d <= tol, d))
}

/// Density of a space measure with respect to the pushforward of counting
/// Haar measure: each coset carries mass |K|.
pub fn density_from_measure(m: &DenseMeasure) -> Result<Vec<f64>> {
    let space = m.carrier.as_space()?;
    let k = space.k().order() as f64;
    Ok(m.weights.iter().map(|w| w / k).collect())
}

/// Measure with the given density with respect to the pushforward counting
/// measure.
pub fn measure_from_density(density: &[f64], space: &Arc<CosetSpace>) -> Result<DenseMeasure> {
    let k = space.k().order() as f64;
    let w: Vec<f64> = density.iter().map(|f| f * k).collect();
    DenseMeasure::new(Carrier::Space(space.clone()), w)
}

/// Convolution of densities on a finite X with respect to counting Haar
/// measure on G: `f1*f2(gK) = sum_h f1(hK) f2(h^{-1} g K)`. Compatible with
/// the measure convolution: the measure with density `f1*f2` equals the
/// convolution of the measures with densities `f1` and `f2`.
pub fn density_convolve(
    f1: &[f64],
    f2: &[f64],
    space: &Arc<CosetSpace>,
) -> Result<Vec<f64>> {
    if f1.len() != space.len() || f2.len() != space.len() {
        return Err(Error::InvalidArgument("density length mismatch".into()));
    }
    let group = space.group();
    let section = space.section();
    let mut out = vec![0.0; space.len()];
    for z in 0..space.len() {
        let gz = section.apply(z);
        let mut acc = 0.0;
        for h in 0..group.order() {
            acc += f1[space.project(h)] * f2[space.project(group.multiply(group.inverse(h), gz))];
        }
        out[z] = acc;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{cyclic, group_by_name, symmetric};
    use proptest::prelude::*;

    fn s3_space() -> Arc<CosetSpace> {
        let s3 = symmetric(3).unwrap();
        let k = Subgroup::new(s3.clone(), &[0, s3.elem_by_name("(12)").unwrap()]).unwrap();
        CosetSpace::new(k).unwrap()
    }

    fn d4_space() -> Arc<CosetSpace> {
        let d4 = group_by_name("D4").unwrap();
        let k = Subgroup::new(d4.clone(), &[0, d4.elem_by_name("s").unwrap()]).unwrap();
        CosetSpace::new(k).unwrap()
    }

    #[test]
    fn dirac_convolution_is_group_multiplication() {
        let z12 = cyclic(12).unwrap();
        let c = Carrier::Group(z12.clone());
        let a = DenseMeasure::dirac(c.clone(), 5).unwrap();
        let b = DenseMeasure::dirac(c.clone(), 9).unwrap();
        let ab = convolve_group(&a, &b).unwrap();
        assert!(ab.approx_eq(&DenseMeasure::dirac(c, 2).unwrap(), 0.0));
    }

    #[test]
    fn uniform_pair_on_z4_enumerates_to_expected_weights() {
        // Independent enumeration of the four (x, y) product pairs.
        let z4 = cyclic(4).unwrap();
        let c = Carrier::Group(z4.clone());
        let u = DenseMeasure::new(c.clone(), vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        let mut oracle = vec![0.0; 4];
        for x in 0..4usize {
            for y in 0..4usize {
                oracle[(x + y) % 4] += u.weight(x) * u.weight(y);
            }
        }
        let got = convolve_group(&u, &u).unwrap();
        assert_eq!(oracle, vec![0.25, 0.5, 0.25, 0.0]);
        for i in 0..4 {
            assert!((got.weight(i) - oracle[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_mass_is_neutral() {
        let s3 = symmetric(3).unwrap();
        let c = Carrier::Group(s3.clone());
        let mu = DenseMeasure::random(c.clone(), 3);
        let e = DenseMeasure::dirac(c, s3.identity()).unwrap();
        assert!(convolve_group(&e, &mu).unwrap().approx_eq(&mu, 1e-15));
        assert!(convolve_group(&mu, &e).unwrap().approx_eq(&mu, 1e-15));
    }

    #[test]
    fn carrier_mismatch_is_a_domain_error() {
        let a = DenseMeasure::uniform(Carrier::Group(cyclic(4).unwrap()));
        let b = DenseMeasure::uniform(Carrier::Group(cyclic(5).unwrap()));
        assert!(matches!(convolve_group(&a, &b), Err(Error::CarrierMismatch { .. })));
        assert!(matches!(tv_distance(&a, &b), Err(Error::CarrierMismatch { .. })));
    }

    #[test]
    fn haar_is_idempotent_under_convolution() {
        for g in [symmetric(3).unwrap(), group_by_name("D4").unwrap(), cyclic(12).unwrap()] {
            for sub in g.subgroups().unwrap() {
                let rho = DenseMeasure::haar(&sub);
                let sq = convolve_group(&rho, &rho).unwrap();
                assert!(tv_distance(&sq, &rho).unwrap() <= 1e-15);
            }
        }
    }

    #[test]
    fn homog_convolution_matches_hand_enumeration() {
        // On S3/{e,(12)}: delta_o is a right identity, and delta_o * delta_x
        // spreads x over the K-orbit.
        let space = s3_space();
        let c = Carrier::Space(space.clone());
        let section = space.section();
        let o = DenseMeasure::dirac(c.clone(), space.origin()).unwrap();
        let g123 = space.group().elem_by_name("(123)").unwrap();
        let x = space.project(g123);
        let dx = DenseMeasure::dirac(c.clone(), x).unwrap();

        // Hand enumeration of f(S(x) k y) over k in K with y = o:
        // project(S(x) k) = x for both k, so delta_x * delta_o = delta_x.
        let right = convolve_homog(&dx, &o, &section).unwrap();
        assert!(right.approx_eq(&dx, 1e-15));

        // delta_o * delta_x averages the K-action on x: half stays at x,
        // half moves to the coset of (12)(123)...
        let left = convolve_homog(&o, &dx, &section).unwrap();
        let k12 = space.group().elem_by_name("(12)").unwrap();
        let moved = space.action(k12, x);
        let mut expect = vec![0.0; space.len()];
        expect[x] += 0.5;
        expect[moved] += 0.5;
        let expect = DenseMeasure::new(c, expect).unwrap();
        assert!(left.approx_eq(&expect, 1e-15));
        assert_ne!(moved, x);
    }

    #[test]
    fn homog_convolution_is_associative() {
        for (space, seed) in [(s3_space(), 5u64), (d4_space(), 6u64)] {
            let c = Carrier::Space(space.clone());
            let section = space.section();
            let m1 = DenseMeasure::random(c.clone(), seed);
            let m2 = DenseMeasure::random(c.clone(), seed + 100);
            let m3 = DenseMeasure::random(c.clone(), seed + 200);
            let lhs =
                convolve_homog(&convolve_homog(&m1, &m2, &section).unwrap(), &m3, &section)
                    .unwrap();
            let rhs =
                convolve_homog(&m1, &convolve_homog(&m2, &m3, &section).unwrap(), &section)
                    .unwrap();
            assert!(tv_distance(&lhs, &rhs).unwrap() <= 1e-14);
        }
    }

    #[test]
    fn kinv_fast_path_agrees_and_guards_its_precondition() {
        let space = s3_space();
        let c = Carrier::Space(space.clone());
        let section = space.section();
        for seed in 0..20 {
            let mu = DenseMeasure::random(c.clone(), 1000 + seed);
            let nu = average_space(&DenseMeasure::random(c.clone(), 2000 + seed)).unwrap();
            let slow = convolve_homog(&mu, &nu, &section).unwrap();
            let fast = convolve_homog_kinv(&mu, &nu, 1e-12).unwrap();
            assert!(tv_distance(&slow, &fast).unwrap() <= 1e-14);
            // delta_o * nu = nu for K-invariant nu.
            let o = DenseMeasure::dirac(c.clone(), space.origin()).unwrap();
            assert!(convolve_homog_kinv(&o, &nu, 1e-12).unwrap().approx_eq(&nu, 1e-14));
        }
        // Non-invariant right factor is rejected with the measured deviation.
        let skew = DenseMeasure::dirac(c, 1).unwrap();
        let o = DenseMeasure::dirac(Carrier::Space(space.clone()), space.origin()).unwrap();
        match convolve_homog_kinv(&o, &skew, 1e-12) {
            Err(Error::InvarianceViolated { deviation, .. }) => assert!(deviation > 0.1),
            other => panic!("expected invariance error, got {other:?}"),
        }
    }

    #[test]
    fn kinv_closure_on_d4() {
        // Both factors K-invariant implies the product is K-invariant.
        let space = d4_space();
        let c = Carrier::Space(space.clone());
        for seed in 0..10 {
            let mu = average_space(&DenseMeasure::random(c.clone(), 31 + seed)).unwrap();
            let nu = average_space(&DenseMeasure::random(c.clone(), 61 + seed)).unwrap();
            let prod = convolve_homog_kinv(&mu, &nu, 1e-12).unwrap();
            assert!(space_invariance_deviation(&prod).unwrap() <= 1e-14);
        }
    }

    #[test]
    fn convolution_power_oracles() {
        let z12 = cyclic(12).unwrap();
        let c = Carrier::Group(z12.clone());
        let mu = DenseMeasure::random(c.clone(), 17);
        assert!(convolve_power(&mu, 1).unwrap().approx_eq(&mu, 0.0));

        // (delta_g)^n = delta_{g^n}
        let d5 = DenseMeasure::dirac(c.clone(), 5).unwrap();
        let p3 = convolve_power(&d5, 3).unwrap();
        assert!(p3.approx_eq(&DenseMeasure::dirac(c.clone(), 3).unwrap(), 0.0));

        // n = 0 returns the identity mass by convention.
        assert!(convolve_power(&mu, 0)
            .unwrap()
            .approx_eq(&DenseMeasure::dirac(c.clone(), 0).unwrap(), 0.0));

        // uniform{0,1}^4 on Z12 is binomial(4, 1/2) on {0..4}; direct 4-fold
        // loop as the oracle.
        let u = DenseMeasure::new(c.clone(), {
            let mut w = vec![0.0; 12];
            w[0] = 0.5;
            w[1] = 0.5;
            w
        })
        .unwrap();
        let mut oracle = vec![0.0; 12];
        for a in 0..2usize {
            for b in 0..2usize {
                for cc in 0..2usize {
                    for d in 0..2usize {
                        oracle[(a + b + cc + d) % 12] += 0.0625;
                    }
                }
            }
        }
        let got = convolve_power(&u, 4).unwrap();
        for i in 0..12 {
            assert!((got.weight(i) - oracle[i]).abs() < 1e-14);
        }
        assert!((got.weight(2) - 0.375).abs() < 1e-14);
    }

    #[test]
    fn pushforward_examples() {
        let s3 = symmetric(3).unwrap();
        let c = Carrier::Group(s3.clone());
        let g = s3.elem_by_name("(123)").unwrap();
        let x = s3.elem_by_name("(12)").unwrap();
        let dx = DenseMeasure::dirac(c.clone(), x).unwrap();
        let lg = pushforward(&dx, GroupMap::Left(g)).unwrap();
        assert!(lg.approx_eq(&DenseMeasure::dirac(c.clone(), s3.multiply(g, x)).unwrap(), 0.0));

        // Haar of the full group is invariant under any translation.
        let haar = DenseMeasure::haar(&Subgroup::full(s3.clone()));
        for a in 0..s3.order() {
            assert!(pushforward(&haar, GroupMap::Right(a)).unwrap().approx_eq(&haar, 1e-15));
        }

        // Projection of a point mass is the point mass of the coset.
        let space = s3_space();
        let pm = project_measure(&dx, &space).unwrap();
        assert!(pm.approx_eq(
            &DenseMeasure::dirac(Carrier::Space(space.clone()), space.project(x)).unwrap(),
            0.0
        ));
    }

    #[test]
    fn lift_of_origin_mass_is_haar_of_k() {
        let space = s3_space();
        let o = DenseMeasure::dirac(Carrier::Space(space.clone()), space.origin()).unwrap();
        let lifted = lift_measure(&o, &space.section()).unwrap();
        assert!(lifted.approx_eq(&DenseMeasure::haar(space.k()), 1e-15));
    }

    #[test]
    fn projection_lift_bijection() {
        let space = d4_space();
        let c = Carrier::Space(space.clone());
        let section = space.section();
        for seed in 0..50 {
            // project(lift(nu)) = nu for every nu on X.
            let nu = DenseMeasure::random(c.clone(), 500 + seed);
            let back = project_measure(&lift_measure(&nu, &section).unwrap(), &space).unwrap();
            assert!(tv_distance(&back, &nu).unwrap() <= 1e-14);

            // lift(project(mu)) = mu for K-right invariant mu.
            let raw = DenseMeasure::random(Carrier::Group(space.group().clone()), 800 + seed);
            let mu = average_group(&raw, space.k(), GroupInvariance::Right).unwrap();
            let roundtrip =
                lift_measure(&project_measure(&mu, &space).unwrap(), &section).unwrap();
            assert!(tv_distance(&roundtrip, &mu).unwrap() <= 1e-14);

            // Lifts are K-right invariant.
            let lifted = lift_measure(&nu, &section).unwrap();
            assert!(
                group_invariance_deviation(&lifted, space.k(), GroupInvariance::Right).unwrap()
                    <= 1e-14
            );
        }
    }

    #[test]
    fn averaging_enforces_invariances() {
        let s4 = symmetric(4).unwrap();
        let c = Carrier::Group(s4.clone());
        let k = Subgroup::from_generators(s4.clone(), &[s4.elem_by_name("(12)").unwrap()]).unwrap();
        let mu = DenseMeasure::random(c.clone(), 4);

        let right = average_group(&mu, &k, GroupInvariance::Right).unwrap();
        assert!(group_invariance_deviation(&right, &k, GroupInvariance::Right).unwrap() <= 1e-14);
        // right average equals mu * rho_K
        let rho = DenseMeasure::haar(&k);
        assert!(right.approx_eq(&convolve_group(&mu, &rho).unwrap(), 1e-14));

        let left = average_group(&mu, &k, GroupInvariance::Left).unwrap();
        assert!(left.approx_eq(&convolve_group(&rho, &mu).unwrap(), 1e-14));

        let conj = average_group(&mu, &k, GroupInvariance::Conjugate).unwrap();
        assert!(
            group_invariance_deviation(&conj, &k, GroupInvariance::Conjugate).unwrap() <= 1e-14
        );

        // Already invariant measures are fixed points.
        assert!(average_group(&right, &k, GroupInvariance::Right).unwrap().approx_eq(&right, 1e-14));

        // A point mass off the subgroup is not right invariant, and its right
        // average is uniform on its coset.
        let g = s4.elem_by_name("(1234)").unwrap();
        let dg = DenseMeasure::dirac(c, g).unwrap();
        assert!(group_invariance_deviation(&dg, &k, GroupInvariance::Right).unwrap() > 0.4);
        let avg = average_group(&dg, &k, GroupInvariance::Right).unwrap();
        let coset: Vec<usize> = k.members().iter().map(|&m| s4.multiply(g, m)).collect();
        for idx in coset {
            assert!((avg.weight(idx) - 1.0 / k.order() as f64).abs() < 1e-15);
        }

        // rho_K is bi-invariant with deviation zero.
        assert_eq!(group_invariance_deviation(&rho, &k, GroupInvariance::Bi).unwrap(), 0.0);
    }

    #[test]
    fn density_convolution_is_compatible_with_measure_convolution() {
        let space = s3_space();
        let c = Carrier::Space(space.clone());
        let section = space.section();
        for seed in 0..20 {
            let m1 = DenseMeasure::random(c.clone(), 9000 + seed);
            let m2 = DenseMeasure::random(c.clone(), 9100 + seed);
            let f1 = density_from_measure(&m1).unwrap();
            let f2 = density_from_measure(&m2).unwrap();
            let f12 = density_convolve(&f1, &f2, &space).unwrap();
            let via_density = measure_from_density(&f12, &space).unwrap();
            let via_measure = convolve_homog(&m1, &m2, &section).unwrap();
            for i in 0..space.len() {
                assert!((via_density.weight(i) - via_measure.weight(i)).abs() < 1e-12);
            }
        }
        // Constant densities convolve to a constant density.
        let n = space.len() as f64;
        let k = space.k().order() as f64;
        let constant = vec![1.0 / (n * k); space.len()];
        let out = density_convolve(&constant, &constant, &space).unwrap();
        for v in &out {
            assert!((v - 1.0 / (n * k)).abs() < 1e-15);
        }
    }

    #[test]
    fn tv_distance_examples() {
        let z4 = cyclic(4).unwrap();
        let c = Carrier::Group(z4);
        let mu = DenseMeasure::random(c.clone(), 8);
        assert_eq!(tv_distance(&mu, &mu).unwrap(), 0.0);
        let a = DenseMeasure::dirac(c.clone(), 0).unwrap();
        let b = DenseMeasure::dirac(c.clone(), 2).unwrap();
        assert_eq!(tv_distance(&a, &b).unwrap(), 1.0);
        // uniform on {0,1} inside Z4 vs Haar on Z4
        let half = DenseMeasure::new(c.clone(), vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        let haar = DenseMeasure::uniform(c);
        assert!((tv_distance(&half, &haar).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn constructor_edge_cases() {
        let c = Carrier::Group(cyclic(4).unwrap());
        assert!(matches!(
            DenseMeasure::new(c.clone(), vec![0.0; 4]),
            Err(Error::EmptyMeasure)
        ));
        assert!(matches!(
            DenseMeasure::new(c.clone(), vec![1.0, -0.5, 0.0, 0.0]),
            Err(Error::NegativeWeight(_))
        ));
        // Tiny negatives are clipped.
        let m = DenseMeasure::new(c, vec![1.0, -1e-13, 0.0, 0.0]).unwrap();
        assert_eq!(m.weight(1), 0.0);
    }

    proptest! {
        #[test]
        fn group_convolution_is_associative_on_z12(
            a in proptest::collection::vec(0.0f64..1.0, 12),
            b in proptest::collection::vec(0.0f64..1.0, 12),
            c in proptest::collection::vec(0.0f64..1.0, 12),
        ) {
            let z12 = cyclic(12).unwrap();
            let carrier = Carrier::Group(z12);
            let make = |w: Vec<f64>| DenseMeasure::new(carrier.clone(), w.iter().map(|x| x + 1e-3).collect());
            let (ma, mb, mc) = (make(a).unwrap(), make(b).unwrap(), make(c).unwrap());
            let lhs = convolve_group(&convolve_group(&ma, &mb).unwrap(), &mc).unwrap();
            let rhs = convolve_group(&ma, &convolve_group(&mb, &mc).unwrap()).unwrap();
            prop_assert!(tv_distance(&lhs, &rhs).unwrap() <= 1e-13);
        }

        #[test]
        fn section_choice_does_not_change_homog_convolution(seed in 0u64..500) {
            let space = s3_space();
            let carrier = Carrier::Space(space.clone());
            let mu = DenseMeasure::random(carrier.clone(), seed);
            let nu = DenseMeasure::random(carrier.clone(), seed ^ 0xabcd);
            let default = convolve_homog(&mu, &nu, &space.section()).unwrap();
            let randomized = convolve_homog(&mu, &nu, &space.random_section(seed)).unwrap();
            prop_assert!(tv_distance(&default, &randomized).unwrap() <= 1e-13);
        }
    }
}

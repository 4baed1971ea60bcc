//! The semigroup-family abstraction and the structural operations on it:
//! grid checks of the semigroup law, factorization through the initial
//! idempotent, projection to G/K, lifting from G/K, and idempotent recovery.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::Subgroup;
use crate::homog::CosetSpace;
use crate::measure::{
    convolve, group_invariance_deviation, lift_measure, project_measure,
    space_invariance_deviation, tv_distance, Carrier, DenseMeasure, GroupInvariance,
};

/// A one-parameter family of dense measures, evaluable at any `t >= 0`.
/// Families are immutable descriptors; evaluation at distinct times is
/// independent and parallel-safe.
pub trait DenseFamily: Send + Sync {
    fn carrier(&self) -> Carrier;
    fn at(&self, t: f64) -> Result<DenseMeasure>;
}

/// Result of one semigroup-law check at a time pair.
#[derive(Clone, Copy, Debug)]
pub struct GridCheck {
    pub s: f64,
    pub t: f64,
    pub deviation: f64,
    pub pass: bool,
}

/// A named deviation at a time, used by the structural reports.
#[derive(Clone, Debug)]
pub struct NamedDeviation {
    pub name: String,
    pub time: f64,
    pub deviation: f64,
    pub pass: bool,
}

/// `TV(mu_s * mu_t, mu_{s+t})`.
pub fn semigroup_deviation(family: &dyn DenseFamily, s: f64, t: f64) -> Result<f64> {
    let prod = convolve(&family.at(s)?, &family.at(t)?)?;
    tv_distance(&prod, &family.at(s + t)?)
}

pub fn semigroup_check(family: &dyn DenseFamily, s: f64, t: f64, tol: f64) -> Result<GridCheck> {
    let deviation = semigroup_deviation(family, s, t)?;
    Ok(GridCheck { s, t, deviation, pass: deviation <= tol })
}

/// Check every ordered pair of grid times.
pub fn semigroup_check_grid(
    family: &dyn DenseFamily,
    grid: &[f64],
    tol: f64,
) -> Result<Vec<GridCheck>> {
    // Evaluate each needed time once; the pairwise products reuse them.
    let mut checks = Vec::with_capacity(grid.len() * grid.len());
    let at: Vec<DenseMeasure> = grid.iter().map(|&t| family.at(t)).collect::<Result<_>>()?;
    for (i, &s) in grid.iter().enumerate() {
        for (j, &t) in grid.iter().enumerate() {
            let prod = convolve(&at[i], &at[j])?;
            let deviation = tv_distance(&prod, &family.at(s + t)?)?;
            checks.push(GridCheck { s, t, deviation, pass: deviation <= tol });
        }
    }
    Ok(checks)
}

/// Pushforward family `t -> pi(mu_t)` on X = G/K.
pub struct ProjectedFamily {
    inner: Arc<dyn DenseFamily>,
    space: Arc<CosetSpace>,
}

impl ProjectedFamily {
    pub fn new(inner: Arc<dyn DenseFamily>, space: Arc<CosetSpace>) -> Self {
        ProjectedFamily { inner, space }
    }
}

impl DenseFamily for ProjectedFamily {
    fn carrier(&self) -> Carrier {
        Carrier::Space(self.space.clone())
    }

    fn at(&self, t: f64) -> Result<DenseMeasure> {
        project_measure(&self.inner.at(t)?, &self.space)
    }
}

/// Lift family `t -> lift(nu_t)`: the K-right invariant measures on G that
/// project to the given family on X.
pub struct LiftedFamily {
    inner: Arc<dyn DenseFamily>,
    space: Arc<CosetSpace>,
}

impl LiftedFamily {
    pub fn new(inner: Arc<dyn DenseFamily>, space: Arc<CosetSpace>) -> Self {
        LiftedFamily { inner, space }
    }
}

impl DenseFamily for LiftedFamily {
    fn carrier(&self) -> Carrier {
        Carrier::Group(self.space.group().clone())
    }

    fn at(&self, t: f64) -> Result<DenseMeasure> {
        lift_measure(&self.inner.at(t)?, &self.space.section())
    }
}

/// Fault-injection wrapper: replaces the measure at one grid time.
pub struct PerturbedFamily {
    inner: Arc<dyn DenseFamily>,
    time: f64,
    replacement: DenseMeasure,
}

impl PerturbedFamily {
    pub fn new(inner: Arc<dyn DenseFamily>, time: f64, replacement: DenseMeasure) -> Self {
        PerturbedFamily { inner, time, replacement }
    }
}

impl DenseFamily for PerturbedFamily {
    fn carrier(&self) -> Carrier {
        self.inner.carrier()
    }

    fn at(&self, t: f64) -> Result<DenseMeasure> {
        if (t - self.time).abs() < 1e-12 {
            Ok(self.replacement.clone())
        } else {
            self.inner.at(t)
        }
    }
}

/// Report of the initial-idempotent factorization consequences: the support
/// H of `mu_0`, and per-time bi-invariance and absorption checks.
#[derive(Clone, Debug)]
pub struct DecomposeReport {
    pub subgroup_members: Vec<usize>,
    pub checks: Vec<NamedDeviation>,
    pub pass: bool,
}

/// Recover H from the initial measure of a family on a finite group and
/// verify the factorization consequences on the grid: `mu_0` is Haar on a
/// subgroup H, every `mu_t` is H-bi-invariant, and `rho_H` is absorbed on
/// both sides. The `e`-initial factor itself is not constructed (it is not
/// unique).
pub fn decompose_semigroup(
    family: &dyn DenseFamily,
    grid: &[f64],
    tol: f64,
) -> Result<DecomposeReport> {
    let carrier = family.carrier();
    let group = carrier.as_group()?.clone();
    let mu0 = family.at(0.0)?;
    let support = mu0.support(1e-12);
    let h = Subgroup::new(group.clone(), &support).map_err(|e| {
        Error::Structure(format!("support of mu_0 is not a subgroup ({e}); not a semigroup"))
    })?;
    let uniform = 1.0 / h.order() as f64;
    let uniform_dev = support
        .iter()
        .map(|&g| (mu0.weight(g) - uniform).abs())
        .fold(0.0f64, f64::max);
    if uniform_dev > 1e-12 {
        return Err(Error::Structure(format!(
            "mu_0 is not uniform on its support: deviation {uniform_dev:.3e}"
        )));
    }
    let rho = DenseMeasure::haar(&h);
    let mut checks = Vec::new();
    for &t in grid {
        let mu_t = family.at(t)?;
        let bi = group_invariance_deviation(&mu_t, &h, GroupInvariance::Bi)?;
        checks.push(NamedDeviation {
            name: "H-bi-invariance".into(),
            time: t,
            deviation: bi,
            pass: bi <= tol,
        });
        let left = tv_distance(&convolve(&rho, &mu_t)?, &mu_t)?;
        checks.push(NamedDeviation {
            name: "left-absorption".into(),
            time: t,
            deviation: left,
            pass: left <= tol,
        });
        let right = tv_distance(&convolve(&mu_t, &rho)?, &mu_t)?;
        checks.push(NamedDeviation {
            name: "right-absorption".into(),
            time: t,
            deviation: right,
            pass: right <= tol,
        });
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(DecomposeReport { subgroup_members: h.members().to_vec(), checks, pass })
}

/// Tolerance for the conjugate-invariance precondition of the projection.
const PROJECT_INV_TOL: f64 = 1e-9;

/// Project a K-conjugate invariant family on G to a family on X = G/K,
/// verifying the precondition at every grid time and the semigroup law of
/// the projected family.
pub fn project_semigroup(
    inner: Arc<dyn DenseFamily>,
    space: &Arc<CosetSpace>,
    grid: &[f64],
    tol: f64,
) -> Result<(ProjectedFamily, Vec<GridCheck>)> {
    for &t in grid {
        let mu_t = inner.at(t)?;
        let dev = group_invariance_deviation(&mu_t, space.k(), GroupInvariance::Conjugate)?;
        if dev > PROJECT_INV_TOL {
            return Err(Error::InvarianceViolated {
                kind: format!("K-conjugate (at t = {t})"),
                deviation: dev,
            });
        }
    }
    let projected = ProjectedFamily::new(inner, space.clone());
    let checks = semigroup_check_grid(&projected, grid, tol)?;
    Ok((projected, checks))
}

/// Report for the lift of a semigroup from X to G.
#[derive(Clone, Debug)]
pub struct LiftReport {
    pub law: Vec<GridCheck>,
    pub bi_invariance: Vec<NamedDeviation>,
    pub base_k_invariance: Vec<NamedDeviation>,
    pub pass: bool,
}

/// Lift a convolution semigroup on X to the K-bi-invariant semigroup on G
/// that projects back to it. The input must satisfy the semigroup law on the
/// grid; the lifted family is checked for K-bi-invariance and the law, and
/// the input measures for K-invariance.
pub fn lift_semigroup(
    inner: Arc<dyn DenseFamily>,
    space: &Arc<CosetSpace>,
    grid: &[f64],
    tol: f64,
) -> Result<(LiftedFamily, LiftReport)> {
    for check in semigroup_check_grid(inner.as_ref(), grid, tol)? {
        if !check.pass {
            return Err(Error::SemigroupViolation(format!(
                "input family deviates by {:.3e} at ({}, {})",
                check.deviation, check.s, check.t
            )));
        }
    }
    let mut base_k_invariance = Vec::new();
    for &t in grid {
        let nu_t = inner.at(t)?;
        let dev = space_invariance_deviation(&nu_t)?;
        base_k_invariance.push(NamedDeviation {
            name: "base-K-invariance".into(),
            time: t,
            deviation: dev,
            pass: dev <= 1e-12,
        });
    }
    let lifted = LiftedFamily::new(inner, space.clone());
    let mut bi_invariance = Vec::new();
    for &t in grid {
        let mu_t = lifted.at(t)?;
        let dev = group_invariance_deviation(&mu_t, space.k(), GroupInvariance::Bi)?;
        bi_invariance.push(NamedDeviation {
            name: "lift-K-bi-invariance".into(),
            time: t,
            deviation: dev,
            pass: dev <= 1e-12,
        });
    }
    let law = semigroup_check_grid(&lifted, grid, tol)?;
    let pass = law.iter().all(|c| c.pass)
        && bi_invariance.iter().all(|c| c.pass)
        && base_k_invariance.iter().all(|c| c.pass);
    Ok((lifted, LiftReport { law, bi_invariance, base_k_invariance, pass }))
}

/// Outcome of the randomized idempotent search.
#[derive(Clone, Debug)]
pub struct IdempotentReport {
    pub measure: DenseMeasure,
    pub support: Vec<usize>,
    pub support_is_subgroup: bool,
    pub uniform_deviation: f64,
    pub idempotency_deviation: f64,
}

/// Find an idempotent by iterating the damped squaring map
/// `nu -> (nu + nu*nu)/2` from a random sparse start. The limit is the Haar
/// measure of the subgroup generated by the initial support.
pub fn find_idempotent(carrier: Carrier, seed: u64, max_iter: usize) -> Result<IdempotentReport> {
    let group = carrier.as_group()?.clone();
    let mut nu = DenseMeasure::random_sparse(carrier.clone(), 3, seed);
    let mut converged = false;
    for _ in 0..max_iter {
        let squared = convolve(&nu, &nu)?;
        if tv_distance(&squared, &nu)? < 1e-13 {
            converged = true;
            break;
        }
        let mixed: Vec<f64> = nu
            .weights()
            .iter()
            .zip(squared.weights())
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        nu = DenseMeasure::new(carrier.clone(), mixed)?;
    }
    if !converged {
        return Err(Error::Unsupported(format!(
            "idempotent iteration did not converge within {max_iter} steps"
        )));
    }
    let support = nu.support(1e-9);
    let support_is_subgroup = Subgroup::new(group, &support).is_ok();
    let uniform = 1.0 / support.len() as f64;
    let uniform_deviation = support
        .iter()
        .map(|&g| (nu.weight(g) - uniform).abs())
        .fold(0.0f64, f64::max);
    let idempotency_deviation = tv_distance(&convolve(&nu, &nu)?, &nu)?;
    Ok(IdempotentReport {
        measure: nu,
        support,
        support_is_subgroup,
        uniform_deviation,
        idempotency_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{cyclic, group_by_name, symmetric};
    use crate::measure::{average_group, translate_space};
    use crate::semigroup::CompoundPoissonSemigroup;

    fn grid() -> Vec<f64> {
        (0..=20).map(|k| k as f64 / 10.0).collect()
    }

    fn d4_center_family() -> (Arc<dyn DenseFamily>, Subgroup) {
        let d4 = group_by_name("D4").unwrap();
        let c = Carrier::Group(d4.clone());
        let center = Subgroup::new(d4.clone(), &[0, d4.elem_by_name("r2").unwrap()]).unwrap();
        // Conjugate-invariant jump commutes with everything, so the family
        // with Haar initial is a genuine semigroup.
        let full = Subgroup::full(d4.clone());
        let jump = average_group(
            &DenseMeasure::random(c.clone(), 77),
            &full,
            GroupInvariance::Conjugate,
        )
        .unwrap();
        let initial = DenseMeasure::haar(&center);
        let sg = CompoundPoissonSemigroup::new(1.0, jump, Some(initial)).unwrap();
        (Arc::new(sg) as Arc<dyn DenseFamily>, center)
    }

    #[test]
    fn compound_poisson_families_satisfy_the_law_on_the_grid() {
        let d4 = group_by_name("D4").unwrap();
        let jump = DenseMeasure::random(Carrier::Group(d4), 13);
        let sg = CompoundPoissonSemigroup::new(1.0, jump, None).unwrap();
        let ts: Vec<f64> = (1..=20).map(|k| k as f64 / 10.0).collect();
        for c in semigroup_check_grid(&sg, &ts, 1e-10).unwrap() {
            assert!(c.pass, "deviation {:.3e} at ({}, {})", c.deviation, c.s, c.t);
        }
        // s = 0 reduces to absorption by the identity mass.
        let c = semigroup_check(&sg, 0.0, 0.7, 1e-12).unwrap();
        assert!(c.pass);
    }

    #[test]
    fn weak_continuity_at_zero() {
        let s4 = symmetric(4).unwrap();
        let jump = DenseMeasure::random(Carrier::Group(s4), 5);
        let sg = CompoundPoissonSemigroup::new(1.0, jump, None).unwrap();
        let dev = tv_distance(&sg.at(1e-6).unwrap(), &sg.at(0.0).unwrap()).unwrap();
        assert!(dev < 1e-5);
        let dev = tv_distance(&sg.at(1e-8).unwrap(), &sg.at(0.0).unwrap()).unwrap();
        assert!(dev < 1e-7);
    }

    #[test]
    fn decompose_recovers_the_initial_subgroup() {
        let (family, center) = d4_center_family();
        let report = decompose_semigroup(family.as_ref(), &grid(), 1e-12).unwrap();
        assert!(report.pass);
        assert_eq!(report.subgroup_members, center.members());
    }

    #[test]
    fn decompose_trivial_initial() {
        let z12 = cyclic(12).unwrap();
        let jump = DenseMeasure::dirac(Carrier::Group(z12), 1).unwrap();
        let sg = Arc::new(CompoundPoissonSemigroup::new(1.0, jump, None).unwrap());
        let report = decompose_semigroup(sg.as_ref(), &grid(), 1e-12).unwrap();
        assert!(report.pass);
        assert_eq!(report.subgroup_members, vec![0]);
    }

    #[test]
    fn decompose_flags_a_corrupted_family() {
        let (family, _) = d4_center_family();
        let carrier = family.carrier();
        let bad = DenseMeasure::random(carrier, 999);
        let corrupted = PerturbedFamily::new(family, 1.0, bad);
        let report = decompose_semigroup(&corrupted, &grid(), 1e-12).unwrap();
        assert!(!report.pass);
        let worst = report
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.deviation)
            .fold(0.0f64, f64::max);
        assert!(worst > 1e-6, "reported deviation {worst}");
    }

    #[test]
    fn decompose_rejects_non_semigroup_initials() {
        let z12 = cyclic(12).unwrap();
        let c = Carrier::Group(z12);
        // A family whose mu_0 is not Haar on a subgroup.
        struct Fake(Carrier);
        impl DenseFamily for Fake {
            fn carrier(&self) -> Carrier {
                self.0.clone()
            }
            fn at(&self, _t: f64) -> Result<DenseMeasure> {
                DenseMeasure::new(self.0.clone(), {
                    let mut w = vec![0.0; 12];
                    w[0] = 0.7;
                    w[5] = 0.3;
                    w
                })
            }
        }
        assert!(matches!(
            decompose_semigroup(&Fake(c), &[0.5], 1e-12),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn projection_of_conjugate_invariant_family_is_a_semigroup() {
        let s4 = symmetric(4).unwrap();
        let c = Carrier::Group(s4.clone());
        let full = Subgroup::full(s4.clone());
        let jump =
            average_group(&DenseMeasure::random(c, 21), &full, GroupInvariance::Conjugate)
                .unwrap();
        let sg: Arc<dyn DenseFamily> =
            Arc::new(CompoundPoissonSemigroup::new(1.0, jump, None).unwrap());
        let k = Subgroup::new(s4.clone(), &[0, s4.elem_by_name("(12)").unwrap()]).unwrap();
        let space = CosetSpace::new(k).unwrap();
        let (projected, checks) = project_semigroup(sg, &space, &grid(), 1e-10).unwrap();
        assert!(checks.iter().all(|c| c.pass));
        // mu_0 = delta_e projects to delta_o.
        let nu0 = projected.at(0.0).unwrap();
        assert!(nu0.approx_eq(
            &DenseMeasure::dirac(Carrier::Space(space.clone()), space.origin()).unwrap(),
            0.0
        ));
    }

    #[test]
    fn projection_rejects_non_invariant_families() {
        let s3 = symmetric(3).unwrap();
        let c = Carrier::Group(s3.clone());
        let jump = DenseMeasure::dirac(c, s3.elem_by_name("(123)").unwrap()).unwrap();
        let sg: Arc<dyn DenseFamily> =
            Arc::new(CompoundPoissonSemigroup::new(1.0, jump, None).unwrap());
        let k = Subgroup::new(s3.clone(), &[0, s3.elem_by_name("(12)").unwrap()]).unwrap();
        let space = CosetSpace::new(k).unwrap();
        match project_semigroup(sg, &space, &[0.5, 1.0], 1e-10) {
            Err(Error::InvarianceViolated { deviation, .. }) => assert!(deviation > 1e-3),
            Err(other) => panic!("expected invariance violation, got {other:?}"),
            Ok(_) => panic!("expected invariance violation, got a projection"),
        }
    }

    #[test]
    fn lifted_family_is_bi_invariant_and_right_averages_the_original() {
        let s3 = symmetric(3).unwrap();
        let c = Carrier::Group(s3.clone());
        let full = Subgroup::full(s3.clone());
        let jump =
            average_group(&DenseMeasure::random(c, 8), &full, GroupInvariance::Conjugate)
                .unwrap();
        let sg = Arc::new(CompoundPoissonSemigroup::new(1.0, jump, None).unwrap());
        let k = Subgroup::new(s3.clone(), &[0, s3.elem_by_name("(12)").unwrap()]).unwrap();
        let space = CosetSpace::new(k).unwrap();
        let (projected, _) = project_semigroup(sg.clone(), &space, &grid(), 1e-10).unwrap();
        let (lifted, report) =
            lift_semigroup(Arc::new(projected), &space, &grid(), 1e-10).unwrap();
        assert!(report.pass);
        // Projected-then-lifted equals the right-K-average of the original.
        for &t in &[0.0, 0.5, 1.0, 2.0] {
            let expect =
                average_group(&sg.at(t).unwrap(), space.k(), GroupInvariance::Right).unwrap();
            let got = lifted.at(t).unwrap();
            assert!(tv_distance(&got, &expect).unwrap() <= 1e-12, "t = {t}");
        }
    }

    #[test]
    fn lifting_the_constant_origin_family_gives_haar_of_k() {
        let s3 = symmetric(3).unwrap();
        let k = Subgroup::new(s3.clone(), &[0, s3.elem_by_name("(12)").unwrap()]).unwrap();
        let space = CosetSpace::new(k).unwrap();
        let c = Carrier::Space(space.clone());
        let jump = DenseMeasure::dirac(c, space.origin()).unwrap();
        // lambda = 0: the family is constantly delta_o.
        let constant: Arc<dyn DenseFamily> =
            Arc::new(CompoundPoissonSemigroup::new(0.0, jump, None).unwrap());
        let (lifted, report) = lift_semigroup(constant, &space, &grid(), 1e-12).unwrap();
        assert!(report.pass);
        let rho_k = DenseMeasure::haar(space.k());
        for &t in &[0.0, 1.0, 2.0] {
            assert!(lifted.at(t).unwrap().approx_eq(&rho_k, 1e-15));
        }
    }

    #[test]
    fn lift_rejects_non_semigroups() {
        let s3 = symmetric(3).unwrap();
        let k = Subgroup::new(s3.clone(), &[0, s3.elem_by_name("(12)").unwrap()]).unwrap();
        let space = CosetSpace::new(k).unwrap();
        let c = Carrier::Space(space.clone());
        struct Fake(Carrier, u64);
        impl DenseFamily for Fake {
            fn carrier(&self) -> Carrier {
                self.0.clone()
            }
            fn at(&self, t: f64) -> Result<DenseMeasure> {
                Ok(DenseMeasure::random(self.0.clone(), self.1 ^ t.to_bits()))
            }
        }
        assert!(matches!(
            lift_semigroup(Arc::new(Fake(c, 3)), &space, &[0.2, 0.4], 1e-10),
            Err(Error::SemigroupViolation(_))
        ));
    }

    #[test]
    fn absorption_on_the_projected_side() {
        // For a family on X = D4/{e,s} with nu_0 = pi(rho_H) and H the Klein
        // subgroup {e, r2, s, r2s} strictly containing K, nu_t is H-invariant
        // and nu_0 absorbs on both sides.
        let d4 = group_by_name("D4").unwrap();
        let c = Carrier::Group(d4.clone());
        let h = Subgroup::new(
            d4.clone(),
            &[
                0,
                d4.elem_by_name("r2").unwrap(),
                d4.elem_by_name("s").unwrap(),
                d4.elem_by_name("r2s").unwrap(),
            ],
        )
        .unwrap();
        let full = Subgroup::full(d4.clone());
        let jump = average_group(
            &DenseMeasure::random(c, 123),
            &full,
            GroupInvariance::Conjugate,
        )
        .unwrap();
        let family: Arc<dyn DenseFamily> = Arc::new(
            CompoundPoissonSemigroup::new(1.0, jump, Some(DenseMeasure::haar(&h))).unwrap(),
        );
        let k = Subgroup::new(d4.clone(), &[0, d4.elem_by_name("s").unwrap()]).unwrap();
        let space = CosetSpace::new(k).unwrap();
        let (projected, checks) = project_semigroup(family, &space, &grid(), 1e-10).unwrap();
        assert!(checks.iter().all(|c| c.pass));
        let nu0 = projected.at(0.0).unwrap();
        // nu_0 is genuinely spread: this instance has H strictly above K.
        assert!(nu0.support(1e-12).len() > 1);
        for &t in &[0.0, 0.3, 1.0, 2.0] {
            let nu_t = projected.at(t).unwrap();
            for &hh in h.members() {
                assert!(
                    tv_distance(&translate_space(&nu_t, hh).unwrap(), &nu_t).unwrap() <= 1e-13
                );
            }
            let left = convolve(&nu0, &nu_t).unwrap();
            let right = convolve(&nu_t, &nu0).unwrap();
            assert!(tv_distance(&left, &nu_t).unwrap() <= 1e-13);
            assert!(tv_distance(&right, &nu_t).unwrap() <= 1e-13);
        }
    }

    #[test]
    fn idempotent_search_lands_on_subgroup_haar() {
        for group in [symmetric(3).unwrap(), group_by_name("D4").unwrap(), cyclic(12).unwrap()] {
            let c = Carrier::Group(group);
            for seed in 0..20u64 {
                let report = find_idempotent(c.clone(), seed, 500).unwrap();
                assert!(report.support_is_subgroup, "seed {seed}: {:?}", report.support);
                assert!(report.uniform_deviation <= 1e-9, "seed {seed}");
                assert!(report.idempotency_deviation <= 1e-12, "seed {seed}");
            }
        }
    }
}

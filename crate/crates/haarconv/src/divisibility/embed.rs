//! Embedding certificates: exhibiting a target measure as the time-1 member
//! of a continuous convolution semigroup, on a group directly or on X = G/K
//! through the lift-embed-project route. Certification is restricted to
//! constructible compound-Poisson families; the general decision problem is
//! out of scope.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::homog::CosetSpace;
use crate::measure::{
    group_invariance_deviation, lift_measure, project_measure, space_invariance_deviation,
    tv_distance, Carrier, DenseMeasure, GroupInvariance,
};
use crate::semigroup::{semigroup_check_grid, CompoundPoissonSemigroup, DenseFamily};

/// Tolerance for the dense semigroup-law and matching checks of a
/// certificate.
pub const EMBED_TOL: f64 = 1e-10;

/// Tolerance for the exact invariance clauses.
const INV_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
pub struct GridDeviation {
    pub s: f64,
    pub t: f64,
    pub deviation: f64,
}

/// A verified embedding of a target measure into a compound-Poisson family.
/// Certificates carry the generating family, so they are replayable.
#[derive(Clone)]
pub struct EmbeddingCertificate {
    pub target: DenseMeasure,
    pub family: CompoundPoissonSemigroup,
    pub space: Option<Arc<CosetSpace>>,
    pub grid: Vec<f64>,
    pub law: Vec<GridDeviation>,
    pub max_law_deviation: f64,
    pub alpha_one_deviation: f64,
    /// Homogeneous case: TV between the lift of the target and the family's
    /// time-1 measure.
    pub lift_match_deviation: Option<f64>,
    /// Homogeneous case: per-grid-time K-right invariance deviations of the
    /// lifted family.
    pub right_invariance: Vec<(f64, f64)>,
    pub failure: Option<String>,
    pub pass: bool,
}

impl EmbeddingCertificate {
    pub fn carrier_label(&self) -> String {
        self.target.carrier().label()
    }
}

fn law_deviations(
    family: &dyn DenseFamily,
    grid: &[f64],
) -> Result<(Vec<GridDeviation>, f64)> {
    let checks = semigroup_check_grid(family, grid, EMBED_TOL)?;
    let mut worst = 0.0f64;
    let rows = checks
        .into_iter()
        .map(|c| {
            worst = worst.max(c.deviation);
            GridDeviation { s: c.s, t: c.t, deviation: c.deviation }
        })
        .collect();
    Ok((rows, worst))
}

/// Certify the embedding of `spec`'s time-1 measure into the family
/// `t -> spec.at(t)` on its own carrier.
pub fn embed_compound_poisson(
    spec: &CompoundPoissonSemigroup,
    grid: &[f64],
) -> Result<EmbeddingCertificate> {
    let target = spec.measure_at(1.0)?;
    let (law, max_law_deviation) = law_deviations(spec, grid)?;
    let alpha_one_deviation = tv_distance(&spec.measure_at(1.0)?, &target)?;
    let pass = max_law_deviation <= EMBED_TOL && alpha_one_deviation <= EMBED_TOL;
    Ok(EmbeddingCertificate {
        target,
        family: spec.clone(),
        space: None,
        grid: grid.to_vec(),
        law,
        max_law_deviation,
        alpha_one_deviation,
        lift_match_deviation: None,
        right_invariance: Vec::new(),
        failure: if pass { None } else { Some("semigroup law deviation".into()) },
        pass,
    })
}

/// Certify the embedding of a measure on X = G/K through the hint family on
/// G: the lift of the target must match the hint's time-1 measure, the hint
/// family must be K-right invariant on the grid, and the projected family
/// must satisfy the semigroup law with the target at time 1.
pub fn embed_homogeneous(
    alpha: &DenseMeasure,
    space: &Arc<CosetSpace>,
    hint: &CompoundPoissonSemigroup,
    grid: &[f64],
) -> Result<EmbeddingCertificate> {
    let space_carrier = Carrier::Space(space.clone());
    if !alpha.carrier().same(&space_carrier) {
        return Err(Error::CarrierMismatch {
            lhs: alpha.carrier().label(),
            rhs: space_carrier.label(),
        });
    }
    let group_carrier = Carrier::Group(space.group().clone());
    if !hint.jump().carrier().same(&group_carrier) {
        return Err(Error::CarrierMismatch {
            lhs: hint.jump().carrier().label(),
            rhs: group_carrier.label(),
        });
    }

    let mut failure = None;

    // Lift the target and match it against the hint's time-1 measure.
    let lifted_target = lift_measure(alpha, &space.section())?;
    let mu1 = hint.measure_at(1.0)?;
    let lift_match = tv_distance(&lifted_target, &mu1)?;
    if lift_match > EMBED_TOL {
        failure = Some(format!(
            "lift of the target deviates from the hint's time-1 measure by {lift_match:.3e}"
        ));
    }

    // The hint family must consist of K-right invariant measures; this is
    // what makes its projection a semigroup.
    let mut right_invariance = Vec::with_capacity(grid.len());
    for &t in grid {
        let dev = group_invariance_deviation(&hint.measure_at(t)?, space.k(), GroupInvariance::Right)?;
        if dev > INV_TOL && failure.is_none() {
            failure = Some(format!(
                "hint family is not K-right invariant at t = {t} (deviation {dev:.3e})"
            ));
        }
        right_invariance.push((t, dev));
    }

    // Projected family and its checks.
    struct Pushed<'a> {
        hint: &'a CompoundPoissonSemigroup,
        space: Arc<CosetSpace>,
    }
    impl DenseFamily for Pushed<'_> {
        fn carrier(&self) -> Carrier {
            Carrier::Space(self.space.clone())
        }
        fn at(&self, t: f64) -> Result<DenseMeasure> {
            project_measure(&self.hint.measure_at(t)?, &self.space)
        }
    }
    let pushed = Pushed { hint, space: space.clone() };
    let (law, max_law_deviation) = law_deviations(&pushed, grid)?;
    let alpha_one_deviation = tv_distance(&pushed.at(1.0)?, alpha)?;
    if max_law_deviation > EMBED_TOL && failure.is_none() {
        failure = Some(format!("projected law deviation {max_law_deviation:.3e}"));
    }
    if alpha_one_deviation > EMBED_TOL && failure.is_none() {
        failure = Some(format!("alpha_1 deviates from the target by {alpha_one_deviation:.3e}"));
    }

    Ok(EmbeddingCertificate {
        target: alpha.clone(),
        family: hint.clone(),
        space: Some(space.clone()),
        grid: grid.to_vec(),
        law,
        max_law_deviation,
        alpha_one_deviation,
        lift_match_deviation: Some(lift_match),
        right_invariance,
        pass: failure.is_none(),
        failure,
    })
}

/// Invariance consequences verified on a certified instance: the lifted
/// K-right invariant measure is K-bi-invariant, and the target on X is
/// K-invariant.
#[derive(Clone, Copy, Debug)]
pub struct InvarianceReport {
    pub lifted_bi_invariance: f64,
    pub target_k_invariance: Option<f64>,
    pub pass: bool,
}

pub fn invariance_of_embedded(cert: &EmbeddingCertificate) -> Result<InvarianceReport> {
    if !cert.pass {
        return Err(Error::InvalidArgument(
            "invariance consequences need a passing certificate".into(),
        ));
    }
    match &cert.space {
        Some(space) => {
            let lifted = lift_measure(&cert.target, &space.section())?;
            let bi = group_invariance_deviation(&lifted, space.k(), GroupInvariance::Bi)?;
            let k_inv = space_invariance_deviation(&cert.target)?;
            Ok(InvarianceReport {
                lifted_bi_invariance: bi,
                target_k_invariance: Some(k_inv),
                pass: bi <= INV_TOL && k_inv <= INV_TOL,
            })
        }
        None => {
            // On the group itself K is trivial and the clauses are vacuous.
            Ok(InvarianceReport {
                lifted_bi_invariance: 0.0,
                target_k_invariance: None,
                pass: true,
            })
        }
    }
}

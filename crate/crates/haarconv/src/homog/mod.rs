//! Coset spaces X = G/K: the projection, section maps with `project ∘ section
//! = id`, and the G-action, for finite carriers and for S² = SO(3)/SO(2).

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, Rotation, Subgroup};
use crate::rng::{hash_floats, purpose, substream};

/// Finite coset space G/K. Points are coset indices; the origin `eK` is
/// always index 0 and its canonical representative is the identity.
#[derive(Debug)]
pub struct CosetSpace {
    group: Arc<FiniteGroup>,
    subgroup: Subgroup,
    cosets: Vec<Vec<usize>>,
    coset_of: Vec<usize>,
    reps: Vec<usize>,
    label: String,
}

impl CosetSpace {
    pub fn new(subgroup: Subgroup) -> Result<Arc<Self>> {
        let group = subgroup.parent().clone();
        let order = group.order();
        let mut coset_of = vec![usize::MAX; order];
        let mut cosets: Vec<Vec<usize>> = Vec::new();
        let mut reps: Vec<usize> = Vec::new();
        // The identity's coset first, then ascending scan: origin index is 0.
        let mut seeds: Vec<usize> = Vec::with_capacity(order);
        seeds.push(group.identity());
        seeds.extend((0..order).filter(|&g| g != group.identity()));
        for g in seeds {
            if coset_of[g] != usize::MAX {
                continue;
            }
            let idx = cosets.len();
            let mut members: Vec<usize> =
                subgroup.members().iter().map(|&k| group.multiply(g, k)).collect();
            members.sort_unstable();
            for &m in &members {
                coset_of[m] = idx;
            }
            // Canonical representative: the identity at the origin, the
            // smallest member elsewhere.
            reps.push(if idx == 0 { group.identity() } else { members[0] });
            cosets.push(members);
        }
        let label = format!("{}/{}", group.name(), subgroup.label());
        Ok(Arc::new(CosetSpace { group, subgroup, cosets, coset_of, reps, label }))
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn k(&self) -> &Subgroup {
        &self.subgroup
    }

    /// Number of cosets.
    pub fn len(&self) -> usize {
        self.cosets.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn origin(&self) -> usize {
        0
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn coset_members(&self, x: usize) -> &[usize] {
        &self.cosets[x]
    }

    /// Natural projection `g -> gK`.
    #[inline]
    pub fn project(&self, g: usize) -> usize {
        self.coset_of[g]
    }

    /// `g · xK = (g S(x)) K`; independent of the representative.
    #[inline]
    pub fn action(&self, g: usize, x: usize) -> usize {
        self.coset_of[self.group.multiply(g, self.reps[x])]
    }

    /// The canonical section (stored representatives).
    pub fn section(self: &Arc<Self>) -> FiniteSection {
        FiniteSection { space: self.clone(), reps: self.reps.clone() }
    }

    /// A randomized section: an arbitrary representative per coset,
    /// deterministic in the seed. Used to exercise section independence.
    pub fn random_section(self: &Arc<Self>, seed: u64) -> FiniteSection {
        let reps = (0..self.len())
            .map(|x| {
                let mut rng = substream(seed, purpose::SECTION_PICK, x as u64);
                let members = &self.cosets[x];
                members[rng.random_range(0..members.len())]
            })
            .collect();
        FiniteSection { space: self.clone(), reps }
    }

    pub fn point_label(&self, x: usize) -> String {
        format!("{}K", self.group.elem_name(self.reps[x]))
    }
}

/// A section map for a finite coset space: a chosen representative per coset.
#[derive(Clone, Debug)]
pub struct FiniteSection {
    space: Arc<CosetSpace>,
    reps: Vec<usize>,
}

impl FiniteSection {
    pub fn space(&self) -> &Arc<CosetSpace> {
        &self.space
    }

    /// `S(x)`, a group element with `project(S(x)) = x`.
    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.reps[x]
    }
}

/// A point on the unit sphere S², stored as a unit 3-vector.
#[derive(Clone, Copy, Debug)]
pub struct S2Point {
    v: [f64; 3],
}

impl S2Point {
    pub const NORTH: S2Point = S2Point { v: [0.0, 0.0, 1.0] };

    pub fn new(v: [f64; 3]) -> Result<Self> {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !n.is_finite() || n < 1e-12 {
            return Err(Error::InvalidArgument("sphere point norm too small".into()));
        }
        Ok(S2Point { v: [v[0] / n, v[1] / n, v[2] / n] })
    }

    pub fn coords(&self) -> [f64; 3] {
        self.v
    }

    pub fn chordal_distance(&self, other: &S2Point) -> f64 {
        let d = [self.v[0] - other.v[0], self.v[1] - other.v[1], self.v[2] - other.v[2]];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }

    pub fn approx_eq(&self, other: &S2Point, tol: f64) -> bool {
        self.chordal_distance(other) <= tol
    }
}

/// S² as SO(3)/SO(2): K is the rotations about the z-axis and the origin is
/// the north pole.
pub struct SphereSpace;

impl SphereSpace {
    pub const LABEL: &'static str = "SO3/SO2";

    /// `g -> g · north`.
    pub fn project(g: &Rotation) -> S2Point {
        S2Point::new(g.apply(S2Point::NORTH.coords())).expect("rotation preserves the unit norm")
    }

    /// Geodesic section: the rotation about `z × x` by `arccos(z · x)`.
    /// Discontinuous only at the south pole, which is pinned to the rotation
    /// by pi about the x-axis; `section(north)` is the identity.
    pub fn section(x: &S2Point) -> Rotation {
        let [px, py, pz] = x.coords();
        if pz >= 1.0 - 1e-15 {
            return Rotation::IDENTITY;
        }
        if pz <= -1.0 + 1e-15 {
            return Rotation::from_axis_angle([1.0, 0.0, 0.0], PI).unwrap();
        }
        // z cross x = (-py, px, 0)
        let axis = [-py, px, 0.0];
        let angle = pz.clamp(-1.0, 1.0).acos();
        Rotation::from_axis_angle(axis, angle).unwrap()
    }

    /// The section post-multiplied by a z-rotation whose angle is derived
    /// from the point and the seed: still a section, wildly discontinuous.
    pub fn twisted_section(x: &S2Point, seed: u64) -> Rotation {
        let h = hash_floats(&x.coords());
        let mut rng = substream(seed, purpose::SECTION_TWIST, h);
        let angle: f64 = rng.random_range(0.0..(2.0 * PI));
        Self::section(x).multiply(&Rotation::about_z(angle))
    }

    /// The G-action on S² is the rotation applied to the point directly.
    pub fn action(g: &Rotation, x: &S2Point) -> S2Point {
        S2Point::new(g.apply(x.coords())).expect("rotation preserves the unit norm")
    }

    /// Haar draw from K = SO(2): a uniform z-rotation.
    pub fn haar_k<R: Rng + ?Sized>(rng: &mut R) -> Rotation {
        Rotation::about_z(rng.random_range(0.0..(2.0 * PI)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{group_by_name, haar_rotations};
    use std::f64::consts::PI;

    fn s3_mod_12() -> Arc<CosetSpace> {
        let s3 = group_by_name("S3").unwrap();
        let k = Subgroup::new(s3.clone(), &[0, s3.elem_by_name("(12)").unwrap()]).unwrap();
        CosetSpace::new(k).unwrap()
    }

    #[test]
    fn finite_projection_and_origin() {
        let x = s3_mod_12();
        let g = x.group().clone();
        assert_eq!(x.len(), 3);
        assert_eq!(x.project(g.identity()), x.origin());
        // (12) lies in K, so it projects to the origin.
        assert_eq!(x.project(g.elem_by_name("(12)").unwrap()), x.origin());
        // Cosets partition the group.
        let total: usize = (0..x.len()).map(|c| x.coset_members(c).len()).sum();
        assert_eq!(total, g.order());
    }

    #[test]
    fn section_is_right_inverse_of_projection() {
        let x = s3_mod_12();
        let section = x.section();
        assert_eq!(section.apply(x.origin()), x.group().identity());
        for c in 0..x.len() {
            assert_eq!(x.project(section.apply(c)), c);
        }
        for seed in 0..20 {
            let rs = x.random_section(seed);
            for c in 0..x.len() {
                assert_eq!(x.project(rs.apply(c)), c);
            }
        }
    }

    #[test]
    fn action_law_and_section_defect_land_in_k() {
        let x = s3_mod_12();
        let g = x.group().clone();
        let section = x.section();
        for a in 0..g.order() {
            for b in 0..g.order() {
                for c in 0..x.len() {
                    assert_eq!(x.action(a, x.action(b, c)), x.action(g.multiply(a, b), c));
                }
            }
            // S(π(a)) = a k for some k in K.
            let defect = g.multiply(g.inverse(section.apply(x.project(a))), a);
            assert!(x.k().contains(defect));
        }
        // action(g, o) = project(g)
        for a in 0..g.order() {
            assert_eq!(x.action(a, x.origin()), x.project(a));
        }
    }

    #[test]
    fn sphere_projection_section_roundtrip() {
        let quarter_x = Rotation::from_axis_angle([1.0, 0.0, 0.0], PI / 2.0).unwrap();
        let p = SphereSpace::project(&quarter_x);
        assert!(p.approx_eq(&S2Point::new([0.0, -1.0, 0.0]).unwrap(), 1e-12));

        // section((1,0,0)) is the rotation by pi/2 about the y-axis.
        let px = S2Point::new([1.0, 0.0, 0.0]).unwrap();
        let s = SphereSpace::section(&px);
        let expect = Rotation::from_axis_angle([0.0, 1.0, 0.0], PI / 2.0).unwrap();
        assert!(s.approx_eq(&expect, 1e-12));
        assert!(SphereSpace::project(&s).approx_eq(&px, 1e-12));

        // Antipode convention: rotation by pi about the x-axis.
        let south = S2Point::new([0.0, 0.0, -1.0]).unwrap();
        let ss = SphereSpace::section(&south);
        assert!(ss.approx_eq(&Rotation::from_axis_angle([1.0, 0.0, 0.0], PI).unwrap(), 1e-12));
        assert!(SphereSpace::project(&ss).approx_eq(&south, 1e-12));
    }

    #[test]
    fn sphere_sections_invert_projection_in_bulk() {
        for (i, g) in haar_rotations(100_000, 31).into_iter().enumerate() {
            let x = SphereSpace::project(&g);
            let back = SphereSpace::project(&SphereSpace::section(&x));
            assert!(back.chordal_distance(&x) < 1e-10);
            if i % 97 == 0 {
                let tw = SphereSpace::twisted_section(&x, 5);
                assert!(SphereSpace::project(&tw).chordal_distance(&x) < 1e-10);
            }
        }
    }

    #[test]
    fn sphere_action_agrees_with_section_route() {
        let gs = haar_rotations(200, 11);
        let xs = haar_rotations(200, 12);
        for (g, xr) in gs.iter().zip(&xs) {
            let x = SphereSpace::project(xr);
            let direct = SphereSpace::action(g, &x);
            let through_section = SphereSpace::project(&g.multiply(&SphereSpace::section(&x)));
            assert!(direct.chordal_distance(&through_section) < 1e-10);
        }
    }
}

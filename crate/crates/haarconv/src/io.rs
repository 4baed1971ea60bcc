//! File formats and descriptor parsing: measure JSON, compound-Poisson spec
//! JSON, embedding-certificate JSON, time grids, and `G/K` space
//! descriptors.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::divisibility::{EmbeddingCertificate, GridDeviation};
use crate::error::{Error, Result};
use crate::group::{group_by_name, Rotation, Subgroup};
use crate::homog::{CosetSpace, S2Point};
use crate::measure::{Carrier, DenseMeasure, EmpiricalMeasure};
use crate::semigroup::CompoundPoissonSemigroup;

/// A resolved space descriptor.
#[derive(Clone)]
pub enum SpaceHandle {
    Finite(Arc<CosetSpace>),
    Sphere,
}

/// Parse `G/K` descriptors: `SO3/SO2`, `S3/K1` (subgroup by index into the
/// canonical subgroup list), or `S3/{e,(12)}` (subgroup by element names or
/// indices).
pub fn parse_space(descriptor: &str) -> Result<SpaceHandle> {
    if descriptor == "SO3/SO2" {
        return Ok(SpaceHandle::Sphere);
    }
    let (group_name, k_part) = descriptor
        .split_once('/')
        .ok_or_else(|| Error::Descriptor(format!("expected G/K, got {descriptor}")))?;
    let group = group_by_name(group_name)?;
    let subgroup = if let Some(body) = k_part.strip_prefix('{').and_then(|s| s.strip_suffix('}')) {
        let mut members = Vec::new();
        for token in body.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let idx = match group.elem_by_name(token) {
                Some(i) => i,
                None => token.parse::<usize>().map_err(|_| {
                    Error::Descriptor(format!("unknown element {token} in {group_name}"))
                })?,
            };
            members.push(idx);
        }
        Subgroup::new(group.clone(), &members)?
    } else if let Some(idx) = k_part.strip_prefix('K').and_then(|s| s.parse::<usize>().ok()) {
        let subs = group.subgroups()?;
        subs.get(idx)
            .cloned()
            .ok_or_else(|| {
                Error::Descriptor(format!(
                    "{group_name} has {} subgroups, index {idx} out of range",
                    subs.len()
                ))
            })?
    } else {
        return Err(Error::Descriptor(format!("cannot parse subgroup part {k_part}")));
    };
    Ok(SpaceHandle::Finite(CosetSpace::new(subgroup)?))
}

/// Parse a dense-measure carrier: a group name or a finite-space descriptor.
pub fn parse_dense_carrier(name: &str) -> Result<Carrier> {
    if name.contains('/') {
        match parse_space(name)? {
            SpaceHandle::Finite(space) => Ok(Carrier::Space(space)),
            SpaceHandle::Sphere => Err(Error::Descriptor(
                "the sphere carries empirical measures, not dense ones".into(),
            )),
        }
    } else {
        Ok(Carrier::Group(group_by_name(name)?))
    }
}

/// Parse `start:end:step` (inclusive end) or a comma-separated list of
/// times.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = |msg: &str| Error::Descriptor(format!("grid {text}: {msg}"));
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:end:step"));
        }
        let start: f64 = parts[0].parse().map_err(|_| bad("bad start"))?;
        let end: f64 = parts[1].parse().map_err(|_| bad("bad end"))?;
        let step: f64 = parts[2].parse().map_err(|_| bad("bad step"))?;
        if !(step > 0.0) || end < start || start < 0.0 {
            return Err(bad("need start >= 0, end >= start, step > 0"));
        }
        let count = ((end - start) / step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| start + step * i as f64).collect())
    } else {
        let mut grid = Vec::new();
        for token in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let t: f64 = token.parse().map_err(|_| bad("bad time value"))?;
            if t < 0.0 {
                return Err(bad("times must be nonnegative"));
            }
            grid.push(t);
        }
        if grid.is_empty() {
            return Err(bad("empty"));
        }
        Ok(grid)
    }
}

/// On-disk measure representation.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureRecord {
    Dense { carrier: String, weights: Vec<f64> },
    Empirical { carrier: String, particles: Vec<(Vec<f64>, f64)> },
}

/// A measure loaded from disk, typed by its carrier.
#[derive(Clone)]
pub enum LoadedMeasure {
    Dense(DenseMeasure),
    So3(EmpiricalMeasure<Rotation>),
    Sphere(EmpiricalMeasure<S2Point>),
}

impl LoadedMeasure {
    pub fn carrier_label(&self) -> String {
        match self {
            LoadedMeasure::Dense(m) => m.carrier().label(),
            LoadedMeasure::So3(_) => "SO3".into(),
            LoadedMeasure::Sphere(_) => "SO3/SO2".into(),
        }
    }
}

pub fn measure_from_record(record: &MeasureRecord) -> Result<LoadedMeasure> {
    match record {
        MeasureRecord::Dense { carrier, weights } => {
            let c = parse_dense_carrier(carrier)?;
            Ok(LoadedMeasure::Dense(DenseMeasure::new(c, weights.clone())?))
        }
        MeasureRecord::Empirical { carrier, particles } => match carrier.as_str() {
            "SO3" => {
                let pts = particles
                    .iter()
                    .map(|(coords, w)| {
                        if coords.len() != 4 {
                            return Err(Error::Descriptor(
                                "SO3 particles are [w, x, y, z] quaternions".into(),
                            ));
                        }
                        let q =
                            Rotation::from_quaternion([coords[0], coords[1], coords[2], coords[3]])?;
                        Ok((q, *w))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(LoadedMeasure::So3(EmpiricalMeasure::new(pts, 0)?))
            }
            "SO3/SO2" => {
                let pts = particles
                    .iter()
                    .map(|(coords, w)| {
                        if coords.len() != 3 {
                            return Err(Error::Descriptor(
                                "sphere particles are [x, y, z] unit vectors".into(),
                            ));
                        }
                        Ok((S2Point::new([coords[0], coords[1], coords[2]])?, *w))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(LoadedMeasure::Sphere(EmpiricalMeasure::new(pts, 0)?))
            }
            other => Err(Error::Descriptor(format!(
                "empirical measures live on SO3 or SO3/SO2, got {other}"
            ))),
        },
    }
}

pub fn record_from_dense(m: &DenseMeasure) -> MeasureRecord {
    MeasureRecord::Dense { carrier: m.carrier().label(), weights: m.weights().to_vec() }
}

pub fn record_from_so3(m: &EmpiricalMeasure<Rotation>) -> MeasureRecord {
    MeasureRecord::Empirical {
        carrier: "SO3".into(),
        particles: m
            .particles()
            .iter()
            .map(|(p, w)| (p.quaternion().to_vec(), *w))
            .collect(),
    }
}

pub fn record_from_sphere(m: &EmpiricalMeasure<S2Point>) -> MeasureRecord {
    MeasureRecord::Empirical {
        carrier: "SO3/SO2".into(),
        particles: m.particles().iter().map(|(p, w)| (p.coords().to_vec(), *w)).collect(),
    }
}

/// On-disk compound-Poisson family description.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CpSpecRecord {
    pub carrier: String,
    pub rate: f64,
    pub jump: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
}

pub fn cp_from_record(record: &CpSpecRecord) -> Result<CompoundPoissonSemigroup> {
    let carrier = parse_dense_carrier(&record.carrier)?;
    let jump = DenseMeasure::new(carrier.clone(), record.jump.clone())?;
    let initial = record
        .initial
        .as_ref()
        .map(|w| DenseMeasure::new(carrier.clone(), w.clone()))
        .transpose()?;
    CompoundPoissonSemigroup::new(record.rate, jump, initial)
}

pub fn record_from_cp(spec: &CompoundPoissonSemigroup) -> CpSpecRecord {
    CpSpecRecord {
        carrier: spec.jump().carrier().label(),
        rate: spec.rate(),
        jump: spec.jump().weights().to_vec(),
        initial: Some(spec.initial().weights().to_vec()),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LawRow {
    pub s: f64,
    pub t: f64,
    pub deviation: f64,
}

/// Serializable embedding certificate; replayable through
/// [`replay_certificate`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub carrier: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub grid: Vec<f64>,
    pub target_weights: Vec<f64>,
    pub family: CpSpecRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<String>,
    pub max_law_deviation: f64,
    pub alpha_one_deviation: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lift_match_deviation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_right_invariance_deviation: Option<f64>,
    pub law: Vec<LawRow>,
}

pub fn record_from_certificate(cert: &EmbeddingCertificate) -> CertificateRecord {
    let max_right = cert
        .right_invariance
        .iter()
        .map(|(_, d)| *d)
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.max(d))));
    CertificateRecord {
        carrier: cert.target.carrier().label(),
        pass: cert.pass,
        failure: cert.failure.clone(),
        grid: cert.grid.clone(),
        target_weights: cert.target.weights().to_vec(),
        family: record_from_cp(&cert.family),
        space: cert.space.as_ref().map(|s| s.label().to_string()),
        max_law_deviation: cert.max_law_deviation,
        alpha_one_deviation: cert.alpha_one_deviation,
        lift_match_deviation: cert.lift_match_deviation,
        max_right_invariance_deviation: max_right,
        law: cert
            .law
            .iter()
            .map(|GridDeviation { s, t, deviation }| LawRow { s: *s, t: *t, deviation: *deviation })
            .collect(),
    }
}

/// Rebuild and re-verify the certificate described by a record.
pub fn replay_certificate(record: &CertificateRecord) -> Result<EmbeddingCertificate> {
    let family = cp_from_record(&record.family)?;
    match &record.space {
        Some(desc) => {
            let SpaceHandle::Finite(space) = parse_space(desc)? else {
                return Err(Error::Descriptor("certificates replay on finite spaces".into()));
            };
            let target = DenseMeasure::new(
                Carrier::Space(space.clone()),
                record.target_weights.clone(),
            )?;
            crate::divisibility::embed_homogeneous(&target, &space, &family, &record.grid)
        }
        None => crate::divisibility::embed_compound_poisson(&family, &record.grid),
    }
}

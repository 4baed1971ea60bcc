//! Deterministic report writers: identical config and seed produce
//! byte-identical files.

use haarconv::semigroup::{GridCheck, NamedDeviation};
use haarconv::verify::CheckRow;

pub fn verify_csv(seed: u64, rows: &[CheckRow]) -> String {
    let mut out = format!("# seed={seed}\nsuite,case,metric,value,tol,pass\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:e},{:e},{}\n",
            r.suite, r.case, r.metric, r.value, r.tol, r.pass
        ));
    }
    out
}

/// Rows of the semigroup report: `t,s,deviation,test,pass`.
pub struct SemigroupRow {
    pub t: f64,
    pub s: f64,
    pub deviation: f64,
    pub test: String,
    pub pass: bool,
}

impl From<&GridCheck> for SemigroupRow {
    fn from(c: &GridCheck) -> Self {
        SemigroupRow { t: c.t, s: c.s, deviation: c.deviation, test: "law".into(), pass: c.pass }
    }
}

impl From<&NamedDeviation> for SemigroupRow {
    fn from(c: &NamedDeviation) -> Self {
        SemigroupRow {
            t: c.time,
            s: 0.0,
            deviation: c.deviation,
            test: c.name.clone(),
            pass: c.pass,
        }
    }
}

pub fn semigroup_csv(seed: u64, rows: &[SemigroupRow]) -> String {
    let mut out = format!("# seed={seed}\nt,s,deviation,test,pass\n");
    for r in rows {
        out.push_str(&format!(
            "{:e},{:e},{:e},{},{}\n",
            r.t, r.s, r.deviation, r.test, r.pass
        ));
    }
    out
}

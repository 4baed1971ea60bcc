//! Exhaustive nth-root search on small cyclic groups through the discrete
//! Fourier transform: the DFT turns convolution into coefficientwise
//! products, so every root corresponds to a branch choice of coefficient
//! roots. The search enumerates branches lexicographically (principal branch
//! first) and returns the first candidate that verifies.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::divisibility::roots::verify_root;
use crate::error::{Error, Result};
use crate::exec;
use crate::measure::DenseMeasure;

const MAX_MODULUS: usize = 8;
const MAX_ROOT_ORDER: u32 = 4;

/// Result of the branch search: a verified root with its branch index
/// digits, or the exhausted branch count.
#[derive(Clone, Debug)]
pub enum DftRootOutcome {
    Found { root: DenseMeasure, branch: Vec<u32> },
    NoRoot { branches_searched: u64 },
}

fn dft(weights: &[f64]) -> Vec<Complex64> {
    let m = weights.len();
    (0..m)
        .map(|j| {
            (0..m)
                .map(|k| {
                    let phase = -TAU * (j * k) as f64 / m as f64;
                    Complex64::from_polar(weights[k], phase)
                })
                .sum()
        })
        .collect()
}

fn inverse_dft(coeffs: &[Complex64]) -> Vec<Complex64> {
    let m = coeffs.len();
    (0..m)
        .map(|k| {
            coeffs
                .iter()
                .enumerate()
                .map(|(j, c)| c * Complex64::from_polar(1.0, TAU * (j * k) as f64 / m as f64))
                .sum::<Complex64>()
                / m as f64
        })
        .collect()
}

/// All candidate nth roots of a single DFT coefficient, principal branch
/// first. Coefficients below the floating-noise floor are snapped to zero:
/// an exact zero carries ~1e-16 of roundoff whose nth root would otherwise
/// be large enough to poison every candidate.
fn coefficient_roots(c: Complex64, n: u32) -> Vec<Complex64> {
    if c.norm() < 1e-13 {
        return vec![Complex64::new(0.0, 0.0); n as usize];
    }
    let r = c.norm().powf(1.0 / n as f64);
    let base = c.arg() / n as f64;
    (0..n)
        .map(|b| Complex64::from_polar(r, base + TAU * b as f64 / n as f64))
        .collect()
}

/// Search for an nth root of a measure on Z_m (m <= 8, n <= 4) by
/// enumerating the n^(m-1) branch combinations of coefficient roots. The
/// zeroth coefficient is pinned to 1 (total mass). Candidates whose inverse
/// transform has imaginary parts above 1e-9 or weights below -1e-12 are
/// rejected; surviving tiny negatives are clipped before verification at
/// tolerance 1e-8.
pub fn nth_root_abelian_dft(mu: &DenseMeasure, n: u32) -> Result<DftRootOutcome> {
    if n == 0 {
        return Err(Error::InvalidArgument("root order must be >= 1".into()));
    }
    let group = mu.carrier().as_group()?;
    let m = group.order();
    if m > MAX_MODULUS || n > MAX_ROOT_ORDER {
        return Err(Error::Unsupported(format!(
            "DFT root search supports m <= {MAX_MODULUS}, n <= {MAX_ROOT_ORDER}; got m = {m}, n = {n}"
        )));
    }
    // The method needs the cyclic convolution structure.
    for a in 0..m {
        for b in 0..m {
            if group.multiply(a, b) != (a + b) % m {
                return Err(Error::Unsupported(
                    "DFT root search requires a cyclic group table".into(),
                ));
            }
        }
    }
    let coeffs = dft(mu.weights());
    let root_choices: Vec<Vec<Complex64>> =
        coeffs.iter().map(|&c| coefficient_roots(c, n)).collect();

    let free = m.saturating_sub(1);
    let total: u64 = (n as u64).pow(free as u32);
    let carrier = mu.carrier().clone();

    let candidate_for = |branch_index: u64| -> Option<(DenseMeasure, Vec<u32>)> {
        let mut digits = vec![0u32; free];
        let mut rem = branch_index;
        // Lexicographic order: the first coefficient's branch varies slowest.
        for slot in (0..free).rev() {
            digits[slot] = (rem % n as u64) as u32;
            rem /= n as u64;
        }
        let mut chosen = Vec::with_capacity(m);
        chosen.push(Complex64::new(1.0, 0.0)); // total mass
        for (slot, &d) in digits.iter().enumerate() {
            chosen.push(root_choices[slot + 1][d as usize]);
        }
        let values = inverse_dft(&chosen);
        let mut weights = Vec::with_capacity(m);
        for v in values {
            if v.im.abs() > 1e-9 || v.re < -1e-12 {
                return None;
            }
            weights.push(v.re.max(0.0));
        }
        let candidate = DenseMeasure::new(carrier.clone(), weights).ok()?;
        let check = verify_root(mu, &candidate, n, 1e-8).ok()?;
        check.pass.then_some((candidate, digits))
    };

    let hit = exec::find_first_indexed(total as usize, |i| candidate_for(i as u64).is_some());
    match hit {
        Some(i) => {
            let (root, branch) = candidate_for(i as u64).expect("re-evaluation is deterministic");
            Ok(DftRootOutcome::Found { root, branch })
        }
        None => Ok(DftRootOutcome::NoRoot { branches_searched: total }),
    }
}

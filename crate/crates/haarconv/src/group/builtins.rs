//! Built-in group tables: cyclic Z_m, dihedral D_n, symmetric S_3 and S_4.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::finite::{FiniteGroup, MAX_ORDER};
use crate::group::perm;

/// Cyclic group Z_m under addition mod m.
pub fn cyclic(m: usize) -> Result<Arc<FiniteGroup>> {
    if m == 0 || m > MAX_ORDER {
        return Err(Error::OrderTooLarge { order: m, limit: MAX_ORDER });
    }
    let table: Vec<Vec<usize>> = (0..m).map(|a| (0..m).map(|b| (a + b) % m).collect()).collect();
    let names = (0..m).map(|i| i.to_string()).collect();
    FiniteGroup::from_table(format!("Z{m}"), table, Some(names))
}

/// Dihedral group D_n of order 2n: elements `r^i s^j` indexed as `i + n*j`,
/// with `s r s = r^{-1}`.
pub fn dihedral(n: usize) -> Result<Arc<FiniteGroup>> {
    if n < 2 || 2 * n > MAX_ORDER {
        return Err(Error::OrderTooLarge { order: 2 * n, limit: MAX_ORDER });
    }
    let idx = |i: usize, j: usize| i % n + n * (j % 2);
    let mut table = vec![vec![0usize; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..2 {
            for k in 0..n {
                for l in 0..2 {
                    // (r^i s^j)(r^k s^l) = r^{i + (-1)^j k} s^{j+l}
                    let rot = if j == 0 { (i + k) % n } else { (i + n - k % n) % n };
                    table[idx(i, j)][idx(k, l)] = idx(rot, j + l);
                }
            }
        }
    }
    let mut names = Vec::with_capacity(2 * n);
    for j in 0..2 {
        for i in 0..n {
            let mut s = String::new();
            match i {
                0 => {}
                1 => s.push('r'),
                _ => s.push_str(&format!("r{i}")),
            }
            if j == 1 {
                s.push('s');
            }
            if s.is_empty() {
                s.push('e');
            }
            names.push(s);
        }
    }
    FiniteGroup::from_table(format!("D{n}"), table, Some(names))
}

/// Symmetric group S_n (n <= 4), elements in lexicographic order with cycle
/// notation names.
pub fn symmetric(n: usize) -> Result<Arc<FiniteGroup>> {
    if n == 0 || n > 4 {
        return Err(Error::Unsupported(format!(
            "symmetric group tables are built in for n <= 4, got {n}"
        )));
    }
    let perms = perm::all_permutations(n);
    let index_of = |p: &[usize]| perms.iter().position(|q| q == p).unwrap();
    let table: Vec<Vec<usize>> = perms
        .iter()
        .map(|a| perms.iter().map(|b| index_of(&perm::compose(a, b))).collect())
        .collect();
    let names = perms.iter().map(|p| perm::cycle_name(p)).collect();
    FiniteGroup::from_table(format!("S{n}"), table, Some(names))
}

/// Resolve a built-in group by name: `Z<m>` (m <= 64), `D4`, `S3`, `S4`.
pub fn group_by_name(name: &str) -> Result<Arc<FiniteGroup>> {
    if let Some(m) = name.strip_prefix('Z').and_then(|s| s.parse::<usize>().ok()) {
        return cyclic(m);
    }
    match name {
        "D4" => dihedral(4),
        "S3" => symmetric(3),
        "S4" => symmetric(4),
        _ => Err(Error::UnknownName(name.into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_names_resolve() {
        for name in ["Z4", "Z12", "D4", "S3", "S4"] {
            let g = group_by_name(name).unwrap();
            assert_eq!(g.name(), name);
        }
        assert!(group_by_name("Q8").is_err());
    }

    #[test]
    fn dihedral_relations_hold() {
        let d4 = dihedral(4).unwrap();
        let r = d4.elem_by_name("r").unwrap();
        let s = d4.elem_by_name("s").unwrap();
        // s r s = r^{-1}
        let srs = d4.multiply(d4.multiply(s, r), s);
        assert_eq!(srs, d4.inverse(r));
        assert_eq!(d4.order(), 8);
        assert!(!d4.is_abelian());
    }

    #[test]
    fn cyclic_is_abelian() {
        assert!(cyclic(12).unwrap().is_abelian());
        assert!(!symmetric(3).unwrap().is_abelian());
    }
}

//! Permutation helpers used to build the symmetric-group tables.

/// Compose permutations as functions: `(p ∘ q)(i) = p(q(i))`, i.e. apply `q`
/// first. Permutations are stored as image arrays.
pub(crate) fn compose(p: &[usize], q: &[usize]) -> Vec<usize> {
    q.iter().map(|&i| p[i]).collect()
}

/// All permutations of `0..n` in lexicographic order; the identity comes
/// first, so element index 0 is always the group identity.
pub(crate) fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next_permutation in lexicographic order
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

/// Cycle notation with 1-based points, e.g. `(12)(34)`; identity is `e`.
pub(crate) fn cycle_name(p: &[usize]) -> String {
    let mut seen = vec![false; p.len()];
    let mut name = String::new();
    for start in 0..p.len() {
        if seen[start] || p[start] == start {
            seen[start] = true;
            continue;
        }
        name.push('(');
        let mut i = start;
        loop {
            seen[i] = true;
            name.push_str(&(i + 1).to_string());
            i = p[i];
            if i == start {
                break;
            }
        }
        name.push(')');
    }
    if name.is_empty() {
        name.push('e');
    }
    name
}

//! Finite groups as validated multiplication tables, with subgroups and an
//! exhaustive subgroup lattice for small orders.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest supported table order. Every constructed table is checked for
/// associativity, and subgroup enumeration is exhaustive, which keeps this
/// bound practical.
pub const MAX_ORDER: usize = 64;

/// A finite group given by its multiplication table. Elements are the
/// indices `0..order`. Immutable after construction.
#[derive(Debug)]
pub struct FiniteGroup {
    name: String,
    order: usize,
    table: Vec<usize>, // row-major order x order
    identity: usize,
    inverses: Vec<usize>,
    elem_names: Vec<String>,
}

impl FiniteGroup {
    /// Validate a table and build the group. Checks shape, identity,
    /// inverses, and full associativity (O(order^3)).
    pub fn from_table(
        name: impl Into<String>,
        table: Vec<Vec<usize>>,
        elem_names: Option<Vec<String>>,
    ) -> Result<Arc<Self>> {
        let name = name.into();
        let order = table.len();
        if order == 0 {
            return Err(Error::InvalidTable("empty table".into()));
        }
        if order > MAX_ORDER {
            return Err(Error::OrderTooLarge { order, limit: MAX_ORDER });
        }
        let mut flat = Vec::with_capacity(order * order);
        for row in &table {
            if row.len() != order {
                return Err(Error::InvalidTable(format!(
                    "row length {} does not match order {order}",
                    row.len()
                )));
            }
            for &v in row {
                if v >= order {
                    return Err(Error::InvalidTable(format!(
                        "entry {v} out of range for order {order}"
                    )));
                }
                flat.push(v);
            }
        }
        let at = |a: usize, b: usize| flat[a * order + b];

        let identity = (0..order)
            .find(|&e| (0..order).all(|g| at(e, g) == g && at(g, e) == g))
            .ok_or_else(|| Error::InvalidTable("no identity element".into()))?;

        let mut inverses = vec![usize::MAX; order];
        for g in 0..order {
            let inv = (0..order)
                .find(|&h| at(g, h) == identity && at(h, g) == identity)
                .ok_or_else(|| Error::InvalidTable(format!("element {g} has no inverse")))?;
            inverses[g] = inv;
        }

        for a in 0..order {
            for b in 0..order {
                let ab = at(a, b);
                for c in 0..order {
                    if at(ab, c) != at(a, at(b, c)) {
                        return Err(Error::InvalidTable(format!(
                            "associativity fails at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }

        let elem_names = match elem_names {
            Some(names) => {
                if names.len() != order {
                    return Err(Error::InvalidTable("element name count mismatch".into()));
                }
                names
            }
            None => (0..order).map(|i| format!("g{i}")).collect(),
        };

        Ok(Arc::new(FiniteGroup {
            name,
            order,
            table: flat,
            identity,
            inverses,
            elem_names,
        }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    /// Group product. Indices must be in range (checked in debug builds).
    #[inline]
    pub fn multiply(&self, a: usize, b: usize) -> usize {
        debug_assert!(a < self.order && b < self.order);
        self.table[a * self.order + b]
    }

    #[inline]
    pub fn inverse(&self, g: usize) -> usize {
        debug_assert!(g < self.order);
        self.inverses[g]
    }

    /// `g x g^{-1}`.
    #[inline]
    pub fn conjugate(&self, g: usize, x: usize) -> usize {
        self.multiply(self.multiply(g, x), self.inverse(g))
    }

    pub fn elem_name(&self, g: usize) -> &str {
        &self.elem_names[g]
    }

    pub fn elem_by_name(&self, name: &str) -> Option<usize> {
        self.elem_names.iter().position(|n| n == name)
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order)
            .all(|a| (a..self.order).all(|b| self.multiply(a, b) == self.multiply(b, a)))
    }

    /// Closure of a set of elements (as a bitmask) under the product.
    fn close_mask(&self, mut mask: u64) -> u64 {
        mask |= 1u64 << self.identity;
        loop {
            let mut next = mask;
            for a in 0..self.order {
                if mask >> a & 1 == 0 {
                    continue;
                }
                for b in 0..self.order {
                    if mask >> b & 1 == 1 {
                        next |= 1u64 << self.multiply(a, b);
                    }
                }
            }
            if next == mask {
                return mask;
            }
            mask = next;
        }
    }

    /// All subgroups, sorted by (order, members). Starts from the cyclic
    /// subgroups and closes the collection under pairwise joins, which is
    /// exhaustive for any finite group.
    pub fn subgroups(self: &Arc<Self>) -> Result<Vec<Subgroup>> {
        if self.order > MAX_ORDER {
            return Err(Error::OrderTooLarge { order: self.order, limit: MAX_ORDER });
        }
        let mut found: BTreeSet<u64> = (0..self.order)
            .map(|g| self.close_mask(1u64 << g))
            .collect();
        found.insert(1u64 << self.identity);
        loop {
            let snapshot: Vec<u64> = found.iter().copied().collect();
            let before = found.len();
            for (i, &a) in snapshot.iter().enumerate() {
                for &b in &snapshot[i + 1..] {
                    found.insert(self.close_mask(a | b));
                }
            }
            if found.len() == before {
                break;
            }
        }
        let mut groups: Vec<Subgroup> = found
            .into_iter()
            .map(|mask| Subgroup::from_mask(self.clone(), mask))
            .collect();
        groups.sort_by(|a, b| (a.order(), a.members()).cmp(&(b.order(), b.members())));
        Ok(groups)
    }
}

/// A subgroup of a finite group, stored as a sorted member list.
#[derive(Clone, Debug)]
pub struct Subgroup {
    parent: Arc<FiniteGroup>,
    members: Vec<usize>,
    mask: u64,
}

impl Subgroup {
    /// Validate membership: closed under the product, contains the identity
    /// and all inverses.
    pub fn new(parent: Arc<FiniteGroup>, members: &[usize]) -> Result<Self> {
        let mut sorted: Vec<usize> = members.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.is_empty() {
            return Err(Error::InvalidSubgroup("empty member list".into()));
        }
        if sorted.iter().any(|&g| g >= parent.order()) {
            return Err(Error::InvalidSubgroup("member out of range".into()));
        }
        let mask: u64 = sorted.iter().map(|&g| 1u64 << g).sum();
        if mask >> parent.identity() & 1 == 0 {
            return Err(Error::InvalidSubgroup("identity not a member".into()));
        }
        for &a in &sorted {
            if mask >> parent.inverse(a) & 1 == 0 {
                return Err(Error::InvalidSubgroup(format!("inverse of {a} missing")));
            }
            for &b in &sorted {
                if mask >> parent.multiply(a, b) & 1 == 0 {
                    return Err(Error::InvalidSubgroup(format!(
                        "not closed: {a} * {b} escapes"
                    )));
                }
            }
        }
        Ok(Subgroup { parent, members: sorted, mask })
    }

    /// Subgroup generated by the given elements.
    pub fn from_generators(parent: Arc<FiniteGroup>, generators: &[usize]) -> Result<Self> {
        if generators.iter().any(|&g| g >= parent.order()) {
            return Err(Error::InvalidSubgroup("generator out of range".into()));
        }
        let seed = generators.iter().fold(1u64 << parent.identity(), |m, &g| m | 1u64 << g);
        let mask = parent.close_mask(seed);
        Ok(Self::from_mask(parent, mask))
    }

    fn from_mask(parent: Arc<FiniteGroup>, mask: u64) -> Self {
        let members: Vec<usize> = (0..parent.order()).filter(|&g| mask >> g & 1 == 1).collect();
        Subgroup { parent, members, mask }
    }

    pub fn trivial(parent: Arc<FiniteGroup>) -> Self {
        let mask = 1u64 << parent.identity();
        Self::from_mask(parent, mask)
    }

    pub fn full(parent: Arc<FiniteGroup>) -> Self {
        let order = parent.order();
        let mask = if order == 64 { u64::MAX } else { (1u64 << order) - 1 };
        Self::from_mask(parent, mask)
    }

    pub fn parent(&self) -> &Arc<FiniteGroup> {
        &self.parent
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn contains(&self, g: usize) -> bool {
        g < self.parent.order() && self.mask >> g & 1 == 1
    }

    /// Member names joined as `{e,(12)}`.
    pub fn label(&self) -> String {
        let names: Vec<&str> = self.members.iter().map(|&g| self.parent.elem_name(g)).collect();
        format!("{{{}}}", names.join(","))
    }
}

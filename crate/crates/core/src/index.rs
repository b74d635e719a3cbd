//! Sparse multi-indices with finite support.
//!
//! A [`MultiIndex`] records how many times each tautological-class index
//! occurs: `{0: 3, 1: 1}` stands for `tau_0^3 tau_1` (or `kappa`-exponents,
//! depending on its [`IndexKind`]). Two kinds exist:
//!
//! * `S0` - indices start at 0 (psi-class exponent vectors),
//! * `S1` - indices start at 1 (kappa-class exponent vectors; `kappa_0` is a
//!   scalar and is never stored).
//!
//! The module also provides the combinatorial services the recursions need:
//! entrywise binomials, factorial products, and lazy enumeration of all ways
//! to split an index into an ordered pair summing to it.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, One};

use crate::error::{Error, Result};
use crate::rational::{binomial, factorial, Rat};

/// Which index family a [`MultiIndex`] lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IndexKind {
    /// Indices from 0 upward (psi exponents).
    S0,
    /// Indices from 1 upward (kappa exponents).
    S1,
}

/// Finitely supported map from class index to multiplicity.
///
/// Canonical form: no stored multiplicity is zero, and `S1` never holds
/// index 0. Equality, ordering and hashing all follow from that form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex {
    kind: IndexKind,
    entries: BTreeMap<u32, u32>,
}

impl MultiIndex {
    /// The empty index of the given kind.
    pub fn empty(kind: IndexKind) -> Self {
        MultiIndex { kind, entries: BTreeMap::new() }
    }

    /// The unit index `delta_i`. Panics on the non-representable
    /// `S1`/index-0 combination; use [`MultiIndex::from_pairs`] for
    /// untrusted input.
    pub fn delta(kind: IndexKind, i: u32) -> Self {
        assert!(
            !(kind == IndexKind::S1 && i == 0),
            "kappa_0 is a scalar and cannot be stored in an S1 index"
        );
        let mut entries = BTreeMap::new();
        entries.insert(i, 1);
        MultiIndex { kind, entries }
    }

    /// Builds an index from `(index, multiplicity)` pairs. Duplicate indices
    /// accumulate, zero multiplicities are dropped, and a positive
    /// multiplicity at index 0 is rejected for `S1`.
    pub fn from_pairs(kind: IndexKind, pairs: &[(u32, u32)]) -> Result<Self> {
        let mut entries: BTreeMap<u32, u32> = BTreeMap::new();
        for &(i, mult) in pairs {
            if mult == 0 {
                continue;
            }
            if kind == IndexKind::S1 && i == 0 {
                return Err(Error::InvalidInput(
                    "kappa index 0 is a scalar and cannot carry a multiplicity".into(),
                ));
            }
            *entries.entry(i).or_insert(0) += mult;
        }
        Ok(MultiIndex { kind, entries })
    }

    pub fn kind(&self) -> IndexKind {
        self.kind
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Multiplicity at `i` (zero when absent).
    pub fn get(&self, i: u32) -> u32 {
        self.entries.get(&i).copied().unwrap_or(0)
    }

    /// `(index, multiplicity)` pairs in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.entries.iter().map(|(&i, &m)| (i, m))
    }

    /// Largest index present.
    pub fn max_index(&self) -> Option<u32> {
        self.entries.keys().next_back().copied()
    }

    /// Indices expanded with multiplicity, ascending: `{0:2, 3:1}` gives
    /// `[0, 0, 3]`.
    pub fn expand(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.count() as usize);
        for (i, m) in self.iter() {
            out.extend(std::iter::repeat(i).take(m as usize));
        }
        out
    }

    /// Weighted degree `|m| = sum_i i * m_i`.
    pub fn weight(&self) -> u64 {
        self.entries.iter().map(|(&i, &m)| i as u64 * m as u64).sum()
    }

    /// Total count `||m|| = sum_i m_i`.
    pub fn count(&self) -> u64 {
        self.entries.values().map(|&m| m as u64).sum()
    }

    /// Factorial product `m! = prod_i m_i!`.
    pub fn factorial_product(&self) -> BigInt {
        let mut out = BigInt::one();
        for &m in self.entries.values() {
            out *= factorial(m as u64);
        }
        out
    }

    /// The three weight statistics `(|m|, ||m||, m!)` in one call.
    pub fn weight_stats(&self) -> (u64, u64, Rat) {
        (self.weight(), self.count(), Rat::from_integer(self.factorial_product()))
    }

    /// Entrywise sum. Panics on kind mismatch.
    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.kind, other.kind, "multi-index kind mismatch in sum");
        let mut entries = self.entries.clone();
        for (&i, &m) in &other.entries {
            *entries.entry(i).or_insert(0) += m;
        }
        MultiIndex { kind: self.kind, entries }
    }

    /// `self + delta_i`.
    pub fn plus_delta(&self, i: u32) -> Self {
        self.plus(&MultiIndex::delta(self.kind, i))
    }

    /// Entrywise difference, `None` unless `other <= self`.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        assert_eq!(self.kind, other.kind, "multi-index kind mismatch in difference");
        let mut entries = self.entries.clone();
        for (&i, &m) in &other.entries {
            let slot = entries.get_mut(&i)?;
            if *slot < m {
                return None;
            }
            *slot -= m;
            if *slot == 0 {
                entries.remove(&i);
            }
        }
        Some(MultiIndex { kind: self.kind, entries })
    }

    /// `self - delta_i`, `None` when index `i` is absent.
    pub fn sub_delta(&self, i: u32) -> Option<Self> {
        self.checked_sub(&MultiIndex::delta(self.kind, i))
    }

    /// Entrywise binomial product `C(m, l) = prod_i C(m_i, l_i)`; zero when
    /// `l` is not entrywise below `m`.
    pub fn multi_binomial(&self, l: &Self) -> Result<Rat> {
        if self.kind != l.kind {
            return Err(Error::KindMismatch(self.kind, l.kind));
        }
        let mut out = BigInt::one();
        for (&i, &li) in &l.entries {
            out *= binomial(self.get(i) as u64, li as u64);
        }
        Ok(Rat::from_integer(out))
    }

    /// All ordered splittings `m = m' + m''` with the entrywise binomial
    /// coefficient `C(m, m')`, lazily, in ascending lexicographic order of
    /// `m'`. Exactly `prod_i (m_i + 1)` items.
    pub fn splits(&self) -> Splits {
        let indices: Vec<u32> = self.entries.keys().copied().collect();
        let caps: Vec<u32> = self.entries.values().copied().collect();
        let rows: Vec<Vec<BigInt>> = caps
            .iter()
            .map(|&c| (0..=c).map(|k| binomial(c as u64, k as u64)).collect())
            .collect();
        Splits {
            kind: self.kind,
            indices,
            caps,
            rows,
            state: vec![0; self.entries.len()],
            done: false,
        }
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (pos, (i, m)) in self.iter().enumerate() {
            if pos > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{i}:{m}")?;
        }
        write!(f, "}}")
    }
}

/// Lazy odometer over the ordered splittings of a [`MultiIndex`].
pub struct Splits {
    kind: IndexKind,
    indices: Vec<u32>,
    caps: Vec<u32>,
    rows: Vec<Vec<BigInt>>,
    state: Vec<u32>,
    done: bool,
}

impl Iterator for Splits {
    type Item = (MultiIndex, MultiIndex, Rat);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let mut left = BTreeMap::new();
        let mut right = BTreeMap::new();
        let mut coeff = BigInt::one();
        for (pos, &i) in self.indices.iter().enumerate() {
            let k = self.state[pos];
            if k > 0 {
                left.insert(i, k);
            }
            if k < self.caps[pos] {
                right.insert(i, self.caps[pos] - k);
            }
            coeff *= &self.rows[pos][k as usize];
        }
        // Rightmost position ticks fastest so m' ascends lexicographically.
        let mut pos = self.state.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            if self.state[pos] < self.caps[pos] {
                self.state[pos] += 1;
                break;
            }
            self.state[pos] = 0;
        }
        Some((
            MultiIndex { kind: self.kind, entries: left },
            MultiIndex { kind: self.kind, entries: right },
            Rat::from_integer(coeff),
        ))
    }
}

/// Every `S0` index with `||m|| <= max_count` and `|m| <= max_weight`, in a
/// deterministic order. Used by the verification sweeps.
pub fn all_s0(max_count: u64, max_weight: u64) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut current: Vec<(u32, u32)> = Vec::new();
    fn rec(
        idx: u32,
        count_left: u64,
        weight_left: u64,
        current: &mut Vec<(u32, u32)>,
        out: &mut Vec<MultiIndex>,
    ) {
        if idx as u64 > weight_left && idx > 0 {
            // Higher indices can no longer fit; emit what we have.
            out.push(MultiIndex::from_pairs(IndexKind::S0, current).unwrap());
            return;
        }
        let max_mult = if idx == 0 {
            count_left
        } else {
            count_left.min(weight_left / idx as u64)
        };
        for mult in 0..=max_mult {
            if mult > 0 {
                current.push((idx, mult as u32));
            }
            let spent = idx as u64 * mult;
            if count_left - mult == 0 {
                out.push(MultiIndex::from_pairs(IndexKind::S0, current).unwrap());
            } else {
                rec(idx + 1, count_left - mult, weight_left - spent, current, out);
            }
            if mult > 0 {
                current.pop();
            }
        }
    }
    rec(0, max_count, max_weight, &mut current, &mut out);
    out.sort();
    out.dedup();
    out
}

/// Every `S1` index with `|p| <= max_weight` (partitions of all sizes up to
/// the bound), in a deterministic order.
pub fn all_s1(max_weight: u64) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut current: Vec<(u32, u32)> = Vec::new();
    fn rec(idx: u32, weight_left: u64, current: &mut Vec<(u32, u32)>, out: &mut Vec<MultiIndex>) {
        if idx as u64 > weight_left {
            out.push(MultiIndex::from_pairs(IndexKind::S1, current).unwrap());
            return;
        }
        for mult in 0..=(weight_left / idx as u64) {
            if mult > 0 {
                current.push((idx, mult as u32));
            }
            rec(idx + 1, weight_left - idx as u64 * mult, current, out);
            if mult > 0 {
                current.pop();
            }
        }
    }
    rec(1, max_weight, &mut current, &mut out);
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_int;

    fn s0(pairs: &[(u32, u32)]) -> MultiIndex {
        MultiIndex::from_pairs(IndexKind::S0, pairs).unwrap()
    }

    fn s1(pairs: &[(u32, u32)]) -> MultiIndex {
        MultiIndex::from_pairs(IndexKind::S1, pairs).unwrap()
    }

    #[test]
    fn weight_stats_of_mixed_index() {
        let m = s0(&[(0, 3), (1, 1)]);
        let (weight, count, fact) = m.weight_stats();
        assert_eq!(weight, 1);
        assert_eq!(count, 4);
        assert_eq!(fact, rat_int(6));
    }

    #[test]
    fn construction_is_order_independent_and_canonical() {
        let a = s0(&[(1, 1), (0, 3)]);
        let b = s0(&[(0, 2), (1, 1), (0, 1), (4, 0)]);
        assert_eq!(a, b);
        assert_eq!(a.get(4), 0);
        assert_eq!(a.max_index(), Some(1));
        assert_eq!(a.expand(), vec![0, 0, 0, 1]);
    }

    #[test]
    fn kappa_zero_is_rejected() {
        assert!(MultiIndex::from_pairs(IndexKind::S1, &[(0, 1)]).is_err());
        assert!(MultiIndex::from_pairs(IndexKind::S1, &[(0, 0), (2, 1)]).is_ok());
    }

    #[test]
    fn multi_binomial_examples() {
        let m = s0(&[(0, 3), (1, 1)]);
        let l = s0(&[(0, 1), (1, 1)]);
        assert_eq!(m.multi_binomial(&l).unwrap(), rat_int(3));
        let too_big = s0(&[(0, 4)]);
        assert_eq!(m.multi_binomial(&too_big).unwrap(), rat_int(0));
        let wrong_kind = s1(&[(1, 1)]);
        assert!(matches!(m.multi_binomial(&wrong_kind), Err(Error::KindMismatch(_, _))));
    }

    #[test]
    fn splits_of_single_delta() {
        let d0 = MultiIndex::delta(IndexKind::S0, 0);
        let items: Vec<_> = d0.splits().collect();
        assert_eq!(items.len(), 2);
        assert_eq!(items[0], (MultiIndex::empty(IndexKind::S0), d0.clone(), rat_int(1)));
        assert_eq!(items[1], (d0.clone(), MultiIndex::empty(IndexKind::S0), rat_int(1)));
    }

    #[test]
    fn splits_of_empty_index() {
        let e = MultiIndex::empty(IndexKind::S1);
        let items: Vec<_> = e.splits().collect();
        assert_eq!(items, vec![(e.clone(), e.clone(), rat_int(1))]);
    }

    #[test]
    fn splits_recombine_count_and_row_sums() {
        let m = s0(&[(0, 2), (2, 3), (5, 1)]);
        let items: Vec<_> = m.splits().collect();
        assert_eq!(items.len(), (2 + 1) * (3 + 1) * (1 + 1));
        let mut coeff_sum = rat_int(0);
        for (a, b, c) in &items {
            assert_eq!(a.plus(b), m);
            assert_eq!(m.multi_binomial(a).unwrap(), *c);
            coeff_sum += c;
        }
        // Product of binomial row sums: 2^2 * 2^3 * 2^1.
        assert_eq!(coeff_sum, rat_int(64));
    }

    #[test]
    fn binomial_row_sums_through_splits_on_index_zero_only() {
        for n in 0..=12u32 {
            let m = s0(&[(0, n)]);
            let total: Rat = m.splits().map(|(_, _, c)| c).sum();
            assert_eq!(total, rat_int(1i64 << n));
        }
    }

    #[test]
    fn splits_ascend_lexicographically_in_first_component() {
        let m = s0(&[(1, 1), (2, 1)]);
        let firsts: Vec<Vec<u32>> = m.splits().map(|(a, _, _)| vec![a.get(1), a.get(2)]).collect();
        assert_eq!(firsts, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn enumeration_bounds_hold() {
        let all = all_s0(4, 3);
        assert!(all.iter().all(|m| m.count() <= 4 && m.weight() <= 3));
        assert!(all.contains(&MultiIndex::empty(IndexKind::S0)));
        assert!(all.contains(&s0(&[(0, 4)])));
        assert!(all.contains(&s0(&[(3, 1)])));
        assert!(!all.contains(&s0(&[(4, 1)])));
        let dedup: std::collections::BTreeSet<_> = all.iter().cloned().collect();
        assert_eq!(dedup.len(), all.len());

        let parts = all_s1(4);
        // Partitions of 0..=4: 1 + 1 + 2 + 3 + 5.
        assert_eq!(parts.len(), 12);
        assert!(parts.iter().all(|p| p.weight() <= 4));
    }
}

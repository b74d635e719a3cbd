//! Exact evaluation of mixed brackets `<tau^m kappa^p>_g` for genus 0 and 1.
//!
//! Three independent routes compute the same numbers:
//!
//! * [`EvalRoute::Recursion`] - the splitting recursions that remove one
//!   `tau_a` (a >= 1) or one `kappa_a` per step, turning a bracket into a
//!   sum of products of smaller brackets (genus 1 delegates its genus-0
//!   factors to the genus-0 recursion);
//! * [`EvalRoute::PunctureDilaton`] - repeated dilaton steps (trade a
//!   `tau_a`, a >= 1, for kappa insertions on one fewer point) followed by
//!   puncture steps (remove a `tau_0`), down to the one-point or three-point
//!   floor;
//! * [`EvalRoute::ClosedForm`] - the explicit pure-psi formulas
//!   [`psi_multinomial_g0`] and [`psi_closed_g1`].
//!
//! A `kappa_0` insertion is never stored: whenever a recursion produces one
//! it is applied immediately as the scalar `2g - 2 + n` of the bracket it
//! lands in.
//!
//! Values are memoized per route and per genus for the lifetime of the
//! [`Evaluator`]; nothing is ever evicted. The caches live behind `RefCell`,
//! so an `Evaluator` is confined to one thread by construction.

use std::cell::RefCell;
use std::collections::HashMap;

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::index::{IndexKind, MultiIndex};
use crate::rational::{multinomial, rat, rat_int, Rat};

/// A validated bracket request: genus together with psi and kappa exponents.
///
/// Only produced through [`IntersectionKey::make`], so every value of this
/// type names a stable moduli space whose dimension matches the total class
/// degree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntersectionKey {
    genus: u8,
    m: MultiIndex,
    p: MultiIndex,
}

/// Result of classifying a bracket request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KeyOutcome {
    /// Stable and dimension-balanced; carries the key.
    Valid(IntersectionKey),
    /// Stable but dimension-unbalanced; the bracket is 0.
    Zero,
    /// The underlying moduli space does not exist; carries the reason.
    Invalid(String),
}

impl IntersectionKey {
    /// Classifies `(genus, m, p)`. The number of marked points is `n = ||m||`;
    /// stability demands `2g - 2 + n > 0` and the dimension equation demands
    /// `3g - 3 + n = |m| + |p|`. Stability is checked first, so a request
    /// that fails both reports [`KeyOutcome::Invalid`].
    pub fn make(genus: u8, m: MultiIndex, p: MultiIndex) -> Result<KeyOutcome> {
        if genus > 1 {
            return Err(Error::UnsupportedGenus(genus as i64));
        }
        if m.kind() != IndexKind::S0 {
            return Err(Error::InvalidInput("psi exponents must be an S0 index".into()));
        }
        if p.kind() != IndexKind::S1 {
            return Err(Error::InvalidInput("kappa exponents must be an S1 index".into()));
        }
        let n = m.count();
        if 2 * genus as i64 - 2 + n as i64 <= 0 {
            return Ok(KeyOutcome::Invalid(
                Error::Unstable { genus, n }.to_string(),
            ));
        }
        // Stability makes 3g - 3 + n nonnegative for g <= 1.
        let dim = 3 * genus as u64 + n - 3;
        if dim != m.weight() + p.weight() {
            return Ok(KeyOutcome::Zero);
        }
        Ok(KeyOutcome::Valid(IntersectionKey { genus, m, p }))
    }

    pub fn genus(&self) -> u8 {
        self.genus
    }

    pub fn m(&self) -> &MultiIndex {
        &self.m
    }

    pub fn p(&self) -> &MultiIndex {
        &self.p
    }

    /// Number of marked points, `||m||`.
    pub fn n(&self) -> u64 {
        self.m.count()
    }
}

/// Which of the three computation routes to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalRoute {
    Recursion,
    PunctureDilaton,
    ClosedForm,
}

type PairCache = HashMap<(MultiIndex, MultiIndex), Rat>;

/// Memoizing bracket evaluator.
pub struct Evaluator {
    rec_g0: RefCell<PairCache>,
    rec_g1: RefCell<PairCache>,
    pd: RefCell<HashMap<(u8, MultiIndex, MultiIndex), Rat>>,
    cache_ceiling: Option<usize>,
}

impl Default for Evaluator {
    fn default() -> Self {
        Self::new()
    }
}

impl Evaluator {
    pub fn new() -> Self {
        Evaluator {
            rec_g0: RefCell::new(HashMap::new()),
            rec_g1: RefCell::new(HashMap::new()),
            pd: RefCell::new(HashMap::new()),
            cache_ceiling: None,
        }
    }

    /// Like [`Evaluator::new`] but aborts (panics with a clear message) if
    /// the memo tables would ever hold more than `limit` entries in total.
    /// Entries are never evicted, so a ceiling is a hard stop, not an LRU.
    pub fn with_cache_ceiling(limit: usize) -> Self {
        Evaluator { cache_ceiling: Some(limit), ..Self::new() }
    }

    /// Total number of memoized values across all routes.
    pub fn cache_len(&self) -> usize {
        self.rec_g0.borrow().len() + self.rec_g1.borrow().len() + self.pd.borrow().len()
    }

    fn check_ceiling(&self) {
        if let Some(limit) = self.cache_ceiling {
            if self.cache_len() >= limit {
                panic!("bracket memo cache ceiling of {limit} entries exceeded");
            }
        }
    }

    /// Evaluates a validated key through the splitting recursions.
    pub fn eval(&self, key: &IntersectionKey) -> Rat {
        self.eval_route(key, EvalRoute::Recursion).unwrap()
    }

    /// Evaluates a validated key through the chosen route. The closed-form
    /// route exists only for pure-psi brackets (`p` empty).
    pub fn eval_route(&self, key: &IntersectionKey, route: EvalRoute) -> Result<Rat> {
        match route {
            EvalRoute::Recursion => Ok(match key.genus {
                0 => self.raw0(key.m.clone(), key.p.clone()),
                _ => self.raw1(key.m.clone(), key.p.clone()),
            }),
            EvalRoute::PunctureDilaton => {
                Ok(self.pd_raw(key.genus, key.m.clone(), key.p.clone()))
            }
            EvalRoute::ClosedForm => {
                if !key.p.is_empty() {
                    return Err(Error::InvalidInput(
                        "closed-form route requires a pure psi bracket".into(),
                    ));
                }
                if key.genus == 0 {
                    Ok(psi_multinomial_g0(&key.m.expand().iter().map(|&i| i as u64).collect::<Vec<_>>()))
                } else {
                    let b: Vec<u64> =
                        key.m.iter().filter(|&(i, _)| i >= 1).flat_map(|(i, mult)| {
                            std::iter::repeat(i as u64).take(mult as usize)
                        }).collect();
                    psi_closed_g1(&b)
                }
            }
        }
    }

    /// User-facing bracket: classifies the request, returns 0 on a dimension
    /// mismatch, and errors on instability or malformed input.
    pub fn bracket(&self, genus: u8, m: MultiIndex, p: MultiIndex) -> Result<Rat> {
        match IntersectionKey::make(genus, m, p)? {
            KeyOutcome::Valid(key) => Ok(self.eval(&key)),
            KeyOutcome::Zero => Ok(Rat::zero()),
            KeyOutcome::Invalid(reason) => Err(Error::InvalidInput(reason)),
        }
    }

    /// Bracket as a plain coefficient: 0 for anything that does not name a
    /// nonempty moduli space of the right dimension. Generating-function
    /// builders sweep whole monomial windows and want unstable or
    /// mismatched combinations to contribute nothing rather than error.
    pub fn bracket_or_zero(&self, genus: u8, m: &MultiIndex, p: &MultiIndex) -> Rat {
        assert!(genus <= 1, "only genus 0 and 1 are implemented");
        match IntersectionKey::make(genus, m.clone(), p.clone()) {
            Ok(KeyOutcome::Valid(key)) => self.eval(&key),
            _ => Rat::zero(),
        }
    }

    /// Pure-kappa bracket `<kappa^p>_g`, i.e. the bracket with just enough
    /// `tau_0` insertions to mark `n = |p| + 3 - 3g` points.
    pub fn kappa_bracket(&self, p: &MultiIndex, genus: u8) -> Result<Rat> {
        if genus > 1 {
            return Err(Error::UnsupportedGenus(genus as i64));
        }
        let n = p.weight() + 3 - 3 * genus as u64;
        if 2 * genus as i64 - 2 + n as i64 <= 0 {
            return Err(Error::Unstable { genus, n });
        }
        let m = MultiIndex::from_pairs(IndexKind::S0, &[(0, n as u32)])?;
        Ok(match genus {
            0 => self.raw0(m, p.clone()),
            _ => self.raw1(m, p.clone()),
        })
    }

    /// Bracket `<kappa^p lambda_1^r tau_0^n>_g` with `r` insertions of the
    /// Hodge class. Nonzero lambda powers reduce to genus 0: a single
    /// `lambda_1` in genus 1 contributes `1/24` of the genus-0 bracket on
    /// two extra points, higher powers vanish, as does any positive power in
    /// genus 0. Dimension mismatches return 0; instability errors.
    pub fn lambda_bracket(&self, p: &MultiIndex, r: u32, n: u64, genus: u8) -> Result<Rat> {
        if genus > 1 {
            return Err(Error::UnsupportedGenus(genus as i64));
        }
        if 2 * genus as i64 - 2 + n as i64 <= 0 {
            return Err(Error::Unstable { genus, n });
        }
        let dim = 3 * genus as u64 + n - 3;
        if p.weight() + r as u64 != dim {
            return Ok(Rat::zero());
        }
        if r == 0 {
            let m = MultiIndex::from_pairs(IndexKind::S0, &[(0, n as u32)])?;
            return Ok(match genus {
                0 => self.raw0(m, p.clone()),
                _ => self.raw1(m, p.clone()),
            });
        }
        if genus == 0 || r >= 2 {
            return Ok(Rat::zero());
        }
        let m = MultiIndex::from_pairs(IndexKind::S0, &[(0, n as u32 + 2)])?;
        Ok(rat(1, 24) * self.raw0(m, p.clone()))
    }

    /// Is `(m, p)` a stable, dimension-balanced bracket in this genus?
    fn is_valid(genus: u8, m: &MultiIndex, p: &MultiIndex) -> bool {
        let n = m.count();
        if 2 * genus as i64 - 2 + n as i64 <= 0 {
            return false;
        }
        3 * genus as u64 + n - 3 == m.weight() + p.weight()
    }

    /// Genus-0 recursion value; 0 for anything unstable or unbalanced.
    fn raw0(&self, m: MultiIndex, p: MultiIndex) -> Rat {
        if !Self::is_valid(0, &m, &p) {
            return Rat::zero();
        }
        let key = (m, p);
        if let Some(v) = self.rec_g0.borrow().get(&key) {
            return v.clone();
        }
        let value = self.rec0(&key.0, &key.1);
        self.check_ceiling();
        self.rec_g0.borrow_mut().insert(key, value.clone());
        value
    }

    /// Genus-1 recursion value; 0 for anything unstable or unbalanced.
    fn raw1(&self, m: MultiIndex, p: MultiIndex) -> Rat {
        if !Self::is_valid(1, &m, &p) {
            return Rat::zero();
        }
        let key = (m, p);
        if let Some(v) = self.rec_g1.borrow().get(&key) {
            return v.clone();
        }
        let value = self.rec1(&key.0, &key.1);
        self.check_ceiling();
        self.rec_g1.borrow_mut().insert(key, value.clone());
        value
    }

    /// `<tau^mm kappa^pp kappa_idx>_g` through the recursion route, with
    /// `kappa_0` applied as the scalar `2g - 2 + ||mm||`.
    fn kappa_or_scalar(&self, genus: u8, mm: MultiIndex, pp: MultiIndex, idx: u64) -> Rat {
        if idx == 0 {
            let scalar = 2 * genus as i64 - 2 + mm.count() as i64;
            let v = match genus {
                0 => self.raw0(mm, pp),
                _ => self.raw1(mm, pp),
            };
            rat_int(scalar) * v
        } else {
            let pp = pp.plus_delta(idx as u32);
            match genus {
                0 => self.raw0(mm, pp),
                _ => self.raw1(mm, pp),
            }
        }
    }

    /// One step of the genus-0 splitting recursion.
    ///
    /// With a largest psi index `a >= 1` present, two further insertions
    /// `tau_k`, `tau_l` are set aside (the two smallest indices present,
    /// preferring `tau_0` factors) and the remaining exponents are split two
    /// ways:
    ///
    /// `<tau^{m+d_k+d_l+d_a} k^p> = sum C(m,m')C(p,p')
    ///      <tau^{m'+d_k+d_l+d_0} k^{p'}> <tau^{m''+d_{a-1}+d_0} k^{p''}>`.
    ///
    /// Otherwise the largest kappa index is removed by the analogous rule
    /// with the extra kappa landing in the second factor. Pure `tau_0^3` is
    /// the base case with value 1.
    fn rec0(&self, m: &MultiIndex, p: &MultiIndex) -> Rat {
        let max_psi = m.max_index().filter(|&a| a >= 1);
        if let Some(a) = max_psi {
            let m_wo = m.sub_delta(a).unwrap();
            let spectators = m_wo.expand();
            let (k, l) = (spectators[0], spectators[1]);
            let m_base = m_wo.sub_delta(k).unwrap().sub_delta(l).unwrap();
            let p_splits: Vec<_> = p.splits().collect();
            let mut acc = Rat::zero();
            for (m1, m2, cm) in m_base.splits() {
                for (p1, p2, cp) in &p_splits {
                    let f1 = self.raw0(
                        m1.plus_delta(k).plus_delta(l).plus_delta(0),
                        p1.clone(),
                    );
                    if f1.is_zero() {
                        continue;
                    }
                    let f2 = self.raw0(m2.plus_delta(a - 1).plus_delta(0), p2.clone());
                    if f2.is_zero() {
                        continue;
                    }
                    acc += &cm * cp * f1 * f2;
                }
            }
            acc
        } else if let Some(a) = p.max_index() {
            // All psi insertions are tau_0 here, so k = l = 0.
            let p_wo = p.sub_delta(a).unwrap();
            let m_base = m.sub_delta(0).unwrap().sub_delta(0).unwrap();
            let p_splits: Vec<_> = p_wo.splits().collect();
            let mut acc = Rat::zero();
            for (m1, m2, cm) in m_base.splits() {
                for (p1, p2, cp) in &p_splits {
                    let f1 = self.raw0(
                        m1.plus_delta(0).plus_delta(0).plus_delta(0),
                        p1.clone(),
                    );
                    if f1.is_zero() {
                        continue;
                    }
                    let f2 = self.kappa_or_scalar(
                        0,
                        m2.plus_delta(0),
                        p2.clone(),
                        a as u64 - 1,
                    );
                    if f2.is_zero() {
                        continue;
                    }
                    acc += &cm * cp * f1 * f2;
                }
            }
            acc
        } else {
            // Valid, pure tau_0: dimension forces <tau_0^3> = 1.
            Rat::one()
        }
    }

    /// One step of the genus-1 splitting recursion. Same pivot policy as
    /// [`Evaluator::rec0`] but with no spectator insertions; each step also
    /// carries a `1/24` genus-0 term from the nonseparating degeneration:
    ///
    /// `<tau^{m+d_a} k^p>_1 = 1/24 <tau^{m+2d_0+d_{a-1}} k^p>_0
    ///      + sum C(m,m')C(p,p') <tau^{m'+d_0} k^{p'}>_1
    ///        <tau^{m''+d_0+d_{a-1}} k^{p''}>_0`,
    ///
    /// and the kappa-removing variant with `kappa_{a-1}` in place of
    /// `tau_{a-1}`. No explicit base value is needed: `<tau_1>_1 = 1/24`
    /// already falls out of the first rule.
    fn rec1(&self, m: &MultiIndex, p: &MultiIndex) -> Rat {
        let max_psi = m.max_index().filter(|&a| a >= 1);
        if let Some(a) = max_psi {
            let m_wo = m.sub_delta(a).unwrap();
            let mut acc = rat(1, 24)
                * self.raw0(
                    m_wo.plus_delta(0).plus_delta(0).plus_delta(a - 1),
                    p.clone(),
                );
            let p_splits: Vec<_> = p.splits().collect();
            for (m1, m2, cm) in m_wo.splits() {
                for (p1, p2, cp) in &p_splits {
                    let f1 = self.raw1(m1.plus_delta(0), p1.clone());
                    if f1.is_zero() {
                        continue;
                    }
                    let f2 = self.raw0(m2.plus_delta(0).plus_delta(a - 1), p2.clone());
                    if f2.is_zero() {
                        continue;
                    }
                    acc += &cm * cp * f1 * f2;
                }
            }
            acc
        } else if let Some(a) = p.max_index() {
            let p_wo = p.sub_delta(a).unwrap();
            let mut acc = rat(1, 24)
                * self.kappa_or_scalar(
                    0,
                    m.plus_delta(0).plus_delta(0),
                    p_wo.clone(),
                    a as u64 - 1,
                );
            let p_splits: Vec<_> = p_wo.splits().collect();
            for (m1, m2, cm) in m.splits() {
                for (p1, p2, cp) in &p_splits {
                    let f1 = self.raw1(m1.plus_delta(0), p1.clone());
                    if f1.is_zero() {
                        continue;
                    }
                    let f2 = self.kappa_or_scalar(0, m2.plus_delta(0), p2.clone(), a as u64 - 1);
                    if f2.is_zero() {
                        continue;
                    }
                    acc += &cm * cp * f1 * f2;
                }
            }
            acc
        } else {
            // A valid genus-1 key has a positive psi index or a kappa entry:
            // pure tau_0 would force n = |m| = 0, which is unstable.
            unreachable!("no valid genus-1 bracket is pure tau_0")
        }
    }

    /// Puncture/dilaton route; 0 for anything unstable or unbalanced.
    ///
    /// Strategy: dilaton steps eliminate positive psi indices (largest
    /// first), puncture steps then strip `tau_0` insertions, until the
    /// bracket sits on the floor `n = 3` (genus 0, value 1) or `n = 1`
    /// (genus 1, where both residents `<tau_1>_1` and `<tau_0 kappa_1>_1`
    /// equal `1/24`; the one-point floor is terminal because a further
    /// dilaton step would land on an empty moduli space).
    pub fn eval_puncture_dilaton(&self, key: &IntersectionKey) -> Rat {
        self.pd_raw(key.genus, key.m.clone(), key.p.clone())
    }

    fn pd_raw(&self, genus: u8, m: MultiIndex, p: MultiIndex) -> Rat {
        if !Self::is_valid(genus, &m, &p) {
            return Rat::zero();
        }
        let key = (genus, m, p);
        if let Some(v) = self.pd.borrow().get(&key) {
            return v.clone();
        }
        let value = self.pd_step(genus, &key.1, &key.2);
        self.check_ceiling();
        self.pd.borrow_mut().insert(key, value.clone());
        value
    }

    /// `<tau^mm kappa^pp kappa_idx>_g` through the puncture/dilaton route.
    fn pd_kappa_or_scalar(&self, genus: u8, mm: MultiIndex, pp: MultiIndex, idx: u64) -> Rat {
        if idx == 0 {
            let scalar = 2 * genus as i64 - 2 + mm.count() as i64;
            rat_int(scalar) * self.pd_raw(genus, mm, pp)
        } else {
            self.pd_raw(genus, mm, pp.plus_delta(idx as u32))
        }
    }

    fn pd_step(&self, genus: u8, m: &MultiIndex, p: &MultiIndex) -> Rat {
        let n = m.count();
        if genus == 0 && n == 3 {
            // Dimension forces m = 3 d_0, p empty.
            return Rat::one();
        }
        if genus == 1 && n == 1 {
            // Both one-point brackets, <tau_1>_1 and <tau_0 kappa_1>_1.
            return rat(1, 24);
        }
        if let Some(a) = m.max_index().filter(|&a| a >= 1) {
            // Dilaton: <tau^{m+d_a} k^p> = sum_{j <= p} C(p,j)
            //          <tau^m k^{p-j+d_{|j|+a-1}}>.
            let m_wo = m.sub_delta(a).unwrap();
            let mut acc = Rat::zero();
            for (j, p_rest, cj) in p.splits() {
                let idx = j.weight() + a as u64 - 1;
                let term = self.pd_kappa_or_scalar(genus, m_wo.clone(), p_rest, idx);
                if !term.is_zero() {
                    acc += cj * term;
                }
            }
            acc
        } else {
            // Puncture: <tau^{m+d_0} k^p> = sum_{i>=1} m_i
            //           <tau^{m+d_{i-1}-d_i} k^p>
            //           + sum_{0 != j <= p} C(p,j) <tau^m k^{p-j+d_{|j|-1}}>.
            let m_wo = m.sub_delta(0).unwrap();
            let mut acc = Rat::zero();
            for (i, mult) in m_wo.iter().filter(|&(i, _)| i >= 1) {
                let shifted = m_wo.sub_delta(i).unwrap().plus_delta(i - 1);
                acc += rat_int(mult as i64) * self.pd_raw(genus, shifted, p.clone());
            }
            for (j, p_rest, cj) in p.splits() {
                if j.is_empty() {
                    continue;
                }
                let term = self.pd_kappa_or_scalar(genus, m_wo.clone(), p_rest, j.weight() - 1);
                if !term.is_zero() {
                    acc += cj * term;
                }
            }
            acc
        }
    }
}

/// Genus-0 pure-psi bracket `<tau_{b_1} ... tau_{b_n}>_0`: the multinomial
/// `(sum b)! / prod b_i!` when `sum b = n - 3`, and 0 otherwise.
pub fn psi_multinomial_g0(b: &[u64]) -> Rat {
    let n = b.len() as u64;
    let total: u64 = b.iter().sum();
    if total + 3 != n {
        return Rat::zero();
    }
    Rat::from_integer(multinomial(&b.iter().map(|&x| x as i64).collect::<Vec<_>>()))
}

/// Genus-1 pure-psi bracket through the explicit inclusion-exclusion
/// formula: for `b = (b_1, ..., b_k)` with all `b_i >= 1`,
///
/// `<tau_0^{sum b - k} tau_{b_1} ... tau_{b_k}>_1
///    = 1/24 [b] - 1/24 sum_{e in {0,1}^k, ||e|| >= 2} (||e|| - 2)! [b - e]`
///
/// where `[c]` is the multinomial `(sum c)! / prod c_i!` (zero on negative
/// entries). The number of `tau_0` insertions is forced by the dimension
/// equation and is not an argument.
pub fn psi_closed_g1(b: &[u64]) -> Result<Rat> {
    if b.is_empty() {
        return Err(Error::InvalidInput("genus-1 closed form needs at least one positive index".into()));
    }
    if b.iter().any(|&x| x == 0) {
        return Err(Error::InvalidInput("genus-1 closed form indices must be >= 1".into()));
    }
    let k = b.len();
    assert!(k < 64, "more than 63 positive psi indices");
    let signed: Vec<i64> = b.iter().map(|&x| x as i64).collect();
    let mut value = Rat::from_integer(multinomial(&signed));
    for mask in 1u64..(1 << k) {
        let ones = mask.count_ones() as u64;
        if ones < 2 {
            continue;
        }
        let reduced: Vec<i64> = signed
            .iter()
            .enumerate()
            .map(|(i, &x)| if mask >> i & 1 == 1 { x - 1 } else { x })
            .collect();
        value -= Rat::from_integer(crate::rational::factorial(ones - 2) * multinomial(&reduced));
    }
    Ok(value * rat(1, 24))
}

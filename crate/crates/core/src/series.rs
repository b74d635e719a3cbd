//! Truncated multivariate formal power series over exact rationals.
//!
//! A [`TruncatedSeries`] stores a sparse coefficient map from exponent
//! vectors to rationals, graded by total degree (every variable counts 1).
//! `max_degree` is simultaneously the storage cap and the exactness
//! guarantee: all coefficients of total degree `<= max_degree` equal those
//! of the represented function, nothing above is stored. Operations
//! propagate that guarantee:
//!
//! * sum, difference, product: exact to the smaller of the two bounds,
//! * derivative: exact to one less,
//! * multiplication by an exact monomial: exact to the bound plus the
//!   monomial degree,
//! * `exp` (constant term 0) and `log` (constant term 1): exact to the
//!   input's bound, computed by the finite sums `sum f^k / k!` and
//!   `sum (-1)^{k+1} u^k / k` which truncation leaves exact.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{factorial, format_rat, rat, Rat};

/// A series variable: `t_i`, `s_i`, or the single field-theory variable `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    T(u32),
    S(u32),
    X,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::T(i) => write!(f, "t{i}"),
            Var::S(i) => write!(f, "s{i}"),
            Var::X => write!(f, "x"),
        }
    }
}

/// Exponent-vector total degree.
fn deg(exps: &[u32]) -> u64 {
    exps.iter().map(|&e| e as u64).sum()
}

/// Builds the exponent vector for a product of variable powers. Panics when
/// a named variable is not part of `vars`.
pub fn exponents_for(vars: &[Var], powers: &[(Var, u32)]) -> Vec<u32> {
    let mut out = vec![0u32; vars.len()];
    for &(v, e) in powers {
        let pos = vars.iter().position(|&w| w == v).expect("variable outside the window");
        out[pos] += e;
    }
    out
}

/// Human form of a monomial, `1` for the empty one: `t0^2 s1`.
pub fn monomial_string(vars: &[Var], exps: &[u32]) -> String {
    let mut parts = Vec::new();
    for (v, &e) in vars.iter().zip(exps) {
        match e {
            0 => {}
            1 => parts.push(v.to_string()),
            _ => parts.push(format!("{v}^{e}")),
        }
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join(" ")
    }
}

/// Sparse total-degree-truncated power series. See the module docs for the
/// exactness contract.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    vars: Vec<Var>,
    max_degree: u64,
    coeffs: BTreeMap<Vec<u32>, Rat>,
}

impl TruncatedSeries {
    /// The zero series on the given (strictly increasing) variable list.
    pub fn zero(vars: Vec<Var>, max_degree: u64) -> Self {
        assert!(vars.windows(2).all(|w| w[0] < w[1]), "variables must be strictly increasing");
        TruncatedSeries { vars, max_degree, coeffs: BTreeMap::new() }
    }

    /// A constant series.
    pub fn constant(vars: Vec<Var>, max_degree: u64, value: Rat) -> Self {
        let mut s = Self::zero(vars, max_degree);
        if !value.is_zero() {
            s.coeffs.insert(vec![0; s.vars.len()], value);
        }
        s
    }

    pub fn one(vars: Vec<Var>, max_degree: u64) -> Self {
        Self::constant(vars, max_degree, Rat::one())
    }

    /// A single term `value * prod vars^exps`. Panics when the term does not
    /// fit under `max_degree`.
    pub fn monomial(vars: Vec<Var>, max_degree: u64, exps: Vec<u32>, value: Rat) -> Self {
        let mut s = Self::zero(vars, max_degree);
        assert_eq!(exps.len(), s.vars.len(), "exponent vector length mismatch");
        assert!(deg(&exps) <= max_degree, "monomial exceeds the truncation degree");
        if !value.is_zero() {
            s.coeffs.insert(exps, value);
        }
        s
    }

    /// Builds a series from raw `(exponents, coefficient)` pairs; zero
    /// coefficients are dropped, terms beyond the bound are rejected.
    pub fn from_coeffs(
        vars: Vec<Var>,
        max_degree: u64,
        terms: impl IntoIterator<Item = (Vec<u32>, Rat)>,
    ) -> Self {
        let mut s = Self::zero(vars, max_degree);
        for (exps, c) in terms {
            assert_eq!(exps.len(), s.vars.len(), "exponent vector length mismatch");
            assert!(deg(&exps) <= max_degree, "term exceeds the truncation degree");
            if c.is_zero() {
                continue;
            }
            *s.coeffs.entry(exps).or_insert_with(Rat::zero) += c;
        }
        s.coeffs.retain(|_, c| !c.is_zero());
        s
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn max_degree(&self) -> u64 {
        self.max_degree
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Number of stored (nonzero) terms.
    pub fn term_count(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient at an exponent vector (zero when absent).
    pub fn coeff(&self, exps: &[u32]) -> Rat {
        self.coeffs.get(exps).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn const_term(&self) -> Rat {
        self.coeff(&vec![0; self.vars.len()])
    }

    /// Stored terms sorted by (total degree, exponents) - the stable order
    /// used for printing and serialization.
    pub fn terms_graded(&self) -> Vec<(Vec<u32>, Rat)> {
        let mut terms: Vec<_> = self.coeffs.iter().map(|(e, c)| (e.clone(), c.clone())).collect();
        terms.sort_by(|a, b| (deg(&a.0), &a.0).cmp(&(deg(&b.0), &b.0)));
        terms
    }

    /// Restriction to terms of total degree `<= new_max` (which must not
    /// exceed the current bound - exactness cannot be invented).
    pub fn truncate(&self, new_max: u64) -> Self {
        assert!(new_max <= self.max_degree, "cannot extend the exactness bound");
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(e, _)| deg(e) <= new_max)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        TruncatedSeries { vars: self.vars.clone(), max_degree: new_max, coeffs }
    }

    fn assert_same_vars(&self, other: &Self) {
        assert_eq!(self.vars, other.vars, "series live on different variable sets");
    }

    pub fn neg(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|(e, c)| (e.clone(), -c.clone())).collect();
        TruncatedSeries { vars: self.vars.clone(), max_degree: self.max_degree, coeffs }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero(self.vars.clone(), self.max_degree);
        }
        let coeffs = self.coeffs.iter().map(|(e, v)| (e.clone(), v * c)).collect();
        TruncatedSeries { vars: self.vars.clone(), max_degree: self.max_degree, coeffs }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_same_vars(other);
        let cap = self.max_degree.min(other.max_degree);
        let mut coeffs: BTreeMap<Vec<u32>, Rat> = BTreeMap::new();
        for (e, c) in self.coeffs.iter().chain(other.coeffs.iter()) {
            if deg(e) > cap {
                continue;
            }
            *coeffs.entry(e.clone()).or_insert_with(Rat::zero) += c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        TruncatedSeries { vars: self.vars.clone(), max_degree: cap, coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Truncated product, exact to the smaller bound.
    pub fn mul(&self, other: &Self) -> Self {
        self.assert_same_vars(other);
        let cap = self.max_degree.min(other.max_degree);
        let mut coeffs: BTreeMap<Vec<u32>, Rat> = BTreeMap::new();
        let rhs: Vec<(u64, &Vec<u32>, &Rat)> =
            other.coeffs.iter().map(|(e, c)| (deg(e), e, c)).collect();
        for (ea, ca) in &self.coeffs {
            let da = deg(ea);
            if da > cap {
                continue;
            }
            for &(db, eb, cb) in &rhs {
                if da + db > cap {
                    continue;
                }
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                *coeffs.entry(e).or_insert_with(Rat::zero) += ca * cb;
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        TruncatedSeries { vars: self.vars.clone(), max_degree: cap, coeffs }
    }

    /// Product with the exact monomial `value * vars^exps`; the exactness
    /// bound grows by the monomial degree.
    pub fn mul_monomial(&self, exps: &[u32], value: &Rat) -> Self {
        assert_eq!(exps.len(), self.vars.len(), "exponent vector length mismatch");
        let shift = deg(exps);
        if value.is_zero() {
            return Self::zero(self.vars.clone(), self.max_degree + shift);
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|(e, c)| {
                let e: Vec<u32> = e.iter().zip(exps).map(|(x, y)| x + y).collect();
                (e, c * value)
            })
            .collect();
        TruncatedSeries { vars: self.vars.clone(), max_degree: self.max_degree + shift, coeffs }
    }

    /// Partial derivative; exact to one degree less than the input.
    pub fn partial(&self, var: Var) -> Self {
        let pos = self
            .vars
            .iter()
            .position(|&v| v == var)
            .expect("differentiation variable outside the window");
        assert!(self.max_degree >= 1, "cannot differentiate a degree-0 truncation");
        let mut coeffs = BTreeMap::new();
        for (e, c) in &self.coeffs {
            if e[pos] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[pos] -= 1;
            coeffs.insert(e2, c * Rat::from_integer(e[pos].into()));
        }
        TruncatedSeries { vars: self.vars.clone(), max_degree: self.max_degree - 1, coeffs }
    }

    /// `exp(self)`; the constant term must vanish.
    pub fn exp(&self) -> Result<Self> {
        if !self.const_term().is_zero() {
            return Err(Error::InvalidInput(
                "series exponential needs a vanishing constant term".into(),
            ));
        }
        let mut result = Self::one(self.vars.clone(), self.max_degree);
        let mut power = Self::one(self.vars.clone(), self.max_degree);
        for k in 1..=self.max_degree {
            power = power.mul(self);
            if power.is_zero() {
                break;
            }
            result = result.add(&power.scale(&Rat::from_integer(factorial(k)).recip()));
        }
        Ok(result)
    }

    /// `log(self)`; the constant term must be one.
    pub fn log(&self) -> Result<Self> {
        if !self.const_term().is_one() {
            return Err(Error::InvalidInput(
                "series logarithm needs constant term one".into(),
            ));
        }
        let u = self.sub(&Self::one(self.vars.clone(), self.max_degree));
        let mut result = Self::zero(self.vars.clone(), self.max_degree);
        let mut power = Self::one(self.vars.clone(), self.max_degree);
        for k in 1..=self.max_degree {
            power = power.mul(&u);
            if power.is_zero() {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            result = result.add(&power.scale(&rat(sign, k as i64)));
        }
        Ok(result)
    }

    /// Do the two series agree on every monomial of total degree `<= d`?
    /// Panics unless both are exact that far.
    pub fn eq_to_degree(&self, other: &Self, d: u64) -> bool {
        self.assert_same_vars(other);
        assert!(self.max_degree >= d && other.max_degree >= d, "comparison beyond exactness");
        self.coeffs
            .iter()
            .filter(|(e, _)| deg(e) <= d)
            .all(|(e, c)| &other.coeff(e) == c)
            && other
                .coeffs
                .iter()
                .filter(|(e, _)| deg(e) <= d)
                .all(|(e, c)| &self.coeff(e) == c)
    }

    /// Stable JSON form: variables, bound, and graded-lexicographically
    /// sorted terms with `p/q` coefficient strings.
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms_graded()
            .into_iter()
            .map(|(e, c)| {
                serde_json::json!({
                    "exponents": e,
                    "coeff": format_rat(&c),
                })
            })
            .collect();
        serde_json::json!({
            "vars": self.vars.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "max_degree": self.max_degree,
            "terms": terms,
        })
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (pos, (exps, c)) in self.terms_graded().into_iter().enumerate() {
            let mono = monomial_string(&self.vars, &exps);
            let abs = format_rat(&c.abs());
            if pos == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if mono == "1" {
                write!(f, "{abs}")?;
            } else if c.abs().is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{abs} {mono}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_int;

    fn tvars() -> Vec<Var> {
        vec![Var::T(0), Var::T(1), Var::S(1)]
    }

    fn t0_poly(max: u64, terms: &[(u32, Rat)]) -> TruncatedSeries {
        TruncatedSeries::from_coeffs(
            tvars(),
            max,
            terms.iter().map(|(e, c)| (vec![*e, 0, 0], c.clone())),
        )
    }

    #[test]
    fn mul_truncates_at_the_smaller_bound() {
        // (1 + t0)^2 at max degree 2.
        let s = t0_poly(2, &[(0, rat_int(1)), (1, rat_int(1))]);
        let sq = s.mul(&s);
        assert_eq!(sq, t0_poly(2, &[(0, rat_int(1)), (1, rat_int(2)), (2, rat_int(1))]));
        // Same product truncated at 1 loses the square.
        let low = s.truncate(1);
        let sq = s.mul(&low);
        assert_eq!(sq.max_degree(), 1);
        assert_eq!(sq, t0_poly(1, &[(0, rat_int(1)), (1, rat_int(2))]));
    }

    #[test]
    fn triple_partial_of_cubic_is_one() {
        let s = t0_poly(3, &[(3, rat(1, 6))]);
        let d3 = s.partial(Var::T(0)).partial(Var::T(0)).partial(Var::T(0));
        assert_eq!(d3.max_degree(), 0);
        assert_eq!(d3.const_term(), rat_int(1));
    }

    #[test]
    fn exp_of_t0_matches_taylor() {
        let s = t0_poly(3, &[(1, rat_int(1))]);
        let e = s.exp().unwrap();
        assert_eq!(
            e,
            t0_poly(3, &[(0, rat_int(1)), (1, rat_int(1)), (2, rat(1, 2)), (3, rat(1, 6))])
        );
    }

    #[test]
    fn log_inverts_exp() {
        let mixed = TruncatedSeries::from_coeffs(
            tvars(),
            4,
            vec![
                (vec![1, 0, 0], rat_int(2)),
                (vec![0, 1, 1], rat(-3, 7)),
                (vec![2, 0, 0], rat(1, 5)),
            ],
        );
        let round = mixed.exp().unwrap().log().unwrap();
        assert_eq!(round, mixed);
    }

    #[test]
    fn exp_and_log_reject_bad_constant_terms() {
        let one = TruncatedSeries::one(tvars(), 3);
        assert!(one.exp().is_err());
        let zero = TruncatedSeries::zero(tvars(), 3);
        assert!(zero.log().is_err());
    }

    #[test]
    fn monomial_mul_extends_exactness() {
        let s = t0_poly(2, &[(0, rat_int(1)), (1, rat_int(4))]);
        let shifted = s.mul_monomial(&[0, 0, 2], &rat(1, 2));
        assert_eq!(shifted.max_degree(), 4);
        assert_eq!(shifted.coeff(&[1, 0, 2]), rat_int(2));
        assert_eq!(shifted.coeff(&[0, 0, 2]), rat(1, 2));
    }

    #[test]
    fn graded_order_and_display() {
        let s = TruncatedSeries::from_coeffs(
            tvars(),
            3,
            vec![
                (vec![0, 0, 2], rat_int(5)),
                (vec![1, 0, 0], rat_int(-1)),
                (vec![0, 0, 0], rat(1, 2)),
            ],
        );
        let terms = s.terms_graded();
        assert_eq!(
            terms.iter().map(|(e, _)| e.clone()).collect::<Vec<_>>(),
            vec![vec![0, 0, 0], vec![1, 0, 0], vec![0, 0, 2]]
        );
        assert_eq!(s.to_string(), "1/2 - t0 + 5 s1^2");
        let json = s.to_json();
        assert_eq!(json["vars"][2], "s1");
        assert_eq!(json["terms"][2]["coeff"], "5");
    }

    #[test]
    fn eq_to_degree_ignores_higher_terms() {
        let a = t0_poly(3, &[(1, rat_int(1)), (3, rat_int(9))]);
        let b = t0_poly(2, &[(1, rat_int(1))]);
        assert!(a.eq_to_degree(&b, 2));
        assert!(!a.eq_to_degree(&b.neg(), 1));
    }
}

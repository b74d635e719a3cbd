//! Rank-one cohomological field theories in genus 0 and 1, restricted to
//! the `(s, u)` coordinate family.
//!
//! A theory here is a point: finitely many kappa weights `s_1, s_2, ...`
//! plus one Hodge weight `u`. Its potentials are the exponential
//! generating functions `Phi_g(x) = sum_n I_{g,n} x^n / n!` with
//!
//! * `I_{0,n} = sum_{|p| = n-3} (s^p / p!) <tau_0^n kappa^p>_0`,
//! * `Phi_1  = (u/24) Phi_0'' + (1/24) log Phi_0'''`.
//!
//! The pair is constrained by a single genus-one differential equation
//! ([`check_getzler`]); conversely any invertible genus-zero potential
//! determines the genus-one one up to one constant ([`genus_one_from_genus_zero`]).
//! Tensor product of theories is coordinate addition ([`CohftPoint::tensor`]).

use std::collections::BTreeMap;

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::index::{all_s1, MultiIndex};
use crate::rational::{rat, Rat};
use crate::series::{TruncatedSeries, Var};

/// Coordinates of a rank-one theory: kappa weights `s_i` (finitely many,
/// indices start at 1) and the Hodge weight `u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohftPoint {
    s: BTreeMap<u32, Rat>,
    u: Rat,
}

impl CohftPoint {
    /// Builds a point from `(index, weight)` pairs and `u`. Zero weights
    /// are dropped; index 0 and repeated indices are rejected.
    pub fn new(s_pairs: &[(u32, Rat)], u: Rat) -> Result<Self> {
        let mut s = BTreeMap::new();
        for (i, w) in s_pairs {
            if *i == 0 {
                return Err(Error::InvalidInput(
                    "kappa weight index 0 is not a coordinate; the scalar kappa_0 is implicit"
                        .into(),
                ));
            }
            if s.insert(*i, w.clone()).is_some() {
                return Err(Error::InvalidInput(format!("kappa weight s_{i} given twice")));
            }
        }
        s.retain(|_, w: &mut Rat| !w.is_zero());
        Ok(CohftPoint { s, u })
    }

    /// The unit theory: all coordinates zero.
    pub fn unit() -> Self {
        CohftPoint { s: BTreeMap::new(), u: Rat::zero() }
    }

    pub fn s(&self) -> &BTreeMap<u32, Rat> {
        &self.s
    }

    pub fn u(&self) -> &Rat {
        &self.u
    }

    /// Tensor product of theories: coordinatewise sum.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut s = self.s.clone();
        for (i, w) in &other.s {
            *s.entry(*i).or_insert_with(Rat::zero) += w;
        }
        s.retain(|_, w| !w.is_zero());
        CohftPoint { s, u: self.u.clone() + other.u.clone() }
    }

    /// Monomial weight `s^p / p!` of a kappa multi-index, zero whenever `p`
    /// uses an index this point does not carry.
    fn weight_of(&self, p: &MultiIndex) -> Rat {
        let mut acc = Rat::one();
        for (i, mult) in p.iter() {
            match self.s.get(&i) {
                Some(w) => {
                    for _ in 0..mult {
                        acc *= w;
                    }
                }
                None => return Rat::zero(),
            }
        }
        acc / Rat::from_integer(p.factorial_product())
    }
}

/// Genus-zero and genus-one potentials of one theory, both exact to total
/// degree `order` in `x`.
#[derive(Debug, Clone)]
pub struct PotentialPair {
    pub phi0: TruncatedSeries,
    pub phi1: TruncatedSeries,
    pub order: u64,
}

/// The coefficient `I_{0,n}` of the point: kappa brackets of total weight
/// `n - 3` against the point's `s` monomials.
fn genus_zero_coefficient(ev: &Evaluator, point: &CohftPoint, n: u64) -> Rat {
    assert!(n >= 3);
    let mut acc = Rat::zero();
    for p in all_s1(n - 3) {
        if p.weight() != n - 3 {
            continue;
        }
        let w = point.weight_of(&p);
        if w.is_zero() {
            continue;
        }
        acc += w * ev.kappa_bracket(&p, 0).expect("stable genus-0 kappa bracket");
    }
    acc
}

/// Potentials of a point, exact to `order` (which must be at least 3).
///
/// `Phi_0` is assembled from kappa brackets; `Phi_1` comes from the closed
/// genus-one formula `(u/24) Phi_0'' + (1/24) log Phi_0'''`, evaluated on a
/// genus-zero potential carried three degrees past `order` so that the
/// third derivative is still exact where it is used.
pub fn potential_from_point(ev: &Evaluator, point: &CohftPoint, order: u64) -> Result<PotentialPair> {
    if order < 3 {
        return Err(Error::InvalidInput(format!(
            "potential order must be at least 3, got {order}"
        )));
    }
    let vars = vec![Var::X];
    let mut terms = Vec::new();
    for n in 3..=order + 3 {
        let coeff = genus_zero_coefficient(ev, point, n)
            / Rat::from_integer(crate::rational::factorial(n));
        if !coeff.is_zero() {
            terms.push((vec![n as u32], coeff));
        }
    }
    let phi0_wide = TruncatedSeries::from_coeffs(vars, order + 3, terms);
    let d2 = phi0_wide.partial(Var::X).partial(Var::X);
    let d3 = d2.partial(Var::X);
    let log_d3 = d3.log().expect("Phi_0''' has constant term I_{0,3} = 1");
    let phi1 = d2.scale(&(point.u.clone() / rat(24, 1))).add(&log_d3.scale(&rat(1, 24)));
    Ok(PotentialPair { phi0: phi0_wide.truncate(order), phi1, order })
}

/// Left-hand side of the genus-one constraint
///
/// `-(Phi_0''')^2 Phi_1'' + Phi_0''' Phi_0'''' Phi_1'
///  - 1/12 (Phi_0'''')^2 + 1/24 Phi_0''' Phi_0'''''`,
///
/// exact to `order - 5`. The pair satisfies the constraint exactly when
/// this series is zero.
pub fn check_getzler(pair: &PotentialPair) -> TruncatedSeries {
    assert!(pair.order >= 5, "the constraint involves five derivatives of Phi_0");
    let d3 = pair.phi0.partial(Var::X).partial(Var::X).partial(Var::X);
    let d4 = d3.partial(Var::X);
    let d5 = d4.partial(Var::X);
    let p1 = pair.phi1.partial(Var::X);
    let p2 = p1.partial(Var::X);
    d3.mul(&d3)
        .mul(&p2)
        .neg()
        .add(&d3.mul(&d4).mul(&p1))
        .sub(&d4.mul(&d4).scale(&rat(1, 12)))
        .add(&d3.mul(&d5).scale(&rat(1, 24)))
        .truncate(pair.order - 5)
}

/// Reconstructs the genus-one potential from an invertible genus-zero one
/// and the single free coefficient `I_{1,1}`:
///
/// `Phi_1 = 1/24 log(Phi_0''' / I_{0,3}) + B Phi_0''` with `B` solved from
/// `I_{1,1} = (1/24) I_{0,4} / I_{0,3} + B I_{0,3}`.
///
/// The log is normalized by `I_{0,3}` so the computation stays rational;
/// the dropped additive constant never enters the genus-one constraint,
/// which only sees derivatives of `Phi_1`.
///
/// A genus-zero potential must be `I_{0,3} x^3/6 + O(x^4)`; if its cubic
/// coefficient vanishes the only admissible theory is the trivial one, so
/// `phi0` must be identically zero and `Phi_1 = I_{1,1} x` is returned
/// unconstrained.
pub fn genus_one_from_genus_zero(phi0: &TruncatedSeries, i11: &Rat) -> Result<PotentialPair> {
    assert_eq!(phi0.vars(), [Var::X], "potentials are series in x alone");
    let order = phi0.max_degree().saturating_sub(3);
    let i03 = phi0.coeff(&[3]) * Rat::from_integer(crate::rational::factorial(3));
    if i03.is_zero() {
        if !phi0.is_zero() {
            return Err(Error::InvalidInput(
                "a theory with vanishing I_{0,3} has zero genus-zero potential".into(),
            ));
        }
        let phi1 =
            TruncatedSeries::monomial(vec![Var::X], order.max(1), vec![1], i11.clone());
        return Ok(PotentialPair { phi0: phi0.clone(), phi1, order });
    }
    for e in 0..3 {
        if !phi0.coeff(&[e]).is_zero() {
            return Err(Error::InvalidInput(format!(
                "genus-zero potential has a term of degree {e}; it must start at x^3"
            )));
        }
    }
    let i04 = phi0.coeff(&[4]) * Rat::from_integer(crate::rational::factorial(4));
    let b = (i11.clone() - rat(1, 24) * &i04 / &i03) / &i03;
    let d2 = phi0.partial(Var::X).partial(Var::X);
    let d3 = d2.partial(Var::X);
    let log_term = d3.scale(&i03.recip()).log().expect("normalized leading coefficient");
    let phi1 = log_term.scale(&rat(1, 24)).add(&d2.scale(&b));
    Ok(PotentialPair { phi0: phi0.clone(), phi1, order })
}

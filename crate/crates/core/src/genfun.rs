//! Generating functions of bracket values and their structural identities.
//!
//! `H_g(t; s) = sum <tau^m kappa^p>_g t^m s^p / (m! p!)` is materialized
//! coefficient-by-coefficient from the evaluator on a finite window: psi
//! variables `t_0 .. t_{t_max}`, kappa variables `s_1 .. s_{s_max}`, total
//! degree up to a bound. Three checkers validate the structure:
//!
//! * [`check_charge`] - every stored monomial satisfies the grading
//!   `3(1-g) + sum (i-1) m_i + sum i p_i = 0`;
//! * [`check_genus_one_relation`] - `H_1 = 1/24 log(d_0^3 H_0)`;
//! * [`check_annihilators`] - the first-order differential operators that
//!   kill `exp(H_g)`, one per removable insertion `tau_a`.
//!
//! Restriction to the window commutes with every operation used here; the
//! only terms that would reach outside it are kappa derivatives `d_k` with
//! `k > s_max` (and psi derivatives past `t_max`), and those are supplied
//! coefficient-wise by the evaluator instead of by series differentiation.

use num::{One, Zero};

use crate::eval::{EvalRoute, Evaluator, IntersectionKey, KeyOutcome};
use crate::index::{all_s0, all_s1, IndexKind, MultiIndex};
use crate::rational::{format_rat, rat, Rat};
use crate::series::{exponents_for, monomial_string, TruncatedSeries, Var};

/// The variable list `t_0 .. t_{t_max}, s_1 .. s_{s_max}`.
pub fn window_vars(t_max: u32, s_max: u32) -> Vec<Var> {
    (0..=t_max).map(Var::T).chain((1..=s_max).map(Var::S)).collect()
}

/// Splits a window exponent vector back into its psi and kappa indices.
fn decode(t_max: u32, exps: &[u32]) -> (MultiIndex, MultiIndex) {
    let t_len = t_max as usize + 1;
    let m: Vec<(u32, u32)> =
        exps[..t_len].iter().enumerate().map(|(i, &e)| (i as u32, e)).collect();
    let p: Vec<(u32, u32)> =
        exps[t_len..].iter().enumerate().map(|(i, &e)| (i as u32 + 1, e)).collect();
    (
        MultiIndex::from_pairs(IndexKind::S0, &m).unwrap(),
        MultiIndex::from_pairs(IndexKind::S1, &p).unwrap(),
    )
}

/// Calls `f` on every exponent vector of the given length with total degree
/// at most `degree`.
fn for_each_exponent(len: usize, degree: u64, f: &mut impl FnMut(&[u32])) {
    fn rec(buf: &mut Vec<u32>, len: usize, left: u64, f: &mut impl FnMut(&[u32])) {
        if buf.len() == len {
            f(buf);
            return;
        }
        for e in 0..=left {
            buf.push(e as u32);
            rec(buf, len, left - e, f);
            buf.pop();
        }
    }
    rec(&mut Vec::with_capacity(len), len, degree, f);
}

/// Series whose `(m, p)` coefficient is
/// `<tau^{m + extra_tau} kappa^{p + extra_kappa}>_g / (m! p!)`.
///
/// With no extras this is `H_g` itself; with one extra it is the exact
/// derivative `d_{extra}` of `H_g`, which is how derivatives with indices
/// beyond the window are obtained.
fn insertion_series(
    ev: &Evaluator,
    genus: u8,
    t_max: u32,
    s_max: u32,
    degree: u64,
    extra_tau: Option<u32>,
    extra_kappa: Option<u32>,
) -> TruncatedSeries {
    let vars = window_vars(t_max, s_max);
    let mut terms: Vec<(Vec<u32>, Rat)> = Vec::new();
    for_each_exponent(vars.len(), degree, &mut |exps| {
        let (m, p) = decode(t_max, exps);
        let m_full = match extra_tau {
            Some(a) => m.plus_delta(a),
            None => m.clone(),
        };
        let p_full = match extra_kappa {
            Some(k) => p.plus_delta(k),
            None => p.clone(),
        };
        let value = ev.bracket_or_zero(genus, &m_full, &p_full);
        if value.is_zero() {
            return;
        }
        let denom = Rat::from_integer(m.factorial_product() * p.factorial_product());
        terms.push((exps.to_vec(), value / denom));
    });
    TruncatedSeries::from_coeffs(vars, degree, terms)
}

/// The generating function `H_g` on the given window, exact to `degree`.
pub fn build_h(ev: &Evaluator, genus: u8, t_max: u32, s_max: u32, degree: u64) -> TruncatedSeries {
    insertion_series(ev, genus, t_max, s_max, degree, None, None)
}

/// Outcome of one structural check: a label, how many units were examined,
/// and rendered descriptions of any failures (empty means pass).
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub label: String,
    pub checked: usize,
    pub failures: Vec<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Evaluates every well-formed bracket with at most `n_max` psi insertions
/// and total dimension at most `dim_max` through each applicable route and
/// reports disagreements. The splitting recursion and the insertion
/// elimination are independent algorithms, so agreement across this sweep
/// is a strong whole-pipeline check; pure-psi keys are additionally held
/// against the closed formulas.
pub fn check_route_agreement(ev: &Evaluator, n_max: u64, dim_max: u64) -> CheckReport {
    let mut failures = Vec::new();
    let mut checked = 0usize;
    for genus in [0u8, 1] {
        for m in all_s0(n_max, dim_max) {
            for p in all_s1(dim_max - m.weight()) {
                let key = match IntersectionKey::make(genus, m.clone(), p.clone()) {
                    Ok(KeyOutcome::Valid(k)) => k,
                    _ => continue,
                };
                checked += 1;
                let rec = ev.eval(&key);
                let red = ev.eval_puncture_dilaton(&key);
                if rec != red {
                    failures.push(format!(
                        "g={genus} m={m} p={p}: splitting gives {}, insertion elimination gives {}",
                        format_rat(&rec),
                        format_rat(&red)
                    ));
                }
                if p.is_empty() {
                    match ev.eval_route(&key, EvalRoute::ClosedForm) {
                        Ok(cf) if cf == rec => {}
                        Ok(cf) => failures.push(format!(
                            "g={genus} m={m}: closed form gives {}, recursion gives {}",
                            format_rat(&cf),
                            format_rat(&rec)
                        )),
                        Err(e) => failures.push(format!("g={genus} m={m}: closed form failed: {e}")),
                    }
                }
            }
        }
    }
    CheckReport {
        label: format!("route agreement, points <= {n_max}, dimension <= {dim_max}"),
        checked,
        failures,
    }
}

/// Verifies the grading of a stored generating function: every monomial of
/// `h` must satisfy `3(1-g) + sum_i (i-1) m_i + sum_i i p_i = 0`.
pub fn check_charge(h: &TruncatedSeries, genus: u8) -> CheckReport {
    let vars = h.vars().to_vec();
    let mut failures = Vec::new();
    let terms = h.terms_graded();
    for (exps, coeff) in &terms {
        let mut charge: i64 = 3 * (1 - genus as i64);
        for (v, &e) in vars.iter().zip(exps) {
            charge += match v {
                Var::T(i) => (*i as i64 - 1) * e as i64,
                Var::S(i) => *i as i64 * e as i64,
                Var::X => panic!("charge is defined for t/s windows only"),
            };
        }
        if charge != 0 {
            failures.push(format!(
                "charge {charge} at {} (coefficient {})",
                monomial_string(&vars, exps),
                format_rat(coeff)
            ));
        }
    }
    CheckReport {
        label: format!("charge conservation, genus {genus}"),
        checked: terms.len(),
        failures,
    }
}

/// Verifies `H_1 = 1/24 log(d_0^3 H_0)` coefficient-wise on the window, to
/// total degree `degree`. `H_0` is built three degrees higher so the third
/// derivative is still exact where compared.
pub fn check_genus_one_relation(
    ev: &Evaluator,
    t_max: u32,
    s_max: u32,
    degree: u64,
) -> CheckReport {
    let h0 = build_h(ev, 0, t_max, s_max, degree + 3);
    let d3 = h0.partial(Var::T(0)).partial(Var::T(0)).partial(Var::T(0));
    let rhs = d3.log().expect("d0^3 H_0 has constant term <tau_0^3>_0 = 1").scale(&rat(1, 24));
    let h1 = build_h(ev, 1, t_max, s_max, degree);

    let mut failures = Vec::new();
    let mut checked = 0usize;
    let vars = h1.vars().to_vec();
    for_each_exponent(vars.len(), degree, &mut |exps| {
        checked += 1;
        let lhs = h1.coeff(exps);
        let right = rhs.coeff(exps);
        if lhs != right {
            failures.push(format!(
                "{}: H_1 gives {}, 1/24 log(d0^3 H_0) gives {}",
                monomial_string(&vars, exps),
                format_rat(&lhs),
                format_rat(&right)
            ));
        }
    });
    CheckReport {
        label: format!("H_1 = 1/24 log(d0^3 H_0), window t<=t{t_max} s<=s{s_max} degree {degree}"),
        checked,
        failures,
    }
}

/// The residual of the `tau_a`-removal operator applied to `exp(H_g)`,
/// exact to `degree - 1`. A zero residual is the statement that the
/// operator annihilates `exp(H_g)`.
///
/// The operator (acting on `E = exp H_g`) is
///
/// * `a = 0`:  `-d/dt_0 E + sum_{|j| >= 2} s^j/j! d_{|j|-1} E
///    + sum_{i>=1} t_i d/dt_{i-1} E + s_1 * (euler E)
///    + (t_0^2/2) E` in genus 0, `+ (s_1/24) E` in genus 1;
/// * `a = 1`:  `-d/dt_1 E + sum_{|j| >= 1} s^j/j! d_{|j|} E + euler E
///    + (1/24) E` in genus 1;
/// * `a >= 2`: `-d/dt_a E + sum_{j >= 0} s^j/j! d_{|j|+a-1} E`;
///
/// where `euler = sum_i (2i+1)/3 t_i d/dt_i + sum_i (2i)/3 s_i d_i` is the
/// charge-grading vector field standing in for the scalar `kappa_0`
/// insertions, and `d_k` is the kappa derivative - taken term-wise from the
/// evaluator whenever `k > s_max`.
///
/// `include_constants` exists so tests can deliberately drop the constant
/// terms and watch the residual become nonzero.
pub fn annihilator_residual(
    ev: &Evaluator,
    genus: u8,
    a: u32,
    t_max: u32,
    s_max: u32,
    degree: u64,
    include_constants: bool,
) -> TruncatedSeries {
    assert!(a <= t_max, "operator index outside the psi window");
    let vars = window_vars(t_max, s_max);
    let h = build_h(ev, genus, t_max, s_max, degree);
    let e = h.exp().expect("H_g has no constant term");

    let mut res = e.partial(Var::T(a)).neg();

    // Kappa-ladder sum over multi-indices j supported in the window.
    for j in all_s1(degree) {
        if j.max_index().is_some_and(|i| i > s_max) {
            continue;
        }
        let total = j.weight() + a as u64;
        if total < 2 {
            continue;
        }
        let k = (total - 1) as u32;
        let dk = if k <= s_max {
            e.partial(Var::S(k))
        } else {
            insertion_series(ev, genus, t_max, s_max, degree, None, Some(k)).mul(&e)
        };
        let powers: Vec<(Var, u32)> = j.iter().map(|(i, mult)| (Var::S(i), mult)).collect();
        let jexp = exponents_for(&vars, &powers);
        let scale = Rat::from_integer(j.factorial_product()).recip();
        res = res.add(&dk.mul_monomial(&jexp, &scale));
    }

    if a <= 1 {
        let mut euler = TruncatedSeries::zero(vars.clone(), degree);
        for i in 0..=t_max {
            let term = e
                .partial(Var::T(i))
                .mul_monomial(&exponents_for(&vars, &[(Var::T(i), 1)]), &rat(2 * i as i64 + 1, 3));
            euler = euler.add(&term);
        }
        for i in 1..=s_max {
            let term = e
                .partial(Var::S(i))
                .mul_monomial(&exponents_for(&vars, &[(Var::S(i), 1)]), &rat(2 * i as i64, 3));
            euler = euler.add(&term);
        }
        if a == 0 {
            // The whole kappa_0 package arrives under one extra s_1 here.
            if s_max >= 1 {
                euler = euler.mul_monomial(&exponents_for(&vars, &[(Var::S(1), 1)]), &Rat::one());
                res = res.add(&euler);
            }
            for i in 1..=t_max {
                let shift = e
                    .partial(Var::T(i - 1))
                    .mul_monomial(&exponents_for(&vars, &[(Var::T(i), 1)]), &Rat::one());
                res = res.add(&shift);
            }
        } else {
            res = res.add(&euler);
        }
    }

    if include_constants {
        match (a, genus) {
            (0, 0) => {
                res = res.add(&e.mul_monomial(&exponents_for(&vars, &[(Var::T(0), 2)]), &rat(1, 2)));
            }
            (0, 1) => {
                if s_max >= 1 {
                    res = res
                        .add(&e.mul_monomial(&exponents_for(&vars, &[(Var::S(1), 1)]), &rat(1, 24)));
                }
            }
            (1, 1) => {
                res = res.add(&e.scale(&rat(1, 24)));
            }
            _ => {}
        }
    }
    res
}

/// Applies every `tau_a`-removal operator with `a <= t_max` to `exp(H_g)`
/// and reports any nonzero residual coefficient within the exact range.
pub fn check_annihilators(
    ev: &Evaluator,
    genus: u8,
    t_max: u32,
    s_max: u32,
    degree: u64,
) -> CheckReport {
    let mut failures = Vec::new();
    let mut checked = 0usize;
    for a in 0..=t_max {
        let res = annihilator_residual(ev, genus, a, t_max, s_max, degree, true);
        checked += 1;
        if !res.is_zero() {
            let vars = res.vars().to_vec();
            let terms = res.terms_graded();
            let (exps, c) = &terms[0];
            failures.push(format!(
                "operator a={a}: residual {} at {} (and {} more terms)",
                format_rat(c),
                monomial_string(&vars, exps),
                terms.len() - 1
            ));
        }
    }
    CheckReport {
        label: format!(
            "annihilator operators, genus {genus}, window t<=t{t_max} s<=s{s_max} degree {degree}"
        ),
        checked,
        failures,
    }
}

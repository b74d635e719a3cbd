//! Weil-Petersson volumes `w_{g,n} = <kappa_1^{3g-3+n}>_{g,n}` and their
//! large-`n` growth.
//!
//! The volumes themselves are exact rationals delegated to the evaluator
//! (the keys stay inside the one-parameter `tau_0`/`kappa_1` family, so the
//! memoized table fill is polynomial in `n`). The growth laws they are
//! compared against are
//!
//! * genus 0, `n = nu + 3`:
//!   `w ~ (gamma0 2^{3/2} sqrt(pi) / C) 4^nu nu^{2nu+1/2} / (C^nu e^{2nu})`,
//! * genus 1:
//!   `w ~ (pi/24) (2n)^{2n} / (C^n e^{2n})`,
//!
//! where `gamma0` is the first zero of the Bessel function `J_0` and
//! `C = 2 gamma0 J_1(gamma0)`. Both constants are computed here from the
//! power series of `J_0` and `J_1`, not hard-coded. Volumes grow factorially
//! and overflow `f64` long before `n = 50`, so every comparison happens in
//! log space via exact-numerator/denominator logarithms.

use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::index::{IndexKind, MultiIndex};
use crate::rational::{ln_rat, Rat};

/// One line of the asymptotic comparison: the exact volume, the growth-law
/// value, and their quotient. For the lone genus-0 row where the growth law
/// degenerates to zero (`nu = 0`) the ratio is reported as infinity.
#[derive(Debug, Clone)]
pub struct VolumeRow {
    pub n: u64,
    pub w: Rat,
    pub asymptote: f64,
    pub ratio: f64,
}

/// First zero of `J_0` and the derived constant `c = 2 gamma0 J_1(gamma0)`.
#[derive(Debug, Clone, Copy)]
pub struct BesselConstants {
    pub gamma0: f64,
    pub c: f64,
}

/// Smallest admissible `n` for the genus: 3 marked points in genus 0, 1 in
/// genus 1.
pub fn min_points(genus: u8) -> u64 {
    if genus == 0 {
        3
    } else {
        1
    }
}

/// The volume `w_{g,n}`, i.e. the top power of `kappa_1` paired against
/// `n` plain marked points.
pub fn wp_volume(ev: &Evaluator, genus: u8, n: u64) -> Result<Rat> {
    if genus > 1 {
        return Err(Error::UnsupportedGenus(genus as i64));
    }
    if n < min_points(genus) {
        return Err(Error::Unstable { genus, n });
    }
    let power = (3 * genus as u64 + n).saturating_sub(3) as u32;
    let p = MultiIndex::from_pairs(IndexKind::S1, &[(1, power)])?;
    ev.kappa_bracket(&p, genus)
}

fn j0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut k = 0u64;
    while term.abs() > 1e-20 {
        k += 1;
        term *= -q / ((k * k) as f64);
        sum += term;
    }
    sum
}

fn j1(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = x / 2.0;
    let mut sum = term;
    let mut k = 0u64;
    while term.abs() > 1e-20 {
        k += 1;
        term *= -q / ((k * (k + 1)) as f64);
        sum += term;
    }
    sum
}

/// Locates the first zero of `J_0` by bisection on `[2, 3]` followed by
/// Newton steps (`J_0' = -J_1`), and packages it with
/// `c = 2 gamma0 J_1(gamma0)`.
pub fn bessel_constants() -> BesselConstants {
    let (mut lo, mut hi) = (2.0f64, 3.0f64);
    debug_assert!(j0(lo) > 0.0 && j0(hi) < 0.0);
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if j0(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..20 {
        let step = j0(x) / j1(x);
        x += step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    BesselConstants { gamma0: x, c: 2.0 * x * j1(x) }
}

/// Log of the growth-law value for `w_{g,n}`; `None` where the law
/// degenerates to zero (genus 0 at `n = 3`).
fn ln_asymptote(genus: u8, n: u64, k: &BesselConstants) -> Option<f64> {
    use std::f64::consts::PI;
    let ln_c = k.c.ln();
    match genus {
        1 => {
            let nf = n as f64;
            Some((PI / 24.0).ln() + 2.0 * nf * ((2.0 * nf).ln() - 1.0) - nf * ln_c)
        }
        0 => {
            let nu = (n - 3) as f64;
            if nu == 0.0 {
                return None;
            }
            Some(
                k.gamma0.ln() + 1.5 * 2.0f64.ln() + 0.5 * PI.ln() - ln_c
                    + 2.0 * nu * 2.0f64.ln()
                    + (2.0 * nu + 0.5) * nu.ln()
                    - nu * ln_c
                    - 2.0 * nu,
            )
        }
        _ => unreachable!("volumes exist for genus 0 and 1 only"),
    }
}

/// Exact volumes for all stable `n <= n_max` with their growth-law values
/// and ratios. Ratios are formed in log space, so they stay finite and
/// meaningful even when both sides overflow `f64`.
pub fn asymptotic_ratio_table(ev: &Evaluator, genus: u8, n_max: u64) -> Result<Vec<VolumeRow>> {
    if genus > 1 {
        return Err(Error::UnsupportedGenus(genus as i64));
    }
    let k = bessel_constants();
    let mut rows = Vec::new();
    for n in min_points(genus)..=n_max {
        let w = wp_volume(ev, genus, n)?;
        let (asymptote, ratio) = match ln_asymptote(genus, n, &k) {
            Some(ln_a) => (ln_a.exp(), (ln_rat(&w) - ln_a).exp()),
            None => (0.0, f64::INFINITY),
        };
        rows.push(VolumeRow { n, w, asymptote, ratio });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{EvalRoute, IntersectionKey, KeyOutcome};
    use crate::rational::{rat, rat_int};
    use num::Zero;

    #[test]
    fn small_volume_table() {
        let ev = Evaluator::new();
        assert_eq!(wp_volume(&ev, 0, 3).unwrap(), rat_int(1));
        assert_eq!(wp_volume(&ev, 0, 4).unwrap(), rat_int(1));
        assert_eq!(wp_volume(&ev, 0, 5).unwrap(), rat_int(5));
        assert_eq!(wp_volume(&ev, 0, 6).unwrap(), rat_int(61));
        assert_eq!(wp_volume(&ev, 1, 1).unwrap(), rat(1, 24));
        assert_eq!(wp_volume(&ev, 1, 2).unwrap(), rat(1, 8));
        assert!(matches!(wp_volume(&ev, 0, 2), Err(Error::Unstable { .. })));
        assert!(matches!(wp_volume(&ev, 1, 0), Err(Error::Unstable { .. })));
    }

    #[test]
    fn volumes_match_the_reduction_route_and_stay_positive() {
        let ev = Evaluator::new();
        for genus in [0u8, 1] {
            for n in min_points(genus)..=12 {
                let w = wp_volume(&ev, genus, n).unwrap();
                assert!(w > Rat::zero(), "w_{{{genus},{n}}} not positive");
                let power = (3 * genus as u64 + n - 3) as u32;
                let m = MultiIndex::from_pairs(IndexKind::S0, &[(0, n as u32)]).unwrap();
                let p = MultiIndex::from_pairs(IndexKind::S1, &[(1, power)]).unwrap();
                let key = match IntersectionKey::make(genus, m, p).unwrap() {
                    KeyOutcome::Valid(k) => k,
                    other => panic!("volume key classified as {other:?}"),
                };
                assert_eq!(
                    ev.eval_route(&key, EvalRoute::PunctureDilaton).unwrap(),
                    w,
                    "route mismatch at genus {genus}, n {n}"
                );
            }
        }
    }

    #[test]
    fn bessel_constants_reproduce_known_digits() {
        let k = bessel_constants();
        assert!((k.gamma0 - 2.40482555777).abs() < 1e-9, "gamma0 = {}", k.gamma0);
        assert!((k.c - 2.496918339).abs() < 1e-8, "c = {}", k.c);
        assert!(j0(k.gamma0).abs() < 1e-12);
    }

    #[test]
    fn ratio_table_structure() {
        let ev = Evaluator::new();
        let rows = asymptotic_ratio_table(&ev, 0, 10).unwrap();
        assert_eq!(rows.first().unwrap().n, 3);
        assert!(rows[0].ratio.is_infinite());
        assert!(rows[1..].iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0));
        let rows = asymptotic_ratio_table(&ev, 1, 10).unwrap();
        assert_eq!(rows.first().unwrap().n, 1);
        assert_eq!(rows[0].w, rat(1, 24));
        assert!(rows.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0));
    }
}

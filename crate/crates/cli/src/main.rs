//! `mgn` - exact intersection numbers on moduli of stable curves, genus 0
//! and 1, with verification suites for the structural identities they obey.
//!
//! Exit codes: 0 success (and all checks passed), 1 a verification suite
//! found a counterexample, 2 malformed invocation or invalid input.

use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use mgn_core::cohft::{check_getzler, potential_from_point, CohftPoint};
use mgn_core::genfun::{
    build_h, check_annihilators, check_charge, check_genus_one_relation, check_route_agreement,
    CheckReport,
};
use mgn_core::rational::{format_rat, ln_rat, parse_rat};
use mgn_core::series::TruncatedSeries;
use mgn_core::wp::{asymptotic_ratio_table, bessel_constants, min_points, wp_volume};
use mgn_core::{EvalRoute, Evaluator, IndexKind, IntersectionKey, KeyOutcome, MultiIndex, Rat};

#[derive(Parser)]
#[command(name = "mgn", version, about = "Exact psi/kappa/lambda intersection numbers in genus 0 and 1")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one bracket <tau^m kappa^p>_g (optionally against lambda_1).
    Number(NumberArgs),
    /// Print the generating function H_g on a variable window.
    Table(TableArgs),
    /// Run a verification suite; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Weil-Petersson volumes, optionally with their growth-law ratios.
    Wp(WpArgs),
    /// Potentials of a rank-one theory at a point (s, u).
    Cohft(CohftArgs),
}

#[derive(clap::Args)]
struct NumberArgs {
    /// Genus, 0 or 1.
    #[arg(long)]
    genus: u8,
    /// Psi insertions as index:multiplicity pairs, e.g. "0:3,1:1".
    #[arg(long, default_value = "")]
    tau: String,
    /// Kappa insertions as index:multiplicity pairs, e.g. "1:2".
    #[arg(long, default_value = "")]
    kappa: String,
    /// Power of lambda_1 to pair in; requires a pure tau_0 psi spec.
    #[arg(long)]
    lambda: Option<u32>,
    /// Evaluation route.
    #[arg(long, value_enum, default_value_t = RouteArg::Recursion)]
    route: RouteArg,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Recursion,
    PunctureDilaton,
    ClosedForm,
}

impl From<RouteArg> for EvalRoute {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::Recursion => EvalRoute::Recursion,
            RouteArg::PunctureDilaton => EvalRoute::PunctureDilaton,
            RouteArg::ClosedForm => EvalRoute::ClosedForm,
        }
    }
}

#[derive(clap::Args)]
struct TableArgs {
    #[arg(long)]
    genus: u8,
    /// Largest psi variable t_i kept.
    #[arg(long, default_value_t = 2)]
    t_max: u32,
    /// Largest kappa variable s_i kept.
    #[arg(long, default_value_t = 2)]
    s_max: u32,
    /// Total-degree bound of the printed series.
    #[arg(long, default_value_t = 5)]
    degree: u64,
    #[arg(long)]
    json: bool,
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[command(subcommand)]
    suite: VerifySuite,
}

#[derive(Subcommand)]
enum VerifySuite {
    /// Compare all evaluation routes on every bracket within bounds.
    Routes {
        /// Largest number of psi insertions swept.
        #[arg(long, default_value_t = 6)]
        n_max: u64,
        /// Largest total dimension swept.
        #[arg(long, default_value_t = 6)]
        dim_max: u64,
        #[arg(long)]
        json: bool,
    },
    /// Check the grading of every stored monomial of H_0 and H_1.
    Charge {
        #[arg(long, default_value_t = 3)]
        t_max: u32,
        #[arg(long, default_value_t = 3)]
        s_max: u32,
        #[arg(long, default_value_t = 6)]
        degree: u64,
        /// Restrict to one genus (default: both).
        #[arg(long)]
        genus: Option<u8>,
        #[arg(long)]
        json: bool,
    },
    /// Check that H_1 is 1/24 log of the third t_0 derivative of H_0.
    Genus1Log {
        #[arg(long, default_value_t = 3)]
        t_max: u32,
        #[arg(long, default_value_t = 3)]
        s_max: u32,
        #[arg(long, default_value_t = 6)]
        degree: u64,
        #[arg(long)]
        json: bool,
    },
    /// Apply the insertion-removal operators to exp(H_g) and demand zero.
    Annihilators {
        #[arg(long, default_value_t = 3)]
        t_max: u32,
        #[arg(long, default_value_t = 3)]
        s_max: u32,
        #[arg(long, default_value_t = 6)]
        degree: u64,
        /// Restrict to one genus (default: both).
        #[arg(long)]
        genus: Option<u8>,
        #[arg(long)]
        json: bool,
    },
    /// Build the potentials of one (s, u) point and test the genus-one
    /// constraint and the B-form identity.
    Getzler {
        /// Kappa weights as index=value pairs, e.g. "1=1,2=1/3".
        #[arg(long, default_value = "1=1")]
        s: String,
        /// Hodge weight.
        #[arg(long, default_value = "2")]
        u: String,
        #[arg(long, default_value_t = 12)]
        order: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(clap::Args)]
struct WpArgs {
    #[arg(long)]
    genus: u8,
    #[arg(long, default_value_t = 20)]
    n_max: u64,
    /// Also print the growth-law value and the exact/asymptote ratio.
    #[arg(long)]
    asymptotic: bool,
    #[arg(long)]
    json: bool,
}

#[derive(clap::Args)]
struct CohftArgs {
    /// Kappa weights as index=value pairs, e.g. "1=1/2,2=0".
    #[arg(long, default_value = "")]
    s: String,
    /// Hodge weight.
    #[arg(long, default_value = "0")]
    u: String,
    /// Exactness order of both potentials (at least 5).
    #[arg(long, default_value_t = 12)]
    order: u64,
    #[arg(long)]
    json: bool,
}

/// Prints an input problem to stderr and exits with the usage code.
fn usage_error(msg: &str) -> ! {
    eprintln!("error: {msg}");
    std::process::exit(2);
}

/// Parses "index:multiplicity,..." into a multi-index of the given kind.
fn parse_insertions(spec: &str, kind: IndexKind, what: &str) -> MultiIndex {
    let mut pairs = Vec::new();
    for part in spec.split(',').filter(|p| !p.trim().is_empty()) {
        let (idx, mult) = part
            .split_once(':')
            .unwrap_or_else(|| usage_error(&format!("{what} entry {part:?} is not index:multiplicity")));
        let idx: u32 = idx
            .trim()
            .parse()
            .unwrap_or_else(|_| usage_error(&format!("{what} index {idx:?} is not an integer")));
        let mult: u32 = mult
            .trim()
            .parse()
            .unwrap_or_else(|_| usage_error(&format!("{what} multiplicity {mult:?} is not an integer")));
        pairs.push((idx, mult));
    }
    MultiIndex::from_pairs(kind, &pairs).unwrap_or_else(|e| usage_error(&e.to_string()))
}

/// Parses "index=value,..." kappa weights for a theory point.
fn parse_weights(spec: &str) -> Vec<(u32, Rat)> {
    let mut out = Vec::new();
    for part in spec.split(',').filter(|p| !p.trim().is_empty()) {
        let (idx, val) = part
            .split_once('=')
            .unwrap_or_else(|| usage_error(&format!("weight entry {part:?} is not index=value")));
        let idx: u32 = idx
            .trim()
            .parse()
            .unwrap_or_else(|_| usage_error(&format!("weight index {idx:?} is not an integer")));
        let val = parse_rat(val.trim()).unwrap_or_else(|e| usage_error(&e.to_string()));
        out.push((idx, val));
    }
    out
}

fn multi_index_json(m: &MultiIndex) -> serde_json::Value {
    let map: BTreeMap<String, u32> = m.iter().map(|(i, mult)| (i.to_string(), mult)).collect();
    json!(map)
}

fn evaluator_from_env() -> Evaluator {
    match std::env::var("MGN_CACHE_CEILING") {
        Ok(v) => {
            let limit: usize = v
                .parse()
                .unwrap_or_else(|_| usage_error("MGN_CACHE_CEILING must be a nonnegative integer"));
            Evaluator::with_cache_ceiling(limit)
        }
        Err(_) => Evaluator::new(),
    }
}

fn cmd_number(args: NumberArgs) -> ExitCode {
    if args.genus > 1 {
        usage_error("only genus 0 and 1 are supported");
    }
    let m = parse_insertions(&args.tau, IndexKind::S0, "tau");
    let p = parse_insertions(&args.kappa, IndexKind::S1, "kappa");
    let ev = evaluator_from_env();

    let value = match args.lambda {
        Some(r) => {
            if m.max_index().is_some_and(|i| i > 0) {
                usage_error("--lambda needs a pure tau_0 psi spec; the marked points only set n");
            }
            if !matches!(args.route, RouteArg::Recursion) {
                usage_error("--route applies to plain brackets, not lambda pairings");
            }
            let n = m.count();
            ev.lambda_bracket(&p, r, n, args.genus)
                .unwrap_or_else(|e| usage_error(&e.to_string()))
        }
        None => match IntersectionKey::make(args.genus, m.clone(), p.clone()) {
            Ok(KeyOutcome::Valid(key)) => ev
                .eval_route(&key, args.route.into())
                .unwrap_or_else(|e| usage_error(&e.to_string())),
            Ok(KeyOutcome::Zero) => Rat::from_integer(0.into()),
            Ok(KeyOutcome::Invalid(reason)) => usage_error(&reason),
            Err(e) => usage_error(&e.to_string()),
        },
    };

    if args.json {
        let mut obj = json!({
            "genus": args.genus,
            "m": multi_index_json(&m),
            "p": multi_index_json(&p),
            "value": format_rat(&value),
        });
        if let Some(r) = args.lambda {
            obj["lambda"] = json!(r);
        }
        println!("{obj}");
    } else {
        println!("{}", format_rat(&value));
    }
    ExitCode::SUCCESS
}

fn series_json(s: &TruncatedSeries) -> serde_json::Value {
    s.to_json()
}

fn cmd_table(args: TableArgs) -> ExitCode {
    if args.genus > 1 {
        usage_error("only genus 0 and 1 are supported");
    }
    let ev = evaluator_from_env();
    let h = build_h(&ev, args.genus, args.t_max, args.s_max, args.degree);
    if args.json {
        println!(
            "{}",
            json!({
                "genus": args.genus,
                "t_max": args.t_max,
                "s_max": args.s_max,
                "degree": args.degree,
                "series": series_json(&h),
            })
        );
    } else {
        let s_part = if args.s_max == 0 {
            "no s variables".to_string()
        } else {
            format!("s1..s{}", args.s_max)
        };
        println!(
            "H_{} on t0..t{}, {}, total degree <= {}:",
            args.genus, args.t_max, s_part, args.degree
        );
        if h.is_zero() {
            println!("  0");
        }
        let vars = h.vars().to_vec();
        for (exps, coeff) in h.terms_graded() {
            println!(
                "  {:>12}  {}",
                format_rat(&coeff),
                mgn_core::series::monomial_string(&vars, &exps)
            );
        }
    }
    ExitCode::SUCCESS
}

fn report_outcome(reports: &[CheckReport], json_out: bool, suite: &str) -> ExitCode {
    let passed = reports.iter().all(CheckReport::passed);
    if json_out {
        let rows: Vec<_> = reports
            .iter()
            .map(|r| {
                json!({
                    "label": r.label,
                    "checked": r.checked,
                    "failures": r.failures,
                })
            })
            .collect();
        println!("{}", json!({ "suite": suite, "passed": passed, "reports": rows }));
    } else {
        for r in reports {
            if r.passed() {
                println!("ok   {} ({} checked)", r.label, r.checked);
            } else {
                println!("FAIL {} ({} checked, {} failures)", r.label, r.checked, r.failures.len());
                println!("     first: {}", r.failures[0]);
            }
        }
    }
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn cmd_verify(args: VerifyArgs) -> ExitCode {
    let ev = evaluator_from_env();
    match args.suite {
        VerifySuite::Routes { n_max, dim_max, json } => {
            let report = check_route_agreement(&ev, n_max, dim_max);
            report_outcome(&[report], json, "routes")
        }
        VerifySuite::Charge { t_max, s_max, degree, genus, json } => {
            let genera: Vec<u8> = match genus {
                Some(g) if g <= 1 => vec![g],
                Some(_) => usage_error("only genus 0 and 1 are supported"),
                None => vec![0, 1],
            };
            let reports: Vec<CheckReport> = genera
                .iter()
                .map(|&g| check_charge(&build_h(&ev, g, t_max, s_max, degree), g))
                .collect();
            report_outcome(&reports, json, "charge")
        }
        VerifySuite::Genus1Log { t_max, s_max, degree, json } => {
            let report = check_genus_one_relation(&ev, t_max, s_max, degree);
            report_outcome(&[report], json, "genus1-log")
        }
        VerifySuite::Annihilators { t_max, s_max, degree, genus, json } => {
            let genera: Vec<u8> = match genus {
                Some(g) if g <= 1 => vec![g],
                Some(_) => usage_error("only genus 0 and 1 are supported"),
                None => vec![0, 1],
            };
            let reports: Vec<CheckReport> = genera
                .iter()
                .map(|&g| check_annihilators(&ev, g, t_max, s_max, degree))
                .collect();
            report_outcome(&reports, json, "annihilators")
        }
        VerifySuite::Getzler { s, u, order, json } => {
            if order < 5 {
                usage_error("the genus-one constraint needs order at least 5");
            }
            let point = CohftPoint::new(&parse_weights(&s), parse_rat(&u).unwrap_or_else(|e| usage_error(&e.to_string())))
                .unwrap_or_else(|e| usage_error(&e.to_string()));
            let pair = potential_from_point(&ev, &point, order)
                .unwrap_or_else(|e| usage_error(&e.to_string()));
            let residual = check_getzler(&pair);
            let mut reports = Vec::new();
            let mut failures = Vec::new();
            if !residual.is_zero() {
                failures.push(format!("residual starts with {residual}"));
            }
            reports.push(CheckReport {
                label: format!("genus-one constraint at order {order}"),
                checked: 1,
                failures,
            });

            let d2 = pair.phi0.partial(mgn_core::Var::X).partial(mgn_core::Var::X);
            let d3 = d2.partial(mgn_core::Var::X);
            let lhs = pair.phi1.sub(&d3.log().expect("normalized potential").scale(&parse_rat("1/24").unwrap()));
            let rhs = d2.scale(&(point.u().clone() / Rat::from_integer(24.into())));
            let bound = order.saturating_sub(3);
            let b_ok = lhs.eq_to_degree(&rhs, bound);
            reports.push(CheckReport {
                label: format!("B-form identity to degree {bound}"),
                checked: 1,
                failures: if b_ok { vec![] } else { vec!["phi1 - 1/24 log phi0''' != u/24 phi0''".into()] },
            });
            report_outcome(&reports, json, "getzler")
        }
    }
}

fn cmd_wp(args: WpArgs) -> ExitCode {
    if args.genus > 1 {
        usage_error("only genus 0 and 1 are supported");
    }
    if args.n_max < min_points(args.genus) {
        usage_error(&format!(
            "n_max {} is below the smallest stable n = {} in genus {}",
            args.n_max,
            min_points(args.genus),
            args.genus
        ));
    }
    let ev = evaluator_from_env();
    if args.asymptotic {
        let rows = asymptotic_ratio_table(&ev, args.genus, args.n_max)
            .unwrap_or_else(|e| usage_error(&e.to_string()));
        let k = bessel_constants();
        if args.json {
            let rows: Vec<_> = rows
                .iter()
                .map(|r| {
                    json!({
                        "n": r.n,
                        "w": format_rat(&r.w),
                        "asymptote": r.asymptote,
                        "ratio": r.ratio,
                    })
                })
                .collect();
            println!(
                "{}",
                json!({ "genus": args.genus, "rows": rows, "gamma0": k.gamma0, "C": k.c })
            );
        } else {
            println!("{:>4}  {:>24}  {:>14}  {:>12}", "n", "w (ln w for n > 12)", "asymptote", "ratio");
            for r in &rows {
                let w_col = if r.n <= 12 {
                    format_rat(&r.w)
                } else {
                    format!("ln w = {:.6}", ln_rat(&r.w))
                };
                println!("{:>4}  {:>24}  {:>14.6e}  {:>12.9}", r.n, w_col, r.asymptote, r.ratio);
            }
            println!("gamma0 = {:.12}", k.gamma0);
            println!("C      = {:.12}", k.c);
        }
    } else {
        let mut rows = Vec::new();
        for n in min_points(args.genus)..=args.n_max {
            let w = wp_volume(&ev, args.genus, n).unwrap_or_else(|e| usage_error(&e.to_string()));
            rows.push((n, w));
        }
        if args.json {
            let rows: Vec<_> =
                rows.iter().map(|(n, w)| json!({ "n": n, "w": format_rat(w) })).collect();
            println!("{}", json!({ "genus": args.genus, "rows": rows }));
        } else {
            let width = rows.iter().map(|(_, w)| format_rat(w).len()).max().unwrap_or(1);
            for (n, w) in &rows {
                println!("{n:>4}  {:>width$}", format_rat(w));
            }
        }
    }
    ExitCode::SUCCESS
}

fn cmd_cohft(args: CohftArgs) -> ExitCode {
    if args.order < 5 {
        usage_error("order must be at least 5 so the genus-one constraint is checkable");
    }
    let u = parse_rat(&args.u).unwrap_or_else(|e| usage_error(&e.to_string()));
    let point = CohftPoint::new(&parse_weights(&args.s), u)
        .unwrap_or_else(|e| usage_error(&e.to_string()));
    let ev = evaluator_from_env();
    let pair = potential_from_point(&ev, &point, args.order)
        .unwrap_or_else(|e| usage_error(&e.to_string()));
    let getzler_ok = check_getzler(&pair).is_zero();
    if args.json {
        let s_map: BTreeMap<String, String> =
            point.s().iter().map(|(i, w)| (i.to_string(), format_rat(w))).collect();
        println!(
            "{}",
            json!({
                "s": s_map,
                "u": format_rat(point.u()),
                "order": args.order,
                "phi0": series_json(&pair.phi0),
                "phi1": series_json(&pair.phi1),
                "getzler_ok": getzler_ok,
            })
        );
    } else {
        println!("phi0 = {}", pair.phi0);
        println!("phi1 = {}", pair.phi1);
        println!("getzler_ok = {getzler_ok}");
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Number(args) => cmd_number(args),
        Command::Table(args) => cmd_table(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Wp(args) => cmd_wp(args),
        Command::Cohft(args) => cmd_cohft(args),
    }
}

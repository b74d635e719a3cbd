//! Exact intersection numbers of tautological classes on moduli spaces of
//! stable curves of genus 0 and 1.
//!
//! The crate computes mixed brackets `<tau^m kappa^p>_g` (integrals of psi-
//! and kappa-classes over the Deligne-Mumford compactification, together
//! with a single lambda_1 insertion in genus 1) as exact rationals, and
//! builds on them:
//!
//! * [`index`] - sparse multi-indices, combinatorial splitting, key validation
//! * [`eval`] - the bracket evaluator with three independent routes
//! * [`series`] - truncated multivariate power series over exact rationals
//! * [`genfun`] - the generating functions `H_0`, `H_1` and their identities
//! * [`wp`] - kappa_1 volume tables and their large-n asymptotics
//! * [`cohft`] - rank-one field-theory potentials and the genus-1 constraint
//!
//! All arithmetic is exact; floating point appears only in the asymptotic
//! comparisons of [`wp`].

pub mod cohft;
pub mod error;
pub mod eval;
pub mod genfun;
pub mod index;
pub mod rational;
pub mod series;
pub mod wp;

pub use error::{Error, Result};
pub use eval::{EvalRoute, Evaluator, IntersectionKey, KeyOutcome};
pub use index::{IndexKind, MultiIndex};
pub use rational::Rat;
pub use series::{TruncatedSeries, Var};

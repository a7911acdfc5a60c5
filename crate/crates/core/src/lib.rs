//! Parametric disjunctive inequalities.
//!
//! Disjunctive cuts for a base MILP are generated together with explicit
//! Farkas certificates. Those certificates are then re-evaluated against
//! perturbed members of the same family to obtain valid cuts without solving
//! another cut-generating LP, and optionally tightened per term so the cut
//! supports the disjunctive hull again.
//!
//! Module map:
//!
//! * [`model`]: instances in `A x >= b` form with explicit bound rows, JSON and MPS I/O.
//! * [`simplex`]: dense row-basis simplex with duals, Farkas rays and warm starts.
//! * [`disjunction`]: partial branch-and-bound disjunctions and term polyhedra.
//! * [`cglp`]: fresh cut generation, certificates, determining bases, bundles.
//! * [`pdi`]: Farkas PDIs, support checks, reparameterization, strong PDIs.
//! * [`perturb`]: degree metric, random perturbation, test-set assembly.
//! * [`oracle`]: brute-force vertex enumeration for tiny LPs, used as a test reference.
//! * [`bench`]: branch and cut, experiment sweeps, metrics, performance profiles.
//!
//! Certificates are indexed by row position, so every instance of a family
//! must share row count and row order with the instance the certificate was
//! built on.

pub mod bench;
pub mod cglp;
pub mod disjunction;
mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod pdi;
pub mod perturb;
pub mod simplex;
pub mod synthetic;

pub use error::{Error, Result};

/// Feasibility tolerance for row satisfaction.
pub const FEAS_TOL: f64 = 1e-7;
/// Equality tolerance for duality, certificate and support checks.
pub const EQ_TOL: f64 = 1e-6;

//! Monotone submodular maximization with dual certificates.
//!
//! The central routine is [`primal_dual::solve`], which returns a size-`k` solution
//! together with a feasible solution of the Nemhauser–Wolsey dual whose objective
//! upper-bounds the optimum. Greedy-based and BQS bounds, a matroid variant and
//! brute-force checkers for small instances sit alongside it.
//!
//! ```
//! use subdual::dualcert::{check_feasible, Tolerances};
//! use subdual::instances::abc_instance;
//! use subdual::primal_dual::solve;
//!
//! let f = abc_instance().into_oracle();
//! let tol = Tolerances::default();
//! let out = solve(&f, 2, &tol).unwrap();
//! assert!(check_feasible(&out.certificate, &f, &tol).unwrap().ok);
//! assert!(out.value <= out.certificate.objective);
//! ```

pub mod bqs;
pub mod dualcert;
pub mod error;
pub mod greedy_bounds;
pub mod instances;
pub mod matroid;
pub mod oracle;
pub mod primal_dual;
pub mod set;
pub mod simplex;
pub mod truth_lab;

pub use dualcert::{DualCertificate, Tolerances};
pub use error::{Error, Result};
pub use oracle::{Oracle, SetFunction, ValueOracle, WeightedCoverage};
pub use set::ElementSet;

//! Ising-model annealing workbench.
//!
//! The crate bundles everything needed to pose Ising optimization
//! problems, solve them with classical simulated annealing or
//! path-integral simulated quantum annealing, cross-check the small-size
//! physics against exact dense quantum dynamics, and verify the
//! statistical machinery behind the path-integral method (stationarity,
//! Trotter partition-function error, slice-sum normality).
//!
//! Modules map to the subsystems:
//!
//! - [`ising`]: instances, configurations, energies, brute-force oracle
//! - [`topology`]: Chimera graphs and random +-1 problem batches
//! - [`sa`]: classical simulated annealing
//! - [`sqa`]: path-integral Monte Carlo quantum annealing
//! - [`quantum`]: dense Hamiltonians, Schrodinger propagation, the
//!   success-probability lower bound
//! - [`trotter`]: the sliced target distribution, its Markov chain, the
//!   transfer-matrix partition check, and the slice-sum CLT
//! - [`harness`]: batch experiments, reports, histograms, verification
//! - [`seeding`], [`stats`]: deterministic seed derivation and the small
//!   statistics toolbox the suites share

pub mod error;
pub mod harness;
pub mod ising;
pub mod quantum;
pub mod sa;
pub mod seeding;
pub mod sqa;
pub mod stats;
pub mod topology;
pub mod trotter;

pub use error::{Error, Result};

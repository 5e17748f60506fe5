//! Optimal partitioning of a divisible FCFS server among multiple customer types.
//!
//! A single server of unit capacity is split into sub-queues with capacity
//! shares `alpha_j`. Customer type `i` arrives as a Poisson stream with rate
//! `lambda_i` and needs exponential service with rate `alpha_j * mu_i` in queue
//! `j`. The crate computes the mean queueing delay of every arrangement in
//! closed form (Pollaczek-Khinchine) and finds optimal arrangements for the
//! following problems:
//!
//! | problem | decision | routing |
//! |---------|----------|---------|
//! | DAP / SAP | assignment for a fixed split | deterministic / probabilistic |
//! | DPP / SPP | split and assignment | deterministic / probabilistic |
//! | k-SAP, k-SPP | the same with `k` sub-queues | |
//!
//! The deterministic assignment problem is NP-hard, so [`solvers::solve_dap_exact`]
//! enumerates. The other problems have optimal solutions with a
//! segment structure along the `mu`-sorted type list, and the solvers enumerate
//! those structures and solve a small convex problem for each.
//!
//! [`oracle`] holds slow brute-force references, and [`sim`] holds a
//! discrete-event simulator that checks the closed form empirically.
//!
//! ```
//! use qpartition::model::{CustomerType, Instance};
//! use qpartition::solvers::solve_sap;
//!
//! let inst = Instance::new(vec![
//!     CustomerType::new(0.4, 16.0),
//!     CustomerType::new(8.0, 12.0),
//!     CustomerType::new(0.2, 10.0),
//! ])
//! .unwrap();
//! let res = solve_sap(&inst, 0.8).unwrap();
//! let x = res.assignment.column(0);
//! assert_eq!(x[0], 1.0);
//! assert!((x[1] - 0.836).abs() < 2e-3);
//! assert_eq!(x[2], 1.0);
//! ```

pub mod convex;
pub mod error;
pub mod gen;
pub mod io;
pub mod model;
pub mod oracle;
pub mod problem;
pub mod sim;
pub mod solvers;
pub mod sweep;

pub use error::{Error, Result};

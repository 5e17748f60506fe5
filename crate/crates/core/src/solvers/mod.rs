//! Structured solvers for the two-queue and k-queue problems.
//!
//! All solvers except [`solve_dap_exact_unmerged`] expect a normalized
//! instance: `mu` strictly decreasing, which [`Instance::normalize`] provides.
//! Candidates are visited in a fixed order and a later candidate replaces the
//! incumbent only if it is better by more than [`TIE_TOLERANCE`] (relative),
//! so outputs are reproducible.

mod dap;
mod ksap;
mod kspp;
mod reduction;
mod sap;
mod spp;

pub use dap::{solve_dap_exact, solve_dap_exact_unmerged, MAX_DAP_TYPES};
pub use ksap::{solve_ksap, MAX_KSAP_QUEUES};
pub use kspp::solve_kspp;
pub use reduction::{build_setpartition_instance, decide_set_partition};
pub use sap::solve_sap;
pub use spp::solve_spp;

use crate::error::{invalid, Result};
use crate::model::Instance;

/// Relative objective gap below which two candidates count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Hard cap on enumerated structures for the k-queue solvers.
pub const MAX_CANDIDATES: f64 = 1e6;

pub(crate) fn improves(candidate: f64, incumbent: f64) -> bool {
    if !candidate.is_finite() {
        return false;
    }
    if !incumbent.is_finite() {
        return true;
    }
    candidate < incumbent - TIE_TOLERANCE * incumbent.abs().max(1.0)
}

pub(crate) fn require_normalized(inst: &Instance) -> Result<()> {
    if !inst.is_normalized() {
        return invalid("instance must be normalized (mu strictly decreasing, equal mu merged)");
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod testutil {
    use crate::model::Instance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random normalized instance with distinct `mu` and the given total load.
    pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, load: f64) -> Instance {
        let mut mus: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.random_range(-0.5..1.7))).collect();
        mus.sort_by(|a, b| b.total_cmp(a));
        let lambdas: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
        let raw: f64 = lambdas.iter().zip(&mus).map(|(l, m)| l / m).sum();
        let lambdas: Vec<f64> = lambdas.iter().map(|l| l * load / raw).collect();
        Instance::from_rates(&lambdas, &mus).unwrap().normalize().instance
    }

    pub fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }
}

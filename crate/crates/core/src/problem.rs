//! Problem names and a single entry point that normalizes, solves and maps
//! results back to the caller's type order.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::model::{Instance, PartitionVector, SolveResult};
use crate::solvers::{
    solve_dap_exact, solve_dap_exact_unmerged, solve_ksap, solve_kspp, solve_sap, solve_spp,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Problem {
    Sap,
    Dap,
    Spp,
    Dpp,
    Ksap,
    Kspp,
    Kdpp,
}

impl Problem {
    pub const ALL: [Problem; 7] = [
        Problem::Sap,
        Problem::Dap,
        Problem::Spp,
        Problem::Dpp,
        Problem::Ksap,
        Problem::Kspp,
        Problem::Kdpp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Problem::Sap => "sap",
            Problem::Dap => "dap",
            Problem::Spp => "spp",
            Problem::Dpp => "dpp",
            Problem::Ksap => "ksap",
            Problem::Kspp => "kspp",
            Problem::Kdpp => "kdpp",
        }
    }

    /// The problem actually solved when this one is answered by an equivalent one.
    pub fn equivalent(self) -> Option<Problem> {
        match self {
            Problem::Dpp => Some(Problem::Spp),
            Problem::Kdpp => Some(Problem::Kspp),
            _ => None,
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Problem::ALL
            .into_iter()
            .find(|p| p.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Validation(format!("unknown problem '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    /// capacity share of the first queue (sap, dap)
    pub alpha: Option<f64>,
    /// capacity shares (ksap)
    pub alphas: Option<PartitionVector>,
    /// number of queues (kspp, kdpp)
    pub k: Option<usize>,
    /// merge equal-`mu` types before solving; only dap can skip it
    pub merge: bool,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            alpha: None,
            alphas: None,
            k: None,
            merge: true,
        }
    }
}

/// Solves `problem` on `inst` with rows of the result in the order of `inst`.
///
/// Structure indices refer to the sorted, merged type order.
pub fn solve(problem: Problem, inst: &Instance, params: &Params) -> Result<SolveResult> {
    if problem == Problem::Dap && !params.merge {
        return solve_dap_exact_unmerged(inst, require_alpha(params)?);
    }
    if !params.merge {
        log::warn!("--no-merge only affects dap; merging equal-mu types for {problem}");
    }
    let normalized = inst.normalize();
    let res = solve_normalized(problem, &normalized.instance, params)?;
    Ok(res.expand(&normalized.map))
}

fn solve_normalized(problem: Problem, inst: &Instance, params: &Params) -> Result<SolveResult> {
    match problem.equivalent().unwrap_or(problem) {
        Problem::Sap => solve_sap(inst, require_alpha(params)?),
        Problem::Dap => solve_dap_exact(inst, require_alpha(params)?),
        Problem::Spp => solve_spp(inst),
        Problem::Ksap => match &params.alphas {
            Some(a) => solve_ksap(inst, a),
            None => invalid("ksap needs the capacity shares (--alphas)"),
        },
        Problem::Kspp => match params.k {
            Some(k) => solve_kspp(inst, k),
            None => invalid(format!("{problem} needs the number of queues (--k)")),
        },
        Problem::Dpp | Problem::Kdpp => unreachable!("answered by an equivalent problem"),
    }
}

fn require_alpha(params: &Params) -> Result<f64> {
    params
        .alpha
        .ok_or_else(|| Error::Validation("this problem needs the capacity share (--alpha)".into()))
}

use crate::error::{Error, Result};
use crate::model::{
    check_alpha, evaluate_two_queue, AssignmentMatrix, Instance, PartitionVector, SolveResult,
    Status, Structure,
};

use super::{improves, require_normalized};

pub const MAX_DAP_TYPES: usize = 30;

/// Exact deterministic assignment for a fixed split, by enumeration.
///
/// The problem is NP-hard, so this is exponential in `n`. Vectors are visited
/// in lexicographic order (0 before 1), and branches whose partial first-queue
/// load already exceeds `alpha`, or can no longer pull enough load off the
/// second queue, are cut.
pub fn solve_dap_exact(inst: &Instance, alpha: f64) -> Result<SolveResult> {
    require_normalized(inst)?;
    solve_dap_exact_unmerged(inst, alpha)
}

/// As [`solve_dap_exact`] on the instance as given, without requiring equal-`mu`
/// types to be merged. Merging forces equal-`mu` types into the same queue,
/// which changes the deterministic problem.
pub fn solve_dap_exact_unmerged(inst: &Instance, alpha: f64) -> Result<SolveResult> {
    check_alpha(alpha)?;
    let n = inst.len();
    if n > MAX_DAP_TYPES {
        return Err(Error::SizeGuard(format!(
            "exact DAP enumeration is limited to {MAX_DAP_TYPES} types, got {n}"
        )));
    }
    let partition = PartitionVector::two_queue(alpha)?;
    if !inst.is_stable() {
        return Ok(SolveResult::infeasible(n, partition, 0));
    }

    let loads: Vec<f64> = inst.types().iter().map(|t| t.load()).collect();
    let mut remaining = vec![0.0; n + 1];
    for i in (0..n).rev() {
        remaining[i] = remaining[i + 1] + loads[i];
    }
    let mut search = Search {
        inst,
        alpha,
        loads,
        remaining,
        // first-queue load needed to keep the second queue below its capacity
        min_first_load: inst.total_load() - (1.0 - alpha),
        x: vec![0.0; n],
        best: None,
        best_value: f64::INFINITY,
        leaves: 0,
    };
    search.descend(0, 0.0)?;

    let leaves = search.leaves;
    let Some(x) = search.best else {
        return Ok(SolveResult::infeasible(n, partition, leaves));
    };
    let objective = evaluate_two_queue(inst, &x, alpha)?;
    Ok(SolveResult {
        status: Status::Optimal,
        assignment: AssignmentMatrix::two_queue(&x)?,
        partition,
        objective,
        structure: Structure::Dap {
            vector: x.iter().map(|&v| v as u8).collect(),
        },
        candidates_evaluated: leaves,
    })
}

struct Search<'a> {
    inst: &'a Instance,
    alpha: f64,
    loads: Vec<f64>,
    remaining: Vec<f64>,
    min_first_load: f64,
    x: Vec<f64>,
    best: Option<Vec<f64>>,
    best_value: f64,
    leaves: usize,
}

impl Search<'_> {
    fn descend(&mut self, i: usize, load: f64) -> Result<()> {
        if load > self.alpha {
            return Ok(());
        }
        // slack covers summation-order differences against the evaluator
        if load + self.remaining[i] < self.min_first_load - 1e-9 {
            return Ok(());
        }
        if i == self.x.len() {
            self.leaves += 1;
            let v = evaluate_two_queue(self.inst, &self.x, self.alpha)?;
            if improves(v, self.best_value) {
                self.best_value = v;
                self.best = Some(self.x.clone());
            }
            return Ok(());
        }
        self.x[i] = 0.0;
        self.descend(i + 1, load)?;
        self.x[i] = 1.0;
        self.descend(i + 1, load + self.loads[i])?;
        self.x[i] = 0.0;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example1_binary_optimum() {
        let inst = Instance::from_rates(&[0.4, 8.0, 0.2], &[16.0, 12.0, 10.0]).unwrap();
        let res = solve_dap_exact(&inst, 0.8).unwrap();
        // enumeration of all 8 vectors: (0,1,0) gives 0.4925, the smallest finite value
        assert_eq!(res.assignment.column(0), vec![0.0, 1.0, 0.0]);
        assert!((res.objective - 0.492514).abs() < 1e-6);
        let sap = crate::solvers::solve_sap(&inst, 0.8).unwrap();
        assert!(sap.objective < res.objective);
    }

    #[test]
    fn alpha_one_forces_all_ones() {
        let inst = Instance::from_rates(&[0.4, 8.0, 0.2], &[16.0, 12.0, 10.0]).unwrap();
        let res = solve_dap_exact(&inst, 1.0).unwrap();
        assert_eq!(res.assignment.column(0), vec![1.0; 3]);
    }

    #[test]
    fn size_guard() {
        let lambdas = vec![0.001; 31];
        let mus: Vec<f64> = (0..31).map(|i| 100.0 - i as f64).collect();
        let inst = Instance::from_rates(&lambdas, &mus).unwrap();
        assert!(matches!(solve_dap_exact(&inst, 0.5), Err(Error::SizeGuard(_))));
    }
}

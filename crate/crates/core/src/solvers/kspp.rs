use crate::convex::{minimize_simplex_from, DescentOptions};
use crate::error::{invalid, Error, Result};
use crate::model::{
    evaluate_multi_queue, objective_from_aggregates, AssignmentMatrix, Instance, PartitionVector,
    QueueAggregates, SolveResult, Status, Structure,
};

use super::{improves, require_normalized, MAX_CANDIDATES};

/// Optimal k-way split and assignment.
///
/// Some optimum sends contiguous runs of the `mu`-sorted types to each queue,
/// so it is enough to enumerate boundaries `1 <= i_1 <= ... <= i_{k-1} <= n+1`
/// and solve the convex problem in `alpha` for each. Queues left empty by a
/// repeated boundary get `alpha = 0`. The result also answers the
/// deterministic k-queue partition problem.
pub fn solve_kspp(inst: &Instance, k: usize) -> Result<SolveResult> {
    require_normalized(inst)?;
    if k == 0 {
        return invalid("number of queues must be at least 1");
    }
    let n = inst.len();
    let count = binomial(n + k - 1, k - 1);
    if count > MAX_CANDIDATES {
        return Err(Error::SizeGuard(format!(
            "k-SPP enumerates {count:.0} boundary tuples, more than {MAX_CANDIDATES:.0}"
        )));
    }
    if !inst.is_stable() {
        return Ok(SolveResult::infeasible(n, PartitionVector::pooled(k, 0), 0));
    }

    let mut search = Search {
        inst,
        total_load: inst.total_load(),
        total_lambda: inst.total_lambda(),
        k,
        bounds: vec![1; k + 1],
        best: None,
        best_value: f64::INFINITY,
        candidates: 0,
    };
    search.bounds[k] = n + 1;
    search.descend(1, 1)?;

    let candidates = search.candidates;
    let Some((bounds, alphas)) = search.best else {
        return Ok(SolveResult::infeasible(n, PartitionVector::pooled(k, 0), candidates));
    };
    let rows: Vec<Vec<f64>> = (1..=n)
        .map(|i| {
            let mut row = vec![0.0; k];
            row[queue_of(&bounds, i)] = 1.0;
            row
        })
        .collect();
    let assignment = AssignmentMatrix::new(rows)?;
    let partition = PartitionVector::new(alphas)?;
    let objective = evaluate_multi_queue(inst, &assignment, &partition)?;
    Ok(SolveResult {
        status: Status::Optimal,
        assignment,
        partition,
        objective,
        structure: Structure::Kspp { boundaries: bounds },
        candidates_evaluated: candidates,
    })
}

fn binomial(n: usize, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn queue_of(bounds: &[usize], row: usize) -> usize {
    (0..bounds.len() - 1)
        .find(|&j| bounds[j] <= row && row < bounds[j + 1])
        .expect("boundaries cover every row")
}

struct Search<'a> {
    inst: &'a Instance,
    total_load: f64,
    total_lambda: f64,
    k: usize,
    /// `bounds[j]..bounds[j+1]` are the 1-based rows of queue `j`
    bounds: Vec<usize>,
    best: Option<(Vec<usize>, Vec<f64>)>,
    best_value: f64,
    candidates: usize,
}

impl Search<'_> {
    fn descend(&mut self, j: usize, from: usize) -> Result<()> {
        if j == self.k {
            return self.leaf();
        }
        for b in from..=self.inst.len() + 1 {
            self.bounds[j] = b;
            self.descend(j + 1, b)?;
        }
        Ok(())
    }

    fn leaf(&mut self) -> Result<()> {
        self.candidates += 1;
        let types = self.inst.types();
        let aggs: Vec<QueueAggregates> = (0..self.k)
            .map(|j| {
                let mut agg = QueueAggregates::default();
                for t in &types[self.bounds[j] - 1..self.bounds[j + 1] - 1] {
                    agg.add(t, 1.0);
                }
                agg
            })
            .collect();
        let used: Vec<usize> = (0..self.k).filter(|&j| !aggs[j].is_empty()).collect();
        let used_aggs: Vec<QueueAggregates> = used.iter().map(|&j| aggs[j]).collect();
        let m = used.len() as f64;
        let slack = (1.0 - self.total_load) / m;
        let start: Vec<f64> = used_aggs.iter().map(|a| a.b + slack).collect();
        let start_sum: f64 = start.iter().sum();
        let start: Vec<f64> = start.iter().map(|v| v / start_sum).collect();
        let total_lambda = self.total_lambda;
        let res = minimize_simplex_from(
            |alphas| objective_from_aggregates(&used_aggs, alphas, total_lambda),
            start,
            DescentOptions::default(),
        )?;
        if improves(res.value, self.best_value) {
            let mut alphas = vec![0.0; self.k];
            for (&j, &a) in used.iter().zip(&res.point) {
                alphas[j] = a;
            }
            self.best_value = res.value;
            self.best = Some((self.bounds.clone(), alphas));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{solve_spp, testutil};

    #[test]
    fn two_queues_match_spp() {
        let mut rng = testutil::rng(21);
        for _ in 0..20 {
            let inst = testutil::random_instance(&mut rng, 5, 0.85);
            let spp = solve_spp(&inst).unwrap();
            let k = solve_kspp(&inst, 2).unwrap();
            assert!((spp.objective - k.objective).abs() <= 1e-7 * spp.objective.max(1e-12));
        }
    }

    #[test]
    fn more_queues_never_hurt() {
        let mut rng = testutil::rng(22);
        for _ in 0..10 {
            let inst = testutil::random_instance(&mut rng, 5, 0.8);
            let two = solve_kspp(&inst, 2).unwrap();
            let three = solve_kspp(&inst, 3).unwrap();
            assert!(three.objective <= two.objective * (1.0 + 1e-7));
            let sum: f64 = three.partition.as_slice().iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert_eq!(three.partition.len(), 3);
        }
    }

    #[test]
    fn single_queue() {
        let inst = Instance::from_rates(&[0.5], &[1.0]).unwrap();
        let res = solve_kspp(&inst, 3).unwrap();
        assert_eq!(res.objective, inst.pooled_objective());
        assert_eq!(res.partition.as_slice().iter().filter(|&&a| a > 0.0).count(), 1);
    }

    #[test]
    fn counts() {
        assert_eq!(binomial(7, 2), 21.0);
        assert!(solve_kspp(&Instance::from_rates(&[0.1], &[1.0]).unwrap(), 0).is_err());
    }
}

use crate::convex::{minimize_scalar, DEFAULT_TOL};
use crate::error::Result;
use crate::model::{
    evaluate_two_queue, objective_from_aggregates, AssignmentMatrix, Instance, PartitionVector,
    QueueAggregates, SolveResult, Status, Structure,
};

use super::{improves, require_normalized};

/// Optimal split and assignment for two queues.
///
/// Some optimum is a deterministic threshold policy: the fastest types go to
/// one queue and the rest to the other. For each of the `n + 1` thresholds the
/// split `alpha` is found by a convex line search over the interval where both
/// queues are stable (plus the pooled end point). The result also answers the
/// deterministic partition problem.
pub fn solve_spp(inst: &Instance) -> Result<SolveResult> {
    require_normalized(inst)?;
    let n = inst.len();
    if !inst.is_stable() {
        return Ok(SolveResult::infeasible(n, PartitionVector::pooled(2, 0), 0));
    }
    let total_load = inst.total_load();
    let total_lambda = inst.total_lambda();

    let mut best_value = f64::INFINITY;
    let mut best: Option<(usize, f64)> = None;
    let mut candidates = 0;

    for threshold in 1..=n + 1 {
        candidates += 1;
        let first = QueueAggregates::from_weights(inst, (1..=n).map(|k| threshold_weight(k, threshold)));
        let second = QueueAggregates::from_weights(
            inst,
            (1..=n).map(|k| 1.0 - threshold_weight(k, threshold)),
        );
        let lo = first.b.clamp(0.0, 1.0);
        let hi = (first.b + 1.0 - total_load).clamp(lo, 1.0);
        let res = minimize_scalar(
            |a| objective_from_aggregates(&[first, second], &[a, 1.0 - a], total_lambda),
            lo,
            hi,
            DEFAULT_TOL,
        )?;
        if improves(res.value, best_value) {
            best_value = res.value;
            best = Some((threshold, res.arg));
        }
    }

    let Some((threshold, alpha)) = best else {
        return Ok(SolveResult::infeasible(n, PartitionVector::pooled(2, 0), candidates));
    };
    let x: Vec<f64> = (1..=n).map(|k| threshold_weight(k, threshold)).collect();
    let objective = evaluate_two_queue(inst, &x, alpha)?;
    Ok(SolveResult {
        status: Status::Optimal,
        assignment: AssignmentMatrix::two_queue(&x)?,
        partition: PartitionVector::two_queue(alpha)?,
        objective,
        structure: Structure::Spp { threshold, alpha },
        candidates_evaluated: candidates,
    })
}

fn threshold_weight(k: usize, threshold: usize) -> f64 {
    if k >= threshold {
        1.0
    } else {
        0.0
    }
}

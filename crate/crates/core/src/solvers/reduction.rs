use crate::error::{invalid, Result};
use crate::model::{Instance, Status};

use super::solve_dap_exact_unmerged;

/// DAP instance encoding a Set Partition question: `lambda_i = w_i`,
/// every `mu_i = 2 sum(w)`, split `alpha = 1/2`.
///
/// The types all share one `mu` and must not be merged.
pub fn build_setpartition_instance(weights: &[f64]) -> Result<(Instance, f64)> {
    if weights.is_empty() {
        return invalid("weight set is empty");
    }
    for (i, &w) in weights.iter().enumerate() {
        if !(w.is_finite() && w > 0.0) {
            return invalid(format!("weight {i} must be positive and finite, got {w}"));
        }
    }
    let mu = 2.0 * weights.iter().sum::<f64>();
    let mus = vec![mu; weights.len()];
    Ok((Instance::from_rates(weights, &mus)?, 0.5))
}

/// Decides whether `weights` splits into two equal-sum halves by solving the
/// encoded DAP exactly: a split exists iff the optimal first queue carries
/// exactly half the arrival rate.
pub fn decide_set_partition(weights: &[f64]) -> Result<bool> {
    let (inst, alpha) = build_setpartition_instance(weights)?;
    let res = solve_dap_exact_unmerged(&inst, alpha)?;
    if res.status == Status::Infeasible {
        return Ok(false);
    }
    let total = inst.total_lambda();
    let first: f64 = inst
        .types()
        .iter()
        .zip(res.assignment.column(0))
        .map(|(t, x)| t.lambda * x)
        .sum();
    Ok((first - 0.5 * total).abs() <= 1e-9 * total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction() {
        let (inst, alpha) = build_setpartition_instance(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(alpha, 0.5);
        let lambdas: Vec<f64> = inst.types().iter().map(|t| t.lambda).collect();
        let mus: Vec<f64> = inst.types().iter().map(|t| t.mu).collect();
        assert_eq!(lambdas, vec![1.0, 2.0, 3.0]);
        assert_eq!(mus, vec![12.0; 3]);
        assert!((inst.total_load() - 0.5).abs() < 1e-15);

        let (inst, _) = build_setpartition_instance(&[5.0]).unwrap();
        assert_eq!(inst.types()[0].mu, 10.0);
        let (inst, _) = build_setpartition_instance(&[1.0, 1.0, 3.0]).unwrap();
        assert_eq!(inst.types()[2].mu, 10.0);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(build_setpartition_instance(&[]).is_err());
        assert!(build_setpartition_instance(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn decisions() {
        assert!(decide_set_partition(&[1.0, 2.0, 3.0]).unwrap());
        assert!(!decide_set_partition(&[1.0, 1.0, 3.0]).unwrap());
        assert!(decide_set_partition(&[3.0, 5.0, 8.0]).unwrap());
        assert!(!decide_set_partition(&[5.0]).unwrap());
    }
}

use crate::convex::{minimize_scalar, DEFAULT_TOL};
use crate::error::Result;
use crate::model::{
    check_alpha, evaluate_two_queue, objective_from_aggregates, AssignmentMatrix, Instance,
    PartitionVector, QueueAggregates, SolveResult, Status, Structure,
};

use super::{improves, require_normalized};

/// Optimal probabilistic assignment for a fixed split `(alpha, 1 - alpha)`.
///
/// Optimal assignments (oriented so the first queue is the larger one) have
/// the form `1..1 0..0 1..1` along the `mu`-sorted types, with at most one
/// fractional entry at an end of the middle run. For every pair `l < h`
/// (1-based, `0..=n+1`) the middle run `l < i < h` is fixed to 0 and the outer
/// runs to 1. Then either `x_l = 0` and `x_h` is optimized, or `x_h` is 0 or 1
/// and `x_l` is optimized. That is `O(n^2)` one-dimensional convex problems.
pub fn solve_sap(inst: &Instance, alpha: f64) -> Result<SolveResult> {
    check_alpha(alpha)?;
    require_normalized(inst)?;
    let n = inst.len();
    let partition = PartitionVector::two_queue(alpha)?;
    if !inst.is_stable() {
        return Ok(SolveResult::infeasible(n, partition, 0));
    }

    let flipped = alpha < 0.5;
    let big = if flipped { 1.0 - alpha } else { alpha };

    if big == 1.0 {
        let x = vec![if flipped { 0.0 } else { 1.0 }; n];
        let objective = evaluate_two_queue(inst, &x, alpha)?;
        return Ok(SolveResult {
            status: Status::Optimal,
            assignment: AssignmentMatrix::two_queue(&x)?,
            partition,
            objective,
            structure: Structure::Pooled {
                queue: usize::from(flipped),
            },
            candidates_evaluated: 1,
        });
    }

    let search = SlotSearch::new(inst, big);
    let mut best_value = f64::INFINITY;
    let mut best: Option<(Vec<f64>, usize, usize)> = None;
    let mut candidates = 0;

    for l in 0..=n {
        for h in l + 1..=n + 1 {
            // pattern over 1-based positions; x_l and x_h are set per case
            let mut x: Vec<f64> = (1..=n)
                .map(|k| if l < k && k < h { 0.0 } else { 1.0 })
                .collect();

            // x_l = 0, optimize x_h
            if l >= 1 {
                x[l - 1] = 0.0;
            }
            candidates += 1;
            let cand = if h <= n {
                search.optimize_slot(&x, h - 1)?
            } else {
                search.point(&x)
            };
            if let Some((xc, v)) = cand {
                if improves(v, best_value) {
                    best_value = v;
                    best = Some((xc, l, h));
                }
            }

            // x_h in {0, 1}, optimize x_l
            if l >= 1 {
                let fixed: &[f64] = if h <= n { &[0.0, 1.0] } else { &[1.0] };
                for &xh in fixed {
                    if h <= n {
                        x[h - 1] = xh;
                    }
                    candidates += 1;
                    if let Some((xc, v)) = search.optimize_slot(&x, l - 1)? {
                        if improves(v, best_value) {
                            best_value = v;
                            best = Some((xc, l, h));
                        }
                    }
                }
            }
        }
    }

    let Some((mut x, l, h)) = best else {
        return Ok(SolveResult::infeasible(n, partition, candidates));
    };
    let fractional = x.iter().position(|&v| v > 0.0 && v < 1.0).map(|i| i + 1);
    if flipped {
        for v in &mut x {
            *v = 1.0 - *v;
        }
    }
    let objective = evaluate_two_queue(inst, &x, alpha)?;
    Ok(SolveResult {
        status: Status::Optimal,
        assignment: AssignmentMatrix::two_queue(&x)?,
        partition,
        objective,
        structure: Structure::Sap {
            l,
            h,
            fractional,
            flipped,
        },
        candidates_evaluated: candidates,
    })
}

/// One-coordinate searches for a fixed split with `alpha >= 1/2`.
struct SlotSearch<'a> {
    inst: &'a Instance,
    alpha: f64,
    total_load: f64,
    total_lambda: f64,
}

impl<'a> SlotSearch<'a> {
    fn new(inst: &'a Instance, alpha: f64) -> Self {
        SlotSearch {
            inst,
            alpha,
            total_load: inst.total_load(),
            total_lambda: inst.total_lambda(),
        }
    }

    fn point(&self, x: &[f64]) -> Option<(Vec<f64>, f64)> {
        let v = evaluate_two_queue(self.inst, x, self.alpha).ok()?;
        v.is_finite().then(|| (x.to_vec(), v))
    }

    /// Minimizes over `x[slot]` with the other entries fixed.
    fn optimize_slot(&self, x: &[f64], slot: usize) -> Result<Option<(Vec<f64>, f64)>> {
        let types = self.inst.types();
        let t = types[slot];
        let rho = t.load();
        let mut first = QueueAggregates::default();
        let mut second = QueueAggregates::default();
        for (i, (ty, &v)) in types.iter().zip(x).enumerate() {
            if i == slot {
                continue;
            }
            if v != 0.0 {
                first.add(ty, v);
            }
            if v != 1.0 {
                second.add(ty, 1.0 - v);
            }
        }
        // loads must stay below both capacities
        let lo = ((self.total_load - (1.0 - self.alpha) - first.b) / rho).max(0.0);
        let hi = ((self.alpha - first.b) / rho).min(1.0);
        if lo > hi {
            return Ok(None);
        }
        let alphas = [self.alpha, 1.0 - self.alpha];
        let objective = |z: f64| {
            let mut a = first;
            let mut b = second;
            if z != 0.0 {
                a.add(&t, z);
            }
            if z != 1.0 {
                b.add(&t, 1.0 - z);
            }
            objective_from_aggregates(&[a, b], &alphas, self.total_lambda)
        };
        let res = minimize_scalar(objective, lo, hi, DEFAULT_TOL)?;
        if !res.is_feasible() {
            return Ok(None);
        }
        let mut xc = x.to_vec();
        xc[slot] = res.arg;
        Ok(self.point(&xc))
    }
}

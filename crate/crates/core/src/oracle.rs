//! Brute-force references for checking the structured solvers.
//!
//! These share only the objective evaluator with the solvers. They are slow
//! on purpose and make no optimality claim beyond what they enumerate.

use crate::convex::{for_each_composition, minimize_simplex_convex, DescentOptions};
use crate::error::{invalid, Error, Result};
use crate::model::{
    check_alpha, evaluate_multi_queue, evaluate_two_queue, AssignmentMatrix, Instance,
    PartitionVector, SolveResult, Status, Structure,
};
use crate::solvers::TIE_TOLERANCE;

/// Lattice used by the grid oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// spacing along single free coordinates and along `alpha`
    pub step: f64,
    /// spacing of the full lattice over all coordinates
    pub coarse_step: f64,
    pub include_endpoints: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            step: 1e-3,
            coarse_step: 0.05,
            include_endpoints: true,
        }
    }
}

impl GridSpec {
    pub fn with_step(step: f64) -> Self {
        GridSpec {
            step,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, s) in [("step", self.step), ("coarse_step", self.coarse_step)] {
            if !(s > 0.0 && s <= 0.5) {
                return invalid(format!("grid {name} must lie in (0, 0.5], got {s}"));
            }
        }
        Ok(())
    }
}

/// Points `0, s, 2s, ..., 1` (the last one clamped to 1).
fn lattice(step: f64, include_endpoints: bool) -> Vec<f64> {
    let m = (1.0 / step).round().max(1.0) as usize;
    let mut pts: Vec<f64> = (0..=m).map(|i| (i as f64 * step).min(1.0)).collect();
    if *pts.last().unwrap() < 1.0 {
        pts.push(1.0);
    }
    if !include_endpoints {
        pts.retain(|&v| v > 0.0 && v < 1.0);
    }
    pts
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaSpec {
    Fixed(f64),
    Free,
}

struct Best {
    x: Vec<f64>,
    alpha: f64,
    value: f64,
    count: usize,
}

impl Best {
    fn offer(&mut self, x: &[f64], alpha: f64, value: f64) {
        self.count += 1;
        if value < self.value {
            self.value = value;
            self.x.copy_from_slice(x);
            self.alpha = alpha;
        }
    }
}

/// Best point of a grid over `x` (and `alpha` when free).
///
/// Two families are scanned: the full lattice at `coarse_step`, and every line
/// on which all coordinates but one are 0 or 1 and the remaining one runs at
/// `step`. The second family contains every assignment with at most one
/// fractional entry, which is where two-queue optima live.
pub fn grid_search_two_queue(inst: &Instance, alpha: AlphaSpec, grid: &GridSpec) -> Result<SolveResult> {
    grid.validate()?;
    let n = inst.len();
    let alphas = match alpha {
        AlphaSpec::Fixed(a) => {
            check_alpha(a)?;
            if n > 4 {
                return Err(Error::SizeGuard(format!("fixed-alpha grid oracle needs n <= 4, got {n}")));
            }
            vec![a]
        }
        AlphaSpec::Free => {
            if n > 3 {
                return Err(Error::SizeGuard(format!("free-alpha grid oracle needs n <= 3, got {n}")));
            }
            lattice(grid.step, grid.include_endpoints)
        }
    };
    let fine = lattice(grid.step, grid.include_endpoints);
    let coarse = lattice(grid.coarse_step, grid.include_endpoints);
    let mut best = Best {
        x: vec![0.0; n],
        alpha: alphas[0],
        value: f64::INFINITY,
        count: 0,
    };
    let mut x = vec![0.0; n];

    let scan = |x: &[f64], best: &mut Best| -> Result<()> {
        for &a in &alphas {
            let v = evaluate_two_queue(inst, x, a)?;
            best.offer(x, a, v);
        }
        Ok(())
    };

    let mut idx = vec![0usize; n];
    loop {
        for (xi, &k) in x.iter_mut().zip(&idx) {
            *xi = coarse[k];
        }
        scan(&x, &mut best)?;
        if !advance(&mut idx, coarse.len()) {
            break;
        }
    }

    for free in 0..n {
        for mask in 0..1usize << (n - 1) {
            let mut bit = 0;
            for (i, xi) in x.iter_mut().enumerate() {
                if i != free {
                    *xi = ((mask >> bit) & 1) as f64;
                    bit += 1;
                }
            }
            for &v in &fine {
                x[free] = v;
                scan(&x, &mut best)?;
            }
        }
    }

    Ok(grid_result(inst, best))
}

fn advance(idx: &mut [usize], base: usize) -> bool {
    for d in idx.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

fn grid_result(inst: &Instance, best: Best) -> SolveResult {
    let partition = PartitionVector::from_vec_unchecked(vec![best.alpha, 1.0 - best.alpha]);
    if !best.value.is_finite() {
        return SolveResult::infeasible(inst.len(), partition, best.count);
    }
    SolveResult {
        status: Status::Optimal,
        assignment: AssignmentMatrix::two_queue(&best.x).expect("lattice points are valid"),
        partition,
        objective: best.value,
        structure: Structure::None,
        candidates_evaluated: best.count,
    }
}

/// Largest number of points the multi-queue grid oracle will visit.
pub const MAX_GRID_POINTS: usize = 20_000_000;

/// Grid over k-queue assignments, each row on the simplex lattice at
/// `coarse_step`. With `alphas = None` the split is scanned too, on the
/// simplex lattice at `step`.
pub fn grid_search_multi_queue(
    inst: &Instance,
    k: usize,
    alphas: Option<&PartitionVector>,
    grid: &GridSpec,
) -> Result<SolveResult> {
    grid.validate()?;
    if k == 0 {
        return invalid("number of queues must be at least 1");
    }
    if let Some(a) = alphas {
        if a.len() != k {
            return invalid(format!("expected {k} capacity shares, got {}", a.len()));
        }
    }
    let n = inst.len();
    let row_points = simplex_lattice(k, grid.coarse_step, grid.include_endpoints);
    let splits: Vec<Vec<f64>> = match alphas {
        Some(a) => vec![a.as_slice().to_vec()],
        None => simplex_lattice(k, grid.step, grid.include_endpoints),
    };
    let total = (row_points.len() as f64).powi(n as i32) * splits.len() as f64;
    if total > MAX_GRID_POINTS as f64 {
        return Err(Error::SizeGuard(format!(
            "multi-queue grid would visit {total:.0} points, limit is {MAX_GRID_POINTS}"
        )));
    }
    let splits: Vec<PartitionVector> = splits.into_iter().map(PartitionVector::from_vec_unchecked).collect();

    let mut best: Option<(Vec<usize>, usize, f64)> = None;
    let mut count = 0;
    let mut idx = vec![0usize; n];
    loop {
        let rows: Vec<Vec<f64>> = idx.iter().map(|&r| row_points[r].clone()).collect();
        let x = AssignmentMatrix::from_rows_unchecked(rows);
        for (s, split) in splits.iter().enumerate() {
            count += 1;
            let v = evaluate_multi_queue(inst, &x, split)?;
            if best.as_ref().is_none_or(|b| v < b.2) && v.is_finite() {
                best = Some((idx.clone(), s, v));
            }
        }
        if !advance(&mut idx, row_points.len()) {
            break;
        }
    }
    let Some((idx, s, value)) = best else {
        return Ok(SolveResult::infeasible(n, PartitionVector::pooled(k, 0), count));
    };
    Ok(SolveResult {
        status: Status::Optimal,
        assignment: AssignmentMatrix::from_rows_unchecked(idx.iter().map(|&r| row_points[r].clone()).collect()),
        partition: splits[s].clone(),
        objective: value,
        structure: Structure::None,
        candidates_evaluated: count,
    })
}

fn simplex_lattice(k: usize, step: f64, include_endpoints: bool) -> Vec<Vec<f64>> {
    let m = (1.0 / step).round().max(1.0) as usize;
    let mut out = Vec::new();
    for_each_composition(k, m, |parts| {
        if include_endpoints || parts.iter().all(|&p| p > 0 && p < m) {
            out.push(parts.iter().map(|&p| p as f64 / m as f64).collect());
        }
    });
    out
}

/// Largest `n` accepted by [`enumerate_binary`].
pub const MAX_BINARY_TYPES: usize = 16;

/// Plain loop over all `2^n` deterministic assignments for a fixed split.
///
/// Vectors are visited in lexicographic order (`x_1` most significant) and a
/// later vector wins only if it is better by more than the solvers' tie
/// tolerance, so the answer coincides with the exact DAP solver.
pub fn enumerate_binary(inst: &Instance, alpha: f64) -> Result<SolveResult> {
    check_alpha(alpha)?;
    let n = inst.len();
    if n > MAX_BINARY_TYPES {
        return Err(Error::SizeGuard(format!(
            "binary enumeration is limited to {MAX_BINARY_TYPES} types, got {n}"
        )));
    }
    let partition = PartitionVector::two_queue(alpha)?;
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut x = vec![0.0; n];
    for mask in 0..1u32 << n {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = ((mask >> (n - 1 - i)) & 1) as f64;
        }
        let v = evaluate_two_queue(inst, &x, alpha)?;
        let better = match &best {
            None => v.is_finite(),
            Some((_, b)) => v < b - TIE_TOLERANCE * b.abs().max(1.0),
        };
        if better {
            best = Some((x.clone(), v));
        }
    }
    let count = 1usize << n;
    let Some((x, value)) = best else {
        return Ok(SolveResult::infeasible(n, partition, count));
    };
    Ok(SolveResult {
        status: Status::Optimal,
        structure: Structure::Dap {
            vector: x.iter().map(|&v| v as u8).collect(),
        },
        assignment: AssignmentMatrix::two_queue(&x)?,
        partition,
        objective: value,
        candidates_evaluated: count,
    })
}

/// Largest number of assignments [`enumerate_deterministic_partition`] visits.
pub const MAX_PARTITION_ASSIGNMENTS: usize = 100_000;

/// Every deterministic assignment of `n` types to `k` queues, each with the
/// best split found by convex descent over the queues it uses.
pub fn enumerate_deterministic_partition(inst: &Instance, k: usize) -> Result<SolveResult> {
    if k == 0 {
        return invalid("number of queues must be at least 1");
    }
    let n = inst.len();
    let total = (k as f64).powi(n as i32);
    if total > MAX_PARTITION_ASSIGNMENTS as f64 {
        return Err(Error::SizeGuard(format!(
            "{k}^{n} assignments exceed the limit of {MAX_PARTITION_ASSIGNMENTS}"
        )));
    }
    let mut best: Option<(AssignmentMatrix, PartitionVector, f64)> = None;
    let mut count = 0;
    let mut labels = vec![0usize; n];
    loop {
        count += 1;
        let mut used: Vec<usize> = labels.clone();
        used.sort_unstable();
        used.dedup();
        let rows: Vec<Vec<f64>> = labels
            .iter()
            .map(|&q| (0..k).map(|j| if j == q { 1.0 } else { 0.0 }).collect())
            .collect();
        let x = AssignmentMatrix::from_rows_unchecked(rows);
        let objective = |shares: &[f64]| {
            let mut alphas = vec![0.0; k];
            for (&q, &a) in used.iter().zip(shares) {
                alphas[q] = a;
            }
            evaluate_multi_queue(inst, &x, &PartitionVector::from_vec_unchecked(alphas))
                .unwrap_or(f64::INFINITY)
        };
        let res = minimize_simplex_convex(objective, used.len(), DescentOptions::default())?;
        if res.is_feasible() && best.as_ref().is_none_or(|b| res.value < b.2) {
            let mut alphas = vec![0.0; k];
            for (&q, &a) in used.iter().zip(&res.point) {
                alphas[q] = a;
            }
            best = Some((x, PartitionVector::from_vec_unchecked(alphas), res.value));
        }
        if !advance(&mut labels, k) {
            break;
        }
    }
    let Some((assignment, partition, objective)) = best else {
        return Ok(SolveResult::infeasible(n, PartitionVector::pooled(k, 0), count));
    };
    Ok(SolveResult {
        status: Status::Optimal,
        assignment,
        partition,
        objective,
        structure: Structure::None,
        candidates_evaluated: count,
    })
}

/// Whether the integers in `weights` split into two halves of equal sum.
pub fn subset_sum_partition(weights: &[f64]) -> Result<bool> {
    let mut ints = Vec::with_capacity(weights.len());
    for (i, &w) in weights.iter().enumerate() {
        if !(w.is_finite() && w >= 0.0 && w.fract() == 0.0) {
            return invalid(format!("weight {i} must be a nonnegative integer, got {w}"));
        }
        ints.push(w as usize);
    }
    let sum: usize = ints.iter().sum();
    if sum > 1_000_000 {
        return Err(Error::SizeGuard(format!("weight sum {sum} exceeds 1000000")));
    }
    if sum % 2 == 1 {
        return Ok(false);
    }
    let half = sum / 2;
    let mut reachable = vec![false; half + 1];
    reachable[0] = true;
    for w in ints {
        for s in (w..=half).rev() {
            if reachable[s - w] {
                reachable[s] = true;
            }
        }
    }
    Ok(reachable[half])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example1() -> Instance {
        Instance::from_rates(&[0.4, 8.0, 0.2], &[16.0, 12.0, 10.0]).unwrap()
    }

    #[test]
    fn lattice_points() {
        assert_eq!(lattice(0.25, true), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(lattice(0.25, false), vec![0.25, 0.5, 0.75]);
        assert_eq!(lattice(0.3, true).last(), Some(&1.0));
        assert_eq!(simplex_lattice(3, 0.5, true).len(), 6);
    }

    #[test]
    fn example1_grid() {
        let res = grid_search_two_queue(&example1(), AlphaSpec::Fixed(0.8), &GridSpec::default()).unwrap();
        assert!((res.objective - 0.37).abs() < 0.03);
        assert!(res.objective < 0.3447);
    }

    #[test]
    fn pooled_single_type() {
        let inst = Instance::from_rates(&[0.5], &[1.0]).unwrap();
        let res = grid_search_two_queue(&inst, AlphaSpec::Fixed(1.0), &GridSpec::default()).unwrap();
        assert_eq!(res.assignment.column(0), vec![1.0]);
        assert_eq!(res.objective, 1.0);
    }

    #[test]
    fn free_alpha_prop1() {
        let t = 0.1;
        let inst = Instance::from_rates(&[t, 1.0], &[1.0, 1000.0]).unwrap();
        let res = grid_search_two_queue(&inst, AlphaSpec::Free, &GridSpec::default()).unwrap();
        let reference = evaluate_two_queue(&inst, &[1.0, 0.0], 1.0 - t).unwrap();
        assert!(res.objective <= reference);
    }

    #[test]
    fn guards_and_validation() {
        let inst = Instance::from_rates(&[0.1; 5], &[5.0, 4.0, 3.0, 2.0, 1.0]).unwrap();
        assert!(grid_search_two_queue(&inst, AlphaSpec::Fixed(0.5), &GridSpec::default()).is_err());
        assert!(grid_search_two_queue(&example1(), AlphaSpec::Fixed(0.8), &GridSpec::with_step(0.0)).is_err());
        assert!(grid_search_two_queue(&example1(), AlphaSpec::Fixed(0.8), &GridSpec::with_step(0.6)).is_err());
    }

    #[test]
    fn binary_example1() {
        let res = enumerate_binary(&example1(), 0.8).unwrap();
        assert_eq!(res.assignment.column(0), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn binary_single_type_and_overload() {
        let inst = Instance::from_rates(&[0.3], &[1.0]).unwrap();
        let res = enumerate_binary(&inst, 0.6).unwrap();
        // x = 1 puts the type on the larger share
        assert_eq!(res.assignment.column(0), vec![1.0]);
        let over = Instance::from_rates(&[1.5], &[1.0]).unwrap();
        assert_eq!(enumerate_binary(&over, 0.5).unwrap().status, Status::Infeasible);
    }

    #[test]
    fn subset_sums() {
        assert!(subset_sum_partition(&[1.0, 2.0, 3.0]).unwrap());
        assert!(!subset_sum_partition(&[1.0, 1.0, 3.0]).unwrap());
        assert!(subset_sum_partition(&[3.0, 5.0, 8.0]).unwrap());
        assert!(subset_sum_partition(&[]).unwrap());
        assert!(subset_sum_partition(&[1.5]).is_err());
    }

    #[test]
    fn multi_queue_grid_two_queues() {
        let inst = example1();
        let alphas = PartitionVector::new(vec![0.8, 0.2]).unwrap();
        let grid = GridSpec {
            coarse_step: 0.02,
            ..GridSpec::default()
        };
        let res = grid_search_multi_queue(&inst, 2, Some(&alphas), &grid).unwrap();
        assert!(res.objective < 0.36);
    }

    #[test]
    fn deterministic_partition_two_queues() {
        let inst = Instance::from_rates(&[0.25, 1.0], &[1.0, 64.0]).unwrap();
        let res = enumerate_deterministic_partition(&inst, 2).unwrap();
        assert!(res.objective <= 0.136667);
        assert!(res.assignment.is_deterministic());
    }
}

//! Domain types and the closed-form waiting-time objective.
//!
//! For a queue with capacity `alpha` that receives weight `w_i` of type `i`,
//! let
//!
//! ```text
//! A = sum_i w_i lambda_i / mu_i^2      B = sum_i w_i lambda_i / mu_i      C = sum_i w_i lambda_i
//! ```
//!
//! The mean queueing delay of a customer in that queue is `A / (alpha^2 - alpha B)`,
//! and the queue contributes that delay weighted by its arrival share `C / sum(lambda)`.
//! The objective is the sum of those contributions. A queue with positive weight
//! needs `B < alpha`. Infeasible points evaluate to `f64::INFINITY` instead of an
//! error so that minimizers can probe freely.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Absolute slack required between a queue's load and its capacity.
pub const FEASIBILITY_MARGIN: f64 = 1e-12;

/// Tolerance on row sums of assignments and on the sum of capacity shares.
pub const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CustomerType {
    /// Arrivals per unit time.
    pub lambda: f64,
    /// Service completions per unit time on a unit-capacity server.
    pub mu: f64,
}

impl CustomerType {
    pub fn new(lambda: f64, mu: f64) -> Self {
        CustomerType { lambda, mu }
    }

    /// Offered load `lambda / mu` on a unit-capacity server.
    pub fn load(&self) -> f64 {
        self.lambda / self.mu
    }

    fn check(&self, index: usize) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return invalid(format!(
                "type {index}: lambda must be positive and finite, got {}",
                self.lambda
            ));
        }
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return invalid(format!(
                "type {index}: mu must be positive and finite, got {}",
                self.mu
            ));
        }
        Ok(())
    }
}

/// An ordered population of customer types.
///
/// `normalized` is true when `mu` is strictly decreasing along the list, which
/// is the ordering every structured solver works in.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    types: Vec<CustomerType>,
    normalized: bool,
}

impl Instance {
    pub fn new(types: Vec<CustomerType>) -> Result<Self> {
        if types.is_empty() {
            return invalid("instance has no customer types");
        }
        for (i, t) in types.iter().enumerate() {
            t.check(i)?;
        }
        let normalized = types.windows(2).all(|w| w[0].mu > w[1].mu);
        Ok(Instance { types, normalized })
    }

    /// Convenience constructor from parallel rate slices.
    pub fn from_rates(lambdas: &[f64], mus: &[f64]) -> Result<Self> {
        if lambdas.len() != mus.len() {
            return invalid(format!(
                "{} arrival rates but {} service rates",
                lambdas.len(),
                mus.len()
            ));
        }
        Instance::new(
            lambdas
                .iter()
                .zip(mus)
                .map(|(&l, &m)| CustomerType::new(l, m))
                .collect(),
        )
    }

    pub fn types(&self) -> &[CustomerType] {
        &self.types
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn total_lambda(&self) -> f64 {
        self.types.iter().map(|t| t.lambda).sum()
    }

    /// `sum_i lambda_i / mu_i`; the pooled system is stable iff this is below 1.
    pub fn total_load(&self) -> f64 {
        self.types.iter().map(CustomerType::load).sum()
    }

    pub fn is_stable(&self) -> bool {
        self.total_load() < 1.0
    }

    /// Mean queueing delay when every type shares the whole server.
    pub fn pooled_objective(&self) -> f64 {
        let agg = QueueAggregates::full(self);
        queue_term(&agg, 1.0, self.total_lambda())
    }

    /// Sorts by `mu` descending and merges types with equal `mu`.
    pub fn normalize(&self) -> Normalized {
        let mut order: Vec<usize> = (0..self.len()).collect();
        // stable sort keeps the original order among equal mu
        order.sort_by(|&a, &b| self.types[b].mu.total_cmp(&self.types[a].mu));

        let mut merged: Vec<CustomerType> = Vec::with_capacity(self.len());
        let mut to_new = vec![0; self.len()];
        for &orig in &order {
            let t = self.types[orig];
            match merged.last_mut() {
                Some(last) if last.mu == t.mu => last.lambda += t.lambda,
                _ => merged.push(t),
            }
            to_new[orig] = merged.len() - 1;
        }
        let instance = Instance {
            types: merged,
            normalized: true,
        };
        Normalized {
            instance,
            map: MergeMap { to_new },
        }
    }
}

/// A normalized instance together with the map back to the original types.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub instance: Instance,
    pub map: MergeMap,
}

/// `to_new[i]` is the normalized index that original type `i` was merged into.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeMap {
    pub to_new: Vec<usize>,
}

impl MergeMap {
    pub fn identity(n: usize) -> Self {
        MergeMap {
            to_new: (0..n).collect(),
        }
    }

    /// Expresses an assignment of normalized types against the original types.
    ///
    /// Merged originals inherit the routing of their merged type, which keeps
    /// every queue's aggregates unchanged.
    pub fn expand(&self, x: &AssignmentMatrix) -> AssignmentMatrix {
        let rows = self
            .to_new
            .iter()
            .map(|&j| x.row(j).to_vec())
            .collect::<Vec<_>>();
        AssignmentMatrix::from_rows_unchecked(rows)
    }
}

/// Capacity shares of the sub-queues.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionVector {
    alphas: Vec<f64>,
}

impl PartitionVector {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return invalid("partition has no queues");
        }
        for (j, &a) in alphas.iter().enumerate() {
            if !(0.0..=1.0).contains(&a) {
                return invalid(format!("alpha[{j}] = {a} is outside [0, 1]"));
            }
        }
        let sum: f64 = alphas.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return invalid(format!("capacity shares sum to {sum}, expected 1"));
        }
        Ok(PartitionVector { alphas })
    }

    /// `(alpha, 1 - alpha)`.
    pub fn two_queue(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        PartitionVector::new(vec![alpha, 1.0 - alpha])
    }

    pub fn pooled(k: usize, queue: usize) -> Self {
        let mut alphas = vec![0.0; k];
        alphas[queue] = 1.0;
        PartitionVector { alphas }
    }

    pub(crate) fn from_vec_unchecked(alphas: Vec<f64>) -> Self {
        PartitionVector { alphas }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.alphas
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return invalid(format!("alpha = {alpha} is outside [0, 1]"));
    }
    Ok(())
}

/// Routing probabilities: entry `(i, j)` is the share of type `i` sent to queue `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl AssignmentMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return invalid("assignment has no rows");
        }
        let cols = rows[0].len();
        if cols == 0 {
            return invalid("assignment has no columns");
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return invalid(format!(
                    "assignment row {i} has {} entries, expected {cols}",
                    row.len()
                ));
            }
            for (j, &v) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    return invalid(format!("assignment[{i}][{j}] = {v} is outside [0, 1]"));
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                return invalid(format!("assignment row {i} sums to {sum}, expected 1"));
            }
        }
        Ok(Self::from_rows_unchecked(rows))
    }

    /// Two-queue assignment `[x_i, 1 - x_i]` from the first-queue probabilities.
    pub fn two_queue(x: &[f64]) -> Result<Self> {
        check_probabilities(x)?;
        Ok(Self::from_rows_unchecked(
            x.iter().map(|&v| vec![v, 1.0 - v]).collect(),
        ))
    }

    /// Every type routed entirely to `queue`.
    pub fn all_to(n: usize, k: usize, queue: usize) -> Self {
        let mut data = vec![0.0; n * k];
        for i in 0..n {
            data[i * k + queue] = 1.0;
        }
        AssignmentMatrix {
            rows: n,
            cols: k,
            data,
        }
    }

    pub(crate) fn from_rows_unchecked(rows: Vec<Vec<f64>>) -> Self {
        let n = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        AssignmentMatrix {
            rows: n,
            cols: k,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_deterministic(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Reorders columns so that new column `j` is old column `perm[j]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        let rows = (0..self.rows)
            .map(|i| perm.iter().map(|&p| self.get(i, p)).collect())
            .collect();
        Self::from_rows_unchecked(rows)
    }
}

fn check_probabilities(x: &[f64]) -> Result<()> {
    for (i, &v) in x.iter().enumerate() {
        if !(0.0..=1.0).contains(&v) {
            return invalid(format!("x[{i}] = {v} is outside [0, 1]"));
        }
    }
    Ok(())
}

/// Weighted moments of the traffic routed to one queue.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QueueAggregates {
    /// `sum w_i lambda_i / mu_i^2`
    pub a: f64,
    /// `sum w_i lambda_i / mu_i`, the load on a unit server
    pub b: f64,
    /// `sum w_i lambda_i`
    pub c: f64,
}

impl QueueAggregates {
    pub fn add(&mut self, t: &CustomerType, weight: f64) {
        let per_mu = t.lambda / t.mu;
        self.a += weight * per_mu / t.mu;
        self.b += weight * per_mu;
        self.c += weight * t.lambda;
    }

    pub fn full(inst: &Instance) -> Self {
        Self::from_weights(inst, std::iter::repeat(1.0))
    }

    pub fn from_weights(inst: &Instance, weights: impl IntoIterator<Item = f64>) -> Self {
        let mut agg = QueueAggregates::default();
        for (t, w) in inst.types().iter().zip(weights) {
            if w != 0.0 {
                agg.add(t, w);
            }
        }
        agg
    }

    pub fn is_empty(&self) -> bool {
        self.c == 0.0
    }
}

/// Contribution of one queue to the objective, or `INFINITY` if unstable.
pub fn queue_term(agg: &QueueAggregates, alpha: f64, total_lambda: f64) -> f64 {
    if agg.is_empty() {
        return 0.0;
    }
    if !queue_is_stable(agg, alpha) {
        return f64::INFINITY;
    }
    agg.a / (alpha * alpha - alpha * agg.b) * (agg.c / total_lambda)
}

fn queue_is_stable(agg: &QueueAggregates, alpha: f64) -> bool {
    agg.is_empty() || (alpha > 0.0 && agg.b <= alpha - FEASIBILITY_MARGIN * alpha.max(1.0))
}

/// Objective from precomputed per-queue aggregates.
pub fn objective_from_aggregates(aggs: &[QueueAggregates], alphas: &[f64], total_lambda: f64) -> f64 {
    let mut total = 0.0;
    for (agg, &alpha) in aggs.iter().zip(alphas) {
        let term = queue_term(agg, alpha, total_lambda);
        if term == f64::INFINITY {
            return f64::INFINITY;
        }
        total += term;
    }
    total
}

fn two_queue_aggregates(inst: &Instance, x: &[f64]) -> [QueueAggregates; 2] {
    let first = QueueAggregates::from_weights(inst, x.iter().copied());
    let second = QueueAggregates::from_weights(inst, x.iter().map(|&v| 1.0 - v));
    [first, second]
}

fn check_two_queue(inst: &Instance, x: &[f64], alpha: f64) -> Result<()> {
    if x.len() != inst.len() {
        return invalid(format!(
            "assignment has {} entries for {} types",
            x.len(),
            inst.len()
        ));
    }
    check_probabilities(x)?;
    check_alpha(alpha)
}

/// Two-queue objective `f(x, alpha)`; `x_i` is the share of type `i` sent to the
/// queue with capacity `alpha`.
///
/// Returns `INFINITY` outside the feasible set. The pooled points `(0, 0)` and
/// `(1, 1)` give the single-server delay.
pub fn evaluate_two_queue(inst: &Instance, x: &[f64], alpha: f64) -> Result<f64> {
    check_two_queue(inst, x, alpha)?;
    let aggs = two_queue_aggregates(inst, x);
    Ok(objective_from_aggregates(
        &aggs,
        &[alpha, 1.0 - alpha],
        inst.total_lambda(),
    ))
}

fn check_multi(inst: &Instance, x: &AssignmentMatrix, alphas: &PartitionVector) -> Result<()> {
    if x.rows() != inst.len() {
        return invalid(format!(
            "assignment has {} rows for {} types",
            x.rows(),
            inst.len()
        ));
    }
    if x.cols() != alphas.len() {
        return invalid(format!(
            "assignment has {} columns for {} queues",
            x.cols(),
            alphas.len()
        ));
    }
    Ok(())
}

pub fn column_aggregates(inst: &Instance, x: &AssignmentMatrix) -> Vec<QueueAggregates> {
    (0..x.cols())
        .map(|j| QueueAggregates::from_weights(inst, (0..x.rows()).map(|i| x.get(i, j))))
        .collect()
}

/// Objective `f(X, alphas)` for any number of sub-queues.
pub fn evaluate_multi_queue(
    inst: &Instance,
    x: &AssignmentMatrix,
    alphas: &PartitionVector,
) -> Result<f64> {
    check_multi(inst, x, alphas)?;
    let aggs = column_aggregates(inst, x);
    Ok(objective_from_aggregates(
        &aggs,
        alphas.as_slice(),
        inst.total_lambda(),
    ))
}

pub fn feasible_two_queue(inst: &Instance, x: &[f64], alpha: f64) -> bool {
    if check_two_queue(inst, x, alpha).is_err() {
        return false;
    }
    let aggs = two_queue_aggregates(inst, x);
    queue_is_stable(&aggs[0], alpha) && queue_is_stable(&aggs[1], 1.0 - alpha)
}

pub fn feasible_multi(inst: &Instance, x: &AssignmentMatrix, alphas: &PartitionVector) -> bool {
    if check_multi(inst, x, alphas).is_err() {
        return false;
    }
    column_aggregates(inst, x)
        .iter()
        .zip(alphas.as_slice())
        .all(|(agg, &a)| queue_is_stable(agg, a))
}

/// Outcome of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    Infeasible,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Optimal => f.write_str("optimal"),
            Status::Infeasible => f.write_str("infeasible"),
        }
    }
}

/// One maximal run of integrally assigned rows in a k-queue assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Block {
    pub queue: usize,
    pub first: usize,
    pub last: usize,
}

/// How an optimum was found; indices refer to the normalized type order.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Structure {
    /// Every type in one queue.
    Pooled { queue: usize },
    /// Two-queue assignment `1..1 0..0 1..1` in the `alpha >= 1/2` orientation.
    /// `l` and `h` are 1-based; rows strictly between them go to the smaller
    /// queue, rows outside them to the larger one.
    Sap {
        l: usize,
        h: usize,
        fractional: Option<usize>,
        flipped: bool,
    },
    Dap { vector: Vec<u8> },
    /// Types `threshold..=n` (1-based) go to the first queue, the rest to the second.
    Spp { threshold: usize, alpha: f64 },
    Ksap {
        blocks: Vec<Block>,
        fractional_row: Option<usize>,
    },
    /// Queue `j` receives 1-based rows `boundaries[j]..boundaries[j+1]`.
    Kspp { boundaries: Vec<usize> },
    /// Grid oracles and simulations have no structure to report.
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: Status,
    pub assignment: AssignmentMatrix,
    pub partition: PartitionVector,
    /// Mean queueing delay per customer; `INFINITY` when infeasible.
    pub objective: f64,
    pub structure: Structure,
    pub candidates_evaluated: usize,
}

impl SolveResult {
    pub(crate) fn infeasible(n: usize, partition: PartitionVector, candidates: usize) -> Self {
        SolveResult {
            status: Status::Infeasible,
            assignment: AssignmentMatrix::all_to(n, partition.len(), 0),
            partition,
            objective: f64::INFINITY,
            structure: Structure::None,
            candidates_evaluated: candidates,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    /// Re-expresses the result against the original, unmerged types.
    pub fn expand(&self, map: &MergeMap) -> SolveResult {
        SolveResult {
            assignment: map.expand(&self.assignment),
            ..self.clone()
        }
    }
}

/// Counts maximal runs of exact 1-entries down each column.
pub fn count_blocks(x: &AssignmentMatrix) -> usize {
    (0..x.cols())
        .map(|j| {
            let mut blocks = 0;
            let mut inside = false;
            for i in 0..x.rows() {
                let one = x.get(i, j) == 1.0;
                if one && !inside {
                    blocks += 1;
                }
                inside = one;
            }
            blocks
        })
        .sum()
}

/// Largest number of strictly fractional entries in any column.
pub fn max_fractional_per_column(x: &AssignmentMatrix) -> usize {
    (0..x.cols())
        .map(|j| {
            (0..x.rows())
                .filter(|&i| {
                    let v = x.get(i, j);
                    v > 0.0 && v < 1.0
                })
                .count()
        })
        .max()
        .unwrap_or(0)
}

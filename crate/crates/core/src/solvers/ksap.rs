use crate::convex::{minimize_scalar, minimize_simplex_convex, DescentOptions, DEFAULT_TOL};
use crate::error::{invalid, Error, Result};
use crate::model::{
    count_blocks, evaluate_multi_queue, objective_from_aggregates, AssignmentMatrix, Block,
    CustomerType, Instance, PartitionVector, QueueAggregates, SolveResult, Status, Structure,
    FEASIBILITY_MARGIN,
};

use super::{improves, require_normalized, MAX_CANDIDATES};

/// Largest number of queues [`solve_ksap`] accepts.
pub const MAX_KSAP_QUEUES: usize = 3;

/// Optimal probabilistic assignment for a fixed k-way split.
///
/// Some optimum has at most one fractional entry per column and at most
/// `2k - 1` blocks of consecutive ones. With `k <= 3` that leaves at most one
/// fractional row. Rows are assigned in `mu` order, depth first: each row goes
/// whole to one queue, or (once) is split over two or three queues. Branches
/// that overload a queue or exceed the block bound are cut, and the split row
/// is solved as a small convex problem.
///
/// Queues with `alpha = 0` receive nothing and do not count towards `k`.
pub fn solve_ksap(inst: &Instance, alphas: &PartitionVector) -> Result<SolveResult> {
    require_normalized(inst)?;
    let n = inst.len();
    let k = alphas.len();
    if k == 0 {
        return invalid("partition vector is empty");
    }
    if k > MAX_KSAP_QUEUES {
        return Err(Error::SizeGuard(format!(
            "k-SAP is supported for at most {MAX_KSAP_QUEUES} queues, got {k}"
        )));
    }
    let size = (n as f64).powi(2 * k as i32 - 2);
    if size > MAX_CANDIDATES {
        return Err(Error::SizeGuard(format!(
            "k-SAP enumeration of order n^(2k-2) = {size:.0} exceeds {MAX_CANDIDATES:.0}"
        )));
    }
    if !inst.is_stable() {
        return Ok(SolveResult::infeasible(n, alphas.clone(), 0));
    }

    let active: Vec<usize> = (0..k).filter(|&j| alphas.as_slice()[j] > 0.0).collect();
    let mut supports = Vec::new();
    for size in 2..=active.len() {
        subsets(&active, size, &mut Vec::new(), 0, &mut supports);
    }
    let mut search = Search {
        types: inst.types(),
        alphas: alphas.as_slice(),
        total_lambda: inst.total_lambda(),
        active: &active,
        supports: &supports,
        max_blocks: 2 * active.len() - 1,
        rows: vec![Row::Whole(0); n],
        aggs: vec![QueueAggregates::default(); k],
        best: None,
        best_value: f64::INFINITY,
        candidates: 0,
    };
    search.descend(0, None, 0, false)?;

    let candidates = search.candidates;
    let Some(x) = search.best else {
        return Ok(SolveResult::infeasible(n, alphas.clone(), candidates));
    };
    let objective = evaluate_multi_queue(inst, &x, alphas)?;
    let fractional_row = (0..n)
        .find(|&i| x.row(i).iter().any(|&v| v > 0.0 && v < 1.0))
        .map(|i| i + 1);
    Ok(SolveResult {
        status: Status::Optimal,
        structure: Structure::Ksap {
            blocks: blocks(&x),
            fractional_row,
        },
        assignment: x,
        partition: alphas.clone(),
        objective,
        candidates_evaluated: candidates,
    })
}

fn subsets(items: &[usize], size: usize, cur: &mut Vec<usize>, from: usize, out: &mut Vec<Vec<usize>>) {
    if cur.len() == size {
        out.push(cur.clone());
        return;
    }
    for i in from..items.len() {
        cur.push(items[i]);
        subsets(items, size, cur, i + 1, out);
        cur.pop();
    }
}

/// Maximal runs of ones in each column, 1-based.
fn blocks(x: &AssignmentMatrix) -> Vec<Block> {
    let mut out = Vec::new();
    for j in 0..x.cols() {
        let mut start = None;
        for i in 0..=x.rows() {
            let one = i < x.rows() && x.get(i, j) == 1.0;
            match (one, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    out.push(Block {
                        queue: j + 1,
                        first: s + 1,
                        last: i,
                    });
                    start = None;
                }
                _ => {}
            }
        }
    }
    out.sort_by_key(|b| (b.first, b.queue));
    out
}

#[derive(Clone, Copy)]
enum Row {
    Whole(usize),
    Split(usize),
}

struct Search<'a> {
    types: &'a [CustomerType],
    alphas: &'a [f64],
    total_lambda: f64,
    active: &'a [usize],
    supports: &'a [Vec<usize>],
    max_blocks: usize,
    rows: Vec<Row>,
    /// aggregates of the whole rows assigned so far
    aggs: Vec<QueueAggregates>,
    best: Option<AssignmentMatrix>,
    best_value: f64,
    candidates: usize,
}

impl Search<'_> {
    fn overloaded(&self, q: usize) -> bool {
        let alpha = self.alphas[q];
        self.aggs[q].b > alpha - FEASIBILITY_MARGIN * alpha.max(1.0)
    }

    /// `prev` is the queue of the previous row if it was whole.
    fn descend(&mut self, i: usize, prev: Option<usize>, blocks: usize, split_used: bool) -> Result<()> {
        if i == self.rows.len() {
            return self.leaf();
        }
        let t = self.types[i];
        for &q in self.active {
            let blocks = blocks + usize::from(prev != Some(q));
            if blocks > self.max_blocks {
                continue;
            }
            let saved = self.aggs[q];
            self.aggs[q].add(&t, 1.0);
            if !self.overloaded(q) {
                self.rows[i] = Row::Whole(q);
                self.descend(i + 1, Some(q), blocks, split_used)?;
            }
            self.aggs[q] = saved;
        }
        if !split_used {
            for s in 0..self.supports.len() {
                self.rows[i] = Row::Split(s);
                self.descend(i + 1, None, blocks, true)?;
            }
        }
        Ok(())
    }

    fn leaf(&mut self) -> Result<()> {
        self.candidates += 1;
        let split = self.rows.iter().enumerate().find_map(|(i, r)| match r {
            Row::Split(s) => Some((i, *s)),
            Row::Whole(_) => None,
        });
        let k = self.alphas.len();
        let (shares, value) = match split {
            None => (None, objective_from_aggregates(&self.aggs, self.alphas, self.total_lambda)),
            Some((i, s)) => {
                let Some((shares, value)) = self.solve_split(i, &self.supports[s])? else {
                    return Ok(());
                };
                (Some((i, s, shares)), value)
            }
        };
        if !improves(value, self.best_value) {
            return Ok(());
        }
        let rows: Vec<Vec<f64>> = self
            .rows
            .iter()
            .map(|r| {
                let mut row = vec![0.0; k];
                if let Row::Whole(q) = r {
                    row[*q] = 1.0;
                }
                row
            })
            .collect();
        let mut x = AssignmentMatrix::from_rows_unchecked(rows);
        if let Some((i, s, shares)) = shares {
            let mut row = vec![0.0; k];
            for (&q, &v) in self.supports[s].iter().zip(&shares) {
                row[q] = v;
            }
            let mut all = x.to_rows();
            all[i] = row;
            x = AssignmentMatrix::from_rows_unchecked(all);
        }
        // the optimized split may land on 0 or 1 and change the block count
        if count_blocks(&x) > self.max_blocks {
            return Ok(());
        }
        self.best_value = value;
        self.best = Some(x);
        Ok(())
    }

    /// Best shares of row `i` over the queues in `support`, given the whole rows.
    fn solve_split(&self, i: usize, support: &[usize]) -> Result<Option<(Vec<f64>, f64)>> {
        let t = self.types[i];
        let rho = t.load();
        let objective = |shares: &[f64]| {
            let mut aggs = self.aggs.clone();
            for (&q, &v) in support.iter().zip(shares) {
                if v != 0.0 {
                    aggs[q].add(&t, v);
                }
            }
            objective_from_aggregates(&aggs, self.alphas, self.total_lambda)
        };
        if support.len() == 2 {
            let (a, b) = (support[0], support[1]);
            let room_a = self.alphas[a] - self.aggs[a].b;
            let room_b = self.alphas[b] - self.aggs[b].b;
            let lo = (1.0 - room_b / rho).max(0.0);
            let hi = (room_a / rho).min(1.0);
            if lo > hi {
                return Ok(None);
            }
            let res = minimize_scalar(|z| objective(&[z, 1.0 - z]), lo, hi, DEFAULT_TOL)?;
            return Ok(res.is_feasible().then(|| (vec![res.arg, 1.0 - res.arg], res.value)));
        }
        let res = minimize_simplex_convex(objective, support.len(), DescentOptions::default())?;
        Ok(res.is_feasible().then_some((res.point, res.value)))
    }
}

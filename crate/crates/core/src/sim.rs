//! Discrete-event simulation of the partitioned server.
//!
//! Type `i` customers arrive as a Poisson stream with rate `lambda_i`, are
//! routed to queue `j` with probability `X[i][j]`, and are served FCFS at rate
//! `alpha_j * mu_i`. The recorded quantity is the time from arrival to start
//! of service, which is what the closed-form objective measures.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{column_aggregates, AssignmentMatrix, Instance, PartitionVector, FEASIBILITY_MARGIN};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// customers whose service starts, warmup included
    pub horizon: u64,
    /// leading customers left out of the statistics
    pub warmup: u64,
    pub batches: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            horizon: 1_000_000,
            warmup: 100_000,
            batches: 30,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn with_seed(seed: u64) -> Self {
        SimConfig {
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.horizon <= self.warmup {
            return invalid(format!(
                "horizon ({}) must exceed warmup ({})",
                self.horizon, self.warmup
            ));
        }
        if self.batches < 2 {
            return invalid(format!("need at least 2 batches, got {}", self.batches));
        }
        if self.horizon - self.warmup < self.batches as u64 {
            return invalid("fewer recorded customers than batches");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub mean_wait: f64,
    /// batch-means standard error of `mean_wait`
    pub std_error: f64,
    /// fraction of the recorded window each queue spent serving
    pub per_queue_utilization: Vec<f64>,
    pub customers_served: u64,
    pub seed: u64,
    pub batch_means: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Arrival(usize),
    Departure(usize),
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    seq: u64,
    kind: Kind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // reversed so the max-heap pops the earliest event
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Queue {
    waiting: VecDeque<(f64, usize)>,
    busy_since: Option<f64>,
    busy_total: f64,
    rng: ChaCha8Rng,
    /// service distribution per customer type
    service: Vec<Option<Exp<f64>>>,
}

impl Queue {
    fn busy_time(&self, now: f64) -> f64 {
        self.busy_total + self.busy_since.map_or(0.0, |s| now - s)
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Runs one simulation. Refuses configurations where a queue would be
/// unstable, including a zero-capacity queue that receives traffic.
pub fn simulate(
    inst: &Instance,
    x: &AssignmentMatrix,
    alphas: &PartitionVector,
    cfg: &SimConfig,
) -> Result<SimReport> {
    cfg.validate()?;
    let n = inst.len();
    let k = alphas.len();
    if x.rows() != n || x.cols() != k {
        return invalid(format!(
            "assignment is {}x{}, expected {n}x{k}",
            x.rows(),
            x.cols()
        ));
    }
    let shares = alphas.as_slice();
    for (j, agg) in column_aggregates(inst, x).iter().enumerate() {
        if agg.is_empty() {
            continue;
        }
        let alpha = shares[j];
        if alpha == 0.0 {
            return Err(Error::Infeasible(format!(
                "queue {} has zero capacity but receives traffic",
                j + 1
            )));
        }
        if agg.b > alpha - FEASIBILITY_MARGIN * alpha.max(1.0) {
            return Err(Error::Infeasible(format!(
                "queue {} is overloaded: utilization {:.6} >= 1",
                j + 1,
                agg.b / alpha
            )));
        }
        if agg.b / alpha > 0.99 {
            log::warn!(
                "queue {} runs at utilization {:.4}; estimates will converge slowly",
                j + 1,
                agg.b / alpha
            );
        }
    }

    let types = inst.types();
    let mut arrival_rngs: Vec<ChaCha8Rng> = (0..n).map(|i| stream(cfg.seed, i as u64)).collect();
    let arrival_dists: Vec<Exp<f64>> = types
        .iter()
        .map(|t| Exp::new(t.lambda).expect("rates are validated"))
        .collect();
    let mut routing = stream(cfg.seed, n as u64);
    let mut queues: Vec<Queue> = (0..k)
        .map(|j| Queue {
            waiting: VecDeque::new(),
            busy_since: None,
            busy_total: 0.0,
            rng: stream(cfg.seed, (n + 1 + j) as u64),
            service: types
                .iter()
                .map(|t| (shares[j] > 0.0).then(|| Exp::new(shares[j] * t.mu).expect("positive rate")))
                .collect(),
        })
        .collect();

    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    for i in 0..n {
        let time = arrival_dists[i].sample(&mut arrival_rngs[i]);
        heap.push(Event {
            time,
            seq,
            kind: Kind::Arrival(i),
        });
        seq += 1;
    }

    let recorded = cfg.horizon - cfg.warmup;
    let mut started = 0u64;
    let mut batch_sums = vec![0.0; cfg.batches];
    let mut batch_counts = vec![0u64; cfg.batches];
    let mut window_start: Option<(f64, Vec<f64>)> = None;
    let mut end = None;

    // records the wait of a customer whose service starts now
    let mut record = |wait: f64, now: f64, queues: &[Queue]| {
        if started == cfg.warmup {
            window_start = Some((now, queues.iter().map(|q| q.busy_time(now)).collect()));
        }
        if started >= cfg.warmup {
            let r = started - cfg.warmup;
            let b = (r as u128 * cfg.batches as u128 / recorded as u128) as usize;
            batch_sums[b] += wait;
            batch_counts[b] += 1;
        }
        started += 1;
        started == cfg.horizon
    };

    while let Some(ev) = heap.pop() {
        let now = ev.time;
        let mut done = false;
        match ev.kind {
            Kind::Arrival(i) => {
                let next = now + arrival_dists[i].sample(&mut arrival_rngs[i]);
                heap.push(Event {
                    time: next,
                    seq,
                    kind: Kind::Arrival(i),
                });
                seq += 1;

                let j = route(x.row(i), routing.random::<f64>());
                if queues[j].busy_since.is_none() {
                    done = record(0.0, now, &queues);
                    let q = &mut queues[j];
                    q.busy_since = Some(now);
                    let service = q.service[i].expect("capacity checked").sample(&mut q.rng);
                    heap.push(Event {
                        time: now + service,
                        seq,
                        kind: Kind::Departure(j),
                    });
                    seq += 1;
                } else {
                    queues[j].waiting.push_back((now, i));
                }
            }
            Kind::Departure(j) => {
                if let Some((arrived, i)) = queues[j].waiting.pop_front() {
                    done = record(now - arrived, now, &queues);
                    let q = &mut queues[j];
                    let service = q.service[i].expect("capacity checked").sample(&mut q.rng);
                    heap.push(Event {
                        time: now + service,
                        seq,
                        kind: Kind::Departure(j),
                    });
                    seq += 1;
                } else {
                    let q = &mut queues[j];
                    q.busy_total += now - q.busy_since.take().expect("departure from busy queue");
                }
            }
        }
        if done {
            end = Some(now);
            break;
        }
    }

    let end = end.expect("arrival streams never run dry");
    let (start, busy_at_start) = window_start.expect("warmup precedes the horizon");
    let window = end - start;
    let per_queue_utilization = queues
        .iter()
        .zip(&busy_at_start)
        .map(|(q, b0)| if window > 0.0 { (q.busy_time(end) - b0) / window } else { 0.0 })
        .collect();

    let batch_means: Vec<f64> = batch_sums
        .iter()
        .zip(&batch_counts)
        .map(|(s, &c)| s / c as f64)
        .collect();
    let mean_wait = batch_sums.iter().sum::<f64>() / recorded as f64;
    let m = cfg.batches as f64;
    let grand = batch_means.iter().sum::<f64>() / m;
    let var = batch_means.iter().map(|b| (b - grand).powi(2)).sum::<f64>() / (m - 1.0);
    Ok(SimReport {
        mean_wait,
        std_error: (var / m).sqrt(),
        per_queue_utilization,
        customers_served: recorded,
        seed: cfg.seed,
        batch_means,
    })
}

fn route(row: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (j, &p) in row.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = j;
            if u < acc {
                return j;
            }
        }
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short(seed: u64) -> SimConfig {
        SimConfig {
            horizon: 200_000,
            warmup: 20_000,
            batches: 20,
            seed,
        }
    }

    #[test]
    fn mm1_waiting_time() {
        let inst = Instance::from_rates(&[0.5], &[1.0]).unwrap();
        let x = AssignmentMatrix::all_to(1, 1, 0);
        let alphas = PartitionVector::new(vec![1.0]).unwrap();
        let rep = simulate(&inst, &x, &alphas, &short(1)).unwrap();
        assert!((rep.mean_wait - 1.0).abs() < 4.0 * rep.std_error, "{rep:?}");
        assert!((rep.per_queue_utilization[0] - 0.5).abs() < 0.02);
        assert_eq!(rep.customers_served, 180_000);
    }

    #[test]
    fn reproducible() {
        let inst = Instance::from_rates(&[0.4, 8.0, 0.2], &[16.0, 12.0, 10.0]).unwrap();
        let x = AssignmentMatrix::two_queue(&[1.0, 0.836, 1.0]).unwrap();
        let alphas = PartitionVector::two_queue(0.8).unwrap();
        let a = simulate(&inst, &x, &alphas, &short(9)).unwrap();
        let b = simulate(&inst, &x, &alphas, &short(9)).unwrap();
        assert_eq!(a, b);
        let c = simulate(&inst, &x, &alphas, &short(10)).unwrap();
        assert_ne!(a.mean_wait, c.mean_wait);
    }

    #[test]
    fn refuses_infeasible() {
        let inst = Instance::from_rates(&[0.4, 8.0, 0.2], &[16.0, 12.0, 10.0]).unwrap();
        let x = AssignmentMatrix::two_queue(&[0.0, 0.0, 0.0]).unwrap();
        let alphas = PartitionVector::two_queue(0.8).unwrap();
        assert!(matches!(simulate(&inst, &x, &alphas, &short(1)), Err(Error::Infeasible(_))));
        let x = AssignmentMatrix::two_queue(&[1.0, 1.0, 0.0]).unwrap();
        let alphas = PartitionVector::two_queue(1.0).unwrap();
        assert!(matches!(simulate(&inst, &x, &alphas, &short(1)), Err(Error::Infeasible(_))));
    }

    #[test]
    fn config_validation() {
        let inst = Instance::from_rates(&[0.5], &[1.0]).unwrap();
        let x = AssignmentMatrix::all_to(1, 1, 0);
        let alphas = PartitionVector::new(vec![1.0]).unwrap();
        let bad = SimConfig {
            horizon: 10,
            warmup: 10,
            ..SimConfig::default()
        };
        assert!(simulate(&inst, &x, &alphas, &bad).is_err());
        let bad = SimConfig {
            batches: 1,
            ..short(0)
        };
        assert!(simulate(&inst, &x, &alphas, &bad).is_err());
    }

    #[test]
    fn routing_picks_by_cumulative_share() {
        assert_eq!(route(&[0.3, 0.7], 0.1), 0);
        assert_eq!(route(&[0.3, 0.7], 0.5), 1);
        assert_eq!(route(&[0.0, 1.0], 0.0), 1);
        assert_eq!(route(&[1.0, 0.0], 0.999_999), 0);
    }
}

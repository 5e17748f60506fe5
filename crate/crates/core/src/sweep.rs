//! Parameter sweeps producing plot-ready tables.

use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::gen::prop1_instance;
use crate::model::{evaluate_two_queue, Instance};
use crate::problem::{solve, Params, Problem};

/// `steps` evenly spaced points from `start` to `stop`, both included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Range {
    pub fn new(start: f64, stop: f64, steps: usize) -> Result<Self> {
        if !start.is_finite() || !stop.is_finite() {
            return invalid("range bounds must be finite");
        }
        if steps == 0 {
            return invalid("range is empty (steps = 0)");
        }
        Ok(Range { start, stop, steps })
    }

    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / last
                }
            })
            .collect()
    }
}

impl FromStr for Range {
    type Err = Error;

    /// Parses `start:stop:steps`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, steps] = parts[..] else {
            return invalid(format!("range '{s}' is not of the form start:stop:steps"));
        };
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Validation(format!("bad number '{p}' in range '{s}'")))
        };
        let steps = steps
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Validation(format!("bad step count '{steps}' in range '{s}'")))?;
        Range::new(num(start)?, num(stop)?, steps)
    }
}

/// A table of one parameter column and one or more value columns.
/// Infinite values mark infeasible points.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Optimal objective of a fixed-split problem (sap or dap) as `alpha` varies.
pub fn sweep_alpha(inst: &Instance, problem: Problem, range: &Range) -> Result<Table> {
    if !matches!(problem, Problem::Sap | Problem::Dap) {
        return invalid(format!("alpha sweeps apply to sap and dap, not {problem}"));
    }
    let mut rows = Vec::new();
    for a in range.points() {
        let params = Params {
            alpha: Some(a),
            ..Params::default()
        };
        rows.push(vec![a, solve(problem, inst, &params)?.objective]);
    }
    Ok(Table {
        header: vec!["param".into(), "objective".into()],
        rows,
    })
}

/// One entry of an assignment pattern: fixed, or the swept coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slot {
    Fixed(f64),
    Swept,
}

/// Parses a pattern such as `1,_,0`.
pub fn parse_pattern(s: &str) -> Result<Vec<Slot>> {
    s.split(',')
        .map(|p| match p.trim() {
            "_" => Ok(Slot::Swept),
            v => v
                .parse::<f64>()
                .map(Slot::Fixed)
                .map_err(|_| Error::Validation(format!("bad pattern entry '{v}' in '{s}'"))),
        })
        .collect()
}

/// Objective along one coordinate for several two-queue patterns at a fixed
/// split; each pattern gives one column.
pub fn sweep_coordinate(inst: &Instance, alpha: f64, patterns: &[Vec<Slot>], range: &Range) -> Result<Table> {
    if patterns.is_empty() {
        return invalid("at least one pattern is needed");
    }
    for p in patterns {
        if p.len() != inst.len() {
            return invalid(format!("pattern has {} entries, instance has {} types", p.len(), inst.len()));
        }
    }
    let mut rows = Vec::new();
    for v in range.points() {
        let mut row = vec![v];
        for p in patterns {
            let x: Vec<f64> = p
                .iter()
                .map(|s| match s {
                    Slot::Fixed(f) => *f,
                    Slot::Swept => v,
                })
                .collect();
            row.push(evaluate_two_queue(inst, &x, alpha)?);
        }
        rows.push(row);
    }
    let mut header = vec!["param".to_string(), "objective".to_string()];
    header.extend((2..=patterns.len()).map(|i| format!("objective{i}")));
    Ok(Table { header, rows })
}

/// Split value `f((1, 0), 1 - t)`, pooled value and their ratio for the
/// two-type family of [`prop1_instance`].
pub fn prop1_point(t: f64) -> Result<[f64; 3]> {
    let inst = prop1_instance(t)?;
    let split = evaluate_two_queue(&inst, &[1.0, 0.0], 1.0 - t)?;
    let pooled = evaluate_two_queue(&inst, &[0.0, 0.0], 0.0)?;
    Ok([split, pooled, split / pooled])
}

pub fn sweep_prop1(range: &Range) -> Result<Table> {
    let rows = range
        .points()
        .into_iter()
        .map(|t| prop1_point(t).map(|v| vec![t, v[0], v[1], v[2]]))
        .collect::<Result<_>>()?;
    Ok(Table {
        header: ["param", "objective", "objective2", "objective3"].map(String::from).to_vec(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        let r: Range = "0:1:5".parse().unwrap();
        assert_eq!(r.points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let r: Range = "0.3:0.9:1".parse().unwrap();
        assert_eq!(r.points(), vec![0.3]);
        assert!("0:1:0".parse::<Range>().is_err());
        assert!("0:1".parse::<Range>().is_err());
        assert!("a:1:2".parse::<Range>().is_err());
    }

    #[test]
    fn patterns() {
        assert_eq!(
            parse_pattern("1,_,0").unwrap(),
            vec![Slot::Fixed(1.0), Slot::Swept, Slot::Fixed(0.0)]
        );
        assert!(parse_pattern("1,x").is_err());
    }

    #[test]
    fn prop1_values() {
        let [split, pooled, ratio] = prop1_point(0.25).unwrap();
        assert!((split - 0.136667).abs() < 1e-4);
        assert!((pooled - 0.340758).abs() < 1e-5);
        assert!((ratio - 0.401).abs() < 1e-3);
    }

    #[test]
    fn coordinate_sweep_shape() {
        let inst = Instance::from_rates(&[0.4, 8.0, 0.2], &[16.0, 12.0, 10.0]).unwrap();
        let patterns: Vec<Vec<Slot>> = ["0,_,1", "1,_,0", "1,_,1"]
            .iter()
            .map(|p| parse_pattern(p).unwrap())
            .collect();
        let t = sweep_coordinate(&inst, 0.8, &patterns, &Range::new(0.83, 0.89, 7).unwrap()).unwrap();
        assert_eq!(t.header, vec!["param", "objective", "objective2", "objective3"]);
        assert_eq!(t.rows.len(), 7);
        assert!(t.rows.iter().all(|r| r.len() == 4));
    }
}

//! Small convex minimizers over intervals, boxes and the unit simplex.
//!
//! Objectives may return `f64::INFINITY` outside their domain. The domain is
//! assumed to be convex, so the finite region of any line is an interval. The
//! scalar search first locates a finite point, then bisects from each infinite
//! end towards it before running golden-section search on what remains.

use crate::error::{invalid, Result};

/// Absolute argument tolerance used by the structured solvers.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Depth of the dyadic grid scanned for a finite starting point.
const SEED_DEPTH: u32 = 10;
/// Bisection steps used to pull an infinite interval end onto the finite region.
const BOUNDARY_BISECTIONS: u32 = 32;
const MAX_GOLDEN_ITERS: usize = 500;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMin {
    pub arg: f64,
    /// `INFINITY` when no finite point was found.
    pub value: f64,
}

impl ScalarMin {
    pub fn is_feasible(&self) -> bool {
        self.value.is_finite()
    }
}

/// A one-dimensional problem on a closed interval.
pub struct ScalarProblem<F> {
    pub objective: F,
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
}

impl<F: Fn(f64) -> f64> ScalarProblem<F> {
    pub fn new(objective: F, lo: f64, hi: f64) -> Self {
        ScalarProblem {
            objective,
            lo,
            hi,
            tol: DEFAULT_TOL,
        }
    }

    pub fn solve(&self) -> Result<ScalarMin> {
        minimize_scalar(&self.objective, self.lo, self.hi, self.tol)
    }
}

/// Keeps the best evaluated point; earlier points win ties.
struct Tracker<'a, F> {
    f: &'a F,
    best: ScalarMin,
}

impl<'a, F: Fn(f64) -> f64> Tracker<'a, F> {
    fn new(f: &'a F) -> Self {
        Tracker {
            f,
            best: ScalarMin {
                arg: f64::NAN,
                value: f64::INFINITY,
            },
        }
    }

    fn eval(&mut self, z: f64) -> f64 {
        let v = (self.f)(z);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v < self.best.value || self.best.arg.is_nan() {
            self.best = ScalarMin { arg: z, value: v };
        }
        v
    }
}

/// Golden-section minimization of a convex (or quasi-convex) function on `[lo, hi]`.
pub fn minimize_scalar<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<ScalarMin> {
    minimize_scalar_hinted(&f, lo, hi, tol, None)
}

/// As [`minimize_scalar`], trying `hint` first when looking for a finite point.
pub fn minimize_scalar_hinted<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    tol: f64,
    hint: Option<f64>,
) -> Result<ScalarMin> {
    if !(tol > 0.0 && tol.is_finite()) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return invalid(format!("invalid interval [{lo}, {hi}]"));
    }
    let mut t = Tracker::new(f);
    if lo == hi {
        t.eval(lo);
        return Ok(t.best);
    }

    let f_lo = t.eval(lo);
    let f_hi = t.eval(hi);
    let seed = find_seed(&mut t, lo, hi, hint);
    let Some(seed) = seed else {
        return Ok(t.best);
    };

    let a = if f_lo.is_finite() {
        lo
    } else {
        pull_boundary(&mut t, lo, seed)
    };
    let b = if f_hi.is_finite() {
        hi
    } else {
        pull_boundary(&mut t, hi, seed)
    };
    golden(&mut t, a, b, tol);
    Ok(t.best)
}

fn find_seed<F: Fn(f64) -> f64>(
    t: &mut Tracker<'_, F>,
    lo: f64,
    hi: f64,
    hint: Option<f64>,
) -> Option<f64> {
    if let Some(h) = hint.filter(|h| (lo..=hi).contains(h)) {
        if t.eval(h).is_finite() {
            return Some(h);
        }
    }
    let width = hi - lo;
    for depth in 1..=SEED_DEPTH {
        let denom = (1u64 << depth) as f64;
        for m in (1..(1u64 << depth)).step_by(2) {
            let z = lo + width * (m as f64) / denom;
            if t.eval(z).is_finite() {
                return Some(z);
            }
        }
    }
    // an interval end may be the only finite point
    if t.best.value.is_finite() {
        return Some(t.best.arg);
    }
    None
}

/// Bisects between an infinite end and a finite point; returns the finite
/// point closest to the end.
fn pull_boundary<F: Fn(f64) -> f64>(t: &mut Tracker<'_, F>, end: f64, finite: f64) -> f64 {
    let mut outside = end;
    let mut inside = finite;
    for _ in 0..BOUNDARY_BISECTIONS {
        let mid = 0.5 * (outside + inside);
        if t.eval(mid).is_finite() {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

fn golden<F: Fn(f64) -> f64>(t: &mut Tracker<'_, F>, mut a: f64, mut b: f64, tol: f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = t.eval(c);
    let mut fd = t.eval(d);
    for _ in 0..MAX_GOLDEN_ITERS {
        if b - a <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = t.eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = t.eval(d);
        }
    }
    t.eval(0.5 * (a + b));
}

/// Budget for the coordinate-descent minimizers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentOptions {
    /// Argument tolerance of each line search.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Stop once a full sweep improves the objective by less than this fraction.
    pub rel_improvement: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        DescentOptions {
            tol: DEFAULT_TOL,
            max_sweeps: 200,
            rel_improvement: 1e-10,
        }
    }
}

impl DescentOptions {
    pub fn with_tol(tol: f64) -> Self {
        DescentOptions {
            tol,
            ..Default::default()
        }
    }

    fn converged(&self, before: f64, after: f64) -> bool {
        if !before.is_finite() {
            return !after.is_finite();
        }
        before - after <= self.rel_improvement * after.abs().max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorMin {
    pub point: Vec<f64>,
    /// `INFINITY` when no finite point was found.
    pub value: f64,
    pub sweeps: usize,
}

impl VectorMin {
    pub fn is_feasible(&self) -> bool {
        self.value.is_finite()
    }
}

/// Cyclic coordinate descent over a box; each coordinate is a golden-section search.
pub fn minimize_box_convex<F: Fn(&[f64]) -> f64>(
    f: F,
    bounds: &[(f64, f64)],
    opts: DescentOptions,
) -> Result<VectorMin> {
    if bounds.is_empty() {
        return invalid("box has no dimensions");
    }
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return invalid(format!("invalid bounds [{lo}, {hi}] for coordinate {i}"));
        }
    }
    let eval = |p: &[f64]| {
        let v = f(p);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let (mut point, mut value) = box_start(&eval, bounds);
    if !value.is_finite() {
        return Ok(VectorMin {
            point,
            value,
            sweeps: 0,
        });
    }

    let mut sweeps = 0;
    while sweeps < opts.max_sweeps {
        sweeps += 1;
        let before = value;
        for i in 0..bounds.len() {
            let (lo, hi) = bounds[i];
            let line = |z: f64| {
                let mut trial = point.clone();
                trial[i] = z;
                eval(&trial)
            };
            let res = minimize_scalar_hinted(&line, lo, hi, opts.tol, Some(point[i]))?;
            if res.value < value {
                point[i] = res.arg;
                value = res.value;
            }
        }
        if opts.converged(before, value) {
            break;
        }
    }
    Ok(VectorMin {
        point,
        value,
        sweeps,
    })
}

fn box_start<F: Fn(&[f64]) -> f64>(f: &F, bounds: &[(f64, f64)]) -> (Vec<f64>, f64) {
    let center: Vec<f64> = bounds.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect();
    let fc = f(&center);
    if fc.is_finite() {
        return (center, fc);
    }
    let dim = bounds.len() as u32;
    for res in [2usize, 4, 8, 16] {
        if (res + 1).pow(dim) > 100_000 {
            break;
        }
        let mut best: Option<(Vec<f64>, f64)> = None;
        for_each_lattice_point(bounds, res, |p| {
            let v = f(p);
            if v.is_finite() && best.as_ref().is_none_or(|(_, bv)| v < *bv) {
                best = Some((p.to_vec(), v));
            }
        });
        if let Some(found) = best {
            return found;
        }
    }
    (center, f64::INFINITY)
}

fn for_each_lattice_point(bounds: &[(f64, f64)], res: usize, mut visit: impl FnMut(&[f64])) {
    let dim = bounds.len();
    let mut idx = vec![0usize; dim];
    let mut p = vec![0.0; dim];
    loop {
        for d in 0..dim {
            let (lo, hi) = bounds[d];
            p[d] = lo + (hi - lo) * idx[d] as f64 / res as f64;
        }
        visit(&p);
        let mut d = 0;
        loop {
            if d == dim {
                return;
            }
            idx[d] += 1;
            if idx[d] <= res {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Minimizes over the unit simplex in `k` dimensions.
///
/// `k = 2` is a single golden-section search over the first share. For larger
/// `k` the search moves mass between pairs of coordinates, one line search per
/// pair and sweep, starting from the best finite point of a coarse lattice.
pub fn minimize_simplex_convex<F: Fn(&[f64]) -> f64>(
    f: F,
    k: usize,
    opts: DescentOptions,
) -> Result<VectorMin> {
    if k < 1 {
        return invalid("simplex dimension must be at least 1");
    }
    if k == 1 {
        let point = vec![1.0];
        let value = f(&point);
        return Ok(VectorMin {
            point,
            value: if value.is_nan() { f64::INFINITY } else { value },
            sweeps: 0,
        });
    }
    if k == 2 {
        let res = minimize_scalar(|a| f(&[a, 1.0 - a]), 0.0, 1.0, opts.tol)?;
        return Ok(VectorMin {
            point: vec![res.arg, 1.0 - res.arg],
            value: res.value,
            sweeps: 1,
        });
    }
    let start = simplex_start(&f, k);
    minimize_simplex_from(f, start, opts)
}

/// Pairwise-exchange descent on the simplex from a given starting point.
pub fn minimize_simplex_from<F: Fn(&[f64]) -> f64>(
    f: F,
    start: Vec<f64>,
    opts: DescentOptions,
) -> Result<VectorMin> {
    let k = start.len();
    if k < 1 {
        return invalid("simplex dimension must be at least 1");
    }
    let sum: f64 = start.iter().sum();
    if start.iter().any(|&v| v < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return invalid("starting point is not on the unit simplex");
    }
    let eval = |p: &[f64]| {
        let v = f(p);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut point = start;
    let mut value = eval(&point);
    if !value.is_finite() {
        return Ok(VectorMin {
            point,
            value,
            sweeps: 0,
        });
    }

    let mut sweeps = 0;
    while sweeps < opts.max_sweeps {
        sweeps += 1;
        let before = value;
        for a in 0..k {
            for b in a + 1..k {
                let pair = point[a] + point[b];
                if pair <= 0.0 {
                    continue;
                }
                // share of the pair held by coordinate a
                let line = |s: f64| {
                    let mut p = point.clone();
                    p[a] = s;
                    p[b] = pair - s;
                    eval(&p)
                };
                let res = minimize_scalar_hinted(&line, 0.0, pair, opts.tol, Some(point[a]))?;
                if res.value < value {
                    point[a] = res.arg;
                    point[b] = pair - res.arg;
                    value = res.value;
                }
            }
        }
        if opts.converged(before, value) {
            break;
        }
    }
    Ok(VectorMin {
        point,
        value,
        sweeps,
    })
}

fn simplex_start<F: Fn(&[f64]) -> f64>(f: &F, k: usize) -> Vec<f64> {
    let uniform = vec![1.0 / k as f64; k];
    if f(&uniform).is_finite() {
        return uniform;
    }
    for res in [2usize, 4, 8, 16, 32, 64] {
        let mut best: Option<(Vec<f64>, f64)> = None;
        for_each_composition(k, res, |parts| {
            let p: Vec<f64> = parts.iter().map(|&c| c as f64 / res as f64).collect();
            let v = f(&p);
            if v.is_finite() && best.as_ref().is_none_or(|(_, bv)| v < *bv) {
                best = Some((p, v));
            }
        });
        if let Some((p, _)) = best {
            return p;
        }
    }
    uniform
}

/// Visits every way of writing `total` as an ordered sum of `k` nonnegative parts.
pub(crate) fn for_each_composition(k: usize, total: usize, mut visit: impl FnMut(&[usize])) {
    fn rec(parts: &mut Vec<usize>, k: usize, left: usize, visit: &mut dyn FnMut(&[usize])) {
        if parts.len() + 1 == k {
            parts.push(left);
            visit(parts);
            parts.pop();
            return;
        }
        for c in 0..=left {
            parts.push(c);
            rec(parts, k, left - c, visit);
            parts.pop();
        }
    }
    let mut parts = Vec::with_capacity(k);
    rec(&mut parts, k, total, &mut visit);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_vertex() {
        let r = minimize_scalar(|z| (z - 2.0) * (z - 2.0), 0.0, 5.0, 1e-9).unwrap();
        assert!((r.arg - 2.0).abs() < 1e-9);
        assert_eq!(r.value, (r.arg - 2.0) * (r.arg - 2.0));
    }

    #[test]
    fn barrier_with_infinite_ends() {
        let f = |z: f64| {
            if z <= 0.0 || z >= 1.0 {
                f64::INFINITY
            } else {
                1.0 / z + 1.0 / (1.0 - z)
            }
        };
        let r = minimize_scalar(f, 0.0, 1.0, 1e-9).unwrap();
        assert!((r.arg - 0.5).abs() < 1e-8);
    }

    #[test]
    fn quartic_against_grid() {
        let f = |z: f64| z.powi(4) - z;
        // grid oracle at 1e-6 spacing
        let mut best = (0.0, f64::INFINITY);
        for i in 0..=2_000_000 {
            let z = i as f64 * 1e-6;
            if f(z) < best.1 {
                best = (z, f(z));
            }
        }
        let r = minimize_scalar(f, 0.0, 2.0, 1e-9).unwrap();
        assert!((r.arg - best.0).abs() < 1e-6);
        assert!((r.arg - 0.25f64.powf(1.0 / 3.0)).abs() < 1e-6);
    }

    #[test]
    fn narrow_finite_window() {
        let f = |z: f64| {
            if (0.7..0.7001).contains(&z) {
                (z - 0.70004).powi(2)
            } else {
                f64::INFINITY
            }
        };
        let r = minimize_scalar(f, 0.7, 1.0, 1e-12).unwrap();
        assert!(r.is_feasible());
        assert!((r.arg - 0.70004).abs() < 1e-9);
    }

    #[test]
    fn all_infinite_is_infeasible() {
        let r = minimize_scalar(|_| f64::INFINITY, 0.0, 1.0, 1e-9).unwrap();
        assert!(!r.is_feasible());
    }

    #[test]
    fn bad_tolerance() {
        assert!(minimize_scalar(|z| z, 0.0, 1.0, 0.0).is_err());
        assert!(minimize_scalar(|z| z, 1.0, 0.0, 1e-9).is_err());
    }

    #[test]
    fn endpoint_minimum_is_exact() {
        let r = minimize_scalar(|z| 1.0 / z, 0.2, 1.0, 1e-9).unwrap();
        assert_eq!(r.arg, 1.0);
    }

    #[test]
    fn box_one_dim_matches_scalar() {
        let g = |z: f64| (z - 0.37).powi(2) + 0.1;
        let s = minimize_scalar(g, 0.0, 1.0, 1e-9).unwrap();
        let b = minimize_box_convex(|p| g(p[0]), &[(0.0, 1.0)], DescentOptions::default()).unwrap();
        assert!((b.point[0] - s.arg).abs() < 1e-9);
        assert!((b.value - s.value).abs() < 1e-15);
    }

    #[test]
    fn box_two_dim_against_grid() {
        let f = |p: &[f64]| (p[0] - 0.3).powi(2) + (p[1] - 0.7).powi(2) + p[0] * p[1];
        let mut best = ([0.0, 0.0], f64::INFINITY);
        for i in 0..=1000 {
            for j in 0..=1000 {
                let p = [i as f64 * 1e-3, j as f64 * 1e-3];
                if f(&p) < best.1 {
                    best = (p, f(&p));
                }
            }
        }
        let r = minimize_box_convex(f, &[(0.0, 1.0), (0.0, 1.0)], DescentOptions::default()).unwrap();
        assert!((r.point[0] - best.0[0]).abs() < 1e-3);
        assert!((r.point[1] - best.0[1]).abs() < 1e-3);
        assert!(r.value <= best.1 + 1e-12);
    }

    #[test]
    fn box_flat_objective() {
        let r = minimize_box_convex(|_| 5.0, &[(0.0, 1.0), (-1.0, 1.0)], DescentOptions::default()).unwrap();
        assert_eq!(r.value, 5.0);
        assert!(minimize_box_convex(|_| 5.0, &[], DescentOptions::default()).is_err());
    }

    #[test]
    fn simplex_symmetric_center() {
        let f = |p: &[f64]| p.iter().map(|v| (v - 1.0 / 3.0).powi(2)).sum::<f64>();
        let r = minimize_simplex_convex(f, 3, DescentOptions::default()).unwrap();
        for v in &r.point {
            assert!((v - 1.0 / 3.0).abs() < 1e-6);
        }
        assert!(minimize_simplex_convex(f, 0, DescentOptions::default()).is_err());
    }

    #[test]
    fn simplex_starts_from_infeasible_center() {
        // finite only when the first share exceeds 0.9
        let f = |p: &[f64]| {
            if p[0] > 0.9 {
                1.0 / (p[0] - 0.9) + p[1] * p[1] + (p[2] - 0.05).powi(2)
            } else {
                f64::INFINITY
            }
        };
        let r = minimize_simplex_convex(f, 3, DescentOptions::default()).unwrap();
        assert!(r.is_feasible());
        assert!(r.point[0] > 0.9);
    }

    #[test]
    fn deterministic_outputs() {
        let f = |p: &[f64]| (p[0] - 0.2).powi(2) + 3.0 * (p[1] - 0.5).powi(2) + p[0] * p[2];
        let a = minimize_simplex_convex(f, 3, DescentOptions::default()).unwrap();
        let b = minimize_simplex_convex(f, 3, DescentOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn compositions_count() {
        let mut count = 0;
        for_each_composition(3, 4, |p| {
            assert_eq!(p.iter().sum::<usize>(), 4);
            count += 1;
        });
        assert_eq!(count, 15);
    }
}

//! Instance generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::model::Instance;
use crate::solvers::build_setpartition_instance;

/// Random instance with `mu` sorted descending and total load
/// `max_load * U(0.5, 1)`. Service rates are log-uniform on
/// `[10^-0.5, 10^1.7]`; arrival rates are uniform and then rescaled.
pub fn random_instance(n: usize, max_load: f64, seed: u64) -> Result<Instance> {
    if n == 0 {
        return invalid("number of types must be at least 1");
    }
    if !(max_load > 0.0 && max_load < 1.0) {
        return invalid(format!("max load must lie in (0, 1), got {max_load}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = max_load * rng.random_range(0.5..=1.0);
    let mut mus: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.random_range(-0.5..1.7))).collect();
    mus.sort_by(|a, b| b.total_cmp(a));
    let lambdas: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let raw: f64 = lambdas.iter().zip(&mus).map(|(l, m)| l / m).sum();
    let lambdas: Vec<f64> = lambdas.iter().map(|l| l * target / raw).collect();
    Instance::from_rates(&lambdas, &mus)
}

/// Two-type family `lambda = (t, 1)`, `mu = (1, 1/t^3)` for `0 < t <= 1/4`.
/// Splitting it beats pooling by a factor that vanishes as `t -> 0`.
pub fn prop1_instance(t: f64) -> Result<Instance> {
    if !(t > 0.0 && t <= 0.25) {
        return invalid(format!("t must lie in (0, 1/4], got {t}"));
    }
    Instance::from_rates(&[t, 1.0], &[1.0, t.powi(-3)])
}

/// Set Partition encoding; see [`build_setpartition_instance`].
pub fn setpartition_instance(weights: &[f64]) -> Result<Instance> {
    Ok(build_setpartition_instance(weights)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_is_deterministic_and_bounded() {
        let a = random_instance(5, 0.8, 7).unwrap();
        let b = random_instance(5, 0.8, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.total_load() <= 0.8 + 1e-12);
        assert!(a.total_load() >= 0.4 - 1e-12);
        assert!(a.types().windows(2).all(|w| w[0].mu >= w[1].mu));
        assert_ne!(a, random_instance(5, 0.8, 8).unwrap());
    }

    #[test]
    fn random_validation() {
        assert!(random_instance(0, 0.5, 1).is_err());
        assert!(random_instance(3, 1.0, 1).is_err());
    }

    #[test]
    fn prop1() {
        let inst = prop1_instance(0.25).unwrap();
        assert_eq!(inst.types()[0].lambda, 0.25);
        assert_eq!(inst.types()[1].mu, 64.0);
        assert!(prop1_instance(0.3).is_err());
        assert!(prop1_instance(0.0).is_err());
    }

    #[test]
    fn setpartition() {
        let inst = setpartition_instance(&[1.0, 2.0, 3.0]).unwrap();
        assert!(inst.types().iter().all(|t| t.mu == 12.0));
    }
}

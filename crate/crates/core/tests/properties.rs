use proptest::prelude::*;
use qpartition::model::{
    evaluate_multi_queue, evaluate_two_queue, AssignmentMatrix, CustomerType, Instance,
    PartitionVector,
};
use qpartition::oracle::{grid_search_multi_queue, GridSpec};
use qpartition::problem::{solve, Params, Problem};
use qpartition::solvers::{solve_ksap, solve_sap, solve_spp};

fn instance_strategy(max_n: usize) -> impl Strategy<Value = Instance> {
    prop::collection::vec((0.05f64..1.0, -0.5f64..1.7), 1..=max_n).prop_flat_map(|raw| {
        (Just(raw), 0.1f64..0.95).prop_map(|(raw, load)| {
            let mus: Vec<f64> = raw.iter().map(|(_, e)| 10f64.powf(*e)).collect();
            let scale: f64 = raw.iter().zip(&mus).map(|((l, _), m)| l / m).sum();
            let lambdas: Vec<f64> = raw.iter().map(|(l, _)| l * load / scale).collect();
            Instance::from_rates(&lambdas, &mus).unwrap()
        })
    })
}

/// Waiting time per queue as an M/G/1 queue: arrival rate `L`, service time a
/// mixture of exponentials, delay `L E[S^2] / (2 (1 - rho))`.
fn mg1_reference(inst: &Instance, x: &[Vec<f64>], alphas: &[f64]) -> f64 {
    let total: f64 = inst.types().iter().map(|t| t.lambda).sum();
    let mut out = 0.0;
    for (j, &a) in alphas.iter().enumerate() {
        let rates: Vec<f64> = inst.types().iter().zip(x).map(|(t, row)| t.lambda * row[j]).collect();
        let l: f64 = rates.iter().sum();
        if l == 0.0 {
            continue;
        }
        let mut es = 0.0;
        let mut es2 = 0.0;
        for (t, r) in inst.types().iter().zip(&rates) {
            let rate = a * t.mu;
            es += r / l / rate;
            es2 += r / l * 2.0 / (rate * rate);
        }
        let rho = l * es;
        if rho >= 1.0 {
            return f64::INFINITY;
        }
        out += l / total * (l * es2 / (2.0 * (1.0 - rho)));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn multi_queue_matches_mg1(inst in instance_strategy(4), seed in 0u64..1000) {
        let n = inst.len();
        let mut v = seed as f64 * 0.6180339887;
        let mut next = || { v = (v + 0.6180339887).fract(); v };
        let rows: Vec<Vec<f64>> = (0..n).map(|_| {
            let (a, b) = (next(), next());
            let (lo, hi) = (a.min(b), a.max(b));
            vec![lo, hi - lo, 1.0 - hi]
        }).collect();
        let (a, b) = (next(), next());
        let alphas = vec![a.min(b), a.max(b) - a.min(b), 1.0 - a.max(b)];
        let x = AssignmentMatrix::new(rows.clone()).unwrap();
        let p = PartitionVector::new(alphas.clone()).unwrap();
        let f = evaluate_multi_queue(&inst, &x, &p).unwrap();
        let g = mg1_reference(&inst, &rows, &alphas);
        if f.is_finite() {
            prop_assert!((f - g).abs() <= 1e-9 * g.max(1e-12), "{} vs {}", f, g);
        }
    }

    #[test]
    fn two_and_multi_queue_agree(inst in instance_strategy(5), alpha in 0.0f64..=1.0, xs in prop::collection::vec(0.0f64..=1.0, 5)) {
        let x = &xs[..inst.len()];
        let f = evaluate_two_queue(&inst, x, alpha).unwrap();
        let m = evaluate_multi_queue(
            &inst,
            &AssignmentMatrix::two_queue(x).unwrap(),
            &PartitionVector::two_queue(alpha).unwrap(),
        ).unwrap();
        if f.is_finite() {
            prop_assert!((f - m).abs() <= 1e-12 * f);
        } else {
            prop_assert!(m.is_infinite());
        }
    }

    #[test]
    fn positive_when_finite(inst in instance_strategy(5), alpha in 0.0f64..=1.0, xs in prop::collection::vec(0.0f64..=1.0, 5)) {
        let f = evaluate_two_queue(&inst, &xs[..inst.len()], alpha).unwrap();
        prop_assert!(f.is_infinite() || f > 0.0);
    }

    #[test]
    fn merging_equal_mu_keeps_the_objective(l1 in 0.01f64..0.2, l2 in 0.01f64..0.2, l3 in 0.01f64..0.2,
                                            w in 0.0f64..=1.0, alpha in 0.2f64..0.8) {
        let inst = Instance::from_rates(&[l1, l2, l3], &[3.0, 3.0, 1.5]).unwrap();
        let merged = inst.normalize();
        prop_assert_eq!(merged.instance.len(), 2);
        // both equal-mu types routed with the same probability
        let f = evaluate_two_queue(&inst, &[w, w, 0.5], alpha).unwrap();
        let g = evaluate_two_queue(&merged.instance, &[w, 0.5], alpha).unwrap();
        if f.is_finite() {
            prop_assert!((f - g).abs() <= 1e-12 * f);
        }
    }

    #[test]
    fn sap_is_never_beaten_by_its_own_candidates(inst in instance_strategy(5), alpha in 0.05f64..0.95) {
        let inst = inst.normalize().instance;
        let res = solve_sap(&inst, alpha).unwrap();
        // every deterministic vector is a feasible SAP candidate
        let n = inst.len();
        for mask in 0..1u32 << n {
            let x: Vec<f64> = (0..n).map(|i| ((mask >> i) & 1) as f64).collect();
            let v = evaluate_two_queue(&inst, &x, alpha).unwrap();
            prop_assert!(res.objective <= v * (1.0 + 1e-12));
        }
    }

    #[test]
    fn spp_beats_every_sap_split(inst in instance_strategy(4), alpha in 0.05f64..0.95) {
        let inst = inst.normalize().instance;
        let spp = solve_spp(&inst).unwrap();
        let sap = solve_sap(&inst, alpha).unwrap();
        prop_assert!(spp.objective <= sap.objective * (1.0 + 1e-9));
    }

    #[test]
    fn solve_reports_original_rows(lambdas in prop::collection::vec(0.01f64..0.1, 2..5), alpha in 0.3f64..0.7) {
        let mus: Vec<f64> = (0..lambdas.len()).map(|i| [2.0, 5.0, 2.0, 9.0][i]).collect();
        let inst = Instance::new(lambdas.iter().zip(&mus).map(|(&l, &m)| CustomerType::new(l, m)).collect()).unwrap();
        let params = Params { alpha: Some(alpha), ..Params::default() };
        let res = solve(Problem::Sap, &inst, &params).unwrap();
        prop_assert_eq!(res.assignment.rows(), inst.len());
        let direct = evaluate_two_queue(&inst, &res.assignment.column(0), alpha).unwrap();
        prop_assert!((direct - res.objective).abs() <= 1e-10 * res.objective);
    }
}

#[test]
fn ksap_dominates_the_multi_queue_grid() {
    let grid = GridSpec {
        coarse_step: 0.05,
        ..GridSpec::default()
    };
    let cases = [
        (vec![0.05, 0.2, 0.1], vec![20.0, 6.0, 1.5], vec![0.5, 0.3, 0.2]),
        (vec![0.4, 8.0, 0.2], vec![16.0, 12.0, 10.0], vec![0.6, 0.2, 0.2]),
        (vec![0.3, 0.3], vec![4.0, 1.0], vec![0.4, 0.35, 0.25]),
    ];
    for (l, m, a) in cases {
        let inst = Instance::from_rates(&l, &m).unwrap().normalize().instance;
        let alphas = PartitionVector::new(a).unwrap();
        let solved = solve_ksap(&inst, &alphas).unwrap();
        let oracle = grid_search_multi_queue(&inst, 3, Some(&alphas), &grid).unwrap();
        assert!(
            solved.objective <= oracle.objective + 1e-9,
            "ksap {} vs grid {}",
            solved.objective,
            oracle.objective
        );
        assert!(solved.objective >= oracle.objective - 2e-2 * oracle.objective);
    }
}

#[test]
fn solver_results_reevaluate_exactly() {
    let inst = Instance::from_rates(&[0.4, 8.0, 0.2], &[16.0, 12.0, 10.0]).unwrap();
    for problem in Problem::ALL {
        let params = Params {
            alpha: Some(0.8),
            alphas: Some(PartitionVector::new(vec![0.7, 0.2, 0.1]).unwrap()),
            k: Some(3),
            merge: true,
        };
        let res = solve(problem, &inst, &params).unwrap();
        if !res.is_optimal() {
            continue;
        }
        let again = evaluate_multi_queue(&inst, &res.assignment, &res.partition).unwrap();
        assert!(
            (again - res.objective).abs() <= 1e-10 * res.objective,
            "{problem}: {again} vs {}",
            res.objective
        );
    }
}

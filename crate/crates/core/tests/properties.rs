use proptest::prelude::*;

use fairstrat::cost::{best_response_linear, L2BudgetCost, ScaledSeparableCost};
use fairstrat::domain::{Agent, Dataset, ExtReal, LinearClassifier, RandomizedClassifier};
use fairstrat::eval::{randomized_errors, strategic_errors};
use fairstrat::separable::{build_threshold_grid, solve_objective_1, solve_objective_2, SeparableConfig};
use fairstrat::GroupId;

fn planar_dataset() -> impl Strategy<Value = Dataset> {
    prop::collection::vec(((-3.0f64..3.0, -3.0f64..3.0), 0usize..2, any::<bool>()), 4..30)
        .prop_filter_map("both groups present", |rows| {
            let agents = rows.into_iter().map(|((u, v), g, y)| Agent::new(vec![u, v], g, y)).collect();
            Dataset::new(agents, 2).ok().filter(|d| d.group_counts().iter().all(|&c| c > 0))
        })
}

fn line_dataset() -> impl Strategy<Value = Dataset> {
    prop::collection::vec((0u8..10, 0usize..2, any::<bool>()), 2..10).prop_filter_map("both groups present", |rows| {
        let agents = rows.into_iter().map(|(x, g, y)| Agent::new(vec![x as f64], g, y)).collect();
        Dataset::new(agents, 2).ok().filter(|d| d.group_counts().iter().all(|&c| c > 0))
    })
}

fn classifier() -> impl Strategy<Value = LinearClassifier> {
    (0.0f64..std::f64::consts::TAU, -2.0f64..2.0)
        .prop_map(|(a, b)| LinearClassifier::new(vec![a.cos(), a.sin()], b).unwrap())
}

proptest! {
    #[test]
    fn report_overall_is_group_weighted(data in planar_dataset(), h in classifier(), t0 in 0.0f64..2.0, t1 in 0.0f64..2.0) {
        let r = strategic_errors(&h, &data, &L2BudgetCost::new(vec![t0, t1]).unwrap()).unwrap();
        let n = data.len() as f64;
        let weighted: f64 = r.per_group.iter().zip(data.group_counts()).map(|(e, &c)| e * c as f64 / n).sum();
        prop_assert!((r.overall - weighted).abs() < 1e-9);
        prop_assert_eq!(r.max_group, r.per_group.iter().copied().fold(0.0, f64::max));
    }

    #[test]
    fn mixtures_mix_reports(data in planar_dataset(), h0 in classifier(), h1 in classifier(), a in 0.0f64..=1.0) {
        let cost = L2BudgetCost::new(vec![0.5, 1.0]).unwrap();
        let p = RandomizedClassifier::new(vec![h0.clone(), h1.clone()], vec![a, 1.0 - a]).unwrap();
        let mixed = randomized_errors(&p, &data, &cost).unwrap();
        let (r0, r1) = (strategic_errors(&h0, &data, &cost).unwrap(), strategic_errors(&h1, &data, &cost).unwrap());
        for g in 0..2 {
            prop_assert!((mixed.per_group[g] - (a * r0.per_group[g] + (1.0 - a) * r1.per_group[g])).abs() < 1e-9);
        }
        prop_assert!((mixed.overall - (a * r0.overall + (1.0 - a) * r1.overall)).abs() < 1e-9);
    }

    #[test]
    fn l2_moves_are_zero_or_full_budget(x in prop::collection::vec(-3.0f64..3.0, 2), h in classifier(), tau in 0.0f64..2.0) {
        let cost = L2BudgetCost::new(vec![tau]).unwrap();
        let (z, _) = best_response_linear(&x, GroupId(0), &h, &cost).unwrap();
        let d = x.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        prop_assert!(d == 0.0 || (d - tau).abs() < 1e-9, "moved {d} with budget {tau}");
    }

    #[test]
    fn zero_budgets_give_plain_error(data in planar_dataset(), h in classifier()) {
        let r = strategic_errors(&h, &data, &L2BudgetCost::new(vec![0.0, 0.0]).unwrap()).unwrap();
        let wrong = data.agents().iter().filter(|a| h.classify(&a.x).unwrap() != a.label).count();
        prop_assert_eq!(r.overall, wrong as f64 / data.len() as f64);
    }

    #[test]
    fn grid_solver_is_never_beaten(data in line_dataset(), k0 in 0.5f64..3.0, k1 in 0.5f64..3.0,
                                   ts in prop::collection::vec((-1.0f64..40.0, -1.0f64..40.0), 200)) {
        let cost = ScaledSeparableCost::identity(vec![k0, k1]).unwrap();
        let sol = solve_objective_1(&data, &cost, &SeparableConfig::default()).unwrap();
        let grid = build_threshold_grid(&data, &cost).unwrap();
        for (a, b) in ts {
            let t = [ExtReal::Finite(a), ExtReal::Finite(b)];
            let counts = grid.error_counts(&data, &t);
            prop_assert_eq!(&counts, &grid.error_counts(&data, &grid.canonicalize(&[a, b])));
            let worst = counts.iter().zip(data.group_counts()).map(|(&e, &c)| e as f64 / c as f64).fold(0.0, f64::max);
            prop_assert!(worst >= sol.minmax_value);
        }
    }

    #[test]
    fn objective_two_respects_its_ceiling(data in line_dataset(), gamma in 0.0f64..0.3, eps in 0.0f64..0.3) {
        let cost = ScaledSeparableCost::identity(vec![1.0, 2.0]).unwrap();
        let base = solve_objective_1(&data, &cost, &SeparableConfig::default()).unwrap();
        let sol = solve_objective_2(&data, &cost, gamma, eps, &SeparableConfig::default()).unwrap();
        prop_assert!(sol.report.max_group <= base.minmax_value + gamma + eps);
        prop_assert!(sol.report.overall <= base.report.overall);
    }
}

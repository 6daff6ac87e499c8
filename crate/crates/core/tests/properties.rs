//! Property tests for the structural invariants that hold for arbitrary
//! inputs, not just the bundled seeds.

use proptest::prelude::*;

use kfl_core::calculus::maximal;
use kfl_core::rearrange::{
    decreasing_rearrangement, double_star, hardy_check, holmstedt_k, measure_above, StepFunction,
};
use kfl_core::space::{build_grid, MeasureMode, PointField};
use kfl_core::weights::{rh_constant, Weight};

fn field_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0_f64..10.0, n)
}

fn step_strategy() -> impl Strategy<Value = StepFunction> {
    (
        prop::collection::vec(0.01_f64..2.0, 1..8),
        prop::collection::vec(0.0_f64..5.0, 8),
    )
        .prop_map(|(widths, values)| {
            let mut breaks = vec![0.0];
            for w in &widths {
                breaks.push(breaks.last().unwrap() + w);
            }
            let values = values[..widths.len()].to_vec();
            StepFunction::from_pieces(breaks, values).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rearrangement_preserves_l1_mass(values in field_strategy(12)) {
        let s = build_grid(1, &[(0.0, 11.0)], 1.0, MeasureMode::Counting).unwrap();
        let f = PointField::new(values);
        let sf = decreasing_rearrangement(&s, &f);
        let l1: f64 = f.values().iter().map(|v| v.abs()).sum();
        prop_assert!((sf.total_integral() - l1).abs() <= 1e-12 * l1.max(1.0));
        prop_assert!(sf.is_nonincreasing());
    }

    #[test]
    fn distribution_bound_holds(values in field_strategy(10), t in 0.1_f64..15.0) {
        let s = build_grid(1, &[(0.0, 9.0)], 1.0, MeasureMode::Counting).unwrap();
        let f = PointField::new(values);
        let sf = decreasing_rearrangement(&s, &f);
        prop_assert!(measure_above(&s, &f, sf.eval(t)) <= t + 1e-12);
    }

    #[test]
    fn double_star_dominates_star(values in field_strategy(10), t in 0.05_f64..12.0) {
        let s = build_grid(1, &[(0.0, 9.0)], 1.0, MeasureMode::Counting).unwrap();
        let sf = decreasing_rearrangement(&s, &PointField::new(values));
        prop_assert!(double_star(&sf, t).unwrap() >= sf.eval(t) - 1e-12);
    }

    #[test]
    fn hardy_inequality_on_arbitrary_steps(g in step_strategy(), l in 0.05_f64..=1.0) {
        let rep = hardy_check(&g, l).unwrap();
        prop_assert!(rep.pass, "lhs={} rhs={}", rep.lhs, rep.rhs);
    }

    #[test]
    fn holmstedt_scales_linearly(g in step_strategy(), t in 0.01_f64..100.0, lam in 0.1_f64..50.0) {
        let a = holmstedt_k(&g.scale(lam), 1.0, 2.0, t).unwrap();
        let b = lam * holmstedt_k(&g, 1.0, 2.0, t).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * b.max(1e-12));
    }

    #[test]
    fn maximal_dominates_nonnegative_fields(values in prop::collection::vec(0.0_f64..8.0, 9)) {
        let s = build_grid(2, &[(0.0, 2.0), (0.0, 2.0)], 1.0, MeasureMode::Counting).unwrap();
        let f = PointField::new(values);
        let mf = maximal(&s, &f, None);
        for i in 0..s.len() {
            prop_assert!(mf[i] >= f[i]);
        }
    }

    #[test]
    fn rh_constant_at_least_one_and_scale_invariant(
        values in prop::collection::vec(0.05_f64..5.0, 6),
        lam in 0.1_f64..20.0,
    ) {
        let s = build_grid(1, &[(0.0, 5.0)], 1.0, MeasureMode::Counting).unwrap();
        let w = Weight::new(PointField::new(values)).unwrap();
        let c = rh_constant(&s, &w, 2.0, None).unwrap().constant;
        prop_assert!(c >= 1.0 - 1e-12);
        let c2 = rh_constant(&s, &w.scale(lam).unwrap(), 2.0, None).unwrap().constant;
        prop_assert!((c - c2).abs() <= 1e-11 * c);
    }

    #[test]
    fn ball_membership_monotone(r1 in 0.1_f64..4.0, r2 in 0.1_f64..4.0, center in 0usize..9) {
        let s = build_grid(2, &[(0.0, 2.0), (0.0, 2.0)], 1.0, MeasureMode::Counting).unwrap();
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let small = s.open_ball(center, lo);
        let big = s.open_ball(center, hi);
        prop_assert!(small.iter().all(|x| big.contains(x)));
    }
}

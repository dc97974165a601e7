//! Cost and complexity measures.

mod common;

use cbpmn_core::metrics::{
    execution_time, halstead, halstead_counts, structural_metrics, Baseline, CostParams,
    HalsteadCounts,
};
use proptest::prelude::*;

fn relative(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

fn cost() -> impl Strategy<Value = f64> {
    0.0..1000.0f64
}

proptest! {
    #[test]
    fn time_is_linear_in_the_activity_count(n in 0..10_000u64, k in 1..50u64, c in prop::array::uniform5(cost())) {
        let p = |n| CostParams {
            activities: n,
            activity: c[0],
            fragment: c[1],
            context_model: c[2],
            throw_activity: c[3],
            catch_context: c[4],
        };
        let one = execution_time(&p(n)).unwrap();
        prop_assert!(relative(execution_time(&p(k * n)).unwrap(), k as f64 * one) < 1e-12);
        let per = c.iter().sum::<f64>();
        prop_assert!(relative(one, n as f64 * per) < 1e-12);
    }

    #[test]
    fn contextual_events_add_two_to_cyclomatic_complexity(events in prop::collection::vec(any::<bool>(), 1..60)) {
        let m = common::model(events.len(), &events, &[], &[]);
        let s = structural_metrics(&m, Baseline::of(&m));
        prop_assert_eq!(s.mcc_extra, 2);
        prop_assert_eq!(s.noa_extra, 0);
        prop_assert_eq!(s.noac_extra, 0);
    }

    #[test]
    fn halstead_matches_direct_evaluation(n1 in 1..200u64, n2 in 1..200u64, e1 in 0..500u64, e2 in 0..500u64) {
        let c = HalsteadCounts { unique_flow: n1, unique_data: n2, total_flow: n1 + e1, total_data: n2 + e2 };
        let h = halstead(&c).unwrap();
        let (u1, u2, t1, t2) = (n1 as f64, n2 as f64, (n1 + e1) as f64, (n2 + e2) as f64);
        let length = u1 * u1.ln() / std::f64::consts::LN_2 + u2 * u2.ln() / std::f64::consts::LN_2;
        let volume = (t1 + t2) * (u1 + u2).ln() / std::f64::consts::LN_2;
        let difficulty = u1 * t2 / (2.0 * u2);
        prop_assert!(relative(h.length, length) < 1e-9, "{} vs {}", h.length, length);
        prop_assert!(relative(h.volume, volume) < 1e-9);
        prop_assert!(relative(h.difficulty, difficulty) < 1e-9);
    }

    #[test]
    fn halstead_counts_are_valid(events in prop::collection::vec(any::<bool>(), 1..30)) {
        let m = common::model(events.len(), &events, &[], &[]);
        let c = halstead_counts(&m);
        prop_assert!(halstead(&c).is_ok());
        let k = events.iter().filter(|e| **e).count() as u64;
        let n = events.len() as u64;
        // start, end, tasks, flows, plus one event occurrence each.
        prop_assert_eq!(c.total_flow, 2 + n + (n + 1) + k);
        prop_assert_eq!(c.total_data, n + k);
        prop_assert_eq!(c.unique_flow, 4 + u64::from(k > 0));
        prop_assert_eq!(c.unique_data, n + u64::from(k > 0));
    }
}

#[test]
fn invalid_costs_and_counts_are_rejected() {
    let mut p = CostParams::unit(3);
    p.catch_context = f64::INFINITY;
    assert!(execution_time(&p).is_err());
    let c = HalsteadCounts {
        unique_flow: 2,
        unique_data: 0,
        total_flow: 2,
        total_data: 0,
    };
    assert!(halstead(&c).is_err());
}

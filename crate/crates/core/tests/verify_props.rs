//! Generated nets of chain models reach their goal safely.

mod common;

use cbpmn_core::verify::{explore, is_goal, translate};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn chain_nets_terminate_in_the_goal(events in prop::collection::vec(any::<bool>(), 1..4)) {
        let m = common::model(events.len(), &events, &[], &[]);
        let net = translate(&m).unwrap();
        let space = explore(&net, &net.initial, 100_000).unwrap();
        prop_assert!(!space.partial);
        prop_assert!(space.check_bounded(&net).is_k_bounded(1));
        let live = space.check_liveness(&net).unwrap();
        prop_assert!(live.dead_transitions.is_empty(), "{:?}", live.dead_transitions);
        let (goal, witness) = space.check_reachable(|m| is_goal(&net, m)).unwrap();
        prop_assert_eq!(&live.dead_markings, &vec![goal]);
        prop_assert!(space.check_home(goal).unwrap());

        let mut marking = net.initial.clone();
        prop_assert!(net.well_typed(&marking));
        for a in &witness {
            marking = net.fire(&marking, &space.arcs[*a].binding).unwrap();
            prop_assert!(net.well_typed(&marking));
        }
        prop_assert!(is_goal(&net, &marking));
        prop_assert_eq!(&space, &explore(&net, &net.initial, 100_000).unwrap());
    }
}

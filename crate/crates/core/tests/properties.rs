mod common;

use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn single_agent_invariants(sc in single_scenario()) {
        prop_assume!(sc.is_some());
        let sc = sc.unwrap();
        if let Err(msg) = check_single(&sc) {
            return Err(TestCaseError::fail(format!("{msg}\n{}", sc.to_json())));
        }
    }

    #[test]
    fn two_agent_invariants(sc in corridor_scenario(2)) {
        if let Err(msg) = check_corridor(&sc) {
            return Err(TestCaseError::fail(format!("{msg}\n{}", sc.to_json())));
        }
    }

    #[test]
    fn three_agent_invariants(sc in corridor_scenario(3)) {
        if let Err(msg) = check_corridor(&sc) {
            return Err(TestCaseError::fail(format!("{msg}\n{}", sc.to_json())));
        }
    }

    #[test]
    fn json_round_trip(sc in corridor_scenario(3)) {
        let back = crowd_sweep::scenario::parse_corridor(&sc.to_json()).unwrap();
        prop_assert_eq!(back.len(), 3);
        for i in 0..3 {
            prop_assert!((back.rho[i] - sc.rho[i]).abs() <= 1e-9 * sc.rho[0]);
        }
    }
}

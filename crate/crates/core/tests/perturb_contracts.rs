//! Contracts of the perturbation walk and of test-set assembly.

mod common;

use pdi_core::model::Element;
use pdi_core::perturb::{find_degree, find_perturbation, make_test_set, PerturbationSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn nonzero_vector() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 1..12)
        .prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn walk_stays_below_degree(u in nonzero_vector(), theta in 0.01f64..1.0, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if let Some(v) = find_perturbation(&u, theta, &mut rng).unwrap() {
            prop_assert_eq!(v.len(), u.len());
            prop_assert!(v != u);
            prop_assert!(find_degree(&u, &v).unwrap() < theta);
        }
    }

    #[test]
    fn walk_is_deterministic(u in nonzero_vector(), theta in 0.01f64..1.0, seed: u64) {
        let a = find_perturbation(&u, theta, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let b = find_perturbation(&u, theta, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn degree_of_self_is_zero(u in nonzero_vector(), scale in 0.01f64..100.0) {
        prop_assert_eq!(find_degree(&u, &u).unwrap(), 0.0);
        let su: Vec<f64> = u.iter().map(|x| x * scale).collect();
        // the angle component ignores scaling, the norm component is |1 - scale|
        let d = find_degree(&u, &su).unwrap();
        prop_assert!((d - (1.0 - scale).abs()).abs() <= 1e-9 * (1.0 + scale));
    }

    #[test]
    fn members_change_only_their_element(seed in 0u64..5_000, pick in 0usize..3) {
        let inst = common::small_instance(seed);
        let element = [Element::Matrix, Element::Rhs, Element::Objective][pick];
        let mut spec = PerturbationSpec::new(element, 0.5, 2, seed);
        spec.max_attempts = 30;
        let set = make_test_set(&inst, &spec).unwrap();
        prop_assert_eq!(set.stats.accepted, set.members.len());
        let u = inst.element_values(element);
        for m in &set.members {
            let l = &m.instance;
            prop_assert!(inst.same_family(l));
            let v = l.element_values(element);
            prop_assert!(v != u);
            prop_assert!(find_degree(&u, &v).unwrap() < 0.5);
            prop_assert_eq!(m.degree, find_degree(&u, &v).unwrap());
            for other in [Element::Matrix, Element::Rhs, Element::Objective] {
                if other != element {
                    prop_assert_eq!(inst.element_values(other), l.element_values(other));
                }
            }
        }
        let again = make_test_set(&inst, &spec).unwrap();
        prop_assert_eq!(again.members, set.members);
    }
}

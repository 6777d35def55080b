mod common;

use proptest::prelude::*;

#[test]
fn five_hundred_cycles_match_direct_projection() {
    for seed in 0..500 {
        common::module_equivalence(seed).unwrap();
    }
}

proptest! {
    #[test]
    fn any_seed_matches(seed in any::<u64>()) {
        prop_assert_eq!(common::module_equivalence(seed), Ok(()));
    }
}

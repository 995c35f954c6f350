//! Serialization and evaluation invariants over randomized instances.

use std::collections::BTreeSet;

use proptest::prelude::*;

use mmsfair::corpus::{random_additive, random_subadditive, random_xos};
use mmsfair::{parse_instance, serialize_instance, Instance};

fn arbitrary_instance() -> impl Strategy<Value = Instance> {
    (1usize..=5, 0usize..=10, 0u64..1_000, 0usize..3).prop_map(|(n, m, seed, family)| {
        match family {
            0 => random_additive(n, m, 10, seed).unwrap(),
            1 => random_xos(n, m, 3, 10, seed).unwrap(),
            _ => random_subadditive(n.min(4), m.min(8), seed).unwrap(),
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialization_round_trips(inst in arbitrary_instance()) {
        let text = serialize_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        // canonical text is a fixed point
        prop_assert_eq!(serialize_instance(&back), text);
    }

    #[test]
    fn evaluation_ignores_irrelevant_edges(
        inst in arbitrary_instance(),
        picks in proptest::collection::vec(any::<u8>(), 0..12),
    ) {
        for agent in 1..=inst.n() {
            let incident = inst.graph.incident_edges(agent).unwrap();
            let s: BTreeSet<usize> = picks
                .iter()
                .filter(|_| inst.m() > 0)
                .map(|&p| p as usize % inst.m().max(1))
                .collect();
            let restricted: BTreeSet<usize> = s.intersection(&incident).copied().collect();
            let full = inst.value(agent, &s).unwrap();
            let masked = inst.value(agent, &restricted).unwrap();
            prop_assert_eq!(full, masked);
        }
    }
}

#[test]
fn checked_in_fixture_is_canonical() {
    let text = include_str!("fixtures/k3.json");
    let inst = parse_instance(text).unwrap();
    assert_eq!(serialize_instance(&inst), text);
}

use std::collections::BTreeSet;

use multigap::combs::{enumerate_realizable_maps, CombKind};
use multigap::gaps::{enumerate_candidates_record, GapSpec};
use multigap::{classify_comb, comb_witness, first_move_equivalent, record_equivalent, record_history, Node, NodeSet};
use proptest::prelude::*;

fn node(n: u8, max_len: usize) -> impl Strategy<Value = Node> {
    prop::collection::vec(0..n, 0..=max_len).prop_map(move |l| Node::new(n, l).unwrap())
}

fn alphabet_and_pair() -> impl Strategy<Value = (Node, Node)> {
    (1u8..=4).prop_flat_map(|n| (node(n, 6), node(n, 6)))
}

proptest! {
    #[test]
    fn prec_is_length_then_lexicographic((a, b) in alphabet_and_pair()) {
        let expected = a.len().cmp(&b.len()).then(a.letters().cmp(b.letters()));
        prop_assert_eq!(a.prec_compare(&b).unwrap(), expected);
        prop_assert_eq!(a.rank().cmp(&b.rank()), expected);
    }

    #[test]
    fn meet_is_the_longest_common_prefix((a, b) in alphabet_and_pair()) {
        let m = a.meet(&b).unwrap();
        prop_assert_eq!(&m, &b.meet(&a).unwrap());
        prop_assert!(m.is_prefix_of(&a) && m.is_prefix_of(&b));
        if m.len() < a.len() && m.len() < b.len() {
            prop_assert_ne!(a.letters()[m.len()], b.letters()[m.len()]);
        }
    }

    #[test]
    fn record_history_invariants(t in node(3, 3), tail in prop::collection::vec(0u8..3, 1..8)) {
        let s = t.concat(&Node::new(3, tail).unwrap());
        let h = record_history(&t, &s).unwrap();
        prop_assert_eq!(h.nodes.len(), h.records.len() + 1);
        prop_assert_eq!(h.nodes.first(), Some(&t));
        prop_assert_eq!(h.nodes.last(), Some(&s));
        prop_assert!(h.records.windows(2).all(|w| w[0] < w[1]));
        for (i, &m) in h.records.iter().enumerate() {
            prop_assert!(h.nodes[i].child(m).is_prefix_of(&s));
            let step = &s.letters()[h.nodes[i].len()..h.nodes[i + 1].len()];
            prop_assert_eq!(step.iter().copied().max(), Some(m));
        }
    }

    #[test]
    fn witnesses_classify_to_their_kind(n in 1u8..=4, spine in 0u8..4, teeth in 0u8..4, count in 3usize..=6) {
        let kind = CombKind::new(spine % n, teeth % n);
        prop_assert_eq!(classify_comb(&comb_witness(kind, count, n).unwrap()).unwrap(), kind);
    }

    #[test]
    fn interior_removal_keeps_the_kind(n in 2u8..=3, spine in 0u8..3, teeth in 0u8..3, drop in 1usize..6) {
        let kind = CombKind::new(spine % n, teeth % n);
        let nodes = comb_witness(kind, 7, n).unwrap().to_vec();
        let kept = NodeSet::new(n, nodes.into_iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, x)| x)).unwrap();
        prop_assert_eq!(classify_comb(&kept).unwrap(), kind);
    }

    #[test]
    fn equal_witnesses_are_equivalent(n in 1u8..=3, spine in 0u8..3, teeth in 0u8..3, count in 1usize..=5) {
        let kind = CombKind::new(spine % n, teeth % n);
        let a = comb_witness(kind, count, n).unwrap();
        prop_assert!(first_move_equivalent(&a, &a.clone()).is_some());
        prop_assert!(record_equivalent(&a, &a).is_some());
    }
}

#[test]
fn realizable_maps_compose() {
    let maps: BTreeSet<_> = enumerate_realizable_maps(2, 2).unwrap().into_iter().collect();
    assert!(maps.contains(&multigap::InducedCombMap::identity(2)));
    for a in &maps {
        for b in &maps {
            assert!(maps.contains(&a.then(b)), "{a:?} then {b:?}");
        }
    }
}

#[test]
fn record_candidates_round_trip_through_json() {
    for g in enumerate_candidates_record(2).unwrap().iter().step_by(37) {
        assert_eq!(&GapSpec::from_json(&g.to_json()).unwrap(), g);
    }
}

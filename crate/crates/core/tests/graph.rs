use std::collections::BTreeSet;

use ascm::random;
use ascm::CausalDiagram;
use proptest::prelude::*;

/// Naive reachability by depth-first search over the edge list.
fn naive_descendants(edges: &[(&str, &str)], w: &[&str]) -> BTreeSet<String> {
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut stack: Vec<&str> = w.to_vec();
    while let Some(n) = stack.pop() {
        if seen.insert(n.to_string()) {
            stack.extend(edges.iter().filter(|(a, _)| *a == n).map(|(_, b)| *b));
        }
    }
    seen
}

fn subset_of<'a>(nodes: &[&'a str], mask: u32) -> Vec<&'a str> {
    nodes.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, n)| *n).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reachability_matches_depth_first_search(seed in any::<u64>(), mask in any::<u32>()) {
        let g = random::random_dag(&mut random::rng(seed), 12);
        let nodes = g.features();
        let edges = g.directed_edges();
        let w = subset_of(&nodes, mask);
        let de = naive_descendants(&edges, &w);
        prop_assert_eq!(g.descendants(&w).unwrap(), de.clone());
        if !w.is_empty() {
            let nd: BTreeSet<String> = nodes.iter().filter(|n| !de.contains(**n)).map(|n| n.to_string()).collect();
            prop_assert_eq!(g.non_descendants(&w).unwrap(), nd);
        }
    }

    #[test]
    fn non_descendants_shrink_as_w_grows(seed in any::<u64>(), a in 1u32.., b in any::<u32>()) {
        let g = random::random_dag(&mut random::rng(seed), 12);
        let nodes = g.features();
        let w1 = subset_of(&nodes, a);
        let w2 = subset_of(&nodes, a | b);
        prop_assume!(!w1.is_empty());
        let (nd1, nd2) = (g.non_descendants(&w1).unwrap(), g.non_descendants(&w2).unwrap());
        prop_assert!(nd2.is_subset(&nd1));
        for w in &w2 {
            prop_assert!(!nd2.contains(*w));
        }
        prop_assert!(w2.iter().all(|w| g.descendants(&w2).unwrap().contains(*w)));
    }
}

#[test]
fn chain_and_empty_cases() {
    let g = CausalDiagram::from_edges(&["A", "B", "C"], &[("A", "B"), ("B", "C")], &[]).unwrap();
    assert_eq!(g.non_descendants(&["B"]).unwrap(), BTreeSet::from(["A".to_string()]));
    assert!(g.descendants::<&str>(&[]).unwrap().is_empty());
    assert!(g.non_descendants::<&str>(&[]).is_err());
    assert!(CausalDiagram::from_edges(&["A", "B"], &[("A", "B"), ("B", "A")], &[]).is_err());
}

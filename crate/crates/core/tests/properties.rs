mod common;

use std::collections::BTreeSet;

use linkcomm::bench::{fraction_correct_sets, jaccard_overlap_sets, nmi_cover_variant_sets, nmi_partition};
use linkcomm::nonoverlap::{dcsbm_log_likelihood, vertex_move_refine};
use linkcomm::{load_edge_list, run_em, write_edge_list, EdgeRecord, EmConfig, Graph, LoadOptions, Partition};
use proptest::prelude::*;

fn edges(n: u32) -> impl Strategy<Value = Vec<(u32, u32, u32)>> {
    prop::collection::vec((0..n, 0..n, 1..4u32), 1..40)
}

fn graph(n: usize, list: &[(u32, u32, u32)]) -> Graph {
    Graph::from_edges(n, list.iter().map(|&(u, v, c)| EdgeRecord::new(u, v, c))).unwrap()
}

fn cover(n: usize, k: usize) -> impl Strategy<Value = Vec<Vec<usize>>> {
    prop::collection::vec(prop::collection::btree_set(0..k, 0..=k), n)
        .prop_map(|v| v.into_iter().map(|s| s.into_iter().collect()).collect())
}

fn relabel(c: &[Vec<usize>], perm: &[usize]) -> Vec<Vec<usize>> {
    c.iter()
        .map(|s| {
            let mut t: Vec<usize> = s.iter().map(|&z| perm[z]).collect();
            t.sort_unstable();
            t
        })
        .collect()
}

proptest! {
    #[test]
    fn degrees_sum_to_twice_the_edge_count(list in edges(12)) {
        let g = graph(12, &list);
        prop_assert_eq!(g.degrees().iter().sum::<u64>(), 2 * g.m());
        for i in 0..12 {
            for j in 0..12 {
                prop_assert_eq!(g.adjacency(i, j), g.adjacency(j, i));
            }
            let row: u64 = (0..12).map(|j| g.adjacency(i, j)).sum();
            prop_assert_eq!(row, g.degree(i).unwrap());
        }
    }

    #[test]
    fn edge_lists_round_trip(list in edges(15)) {
        let g = graph(15, &list);
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let h = load_edge_list(std::str::from_utf8(&buf).unwrap(), &LoadOptions::default()).unwrap();
        let by_label = |g: &Graph| -> BTreeSet<(String, String, u32)> {
            g.edges().iter().map(|e| {
                let (a, b) = (g.label(e.u as usize).to_string(), g.label(e.v as usize).to_string());
                (a.clone().min(b.clone()), a.max(b), e.count)
            }).collect()
        };
        prop_assert_eq!(by_label(&g), by_label(&h));
        prop_assert_eq!(g.m(), h.m());
    }

    #[test]
    fn scores_ignore_label_names(
        t in cover(8, 3),
        d in cover(8, 3),
        perm in Just(vec![0usize, 1, 2]).prop_shuffle(),
    ) {
        let pd = relabel(&d, &perm);
        let f = fraction_correct_sets(&t, 3, &d, 3);
        prop_assert_eq!(f, fraction_correct_sets(&t, 3, &pd, 3));
        prop_assert_eq!(jaccard_overlap_sets(&t, &d), jaccard_overlap_sets(&t, &pd));
        let v = nmi_cover_variant_sets(&t, &d);
        prop_assert!((v - nmi_cover_variant_sets(&t, &pd)).abs() < 1e-12);
        for x in [f, jaccard_overlap_sets(&t, &d)] {
            prop_assert!((0.0..=1.0).contains(&x));
        }
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v));
    }

    #[test]
    fn partition_nmi_is_symmetric_and_bounded(
        a in prop::collection::vec(0..4usize, 10),
        b in prop::collection::vec(0..4usize, 10),
    ) {
        let (pa, pb) = (Partition::from_assignments(&a), Partition::from_assignments(&b));
        let x = nmi_partition(&pa, &pb);
        prop_assert!((x - nmi_partition(&pb, &pa)).abs() < 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&x));
    }

    #[test]
    fn refinement_only_climbs(list in edges(14), labels in prop::collection::vec(0..3usize, 14)) {
        let g = graph(14, &list);
        let part = Partition::new(3, labels.iter().map(|&r| Some(r)).collect()).unwrap();
        let out = vertex_move_refine(&g, &part).unwrap();
        prop_assert_eq!(out.trace.len(), out.moves.len() + 1);
        for w in out.trace.windows(2) {
            prop_assert!(w[1] > w[0]);
        }
        let last = *out.trace.last().unwrap();
        prop_assert!((dcsbm_log_likelihood(&g, &out.partition).unwrap() - last).abs() <= 1e-9 * last.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn naive_likelihood_is_monotone(list in edges(10), k in 1..4usize, seed in any::<u64>()) {
        let g = graph(10, &list);
        let em = EmConfig { max_iterations: 300, ..EmConfig::default() };
        let run = run_em(&g, k, &em, seed).unwrap();
        for w in run.trace.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0));
        }
    }
}

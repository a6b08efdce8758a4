#![allow(dead_code)]

pub mod oracles;

use std::path::PathBuf;

use linkcomm::{load_edge_list, EdgeRecord, Graph, LoadOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// G(n, p) with each possible non-loop pair present independently.
pub fn erdos_renyi(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push(EdgeRecord::new(u as u32, v as u32, 1));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

/// Planted partition: `groups` blocks of `size`, edge probability `p_in`
/// within and `p_out` between.
pub fn planted(groups: usize, size: usize, p_in: f64, p_out: f64, rng: &mut impl Rng) -> (Graph, Vec<usize>) {
    let n = groups * size;
    let labels: Vec<usize> = (0..n).map(|i| i / size).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if labels[u] == labels[v] { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push(EdgeRecord::new(u as u32, v as u32, 1));
            }
        }
    }
    (Graph::from_edges(n, edges).unwrap(), labels)
}

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn load_data(name: &str) -> Graph {
    let text = std::fs::read_to_string(data_dir().join(name)).unwrap();
    load_edge_list(&text, &LoadOptions::default()).unwrap()
}

/// `label community` lines keyed by vertex index of `g`.
pub fn read_labels(g: &Graph, name: &str) -> Vec<String> {
    let text = std::fs::read_to_string(data_dir().join(name)).unwrap();
    let index = g.label_index();
    let mut out = vec![String::new(); g.n()];
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let mut parts = line.split_whitespace();
        let (label, group) = (parts.next().unwrap(), parts.next().unwrap());
        out[index[label]] = group.to_string();
    }
    out
}

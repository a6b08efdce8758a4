//! Edge colors of the Les Miserables co-appearance network: every edge gets
//! the community most likely to have produced it.
//!
//! cargo run --release --example lesmis_edge_colors [K]

use linkcomm::fast::fast_restart_sweep;
use linkcomm::{edge_colors, extract_cover, read_edge_list, EmConfig, LoadOptions, PruneConfig};

fn main() -> linkcomm::Result<()> {
    let k: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(6);
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/lesmis.txt");
    let g = read_edge_list(path, &LoadOptions::default())?;
    let run = fast_restart_sweep(&g, k, &EmConfig::default(), &PruneConfig::default(), 50, 3)?.best;
    let colors = edge_colors(&g, &run.degrees, &run.totals)?;
    let cover = extract_cover(&g, &run.degrees)?;

    let mut sizes = vec![0usize; k];
    for &c in &colors.colors {
        sizes[c] += 1;
    }
    for (z, size) in sizes.iter().enumerate() {
        let mut members: Vec<(f64, &str)> = (0..g.n())
            .filter(|&i| cover.communities_of(i).contains(&z))
            .map(|i| (cover.fractions(i)[z], g.label(i)))
            .collect();
        members.sort_by(|a, b| b.0.total_cmp(&a.0));
        let top: Vec<&str> = members.iter().take(6).map(|m| m.1).collect();
        println!("color {z}: {size} edges, {} characters, led by {}", members.len(), top.join(", "));
    }
    let ties = colors.ties.iter().filter(|&&t| t).count();
    println!("{} edges, {ties} tied", colors.colors.len());
    Ok(())
}

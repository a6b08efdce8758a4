//! The reference EM against the pruned one on the same starts.
//!
//! cargo run --release --example naive_vs_fast

use std::time::Instant;

use linkcomm::{read_edge_list, run_em, run_fast_em, EmConfig, LoadOptions, PruneConfig};

fn main() -> linkcomm::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/lesmis.txt");
    let g = read_edge_list(path, &LoadOptions::default())?;
    let em = EmConfig::default();
    println!("{:>4} {:>12} {:>12} {:>12} {:>8} {:>8} {:>8}", "seed", "naive", "delta=0", "delta=1e-3", "t_naive", "t_exact", "t_pruned");
    for seed in 0..5 {
        let t = Instant::now();
        let naive = run_em(&g, 6, &em, seed)?;
        let t_naive = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let exact = run_fast_em(&g, 6, &em, &PruneConfig::exact(), seed)?;
        let t_exact = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let pruned = run_fast_em(&g, 6, &em, &PruneConfig::default(), seed)?;
        let t_pruned = t.elapsed().as_secs_f64();
        println!(
            "{seed:>4} {:>12.4} {:>12.4} {:>12.4} {:>7.3}s {:>7.3}s {:>7.3}s",
            naive.log_likelihood, exact.log_likelihood, pruned.log_likelihood, t_naive, t_exact, t_pruned
        );
    }
    Ok(())
}

//! Two overlapping communities in Zachary's karate club.
//!
//! cargo run --release --example karate_overlap

use linkcomm::fast::fast_restart_sweep;
use linkcomm::{extract_cover, read_edge_list, EmConfig, LoadOptions, PruneConfig};

fn main() -> linkcomm::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/karate.txt");
    let g = read_edge_list(path, &LoadOptions::default())?;
    let fit = fast_restart_sweep(&g, 2, &EmConfig::default(), &PruneConfig::default(), 100, 1)?;
    let run = fit.best;
    println!("log-likelihood {:.3} after {} iterations", run.log_likelihood, run.iterations);

    let cover = extract_cover(&g, &run.degrees)?;
    for i in 0..g.n() {
        let f = cover.fractions(i);
        let mark = if cover.communities_of(i).len() > 1 { "  both" } else { "" };
        println!("{:>3}  {:.2} {:.2}{mark}", g.label(i), f[0], f[1]);
    }
    let overlap: Vec<&str> = cover.overlap().iter().map(|&i| g.label(i)).collect();
    println!("in both groups: {}", overlap.join(" "));
    Ok(())
}

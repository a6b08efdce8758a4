//! Hard partition of the 2000 college football schedule into eleven groups,
//! scored against the conference list.
//!
//! cargo run --release --example football_partition

use linkcomm::bench::{score, GroundTruth};
use linkcomm::membership::Cover;
use linkcomm::{read_edge_list, run_nonoverlap, LoadOptions, NonoverlapConfig};

fn main() -> linkcomm::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let g = read_edge_list(format!("{dir}/football.txt"), &LoadOptions::default())?;
    let truth = GroundTruth::read(format!("{dir}/football_conferences.txt"), &g)?;

    let fit = run_nonoverlap(&g, 11, &NonoverlapConfig::default(), 7)?;
    let best = &fit.best;
    println!(
        "continuous fit {:.3}, rounded {:.3}, refined {:.3} after {} moves",
        best.em_log_likelihood,
        best.rounded_log_likelihood,
        best.log_likelihood,
        best.moves.len()
    );
    for (r, group) in best.partition.groups().iter().enumerate() {
        let names: Vec<&str> = group.iter().map(|&i| g.label(i)).collect();
        println!("{r:>2}: {}", names.join(" "));
    }

    let sets = best.partition.labels().iter().map(|l| l.into_iter().copied().collect()).collect();
    let s = score(&truth, &Cover::from_memberships(11, sets)?);
    println!("fraction correct {:.3}, nmi {:.3}", s.fraction_correct, s.nmi.unwrap_or(f64::NAN));
    Ok(())
}

//! Recovery of two planted overlapping communities as the mean degree grows.
//!
//! cargo run --release --example synthetic_benchmark

use linkcomm::bench::{run_benchmark_sweep, write_table, SweepAxis, SweepSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut spec = SweepSpec::new(SweepAxis::Degree);
    spec.n = 2000;
    spec.overlap = 100;
    spec.grid = vec![2.0, 4.0, 6.0, 8.0, 12.0, 16.0];
    spec.reps = 10;
    spec.restarts = 10;
    let rows = run_benchmark_sweep(&spec)?;
    write_table(&rows, std::io::stdout().lock())?;
    Ok(())
}

//! Reads an edge list, keeps its largest connected component and writes it
//! back with compact labels preserved.
//!
//! cargo run --example largest_component -- edges.txt [--symmetrize]

use linkcomm::{largest_component, read_edge_list, write_edge_list, LoadOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/lesmis.txt").to_string());
    let options = LoadOptions {
        symmetrize: args.any(|a| a == "--symmetrize"),
        ..LoadOptions::default()
    };
    let g = read_edge_list(&path, &options)?;
    let (lcc, map) = largest_component(&g)?;
    let dropped = map.iter().filter(|m| m.is_none()).count();
    eprintln!("{} vertices, {} edges; kept {} vertices, dropped {dropped}", g.n(), g.m(), lcc.n());
    write_edge_list(&lcc, std::io::stdout().lock())?;
    Ok(())
}

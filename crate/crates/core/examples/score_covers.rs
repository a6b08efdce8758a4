//! The agreement measures on a small hand-made example.
//!
//! cargo run --example score_covers

use linkcomm::bench::{fraction_correct_sets, jaccard_overlap_sets, nmi_cover_variant_sets, nmi_partition};
use linkcomm::Partition;

fn main() {
    // Vertices 3 and 4 belong to both true groups; the detection misses 4
    // and swaps the group names.
    let truth = vec![vec![0], vec![0], vec![0], vec![0, 1], vec![0, 1], vec![1], vec![1], vec![1]];
    let found = vec![vec![1], vec![1], vec![1], vec![0, 1], vec![1], vec![0], vec![0], vec![0]];
    println!("fraction correct {:.3}", fraction_correct_sets(&truth, 2, &found, 2));
    println!("overlap jaccard  {:.3}", jaccard_overlap_sets(&truth, &found));
    println!("variant nmi      {:.3}", nmi_cover_variant_sets(&truth, &found));

    let a = Partition::from_assignments(&[0, 0, 0, 1, 1, 1, 2, 2]);
    let b = Partition::from_assignments(&[1, 1, 1, 0, 0, 2, 2, 2]);
    println!("partition nmi    {:.3}", nmi_partition(&a, &b));
}

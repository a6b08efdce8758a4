//! Agreement between detected and known communities.
//!
//! Memberships are given per vertex as sorted community lists, so covers and
//! partitions share one representation.

use std::collections::HashMap;

use super::truth::GroundTruth;
use crate::membership::Cover;
use crate::nonoverlap::Partition;

/// Largest community count for which label alignment tries every matching.
const EXHAUSTIVE_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub fraction_correct: f64,
    pub jaccard: f64,
    /// Plain NMI, only when both sides give each vertex at most one community.
    pub nmi: Option<f64>,
    pub variant_nmi: f64,
}

/// Every score of `detected` against `truth`.
pub fn score(truth: &GroundTruth, detected: &Cover) -> Score {
    let a = truth.memberships();
    let b = detected.communities();
    let nmi = match (as_partition(a, truth.k()), as_partition(b, detected.k())) {
        (Some(pa), Some(pb)) => Some(nmi_partition(&pa, &pb)),
        _ => None,
    };
    Score {
        fraction_correct: fraction_correct_sets(a, truth.k(), b, detected.k()),
        jaccard: jaccard_overlap_sets(a, b),
        nmi,
        variant_nmi: nmi_cover_variant_sets(a, b),
    }
}

fn as_partition(sets: &[Vec<usize>], k: usize) -> Option<Partition> {
    if sets.iter().any(|s| s.len() > 1) {
        return None;
    }
    Partition::new(k, sets.iter().map(|s| s.first().copied()).collect()).ok()
}

/// Groups vertices with identical (truth, detected) membership pairs.
fn signature_counts<'a>(truth: &'a [Vec<usize>], detected: &'a [Vec<usize>]) -> Vec<(&'a [usize], &'a [usize], usize)> {
    let mut counts: HashMap<(&[usize], &[usize]), usize> = HashMap::new();
    for (t, d) in truth.iter().zip(detected) {
        *counts.entry((t.as_slice(), d.as_slice())).or_default() += 1;
    }
    let mut out: Vec<_> = counts.into_iter().map(|((t, d), c)| (t, d, c)).collect();
    out.sort_unstable();
    out
}

/// Number of vertices whose detected set, relabeled by `map`, equals the
/// true set. Unmapped detected labels never match.
fn exact_matches(groups: &[(&[usize], &[usize], usize)], map: &[Option<usize>]) -> usize {
    let mut buf = Vec::new();
    groups
        .iter()
        .filter(|(t, d, _)| {
            if t.len() != d.len() {
                return false;
            }
            buf.clear();
            for &z in d.iter() {
                match map[z] {
                    Some(m) => buf.push(m),
                    None => return false,
                }
            }
            buf.sort_unstable();
            buf.as_slice() == *t
        })
        .map(|(_, _, c)| c)
        .sum()
}

/// Maps each detected label to at most one true label, maximizing the number
/// of vertices whose whole membership set agrees. Exhaustive for up to eight
/// communities on either side, greedy by co-membership counts above that.
pub fn align_labels(truth: &[Vec<usize>], kt: usize, detected: &[Vec<usize>], kd: usize) -> Vec<Option<usize>> {
    if kt != kd {
        log::warn!("aligning {kd} detected communities with {kt} true ones");
    }
    let size = kt.max(kd);
    if size <= EXHAUSTIVE_LIMIT {
        let groups = signature_counts(truth, detected);
        let mut perm: Vec<usize> = (0..size).collect();
        let to_map = |perm: &[usize]| -> Vec<Option<usize>> {
            perm[..kd].iter().map(|&t| (t < kt).then_some(t)).collect()
        };
        let mut best_map = to_map(&perm);
        let mut best = exact_matches(&groups, &best_map);
        while next_permutation(&mut perm) {
            let map = to_map(&perm);
            let hits = exact_matches(&groups, &map);
            if hits > best {
                best = hits;
                best_map = map;
            }
        }
        best_map
    } else {
        let mut overlap = vec![0usize; kd * kt];
        for (t, d) in truth.iter().zip(detected) {
            for &a in d {
                for &b in t {
                    overlap[a * kt + b] += 1;
                }
            }
        }
        let mut map = vec![None; kd];
        let mut used = vec![false; kt];
        loop {
            let mut pick: Option<(usize, usize, usize)> = None;
            for a in (0..kd).filter(|&a| map[a].is_none()) {
                for b in (0..kt).filter(|&b| !used[b]) {
                    let c = overlap[a * kt + b];
                    if c > 0 && pick.is_none_or(|(_, _, best)| c > best) {
                        pick = Some((a, b, c));
                    }
                }
            }
            let Some((a, b, _)) = pick else { break };
            map[a] = Some(b);
            used[b] = true;
        }
        map
    }
}

/// Lexicographic successor; false after the last permutation.
fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Share of vertices whose full membership set is reported correctly after
/// the best label alignment.
pub fn fraction_correct_sets(truth: &[Vec<usize>], kt: usize, detected: &[Vec<usize>], kd: usize) -> f64 {
    assert_eq!(truth.len(), detected.len(), "covers over different vertex sets");
    if truth.is_empty() {
        return 1.0;
    }
    let map = align_labels(truth, kt, detected, kd);
    exact_matches(&signature_counts(truth, detected), &map) as f64 / truth.len() as f64
}

pub fn fraction_correct(truth: &GroundTruth, cover: &Cover) -> f64 {
    fraction_correct_sets(truth.memberships(), truth.k(), cover.communities(), cover.k())
}

/// `|S ∩ V| / |S ∪ V|` for the true and detected overlap sets (vertices in
/// two or more communities); 1 when both are empty.
pub fn jaccard_overlap_sets(truth: &[Vec<usize>], detected: &[Vec<usize>]) -> f64 {
    assert_eq!(truth.len(), detected.len(), "covers over different vertex sets");
    let (mut both, mut either) = (0usize, 0usize);
    for (t, d) in truth.iter().zip(detected) {
        let (s, v) = (t.len() > 1, d.len() > 1);
        both += (s && v) as usize;
        either += (s || v) as usize;
    }
    if either == 0 {
        1.0
    } else {
        both as f64 / either as f64
    }
}

pub fn jaccard_overlap(truth: &GroundTruth, cover: &Cover) -> f64 {
    jaccard_overlap_sets(truth.memberships(), cover.communities())
}

#[inline]
fn plogp(count: f64, n: f64) -> f64 {
    if count > 0.0 {
        let p = count / n;
        -p * p.ln()
    } else {
        0.0
    }
}

/// `I(A;B) / ((H(A) + H(B)) / 2)` over vertices assigned in both; 1 when both
/// partitions are a single block.
pub fn nmi_partition(a: &Partition, b: &Partition) -> f64 {
    assert_eq!(a.n(), b.n(), "partitions over different vertex sets");
    let (ka, kb) = (a.k(), b.k());
    let mut joint = vec![0usize; ka * kb];
    let mut total = 0usize;
    for i in 0..a.n() {
        if let (Some(r), Some(s)) = (a.get(i), b.get(i)) {
            joint[r * kb + s] += 1;
            total += 1;
        }
    }
    if total == 0 {
        return 1.0;
    }
    let n = total as f64;
    let mut ra = vec![0usize; ka];
    let mut rb = vec![0usize; kb];
    for r in 0..ka {
        for s in 0..kb {
            ra[r] += joint[r * kb + s];
            rb[s] += joint[r * kb + s];
        }
    }
    let ha: f64 = ra.iter().map(|&c| plogp(c as f64, n)).sum();
    let hb: f64 = rb.iter().map(|&c| plogp(c as f64, n)).sum();
    if ha + hb == 0.0 {
        return 1.0;
    }
    let hab: f64 = joint.iter().map(|&c| plogp(c as f64, n)).sum();
    let mi = ha + hb - hab;
    (2.0 * mi / (ha + hb)).clamp(0.0, 1.0)
}

/// Member lists of each community, dropping empty ones.
fn communities(sets: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let k = sets.iter().flatten().max().map_or(0, |m| m + 1);
    let mut out = vec![Vec::new(); k];
    for (i, set) in sets.iter().enumerate() {
        for &z in set {
            out[z].push(i);
        }
    }
    out.retain(|c| !c.is_empty());
    out
}

/// Mean over the informative communities of `x` of the normalized
/// conditional entropy given the best admissible community of `y`.
fn normalized_conditional(x: &[Vec<usize>], y: &[Vec<usize>], n: usize, x_sets: &[Vec<usize>]) -> f64 {
    let nf = n as f64;
    let mut shared = vec![0usize; x.len() * y.len()];
    let y_of = invert(y, n);
    for (xs, ys) in x_sets.iter().zip(&y_of) {
        for &a in xs {
            for &b in ys {
                shared[a * y.len() + b] += 1;
            }
        }
    }
    let mut total = 0.0;
    let mut informative = 0usize;
    for (a, xa) in x.iter().enumerate() {
        let sx = xa.len() as f64;
        let hx = plogp(sx, nf) + plogp(nf - sx, nf);
        if hx <= 0.0 {
            continue;
        }
        let mut best = hx;
        for (b, yb) in y.iter().enumerate() {
            let sy = yb.len() as f64;
            let n11 = shared[a * y.len() + b] as f64;
            let n10 = sx - n11;
            let n01 = sy - n11;
            let n00 = nf - n11 - n10 - n01;
            let (h11, h10, h01, h00) = (plogp(n11, nf), plogp(n10, nf), plogp(n01, nf), plogp(n00, nf));
            if h11 + h00 <= h01 + h10 {
                continue;
            }
            let hy = plogp(sy, nf) + plogp(nf - sy, nf);
            best = best.min(h11 + h10 + h01 + h00 - hy);
        }
        total += best / hx;
        informative += 1;
    }
    if informative == 0 {
        0.0
    } else {
        total / informative as f64
    }
}

/// Per-vertex list of community positions from member lists.
fn invert(comms: &[Vec<usize>], n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); n];
    for (c, members) in comms.iter().enumerate() {
        for &i in members {
            out[i].push(c);
        }
    }
    out
}

fn dense_ids(sets: &[Vec<usize>]) -> HashMap<usize, usize> {
    let mut ids: Vec<usize> = sets.iter().flatten().copied().collect();
    ids.sort_unstable();
    ids.dedup();
    ids.into_iter().enumerate().map(|(pos, z)| (z, pos)).collect()
}

/// Overlapping-cover NMI of Lancichinetti, Fortunato and Kertész:
/// `1 - (H(X|Y)_norm + H(Y|X)_norm) / 2`, where each community is matched to
/// the community of the other cover with the least conditional entropy among
/// those passing the `h(P11) + h(P00) > h(P01) + h(P10)` test, and to nothing
/// (entropy `H(X_k)`) when none passes. Communities with zero entropy (empty
/// or covering every vertex) are left out of the averages. Returns 0 when
/// either cover has no community.
pub fn nmi_cover_variant_sets(a: &[Vec<usize>], b: &[Vec<usize>]) -> f64 {
    assert_eq!(a.len(), b.len(), "covers over different vertex sets");
    let n = a.len();
    let (ca, cb) = (communities(a), communities(b));
    if ca.is_empty() || cb.is_empty() {
        log::warn!("variant NMI of an empty cover");
        return 0.0;
    }
    let xy = normalized_conditional(&ca, &cb, n, &renumber(a));
    let yx = normalized_conditional(&cb, &ca, n, &renumber(b));
    (1.0 - 0.5 * (xy + yx)).clamp(0.0, 1.0)
}

/// Per-vertex lists with community ids renumbered to skip empty communities,
/// matching the positions used by [`communities`].
fn renumber(sets: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let ids = dense_ids(sets);
    sets.iter().map(|s| s.iter().map(|z| ids[z]).collect()).collect()
}

pub fn nmi_cover_variant(truth: &GroundTruth, cover: &Cover) -> f64 {
    nmi_cover_variant_sets(truth.memberships(), cover.communities())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(v: &[&[usize]]) -> Vec<Vec<usize>> {
        v.iter().map(|s| s.to_vec()).collect()
    }

    #[test]
    fn fraction_correct_examples() {
        let truth = sets(&[&[0], &[0], &[1], &[0, 1], &[1]]);
        assert_eq!(fraction_correct_sets(&truth, 2, &truth, 2), 1.0);
        let swapped = sets(&[&[1], &[1], &[0], &[0, 1], &[0]]);
        assert_eq!(fraction_correct_sets(&truth, 2, &swapped, 2), 1.0);
        let mut t100: Vec<Vec<usize>> = (0..100).map(|i| vec![i % 2]).collect();
        let d100 = t100.clone();
        t100[7] = vec![0, 1];
        assert!((fraction_correct_sets(&t100, 2, &d100, 2) - 0.99).abs() < 1e-15);
    }

    #[test]
    fn jaccard_examples() {
        let none = sets(&[&[0], &[1]]);
        assert_eq!(jaccard_overlap_sets(&none, &none), 1.0);
        let s = sets(&[&[0], &[0, 1], &[0, 1], &[0, 1], &[1]]);
        let v = sets(&[&[0], &[1], &[0, 1], &[0, 1], &[0, 1]]);
        assert_eq!(jaccard_overlap_sets(&s, &v), 0.5);
        let w = sets(&[&[0, 1], &[0], &[0], &[0], &[1]]);
        assert_eq!(jaccard_overlap_sets(&s, &w), 0.0);
    }

    #[test]
    fn nmi_examples() {
        let a = Partition::from_assignments(&[0, 0, 1, 1, 2]);
        let relabeled = Partition::from_assignments(&[2, 2, 0, 0, 1]);
        assert!((nmi_partition(&a, &relabeled) - 1.0).abs() < 1e-12);
        let one = Partition::from_assignments(&[0; 4]);
        let two = Partition::from_assignments(&[0, 0, 1, 1]);
        assert_eq!(nmi_partition(&one, &two), 0.0);
        assert_eq!(nmi_partition(&one, &one), 1.0);
    }

    #[test]
    fn variant_nmi_identity_and_relabeling() {
        let a = sets(&[&[0], &[0, 1], &[1], &[1, 2], &[2], &[2]]);
        let b = sets(&[&[2], &[2, 0], &[0], &[0, 1], &[1], &[1]]);
        assert!((nmi_cover_variant_sets(&a, &a) - 1.0).abs() < 1e-12);
        assert!((nmi_cover_variant_sets(&a, &b) - 1.0).abs() < 1e-12);
        let empty = sets(&[&[], &[], &[], &[], &[], &[]]);
        assert_eq!(nmi_cover_variant_sets(&a, &empty), 0.0);
    }

    #[test]
    fn greedy_alignment_above_limit() {
        let truth: Vec<Vec<usize>> = (0..40).map(|i| vec![i % 10]).collect();
        let detected: Vec<Vec<usize>> = (0..40).map(|i| vec![(i + 3) % 10]).collect();
        assert_eq!(fraction_correct_sets(&truth, 10, &detected, 10), 1.0);
    }

    #[test]
    fn permutations_are_exhaustive() {
        let mut p = vec![0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut p) {
            count += 1;
        }
        assert_eq!(count, 24);
    }
}

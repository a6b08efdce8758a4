//! Slow scoring functions written straight from the definitions, used to
//! check the library's versions.

use std::collections::BTreeSet;

fn h(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

pub fn jaccard(truth: &[Vec<usize>], detected: &[Vec<usize>]) -> f64 {
    let s: BTreeSet<usize> = (0..truth.len()).filter(|&i| truth[i].len() >= 2).collect();
    let v: BTreeSet<usize> = (0..detected.len()).filter(|&i| detected[i].len() >= 2).collect();
    let union = s.union(&v).count();
    if union == 0 {
        1.0
    } else {
        s.intersection(&v).count() as f64 / union as f64
    }
}

/// Standard NMI with arithmetic-mean normalization, from probabilities.
pub fn nmi_partition(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let pa: Vec<f64> = (0..ka).map(|r| a.iter().filter(|&&x| x == r).count() as f64 / n).collect();
    let pb: Vec<f64> = (0..kb).map(|s| b.iter().filter(|&&x| x == s).count() as f64 / n).collect();
    let mut mi = 0.0;
    for r in 0..ka {
        for s in 0..kb {
            let p = a.iter().zip(b).filter(|&(&x, &y)| x == r && y == s).count() as f64 / n;
            if p > 0.0 {
                mi += p * (p / (pa[r] * pb[s])).log2();
            }
        }
    }
    let ha: f64 = pa.iter().map(|&p| h(p)).sum();
    let hb: f64 = pb.iter().map(|&p| h(p)).sum();
    if ha + hb == 0.0 {
        1.0
    } else {
        2.0 * mi / (ha + hb)
    }
}

fn indicators(cover: &[Vec<usize>]) -> Vec<Vec<bool>> {
    let k = cover.iter().flatten().max().map_or(0, |m| m + 1);
    (0..k)
        .map(|z| cover.iter().map(|set| set.contains(&z)).collect::<Vec<bool>>())
        .filter(|x| x.iter().any(|&b| b))
        .collect()
}

/// Mean normalized conditional entropy of the communities of `x` given `y`.
fn conditional(x: &[Vec<bool>], y: &[Vec<bool>]) -> f64 {
    let n = x.first().map_or(0, |c| c.len()) as f64;
    let mut terms = Vec::new();
    for xk in x {
        let p1 = xk.iter().filter(|&&b| b).count() as f64 / n;
        let hx = h(p1) + h(1.0 - p1);
        if hx == 0.0 {
            continue;
        }
        let mut best: Option<f64> = None;
        for yl in y {
            let mut p = [[0.0; 2]; 2];
            for (&a, &b) in xk.iter().zip(yl) {
                p[a as usize][b as usize] += 1.0 / n;
            }
            if h(p[1][1]) + h(p[0][0]) <= h(p[0][1]) + h(p[1][0]) {
                continue;
            }
            let py = [p[0][0] + p[1][0], p[0][1] + p[1][1]];
            let mut hcond = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    if p[a][b] > 0.0 {
                        hcond -= p[a][b] * (p[a][b] / py[b]).log2();
                    }
                }
            }
            best = Some(best.map_or(hcond, |m: f64| m.min(hcond)));
        }
        terms.push(best.unwrap_or(hx) / hx);
    }
    if terms.is_empty() {
        0.0
    } else {
        terms.iter().sum::<f64>() / terms.len() as f64
    }
}

/// Overlapping NMI of Lancichinetti, Fortunato and Kertész.
pub fn variant_nmi(a: &[Vec<usize>], b: &[Vec<usize>]) -> f64 {
    let (x, y) = (indicators(a), indicators(b));
    if x.is_empty() || y.is_empty() {
        return 0.0;
    }
    1.0 - 0.5 * (conditional(&x, &y) + conditional(&y, &x))
}

/// Best fraction of exactly matched vertices over every injective relabeling
/// of the detected communities (unmatched labels never match).
pub fn fraction_correct(truth: &[Vec<usize>], kt: usize, detected: &[Vec<usize>], kd: usize) -> f64 {
    fn search(
        d: usize,
        kd: usize,
        kt: usize,
        map: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        eval: &dyn Fn(&[Option<usize>]) -> usize,
    ) -> usize {
        if d == kd {
            return eval(map);
        }
        let mut best = 0;
        for t in 0..kt {
            if !used[t] {
                used[t] = true;
                map.push(Some(t));
                best = best.max(search(d + 1, kd, kt, map, used, eval));
                map.pop();
                used[t] = false;
            }
        }
        map.push(None);
        best = best.max(search(d + 1, kd, kt, map, used, eval));
        map.pop();
        best
    }
    let eval = |map: &[Option<usize>]| {
        truth
            .iter()
            .zip(detected)
            .filter(|(t, d)| {
                let mapped: Option<BTreeSet<usize>> = d.iter().map(|&z| map[z]).collect();
                mapped.is_some_and(|m| m == t.iter().copied().collect::<BTreeSet<usize>>())
            })
            .count()
    };
    let best = search(0, kd, kt, &mut Vec::new(), &mut vec![false; kt], &eval);
    best as f64 / truth.len() as f64
}

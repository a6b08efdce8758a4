//! Covers, edge colorings and result documents from a fitted model.
//!
//! A vertex belongs to community `z` when its expected number of color-`z`
//! edges, `k_iz`, exceeds one. Fractions are `k_iz / degree(i)`; with pruning
//! some edge-ends are attributed to no color, and that residual is reported
//! separately instead of being renormalized away.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fast::{ColorDegrees, ColorTotals};
use crate::graph::Graph;

/// Overlapping communities with per-vertex color fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct Cover {
    k: usize,
    communities: Vec<Vec<usize>>,
    fractions: Vec<Vec<f64>>,
    unattributed: Vec<f64>,
    isolated: Vec<bool>,
}

impl Cover {
    /// A cover from bare membership lists; fractions are split evenly over
    /// each vertex's communities.
    pub fn from_memberships(k: usize, communities: Vec<Vec<usize>>) -> Result<Self> {
        let mut fractions = Vec::with_capacity(communities.len());
        let mut sets = Vec::with_capacity(communities.len());
        for mut set in communities {
            set.sort_unstable();
            set.dedup();
            if let Some(&bad) = set.iter().find(|&&z| z >= k) {
                return Err(Error::Validation(format!("community {bad} out of range for {k} communities")));
            }
            let mut f = vec![0.0; k];
            for &z in &set {
                f[z] = 1.0 / set.len() as f64;
            }
            fractions.push(f);
            sets.push(set);
        }
        let n = sets.len();
        Ok(Cover {
            k,
            communities: sets,
            fractions,
            unattributed: vec![0.0; n],
            isolated: vec![false; n],
        })
    }

    /// A cover with explicit fractions; `isolated` vertices must have no
    /// communities.
    pub fn from_parts(
        k: usize,
        communities: Vec<Vec<usize>>,
        fractions: Vec<Vec<f64>>,
        isolated: Vec<bool>,
    ) -> Result<Self> {
        let n = communities.len();
        if fractions.len() != n || isolated.len() != n || fractions.iter().any(|f| f.len() != k) {
            return Err(Error::Dimension("cover parts disagree in size".into()));
        }
        let mut cover = Cover::from_memberships(k, communities)?;
        if (0..n).any(|i| isolated[i] && !cover.communities[i].is_empty()) {
            return Err(Error::Validation("isolated vertex with a community".into()));
        }
        cover.fractions = fractions;
        cover.isolated = isolated;
        Ok(cover)
    }

    pub fn n(&self) -> usize {
        self.communities.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Sorted community ids per vertex.
    pub fn communities(&self) -> &[Vec<usize>] {
        &self.communities
    }

    pub fn communities_of(&self, i: usize) -> &[usize] {
        &self.communities[i]
    }

    /// `k_iz / degree(i)` for every color.
    pub fn fractions(&self, i: usize) -> &[f64] {
        &self.fractions[i]
    }

    /// Share of the degree of `i` on pruned colors.
    pub fn unattributed(&self, i: usize) -> f64 {
        self.unattributed[i]
    }

    pub fn is_isolated(&self, i: usize) -> bool {
        self.isolated[i]
    }

    /// Non-isolated vertex with no color above the threshold.
    pub fn is_unassigned(&self, i: usize) -> bool {
        !self.isolated[i] && self.communities[i].is_empty()
    }

    pub fn unassigned(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.is_unassigned(i)).collect()
    }

    /// Vertices in two or more communities.
    pub fn overlap(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.communities[i].len() > 1).collect()
    }

    /// Members of each community.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.k];
        for (i, set) in self.communities.iter().enumerate() {
            for &z in set {
                groups[z].push(i);
            }
        }
        groups
    }
}

/// Communities of a fitted state: `i` is in `z` iff `k_iz > 1`.
pub fn extract_cover(g: &Graph, k: &ColorDegrees) -> Result<Cover> {
    if k.n() != g.n() {
        return Err(Error::Dimension(format!(
            "color degrees for {} vertices, graph has {}",
            k.n(),
            g.n()
        )));
    }
    let mut communities = Vec::with_capacity(g.n());
    let mut fractions = Vec::with_capacity(g.n());
    let mut unattributed = Vec::with_capacity(g.n());
    let mut isolated = Vec::with_capacity(g.n());
    for (i, &degree) in g.degrees().iter().enumerate() {
        let mut f = vec![0.0; k.k()];
        let mut set = Vec::new();
        if degree == 0 {
            isolated.push(true);
            unattributed.push(0.0);
        } else {
            let (cs, vs) = k.row(i);
            let mut attributed = 0.0;
            for (&z, &x) in cs.iter().zip(vs) {
                f[z as usize] = x / degree as f64;
                attributed += f[z as usize];
                if x > 1.0 {
                    set.push(z as usize);
                }
            }
            isolated.push(false);
            unattributed.push((1.0 - attributed).max(0.0));
        }
        communities.push(set);
        fractions.push(f);
    }
    Ok(Cover {
        k: k.k(),
        communities,
        fractions,
        unattributed,
        isolated,
    })
}

/// Most probable color of every edge, in [`Graph::edges`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeColoring {
    pub colors: Vec<usize>,
    /// Another color had the same posterior (within rounding).
    pub ties: Vec<bool>,
    /// The endpoints shared no live color; the posterior was taken uniform.
    pub degenerate: Vec<bool>,
}

impl EdgeColoring {
    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }
}

/// Posterior color probabilities of one edge, `q(z) ∝ k_uz k_vz / kappa_z`.
/// Returns `None` when the endpoints share no live color.
pub fn edge_posterior(k: &ColorDegrees, kappa: &ColorTotals, u: usize, v: usize) -> Option<Vec<f64>> {
    let mut q = vec![0.0; k.k()];
    let (cu, ku) = k.row(u);
    let (cv, kv) = k.row(v);
    let (mut a, mut b) = (0, 0);
    let mut denom = 0.0;
    while a < cu.len() && b < cv.len() {
        if cu[a] == cv[b] {
            let z = cu[a] as usize;
            let t = ku[a] * kv[b] / kappa.get(z);
            q[z] = t;
            denom += t;
            a += 1;
            b += 1;
        } else if cu[a] < cv[b] {
            a += 1;
        } else {
            b += 1;
        }
    }
    if denom > 0.0 && denom.is_finite() {
        q.iter_mut().for_each(|x| *x /= denom);
        Some(q)
    } else {
        None
    }
}

const TIE_TOLERANCE: f64 = 1e-12;

/// Argmax color per edge; ties go to the lowest color id.
pub fn edge_colors(g: &Graph, k: &ColorDegrees, kappa: &ColorTotals) -> Result<EdgeColoring> {
    if k.n() != g.n() {
        return Err(Error::Dimension(format!(
            "color degrees for {} vertices, graph has {}",
            k.n(),
            g.n()
        )));
    }
    let mut coloring = EdgeColoring {
        colors: Vec::with_capacity(g.edges().len()),
        ties: Vec::with_capacity(g.edges().len()),
        degenerate: Vec::with_capacity(g.edges().len()),
    };
    for e in g.edges() {
        match edge_posterior(k, kappa, e.u as usize, e.v as usize) {
            Some(q) => {
                let (best, tie) = argmax_with_tie(&q);
                coloring.colors.push(best);
                coloring.ties.push(tie);
                coloring.degenerate.push(false);
            }
            None => {
                coloring.colors.push(0);
                coloring.ties.push(k.k() > 1);
                coloring.degenerate.push(true);
            }
        }
    }
    Ok(coloring)
}

/// First index of the maximum and whether a later entry matches it.
pub(crate) fn argmax_with_tie(values: &[f64]) -> (usize, bool) {
    let mut best = 0;
    for (z, &x) in values.iter().enumerate() {
        if x > values[best] {
            best = z;
        }
    }
    let top = values.get(best).copied().unwrap_or(0.0);
    let tie = values
        .iter()
        .enumerate()
        .any(|(z, &x)| z != best && (top - x).abs() <= TIE_TOLERANCE * top.abs().max(f64::MIN_POSITIVE));
    (best, tie)
}

/// Settings that produced a result, echoed into the document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub mode: String,
    pub input: Option<String>,
    pub k: usize,
    pub restarts: usize,
    pub delta: Option<f64>,
    pub freeze_edges: Option<bool>,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub threads: usize,
    pub deterministic: bool,
    pub largest_component: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexEntry {
    pub label: String,
    pub communities: Vec<usize>,
    pub fractions: Vec<f64>,
    pub unattributed: f64,
    pub unassigned: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeEntry {
    pub u: String,
    pub v: String,
    pub color: usize,
    pub tie: bool,
}

/// Result file layout. Field names are fixed by `docs/result-schema.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub config: RunSettings,
    /// `null` when the fit left an edge with zero expected multiplicity.
    pub likelihood: Option<f64>,
    pub iterations: usize,
    /// Wall-clock time of the whole restart sweep; `null` in deterministic
    /// mode so repeated runs produce identical files.
    pub seconds: Option<f64>,
    pub seed: u64,
    pub degenerate_edges: usize,
    pub vertices: Vec<VertexEntry>,
    pub edges: Vec<EdgeEntry>,
}

/// Run facts that are not part of the cover or the coloring.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetadata {
    pub config: RunSettings,
    pub likelihood: f64,
    pub iterations: usize,
    pub seconds: Option<f64>,
    pub seed: u64,
}

impl ResultDocument {
    /// Isolated vertices are left out of the vertex list.
    pub fn build(g: &Graph, cover: &Cover, coloring: &EdgeColoring, meta: RunMetadata) -> Result<Self> {
        if cover.n() != g.n() || coloring.len() != g.edges().len() {
            return Err(Error::Dimension(format!(
                "cover of {} vertices and coloring of {} edges for a graph with {} vertices and {} edges",
                cover.n(),
                coloring.len(),
                g.n(),
                g.edges().len()
            )));
        }
        let vertices = (0..g.n())
            .filter(|&i| !cover.is_isolated(i))
            .map(|i| VertexEntry {
                label: g.label(i).to_string(),
                communities: cover.communities_of(i).to_vec(),
                fractions: cover.fractions(i).to_vec(),
                unattributed: cover.unattributed(i),
                unassigned: cover.is_unassigned(i),
            })
            .collect();
        let edges = g
            .edges()
            .iter()
            .zip(&coloring.colors)
            .zip(&coloring.ties)
            .map(|((e, &color), &tie)| EdgeEntry {
                u: g.label(e.u as usize).to_string(),
                v: g.label(e.v as usize).to_string(),
                color,
                tie,
            })
            .collect();
        Ok(ResultDocument {
            config: meta.config,
            likelihood: meta.likelihood.is_finite().then_some(meta.likelihood),
            iterations: meta.iterations,
            seconds: meta.seconds,
            seed: meta.seed,
            degenerate_edges: coloring.degenerate.iter().filter(|&&d| d).count(),
            vertices,
            edges,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Writes `doc` as pretty-printed JSON.
pub fn write_results<W: Write>(doc: &ResultDocument, mut out: W) -> Result<()> {
    let text = doc.to_json()?;
    out.write_all(text.as_bytes()).map_err(|e| Error::io("<output>", e))
}

pub fn save_results(doc: &ResultDocument, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, doc.to_json()?).map_err(|e| Error::io(path, e))
}

pub fn read_results(path: impl AsRef<Path>) -> Result<ResultDocument> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ResultDocument::from_json(&text)
}

//! Pruned expectation-maximization over expected color degrees.
//!
//! Instead of storing `q_ij(z)` for every edge, the iteration keeps only
//! `k_iz = sum_j A_ij q_ij(z)`, the expected number of color-`z` edge-ends at
//! vertex `i`, and the color totals `kappa_z = sum_i k_iz`. One sweep visits
//! each edge, rebuilds its posterior from
//! `q_ij(z) = k_iz k_jz / (kappa_z D)` with `D = sum_z k_iz k_jz / kappa_z`,
//! adds it to the next color degrees of both endpoints, and discards it.
//!
//! Two prunings shrink the work as the fit settles:
//!
//! * color degrees below `delta` are set to zero, and a zero color degree can
//!   never become positive again, so only colors live at both endpoints of an
//!   edge need to be visited;
//! * an edge whose endpoints each have a single live color has a fixed
//!   posterior, so it is removed from the sweep and its constant contribution
//!   is added directly.
//!
//! With `delta = 0` the iteration is the reference EM of [`crate::naive`] up
//! to rounding.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::naive::{self, log_likelihood, EmConfig, OverlapParams};
use crate::restarts::{rng_from_seed, run_restarts, RestartSweep};

/// Colors up to this count are swept densely, without intersecting color
/// lists.
pub const DENSE_COLOR_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PruneConfig {
    /// Color degrees below this value are set to zero for good.
    pub delta: f64,
    /// Remove edges between single-colored endpoints from the sweep.
    pub freeze_edges: bool,
}

impl Default for PruneConfig {
    fn default() -> Self {
        PruneConfig {
            delta: 0.001,
            freeze_edges: true,
        }
    }
}

impl PruneConfig {
    /// No thresholding: the exact EM iteration.
    pub fn exact() -> Self {
        PruneConfig {
            delta: 0.0,
            freeze_edges: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::Config(format!("delta must be a finite nonnegative number, got {}", self.delta)));
        }
        Ok(())
    }
}

/// Sparse `n x K` matrix of expected color degrees. Each vertex stores its
/// live colors in increasing order with strictly positive values.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorDegrees {
    k: usize,
    offsets: Vec<usize>,
    colors: Vec<u32>,
    values: Vec<f64>,
}

impl ColorDegrees {
    /// From a dense row-major matrix; zero entries are not stored.
    pub fn from_dense(n: usize, k: usize, dense: &[f64]) -> Result<Self> {
        if dense.len() != n * k {
            return Err(Error::Dimension(format!(
                "{} color degrees for {n} vertices and {k} colors",
                dense.len()
            )));
        }
        if let Some(bad) = dense.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::Validation(format!("color degree {bad} is not finite and nonnegative")));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut colors = Vec::new();
        let mut values = Vec::new();
        for row in dense.chunks_exact(k.max(1)).take(n) {
            for (z, &x) in row.iter().enumerate() {
                if x > 0.0 {
                    colors.push(z as u32);
                    values.push(x);
                }
            }
            offsets.push(colors.len());
        }
        if k == 0 {
            offsets.resize(n + 1, 0);
        }
        Ok(ColorDegrees {
            k,
            offsets,
            colors,
            values,
        })
    }

    /// Inverse of [`theta_from_k`]: `k_iz = theta_iz * sum_j theta_jz`.
    pub fn from_params(p: &OverlapParams) -> Self {
        let sums = p.column_sums();
        let dense: Vec<f64> = p
            .as_slice()
            .iter()
            .enumerate()
            .map(|(idx, &t)| t * sums[idx % p.k().max(1)])
            .collect();
        ColorDegrees::from_dense(p.n(), p.k(), &dense).expect("finite nonnegative by construction")
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.n() * self.k];
        for i in 0..self.n() {
            let (cs, vs) = self.row(i);
            for (&z, &x) in cs.iter().zip(vs) {
                dense[i * self.k + z as usize] = x;
            }
        }
        dense
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    /// Live colors of `i` and their degrees.
    #[inline]
    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let (lo, hi) = (self.offsets[i], self.offsets[i + 1]);
        (&self.colors[lo..hi], &self.values[lo..hi])
    }

    pub fn get(&self, i: usize, z: usize) -> f64 {
        let (cs, vs) = self.row(i);
        match cs.binary_search(&(z as u32)) {
            Ok(p) => vs[p],
            Err(_) => 0.0,
        }
    }

    /// Number of live `(vertex, color)` pairs.
    #[inline]
    pub fn live_pairs(&self) -> usize {
        self.values.len()
    }

    pub fn live_colors(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn vertex_total(&self, i: usize) -> f64 {
        self.row(i).1.iter().sum()
    }

    pub fn totals(&self) -> ColorTotals {
        let mut kappa = vec![0.0; self.k];
        for (&z, &x) in self.colors.iter().zip(&self.values) {
            kappa[z as usize] += x;
        }
        ColorTotals(kappa)
    }
}

/// `kappa_z = sum_i k_iz`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorTotals(Vec<f64>);

impl ColorTotals {
    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    #[inline]
    pub fn get(&self, z: usize) -> f64 {
        self.0[z]
    }
}

/// `theta_iz = k_iz / sqrt(kappa_z)`; colors with `kappa_z = 0` map to zero.
pub fn theta_from_k(k: &ColorDegrees, kappa: &ColorTotals) -> OverlapParams {
    let scale: Vec<f64> = kappa
        .as_slice()
        .iter()
        .map(|&s| if s > 0.0 { 1.0 / s.sqrt() } else { 0.0 })
        .collect();
    let mut theta = vec![0.0; k.n() * k.k()];
    for i in 0..k.n() {
        let (cs, vs) = k.row(i);
        for (&z, &x) in cs.iter().zip(vs) {
            theta[i * k.k() + z as usize] = x * scale[z as usize];
        }
    }
    OverlapParams::new(k.n(), k.k(), theta).expect("finite nonnegative by construction")
}

/// Live edges plus the constant edge-ends contributed by frozen ones.
#[derive(Debug, Clone, PartialEq)]
pub struct FrozenEdges {
    /// Indices into [`Graph::edges`] that still need sweeping.
    pub live: Vec<usize>,
    /// Per vertex: edge-ends from frozen edges, all of them on the vertex's
    /// single live color.
    pub frozen_ends: Vec<f64>,
}

impl FrozenEdges {
    pub fn all_live(g: &Graph) -> Self {
        FrozenEdges {
            live: (0..g.edges().len()).collect(),
            frozen_ends: vec![0.0; g.n()],
        }
    }
}

/// Moves every live edge whose endpoints both have exactly one live color out
/// of the sweep set. Same-colored endpoints keep the whole edge on that color;
/// differently colored endpoints share no color, so each end stays on its own
/// endpoint's color. Either way each endpoint receives `A_ij` ends per sweep.
pub fn freeze_edges(g: &Graph, k: &ColorDegrees, edges: &mut FrozenEdges) {
    let edge_list = g.edges();
    edges.live.retain(|&p| {
        let e = edge_list[p];
        let (u, v) = (e.u as usize, e.v as usize);
        if k.live_colors(u) == 1 && k.live_colors(v) == 1 {
            if e.is_loop() {
                edges.frozen_ends[u] += 2.0 * e.count as f64;
            } else {
                edges.frozen_ends[u] += e.count as f64;
                edges.frozen_ends[v] += e.count as f64;
            }
            false
        } else {
            true
        }
    });
}

/// Result of one fused E+M pass.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub degrees: ColorDegrees,
    pub totals: ColorTotals,
    /// Largest `|k'_iz - k_iz|`, counting dropped entries.
    pub max_change: f64,
    /// Edges whose endpoints shared no live color.
    pub degenerate_edges: usize,
}

/// One fused E+M pass over every edge of `g` (no edge freezing), followed by
/// thresholding at `cfg.delta`.
///
/// An edge whose endpoints share no live color has no defined posterior; each
/// of its ends is then spread over its own endpoint's live colors in
/// proportion to that endpoint's color degrees, which keeps every zero at zero.
pub fn sweep(g: &Graph, k: &ColorDegrees, kappa: &ColorTotals, cfg: &PruneConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    if k.n() != g.n() {
        return Err(Error::Dimension(format!(
            "color degrees for {} vertices, graph has {}",
            k.n(),
            g.n()
        )));
    }
    let computed = k.totals();
    for (a, b) in computed.as_slice().iter().zip(kappa.as_slice()) {
        if (a - b).abs() > 1e-9 * a.abs().max(1.0) {
            return Err(Error::Validation("color totals disagree with the color degrees".into()));
        }
    }
    let mut state = SweepState::new(g, k.clone(), Layout::for_colors(k.k()));
    let live = FrozenEdges::all_live(g);
    let edges = state.edge_table(g, &live.live);
    let stats = state.sweep(&edges, &live.frozen_ends, cfg.delta, 1);
    let degrees = state.to_color_degrees();
    let totals = degrees.totals();
    Ok(SweepOutcome {
        degrees,
        totals,
        max_change: stats.max_change,
        degenerate_edges: stats.degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Dense,
    Sparse,
}

impl Layout {
    fn for_colors(k: usize) -> Self {
        if k <= DENSE_COLOR_LIMIT {
            Layout::Dense
        } else {
            Layout::Sparse
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct LiveEdge {
    u: u32,
    v: u32,
    /// `A_uv`, or `A_uu = 2 * count` for a loop.
    weight: f64,
}

struct SweepStats {
    max_change: f64,
    degenerate: usize,
}

/// Working state of one run. In the dense layout every vertex owns `K` slots
/// and dead colors hold zero; in the sparse layout rows list live colors only.
struct SweepState {
    layout: Layout,
    n: usize,
    k: usize,
    offsets: Vec<usize>,
    colors: Vec<u32>,
    values: Vec<f64>,
    live_count: Vec<u32>,
    kappa: Vec<f64>,
    next: Vec<f64>,
}

impl SweepState {
    fn new(g: &Graph, degrees: ColorDegrees, layout: Layout) -> Self {
        let n = g.n();
        let k = degrees.k();
        let kappa = degrees.totals().0;
        let live_count: Vec<u32> = (0..n).map(|i| degrees.live_colors(i) as u32).collect();
        let (offsets, colors, values) = match layout {
            Layout::Sparse => (degrees.offsets, degrees.colors, degrees.values),
            Layout::Dense => {
                let dense = ColorDegrees {
                    k,
                    offsets: degrees.offsets,
                    colors: degrees.colors,
                    values: degrees.values,
                }
                .to_dense();
                ((0..=n).map(|i| i * k).collect(), Vec::new(), dense)
            }
        };
        SweepState {
            layout,
            n,
            k,
            offsets,
            colors,
            next: vec![0.0; values.len()],
            values,
            live_count,
            kappa,
        }
    }

    fn edge_table(&self, g: &Graph, live: &[usize]) -> Vec<LiveEdge> {
        let all = g.edges();
        live.iter()
            .map(|&p| {
                let e = all[p];
                LiveEdge {
                    u: e.u,
                    v: e.v,
                    weight: e.weight(),
                }
            })
            .collect()
    }

    fn inverse_totals(&self) -> Vec<f64> {
        self.kappa
            .iter()
            .map(|&s| if s > 0.0 { 1.0 / s } else { 0.0 })
            .collect()
    }

    /// Accumulates the posterior edge-ends of `edges` into `out`.
    fn accumulate(&self, edges: &[LiveEdge], inv: &[f64], out: &mut [f64]) -> usize {
        match self.layout {
            Layout::Dense => self.accumulate_dense(edges, inv, out),
            Layout::Sparse => self.accumulate_sparse(edges, inv, out),
        }
    }

    fn accumulate_dense(&self, edges: &[LiveEdge], inv: &[f64], out: &mut [f64]) -> usize {
        let k = self.k;
        let mut terms = vec![0.0; k];
        let mut degenerate = 0;
        for e in edges {
            let (u, v) = (e.u as usize * k, e.v as usize * k);
            let (ku, kv) = (&self.values[u..u + k], &self.values[v..v + k]);
            let mut denom = 0.0;
            for z in 0..k {
                let t = ku[z] * kv[z] * inv[z];
                terms[z] = t;
                denom += t;
            }
            if denom > 0.0 && denom.is_finite() {
                let scale = e.weight / denom;
                if u == v {
                    for z in 0..k {
                        out[u + z] += terms[z] * scale;
                    }
                } else {
                    for z in 0..k {
                        let x = terms[z] * scale;
                        out[u + z] += x;
                        out[v + z] += x;
                    }
                }
            } else {
                degenerate += 1;
                split_by_own_colors(ku, e.weight, &mut out[u..u + k]);
                if u != v {
                    split_by_own_colors(kv, e.weight, &mut out[v..v + k]);
                }
            }
        }
        degenerate
    }

    fn accumulate_sparse(&self, edges: &[LiveEdge], inv: &[f64], out: &mut [f64]) -> usize {
        let mut shared: Vec<(usize, usize, f64)> = Vec::with_capacity(self.k.min(64));
        let mut degenerate = 0;
        for e in edges {
            let (u, v) = (e.u as usize, e.v as usize);
            let (ulo, uhi) = (self.offsets[u], self.offsets[u + 1]);
            let (vlo, vhi) = (self.offsets[v], self.offsets[v + 1]);
            shared.clear();
            let mut denom = 0.0;
            let (mut a, mut b) = (ulo, vlo);
            while a < uhi && b < vhi {
                let (ca, cb) = (self.colors[a], self.colors[b]);
                if ca == cb {
                    let t = self.values[a] * self.values[b] * inv[ca as usize];
                    denom += t;
                    shared.push((a, b, t));
                    a += 1;
                    b += 1;
                } else if ca < cb {
                    a += 1;
                } else {
                    b += 1;
                }
            }
            if denom > 0.0 && denom.is_finite() {
                let scale = e.weight / denom;
                if u == v {
                    for &(a, _, t) in &shared {
                        out[a] += t * scale;
                    }
                } else {
                    for &(a, b, t) in &shared {
                        let x = t * scale;
                        out[a] += x;
                        out[b] += x;
                    }
                }
            } else {
                degenerate += 1;
                split_by_own_colors(&self.values[ulo..uhi], e.weight, &mut out[ulo..uhi]);
                if u != v {
                    split_by_own_colors(&self.values[vlo..vhi], e.weight, &mut out[vlo..vhi]);
                }
            }
        }
        degenerate
    }

    /// One E+M pass. `chunks > 1` accumulates edge chunks separately and adds
    /// them in chunk order.
    fn sweep(&mut self, edges: &[LiveEdge], frozen_ends: &[f64], delta: f64, chunks: usize) -> SweepStats {
        let inv = self.inverse_totals();
        let mut next = std::mem::take(&mut self.next);
        next.fill(0.0);
        let degenerate = if chunks <= 1 || edges.len() < 2 * chunks {
            self.accumulate(edges, &inv, &mut next)
        } else {
            let size = edges.len().div_ceil(chunks);
            let parts: Vec<(Vec<f64>, usize)> = edges
                .par_chunks(size)
                .map(|chunk| {
                    let mut acc = vec![0.0; next.len()];
                    let bad = self.accumulate(chunk, &inv, &mut acc);
                    (acc, bad)
                })
                .collect();
            let mut bad = 0;
            for (acc, b) in parts {
                bad += b;
                for (x, y) in next.iter_mut().zip(acc) {
                    *x += y;
                }
            }
            bad
        };
        for (i, &ends) in frozen_ends.iter().enumerate() {
            if ends > 0.0 {
                let (lo, hi) = (self.offsets[i], self.offsets[i + 1]);
                if let Some(slot) = (lo..hi).find(|&s| self.values[s] > 0.0) {
                    next[slot] += ends;
                }
            }
        }

        let mut max_change = 0.0f64;
        for (x, &old) in next.iter_mut().zip(&self.values) {
            if !(*x >= delta && *x > 0.0) {
                *x = 0.0;
            }
            max_change = max_change.max((*x - old).abs());
        }
        self.values = next;
        self.next = Vec::new();
        self.compact();
        SweepStats {
            max_change,
            degenerate,
        }
    }

    /// Recounts live colors and totals; the sparse layout also drops zeros.
    fn compact(&mut self) {
        let k = self.k;
        self.kappa.iter_mut().for_each(|s| *s = 0.0);
        match self.layout {
            Layout::Dense => {
                for i in 0..self.n {
                    let row = &self.values[i * k..(i + 1) * k];
                    let mut live = 0;
                    for (z, &x) in row.iter().enumerate() {
                        if x > 0.0 {
                            live += 1;
                            self.kappa[z] += x;
                        }
                    }
                    self.live_count[i] = live;
                }
            }
            Layout::Sparse => {
                let mut write = 0;
                let mut start = 0;
                for i in 0..self.n {
                    let end = self.offsets[i + 1];
                    for s in start..end {
                        let x = self.values[s];
                        if x > 0.0 {
                            let z = self.colors[s];
                            self.colors[write] = z;
                            self.values[write] = x;
                            self.kappa[z as usize] += x;
                            write += 1;
                        }
                    }
                    start = end;
                    self.offsets[i + 1] = write;
                    self.live_count[i] = (write - self.offsets[i]) as u32;
                }
                self.colors.truncate(write);
                self.values.truncate(write);
            }
        }
        self.next = vec![0.0; self.values.len()];
    }

    fn to_color_degrees(&self) -> ColorDegrees {
        match self.layout {
            Layout::Sparse => ColorDegrees {
                k: self.k,
                offsets: self.offsets.clone(),
                colors: self.colors.clone(),
                values: self.values.clone(),
            },
            Layout::Dense => ColorDegrees::from_dense(self.n, self.k, &self.values)
                .expect("finite nonnegative by construction"),
        }
    }

    fn live_pairs(&self) -> usize {
        self.live_count.iter().map(|&c| c as usize).sum()
    }
}

/// Spreads `weight` ends over the live colors of one endpoint in proportion
/// to its color degrees.
fn split_by_own_colors(own: &[f64], weight: f64, out: &mut [f64]) {
    let total: f64 = own.iter().sum();
    if total > 0.0 {
        let scale = weight / total;
        for (o, &x) in out.iter_mut().zip(own) {
            *o += x * scale;
        }
    }
}

/// Result of one pruned EM run.
#[derive(Debug, Clone)]
pub struct FastRun {
    pub degrees: ColorDegrees,
    pub totals: ColorTotals,
    pub params: OverlapParams,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `(sweep, log-likelihood)` at the start, every audit interval and the end.
    pub trace: Vec<(usize, f64)>,
    /// Live `(vertex, color)` pairs after each sweep.
    pub live_pairs: Vec<usize>,
    /// Edges still swept after each sweep.
    pub live_edges: Vec<usize>,
    pub degenerate_visits: usize,
    pub seed: u64,
}

/// Pruned EM from a random start drawn with `seed`; the start is the same one
/// [`naive::run_em`] uses for that seed.
pub fn run_fast_em(g: &Graph, k: usize, em: &EmConfig, prune: &PruneConfig, seed: u64) -> Result<FastRun> {
    if k == 0 {
        return Err(Error::Config("at least one color is required".into()));
    }
    naive::warn_if_too_many_colors(g, k);
    let mut rng = rng_from_seed(seed);
    let start = naive::initial_color_degrees(g, k, &mut rng);
    let start = ColorDegrees::from_dense(g.n(), k, &start)?;
    run_fast_em_from(g, start, em, prune, seed)
}

/// Pruned EM from the given color degrees.
pub fn run_fast_em_from(
    g: &Graph,
    start: ColorDegrees,
    em: &EmConfig,
    prune: &PruneConfig,
    seed: u64,
) -> Result<FastRun> {
    em.validate()?;
    prune.validate()?;
    if start.n() != g.n() {
        return Err(Error::Dimension(format!(
            "color degrees for {} vertices, graph has {}",
            start.n(),
            g.n()
        )));
    }
    let k = start.k();
    let chunks = if em.deterministic {
        1
    } else if em.threads == 0 {
        rayon::current_num_threads()
    } else {
        em.threads
    };
    let mut state = SweepState::new(g, start, Layout::for_colors(k));
    let mut frozen = FrozenEdges::all_live(g);
    let audit = |state: &SweepState| {
        let d = state.to_color_degrees();
        log_likelihood(g, &theta_from_k(&d, &d.totals()))
    };
    let mut trace = vec![(0, audit(&state))];
    let mut live_pairs = Vec::new();
    let mut live_edges = Vec::new();
    let mut degenerate_visits = 0;
    let mut iterations = 0;
    let mut converged = false;
    let mut edges = state.edge_table(g, &frozen.live);

    while iterations < em.max_iterations {
        let stats = state.sweep(&edges, &frozen.frozen_ends, prune.delta, chunks);
        iterations += 1;
        degenerate_visits += stats.degenerate;

        if prune.freeze_edges {
            let before = frozen.live.len();
            freeze_edges_in_state(g, &state, &mut frozen);
            if frozen.live.len() != before {
                edges = state.edge_table(g, &frozen.live);
            }
        }
        live_pairs.push(state.live_pairs());
        live_edges.push(frozen.live.len());
        if em.audit_interval > 0 && iterations % em.audit_interval == 0 {
            trace.push((iterations, audit(&state)));
        }
        if stats.max_change < em.k_tolerance {
            converged = true;
            break;
        }
    }

    let degrees = state.to_color_degrees();
    let totals = degrees.totals();
    let params = theta_from_k(&degrees, &totals);
    let ll = log_likelihood(g, &params);
    if trace.last().map(|&(it, _)| it) != Some(iterations) {
        trace.push((iterations, ll));
    }
    Ok(FastRun {
        degrees,
        totals,
        params,
        log_likelihood: ll,
        iterations,
        converged,
        trace,
        live_pairs,
        live_edges,
        degenerate_visits,
        seed,
    })
}

fn freeze_edges_in_state(g: &Graph, state: &SweepState, frozen: &mut FrozenEdges) {
    let edge_list = g.edges();
    let live_count = &state.live_count;
    frozen.live.retain(|&p| {
        let e = edge_list[p];
        let (u, v) = (e.u as usize, e.v as usize);
        if live_count[u] == 1 && live_count[v] == 1 {
            if e.is_loop() {
                frozen.frozen_ends[u] += 2.0 * e.count as f64;
            } else {
                frozen.frozen_ends[u] += e.count as f64;
                frozen.frozen_ends[v] += e.count as f64;
            }
            false
        } else {
            true
        }
    });
}

/// `restarts` independent pruned runs; the highest final log-likelihood wins.
pub fn fast_restart_sweep(
    g: &Graph,
    k: usize,
    em: &EmConfig,
    prune: &PruneConfig,
    restarts: usize,
    seed: u64,
) -> Result<RestartSweep<FastRun>> {
    run_restarts(
        restarts,
        seed,
        em.threads,
        |s| run_fast_em(g, k, em, prune, s),
        |run| run.log_likelihood,
    )
}

//! Hard partitions from the link-community fit.
//!
//! The generalized model lets an edge carry a pair of colors `(r, s)` with
//! expected count `theta_ir omega_rs theta_js`, where each column of `theta`
//! sums to one. With `omega` diagonal it is the overlapping model of
//! [`crate::fast`] in another normalization: `theta_ir = k_ir / kappa_r`,
//! `omega_rr = kappa_r`. Rounding each vertex to its largest `theta_ir` gives
//! a partition, which is then polished by greedy single-vertex moves under
//! the degree-corrected blockmodel.
//!
//! The blockmodel objective used for refinement is the profile
//! log-likelihood of Karrer and Newman,
//! `L = sum_rs m_rs ln(m_rs / (kappa_r kappa_s))`, with `m_rs` the number of
//! edge-ends between groups `r` and `s` (twice the edge count when `r = s`)
//! and `kappa_r` the total degree of group `r`.

use std::io::Write;

use rand::Rng;

use crate::error::{Error, Result};
use crate::fast::{run_fast_em, ColorDegrees, PruneConfig};
use crate::graph::Graph;
use crate::membership::{argmax_with_tie, EdgeColoring};
use crate::naive::{self, EmConfig};
use crate::restarts::{rng_from_seed, run_restarts, RestartSweep};

/// Relative weight of the random off-diagonal part of the initial `omega`.
const OMEGA_NOISE: f64 = 0.1;

/// Parameters of the generalized model.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockParams {
    n: usize,
    k: usize,
    theta: Vec<f64>,
    omega: Vec<f64>,
    diagonal: bool,
}

impl BlockParams {
    pub fn new(n: usize, k: usize, theta: Vec<f64>, omega: Vec<f64>, diagonal: bool) -> Result<Self> {
        if theta.len() != n * k || omega.len() != k * k {
            return Err(Error::Dimension(format!(
                "theta of length {} and omega of length {} for {n} vertices and {k} colors",
                theta.len(),
                omega.len()
            )));
        }
        if theta.iter().chain(&omega).any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::Validation("block parameters must be finite and nonnegative".into()));
        }
        for r in 0..k {
            for s in 0..r {
                let (a, b) = (omega[r * k + s], omega[s * k + r]);
                if (a - b).abs() > 1e-9 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::Validation("omega must be symmetric".into()));
                }
                if diagonal && (a != 0.0 || b != 0.0) {
                    return Err(Error::Validation("diagonal model with off-diagonal omega".into()));
                }
            }
        }
        Ok(BlockParams {
            n,
            k,
            theta,
            omega,
            diagonal,
        })
    }

    /// The diagonal model equivalent to a fitted color-degree state.
    pub fn from_color_degrees(k: &ColorDegrees) -> Self {
        let kappa = k.totals();
        let kk = k.k();
        let mut theta = vec![0.0; k.n() * kk];
        for i in 0..k.n() {
            let (cs, vs) = k.row(i);
            for (&z, &x) in cs.iter().zip(vs) {
                theta[i * kk + z as usize] = x / kappa.get(z as usize);
            }
        }
        let mut omega = vec![0.0; kk * kk];
        for z in 0..kk {
            omega[z * kk + z] = kappa.get(z);
        }
        BlockParams {
            n: k.n(),
            k: kk,
            theta,
            omega,
            diagonal: true,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn is_diagonal(&self) -> bool {
        self.diagonal
    }

    #[inline]
    pub fn theta(&self, i: usize, r: usize) -> f64 {
        self.theta[i * self.k + r]
    }

    #[inline]
    pub fn omega(&self, r: usize, s: usize) -> f64 {
        self.omega[r * self.k + s]
    }

    pub fn theta_row(&self, i: usize) -> &[f64] {
        &self.theta[i * self.k..(i + 1) * self.k]
    }

    pub fn omega_matrix(&self) -> &[f64] {
        &self.omega
    }

    /// Soft memberships `S_ir = theta_ir / sum_r theta_ir`; zero rows stay zero.
    pub fn soft_membership(&self, i: usize) -> Vec<f64> {
        let row = self.theta_row(i);
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            row.iter().map(|t| t / total).collect()
        } else {
            vec![0.0; self.k]
        }
    }

    /// Share of the total `omega` mass off the diagonal.
    pub fn off_diagonal_mass(&self) -> f64 {
        let total: f64 = self.omega.iter().sum();
        if total <= 0.0 {
            return 0.0;
        }
        let diag: f64 = (0..self.k).map(|r| self.omega(r, r)).sum();
        (total - diag) / total
    }
}

/// `q_ij(r, s)` for every edge, in [`Graph::edges`] order, with `i` the
/// smaller endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct PairResponsibilities {
    k: usize,
    q: Vec<f64>,
    degenerate: Vec<bool>,
}

impl PairResponsibilities {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edge_count(&self) -> usize {
        self.degenerate.len()
    }

    /// Row-major `K x K` matrix of edge `p`.
    pub fn edge(&self, p: usize) -> &[f64] {
        let kk = self.k * self.k;
        &self.q[p * kk..(p + 1) * kk]
    }

    pub fn is_degenerate(&self, p: usize) -> bool {
        self.degenerate[p]
    }
}

fn check_dims(g: &Graph, p: &BlockParams) -> Result<()> {
    if p.n != g.n() {
        return Err(Error::Dimension(format!(
            "parameters for {} vertices, graph has {}",
            p.n,
            g.n()
        )));
    }
    Ok(())
}

/// Fills `out` with the normalized pair posterior of edge `(u, v)`; returns
/// false (and a uniform matrix) when every pair has zero rate.
fn pair_posterior(p: &BlockParams, u: usize, v: usize, out: &mut [f64]) -> bool {
    let k = p.k;
    let (tu, tv) = (p.theta_row(u), p.theta_row(v));
    let mut denom = 0.0;
    for r in 0..k {
        for s in 0..k {
            let x = tu[r] * p.omega[r * k + s] * tv[s];
            out[r * k + s] = x;
            denom += x;
        }
    }
    if denom > 0.0 && denom.is_finite() {
        out.iter_mut().for_each(|x| *x /= denom);
        true
    } else {
        out.fill(1.0 / (k * k) as f64);
        false
    }
}

/// `q_ij(r, s) = theta_ir omega_rs theta_js / sum_rs theta_ir omega_rs theta_js`.
/// Edges with zero rate get the uniform matrix and are flagged.
pub fn general_e_step(g: &Graph, p: &BlockParams) -> Result<PairResponsibilities> {
    check_dims(g, p)?;
    let kk = p.k * p.k;
    let mut q = vec![0.0; g.edges().len() * kk];
    let mut degenerate = Vec::with_capacity(g.edges().len());
    for (e, out) in g.edges().iter().zip(q.chunks_exact_mut(kk.max(1))) {
        degenerate.push(!pair_posterior(p, e.u as usize, e.v as usize, out));
    }
    Ok(PairResponsibilities {
        k: p.k,
        q,
        degenerate,
    })
}

/// Accumulates one edge's posterior into the theta numerators and omega.
#[inline]
fn accumulate_pair(k: usize, u: usize, v: usize, weight: f64, q: &[f64], num: &mut [f64], omega: &mut [f64]) {
    if u == v {
        for r in 0..k {
            let mut row = 0.0;
            for s in 0..k {
                // A_uu = 2 * count
                let x = 2.0 * weight * q[r * k + s];
                row += x;
                omega[r * k + s] += x;
            }
            num[u * k + r] += row;
        }
    } else {
        for r in 0..k {
            let mut row = 0.0;
            let mut col = 0.0;
            for s in 0..k {
                let a = q[r * k + s];
                let b = q[s * k + r];
                row += a;
                col += b;
                omega[r * k + s] += weight * (a + b);
            }
            num[u * k + r] += weight * row;
            num[v * k + r] += weight * col;
        }
    }
}

fn finish_m_step(n: usize, k: usize, mut num: Vec<f64>, mut omega: Vec<f64>, diagonal: bool) -> BlockParams {
    if diagonal {
        for r in 0..k {
            for s in 0..k {
                if r != s {
                    omega[r * k + s] = 0.0;
                }
            }
        }
    }
    let row_sums: Vec<f64> = (0..k).map(|r| omega[r * k..(r + 1) * k].iter().sum()).collect();
    for i in 0..n {
        for r in 0..k {
            let t = &mut num[i * k + r];
            *t = if row_sums[r] > 0.0 { *t / row_sums[r] } else { 0.0 };
        }
    }
    BlockParams {
        n,
        k,
        theta: num,
        omega,
        diagonal,
    }
}

/// `theta_ir = sum_js A_ij q_ij(r,s) / sum_ijs A_ij q_ij(r,s)` and
/// `omega_rs = sum_ij A_ij q_ij(r,s)`, sums over ordered pairs. With
/// `diagonal`, off-diagonal `omega` is pinned at zero.
pub fn general_m_step(g: &Graph, q: &PairResponsibilities, diagonal: bool) -> Result<BlockParams> {
    if q.edge_count() != g.edges().len() {
        return Err(Error::Dimension(format!(
            "responsibilities for {} edges, graph has {}",
            q.edge_count(),
            g.edges().len()
        )));
    }
    let k = q.k;
    let mut num = vec![0.0; g.n() * k];
    let mut omega = vec![0.0; k * k];
    for (p, e) in g.edges().iter().enumerate() {
        accumulate_pair(k, e.u as usize, e.v as usize, e.count as f64, q.edge(p), &mut num, &mut omega);
    }
    Ok(finish_m_step(g.n(), k, num, omega, diagonal))
}

/// E-step and M-step in one pass, without storing the posteriors.
fn general_sweep(g: &Graph, p: &BlockParams) -> (BlockParams, usize) {
    let k = p.k;
    let mut num = vec![0.0; g.n() * k];
    let mut omega = vec![0.0; k * k];
    let mut q = vec![0.0; k * k];
    let mut degenerate = 0;
    for e in g.edges() {
        let (u, v) = (e.u as usize, e.v as usize);
        if !pair_posterior(p, u, v, &mut q) {
            degenerate += 1;
        }
        accumulate_pair(k, u, v, e.count as f64, &q, &mut num, &mut omega);
    }
    (finish_m_step(g.n(), k, num, omega, p.diagonal), degenerate)
}

/// Log-likelihood of the generalized model, up to the same constants as
/// [`naive::log_likelihood`].
pub fn general_log_likelihood(g: &Graph, p: &BlockParams) -> f64 {
    let k = p.k;
    let mut ll = 0.0;
    for e in g.edges() {
        let (tu, tv) = (p.theta_row(e.u as usize), p.theta_row(e.v as usize));
        let mut rate = 0.0;
        for r in 0..k {
            for s in 0..k {
                rate += tu[r] * p.omega[r * k + s] * tv[s];
            }
        }
        if rate <= 0.0 {
            return f64::NEG_INFINITY;
        }
        ll += 2.0 * e.count as f64 * rate.ln();
    }
    let mut sums = vec![0.0; k];
    for i in 0..p.n {
        for (s, t) in sums.iter_mut().zip(p.theta_row(i)) {
            *s += t;
        }
    }
    for r in 0..k {
        for s in 0..k {
            ll -= p.omega[r * k + s] * sums[r] * sums[s];
        }
    }
    ll
}

/// Result of a generalized EM run.
#[derive(Debug, Clone)]
pub struct BlockEmRun {
    pub params: BlockParams,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
    pub degenerate_visits: usize,
}

/// Generalized EM from `start`; stops like the reference EM.
pub fn run_block_em_from(g: &Graph, start: BlockParams, config: &EmConfig) -> Result<BlockEmRun> {
    check_dims(g, &start)?;
    config.validate()?;
    let mut params = start;
    let mut ll = general_log_likelihood(g, &params);
    let mut trace = vec![ll];
    let mut iterations = 0;
    let mut stable = 0;
    let mut converged = false;
    let mut degenerate_visits = 0;
    while iterations < config.max_iterations {
        let (next, bad) = general_sweep(g, &params);
        degenerate_visits += bad;
        params = next;
        iterations += 1;
        let next_ll = general_log_likelihood(g, &params);
        trace.push(next_ll);
        let change = (next_ll - ll).abs() / next_ll.abs().max(f64::MIN_POSITIVE);
        ll = next_ll;
        if change < config.ll_tolerance {
            stable += 1;
        } else {
            stable = 0;
        }
        if stable >= config.stable_iterations {
            converged = true;
            break;
        }
    }
    Ok(BlockEmRun {
        params,
        log_likelihood: ll,
        iterations,
        converged,
        trace,
        degenerate_visits,
    })
}

/// Random start for the generalized model: the shared overlapping-model start
/// mapped to block form, plus small symmetric off-diagonal `omega` noise.
pub fn initial_block_params<R: Rng + ?Sized>(g: &Graph, k: usize, rng: &mut R) -> BlockParams {
    let dense = naive::initial_color_degrees(g, k, rng);
    let degrees = ColorDegrees::from_dense(g.n(), k, &dense).expect("finite nonnegative by construction");
    let mut p = BlockParams::from_color_degrees(&degrees);
    p.diagonal = false;
    let scale = OMEGA_NOISE * 2.0 * g.m() as f64 / (k * k) as f64;
    for r in 0..k {
        for s in 0..r {
            let x = scale * rng.random::<f64>();
            p.omega[r * k + s] = x;
            p.omega[s * k + r] = x;
        }
    }
    p
}

/// One community per vertex, or `None` for a vertex that takes no part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    k: usize,
    labels: Vec<Option<usize>>,
}

impl Partition {
    pub fn new(k: usize, labels: Vec<Option<usize>>) -> Result<Self> {
        if let Some(bad) = labels.iter().flatten().find(|&&r| r >= k) {
            return Err(Error::Validation(format!("community {bad} out of range for {k} communities")));
        }
        Ok(Partition { k, labels })
    }

    /// Every vertex assigned; `k` is one more than the largest label.
    pub fn from_assignments(labels: &[usize]) -> Self {
        let k = labels.iter().max().map_or(0, |m| m + 1);
        Partition {
            k,
            labels: labels.iter().map(|&r| Some(r)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, i: usize) -> Option<usize> {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for r in self.labels.iter().flatten() {
            sizes[*r] += 1;
        }
        sizes
    }

    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.k];
        for (i, r) in self.labels.iter().enumerate() {
            if let Some(r) = r {
                groups[*r].push(i);
            }
        }
        groups
    }
}

/// Assigns each vertex to its largest `theta_ir`; ties go to the lowest id
/// and are flagged, all-zero rows stay unassigned.
pub fn round_to_partition(p: &BlockParams) -> (Partition, Vec<bool>) {
    let mut labels = Vec::with_capacity(p.n);
    let mut ties = Vec::with_capacity(p.n);
    for i in 0..p.n {
        let row = p.theta_row(i);
        if row.iter().all(|&t| t == 0.0) {
            labels.push(None);
            ties.push(false);
        } else {
            let (best, tie) = argmax_with_tie(row);
            labels.push(Some(best));
            ties.push(tie);
        }
    }
    (Partition { k: p.k, labels }, ties)
}

#[inline]
fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Edge-end counts between groups and group degrees.
struct GroupStats {
    k: usize,
    m: Vec<f64>,
    kappa: Vec<f64>,
}

impl GroupStats {
    fn new(g: &Graph, part: &Partition) -> Self {
        let k = part.k;
        let mut m = vec![0.0; k * k];
        for e in g.edges() {
            if let (Some(r), Some(s)) = (part.get(e.u as usize), part.get(e.v as usize)) {
                let c = e.count as f64;
                if e.is_loop() {
                    m[r * k + r] += 2.0 * c;
                } else {
                    m[r * k + s] += c;
                    m[s * k + r] += c;
                }
            }
        }
        let kappa = (0..k).map(|r| m[r * k..(r + 1) * k].iter().sum()).collect();
        GroupStats { k, m, kappa }
    }

    fn log_likelihood(&self) -> f64 {
        self.m.iter().map(|&x| xlogx(x)).sum::<f64>() - 2.0 * self.kappa.iter().map(|&x| xlogx(x)).sum::<f64>()
    }

    /// Change in the log-likelihood from moving a vertex of degree `d`, with
    /// `ends[s]` edge-ends to other members of group `s` and `loops` ends on
    /// self-loops, from group `r` to group `t`.
    fn move_delta(&self, ends: &[f64], loops: f64, d: f64, r: usize, t: usize) -> f64 {
        let k = self.k;
        let m = |a: usize, b: usize| self.m[a * k + b];
        let mut delta = 0.0;
        for s in 0..k {
            if s == r || s == t || ends[s] == 0.0 {
                continue;
            }
            // m_rs and m_sr lose ends[s], m_ts and m_st gain them
            delta += 2.0 * (xlogx(m(r, s) - ends[s]) - xlogx(m(r, s)));
            delta += 2.0 * (xlogx(m(t, s) + ends[s]) - xlogx(m(t, s)));
        }
        let rr = m(r, r) - 2.0 * ends[r] - loops;
        let tt = m(t, t) + 2.0 * ends[t] + loops;
        let rt = m(r, t) + ends[r] - ends[t];
        delta += xlogx(rr) - xlogx(m(r, r));
        delta += xlogx(tt) - xlogx(m(t, t));
        delta += 2.0 * (xlogx(rt) - xlogx(m(r, t)));
        delta -= 2.0 * (xlogx(self.kappa[r] - d) - xlogx(self.kappa[r]) + xlogx(self.kappa[t] + d) - xlogx(self.kappa[t]));
        delta
    }

    fn apply_move(&mut self, ends: &[f64], loops: f64, d: f64, r: usize, t: usize) {
        let k = self.k;
        for s in 0..k {
            if s == r || s == t {
                continue;
            }
            self.m[r * k + s] -= ends[s];
            self.m[s * k + r] -= ends[s];
            self.m[t * k + s] += ends[s];
            self.m[s * k + t] += ends[s];
        }
        let rt = self.m[r * k + t] + ends[r] - ends[t];
        self.m[r * k + r] -= 2.0 * ends[r] + loops;
        self.m[t * k + t] += 2.0 * ends[t] + loops;
        self.m[r * k + t] = rt;
        self.m[t * k + r] = rt;
        self.kappa[r] -= d;
        self.kappa[t] += d;
    }
}

/// Profile log-likelihood of the degree-corrected blockmodel,
/// `sum_rs m_rs ln(m_rs / (kappa_r kappa_s))` with `0 ln 0 = 0`. Unassigned
/// vertices are left out.
pub fn dcsbm_log_likelihood(g: &Graph, part: &Partition) -> Result<f64> {
    if part.n() != g.n() {
        return Err(Error::Dimension(format!(
            "partition of {} vertices, graph has {}",
            part.n(),
            g.n()
        )));
    }
    Ok(GroupStats::new(g, part).log_likelihood())
}

/// One accepted vertex move.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Move {
    pub vertex: usize,
    pub from: usize,
    pub to: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub partition: Partition,
    pub moves: Vec<Move>,
    /// Log-likelihood before any move and after each accepted move.
    pub trace: Vec<f64>,
}

/// Greedy hill climb: each round applies the single vertex move with the
/// largest likelihood gain (ties to the lowest vertex, then the lowest target
/// community) and stops when no move gains anything.
pub fn vertex_move_refine(g: &Graph, part: &Partition) -> Result<Refinement> {
    if part.n() != g.n() {
        return Err(Error::Dimension(format!(
            "partition of {} vertices, graph has {}",
            part.n(),
            g.n()
        )));
    }
    let mut stats = GroupStats::new(g, part);
    let mut part = part.clone();
    let k = part.k;
    // gains below this are rounding noise in the likelihood
    let threshold = 1e-9 * (2.0 * g.m() as f64).max(1.0);
    let mut ll = stats.log_likelihood();
    let mut trace = vec![ll];
    let mut moves = Vec::new();
    let mut ends = vec![0.0; k];
    if k < 2 {
        return Ok(Refinement {
            partition: part,
            moves,
            trace,
        });
    }
    loop {
        let mut best: Option<Move> = None;
        for i in 0..g.n() {
            let Some(r) = part.get(i) else { continue };
            let (loops, d) = vertex_ends(g, &part, i, &mut ends);
            if d == 0.0 {
                continue;
            }
            for t in 0..k {
                if t == r {
                    continue;
                }
                let delta = stats.move_delta(&ends, loops, d, r, t);
                if delta > threshold && best.is_none_or(|b| delta > b.delta) {
                    best = Some(Move {
                        vertex: i,
                        from: r,
                        to: t,
                        delta,
                    });
                }
            }
        }
        let Some(mv) = best else { break };
        let (loops, d) = vertex_ends(g, &part, mv.vertex, &mut ends);
        stats.apply_move(&ends, loops, d, mv.from, mv.to);
        part.labels[mv.vertex] = Some(mv.to);
        ll += mv.delta;
        trace.push(ll);
        moves.push(mv);
    }
    Ok(Refinement {
        partition: part,
        moves,
        trace,
    })
}

/// Fills `ends[s]` with the edge-ends from `i` to other members of group `s`;
/// returns the loop ends and the degree.
fn vertex_ends(g: &Graph, part: &Partition, i: usize, ends: &mut [f64]) -> (f64, f64) {
    ends.fill(0.0);
    let mut loops = 0.0;
    for (j, c) in g.neighbors(i) {
        if j == i {
            loops += 2.0 * c as f64;
        } else if let Some(s) = part.get(j) {
            ends[s] += c as f64;
        }
    }
    let d = ends.iter().sum::<f64>() + loops;
    (loops, d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonoverlapConfig {
    pub em: EmConfig,
    /// Pruning for the diagonal fit.
    pub prune: PruneConfig,
    /// Fit the model with a full `omega` instead of the diagonal one.
    pub general: bool,
    pub refine: bool,
    pub restarts: usize,
}

impl Default for NonoverlapConfig {
    fn default() -> Self {
        NonoverlapConfig {
            em: EmConfig::default(),
            prune: PruneConfig::default(),
            general: false,
            refine: true,
            restarts: 10,
        }
    }
}

/// Result of one restart of the partition pipeline.
#[derive(Debug, Clone)]
pub struct NonoverlapRun {
    pub partition: Partition,
    pub params: BlockParams,
    /// Partition straight from rounding, before refinement.
    pub rounded: Partition,
    pub ties: Vec<bool>,
    /// Log-likelihood of the continuous fit.
    pub em_log_likelihood: f64,
    pub rounded_log_likelihood: f64,
    /// Blockmodel log-likelihood of the returned partition.
    pub log_likelihood: f64,
    pub iterations: usize,
    pub moves: Vec<Move>,
    pub seed: u64,
}

fn run_once(g: &Graph, k: usize, cfg: &NonoverlapConfig, seed: u64) -> Result<NonoverlapRun> {
    let (params, em_ll, iterations) = if cfg.general {
        let mut rng = rng_from_seed(seed);
        let start = initial_block_params(g, k, &mut rng);
        let run = run_block_em_from(g, start, &cfg.em)?;
        (run.params, run.log_likelihood, run.iterations)
    } else {
        let run = run_fast_em(g, k, &cfg.em, &cfg.prune, seed)?;
        (BlockParams::from_color_degrees(&run.degrees), run.log_likelihood, run.iterations)
    };
    let (rounded, ties) = round_to_partition(&params);
    let rounded_ll = dcsbm_log_likelihood(g, &rounded)?;
    let (partition, moves, ll) = if cfg.refine {
        let refined = vertex_move_refine(g, &rounded)?;
        let ll = dcsbm_log_likelihood(g, &refined.partition)?;
        (refined.partition, refined.moves, ll)
    } else {
        (rounded.clone(), Vec::new(), rounded_ll)
    };
    Ok(NonoverlapRun {
        partition,
        params,
        rounded,
        ties,
        em_log_likelihood: em_ll,
        rounded_log_likelihood: rounded_ll,
        log_likelihood: ll,
        iterations,
        moves,
        seed,
    })
}

/// Fit, round and refine from `cfg.restarts` random starts; the partition
/// with the highest blockmodel log-likelihood wins.
pub fn run_nonoverlap(g: &Graph, k: usize, cfg: &NonoverlapConfig, seed: u64) -> Result<RestartSweep<NonoverlapRun>> {
    if k == 0 {
        return Err(Error::Config("at least one community is required".into()));
    }
    cfg.em.validate()?;
    cfg.prune.validate()?;
    run_restarts(
        cfg.restarts,
        seed,
        cfg.em.threads,
        |s| run_once(g, k, cfg, s),
        |run| run.log_likelihood,
    )
}

/// Per edge, the community `r` with the largest marginal
/// `sum_s q(r,s) + q(s,r)`.
pub fn block_edge_colors(g: &Graph, p: &BlockParams) -> Result<EdgeColoring> {
    check_dims(g, p)?;
    let k = p.k;
    let mut q = vec![0.0; k * k];
    let mut marginal = vec![0.0; k];
    let mut coloring = EdgeColoring {
        colors: Vec::new(),
        ties: Vec::new(),
        degenerate: Vec::new(),
    };
    for e in g.edges() {
        let ok = pair_posterior(p, e.u as usize, e.v as usize, &mut q);
        for r in 0..k {
            marginal[r] = (0..k).map(|s| q[r * k + s] + q[s * k + r]).sum();
        }
        let (best, tie) = argmax_with_tie(&marginal);
        coloring.colors.push(best);
        coloring.ties.push(tie);
        coloring.degenerate.push(!ok);
    }
    Ok(coloring)
}

/// `label community` lines; unassigned vertices get `-`.
pub fn write_partition<W: Write>(g: &Graph, part: &Partition, mut out: W) -> std::io::Result<()> {
    for i in 0..g.n() {
        match part.get(i) {
            Some(r) => writeln!(out, "{} {r}", g.label(i))?,
            None => writeln!(out, "{} -", g.label(i))?,
        }
    }
    Ok(())
}

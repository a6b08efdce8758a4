//! Reference expectation-maximization for the link-community model.
//!
//! This version keeps the propensities `theta[i][z]` and, for every edge, the
//! full posterior color distribution `q_ij(z)`. It evaluates the exact
//! log-likelihood after every iteration and is the yardstick the pruned
//! implementation in [`crate::fast`] is checked against.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::restarts::{rng_from_seed, run_restarts, RestartSweep};

/// Iteration limits, tolerances and parallelism shared by both EM variants.
#[derive(Debug, Clone, PartialEq)]
pub struct EmConfig {
    pub max_iterations: usize,
    /// Relative log-likelihood change below which the reference EM counts an
    /// iteration as stationary.
    pub ll_tolerance: f64,
    /// Largest absolute change in any color degree below which the fast EM
    /// counts a sweep as stationary.
    pub k_tolerance: f64,
    /// Consecutive iterations of small likelihood change the naive EM needs
    /// before stopping.
    pub stable_iterations: usize,
    /// The fast EM records the log-likelihood every this many sweeps.
    pub audit_interval: usize,
    /// Worker threads for restarts and sweeps; `0` uses every core.
    pub threads: usize,
    /// Keep each sweep sequential so results do not depend on `threads`.
    pub deterministic: bool,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            max_iterations: 1_000_000,
            ll_tolerance: 1e-10,
            k_tolerance: 1e-6,
            stable_iterations: 3,
            audit_interval: 100,
            threads: 1,
            deterministic: true,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Config("max-iterations must be positive".into()));
        }
        if !(self.ll_tolerance >= 0.0) || !(self.k_tolerance >= 0.0) {
            return Err(Error::Config("tolerances must be nonnegative".into()));
        }
        if self.stable_iterations == 0 {
            return Err(Error::Config("stable-iterations must be positive".into()));
        }
        Ok(())
    }
}

/// Vertex propensities, an `n x K` row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapParams {
    n: usize,
    k: usize,
    theta: Vec<f64>,
}

impl OverlapParams {
    pub fn new(n: usize, k: usize, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != n * k {
            return Err(Error::Dimension(format!(
                "theta has {} entries, expected {n} x {k}",
                theta.len()
            )));
        }
        if let Some(bad) = theta.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::Validation(format!("theta entry {bad} is not a finite nonnegative number")));
        }
        Ok(OverlapParams { n, k, theta })
    }

    pub fn zeros(n: usize, k: usize) -> Self {
        OverlapParams {
            n,
            k,
            theta: vec![0.0; n * k],
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, i: usize, z: usize) -> f64 {
        self.theta[i * self.k + z]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.theta[i * self.k..(i + 1) * self.k]
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.theta
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.k];
        for row in self.theta.chunks_exact(self.k.max(1)) {
            for (s, t) in sums.iter_mut().zip(row) {
                *s += t;
            }
        }
        sums
    }

    /// `theta[i][z] = k[i][z] / sqrt(kappa[z])` from a dense color-degree
    /// matrix; empty colors give a zero column.
    pub fn from_color_degrees(n: usize, k: usize, degrees: &[f64]) -> Self {
        let mut kappa = vec![0.0; k];
        for row in degrees.chunks_exact(k) {
            for (s, d) in kappa.iter_mut().zip(row) {
                *s += d;
            }
        }
        let scale: Vec<f64> = kappa
            .iter()
            .map(|&s| if s > 0.0 { 1.0 / s.sqrt() } else { 0.0 })
            .collect();
        let theta = degrees
            .chunks_exact(k)
            .flat_map(|row| row.iter().zip(&scale).map(|(d, s)| d * s))
            .collect();
        OverlapParams { n, k, theta }
    }
}

/// Posterior color distributions, one length-`K` vector per entry of
/// [`Graph::edges`]. Stored once per undirected edge, so `q_ij = q_ji`.
#[derive(Debug, Clone, PartialEq)]
pub struct Responsibilities {
    k: usize,
    q: Vec<f64>,
}

impl Responsibilities {
    pub fn new(k: usize, q: Vec<f64>) -> Result<Self> {
        if k == 0 || q.len() % k != 0 {
            return Err(Error::Dimension(format!(
                "{} responsibilities do not split into vectors of length {k}",
                q.len()
            )));
        }
        Ok(Responsibilities { k, q })
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.q.len() / self.k
    }

    /// Color distribution of the `p`-th edge of [`Graph::edges`].
    #[inline]
    pub fn edge(&self, p: usize) -> &[f64] {
        &self.q[p * self.k..(p + 1) * self.k]
    }
}

#[inline]
fn pair_rate(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `sum_ij A_ij log(sum_z theta_iz theta_jz) - sum_ijz theta_iz theta_jz`,
/// over ordered pairs. Returns `-inf` when some edge has zero expected rate.
pub fn log_likelihood(g: &Graph, p: &OverlapParams) -> f64 {
    let mut edge_term = 0.0;
    for e in g.edges() {
        let rate = pair_rate(p.row(e.u as usize), p.row(e.v as usize));
        if !(rate > 0.0) {
            return f64::NEG_INFINITY;
        }
        // both orientations of a pair, or A_ii = 2 for a loop
        edge_term += 2.0 * e.count as f64 * rate.ln();
    }
    let expected: f64 = p.column_sums().iter().map(|s| s * s).sum();
    edge_term - expected
}

fn check_dims(g: &Graph, p: &OverlapParams) -> Result<()> {
    if p.n() != g.n() {
        return Err(Error::Dimension(format!(
            "parameters for {} vertices, graph has {}",
            p.n(),
            g.n()
        )));
    }
    if p.k() == 0 {
        return Err(Error::Config("at least one color is required".into()));
    }
    Ok(())
}

/// Exact posterior `q_ij(z) = theta_iz theta_jz / sum_z' theta_iz' theta_jz'`.
pub fn e_step(g: &Graph, p: &OverlapParams) -> Result<Responsibilities> {
    check_dims(g, p)?;
    let k = p.k();
    let mut q = vec![0.0; g.edges().len() * k];
    for (e, out) in g.edges().iter().zip(q.chunks_exact_mut(k)) {
        let (a, b) = (p.row(e.u as usize), p.row(e.v as usize));
        let denom = pair_rate(a, b);
        if !(denom > 0.0) {
            return Err(Error::DegenerateEdge {
                u: e.u as usize,
                v: e.v as usize,
            });
        }
        for z in 0..k {
            out[z] = a[z] * b[z] / denom;
        }
    }
    Ok(Responsibilities { k, q })
}

/// Like [`e_step`], but an edge with zero rate gets a uniform distribution.
/// Returns the number of such edges.
pub(crate) fn e_step_lenient(g: &Graph, p: &OverlapParams) -> (Responsibilities, usize) {
    let k = p.k();
    let mut q = vec![0.0; g.edges().len() * k];
    let mut degenerate = 0;
    for (e, out) in g.edges().iter().zip(q.chunks_exact_mut(k)) {
        let (a, b) = (p.row(e.u as usize), p.row(e.v as usize));
        let denom = pair_rate(a, b);
        if denom > 0.0 && denom.is_finite() {
            for z in 0..k {
                out[z] = a[z] * b[z] / denom;
            }
        } else {
            degenerate += 1;
            out.fill(1.0 / k as f64);
        }
    }
    (Responsibilities { k, q }, degenerate)
}

/// Expected color degrees `k_iz = sum_j A_ij q_ij(z)` as a dense `n x K` matrix.
pub fn expected_color_degrees(g: &Graph, q: &Responsibilities) -> Result<Vec<f64>> {
    if q.edge_count() != g.edges().len() {
        return Err(Error::Dimension(format!(
            "{} responsibility vectors for {} edges",
            q.edge_count(),
            g.edges().len()
        )));
    }
    let k = q.k();
    let mut deg = vec![0.0; g.n() * k];
    for (p, e) in g.edges().iter().enumerate() {
        let w = e.weight();
        let qe = q.edge(p);
        let u = e.u as usize * k;
        for z in 0..k {
            deg[u + z] += w * qe[z];
        }
        if !e.is_loop() {
            let v = e.v as usize * k;
            for z in 0..k {
                deg[v + z] += w * qe[z];
            }
        }
    }
    Ok(deg)
}

/// `theta_iz = sum_j A_ij q_ij(z) / sqrt(sum_ij A_ij q_ij(z))`.
pub fn m_step(g: &Graph, q: &Responsibilities) -> Result<OverlapParams> {
    let deg = expected_color_degrees(g, q)?;
    Ok(OverlapParams::from_color_degrees(g.n(), q.k(), &deg))
}

/// Random starting color degrees shared by both EM variants: propensities
/// drawn uniformly from (0, 1), pushed through one E and M step.
pub fn initial_color_degrees<R: Rng + ?Sized>(g: &Graph, k: usize, rng: &mut R) -> Vec<f64> {
    let n = g.n();
    let theta: Vec<f64> = (0..n * k)
        .map(|idx| {
            if g.is_isolated(idx / k) {
                0.0
            } else {
                // open interval keeps every start strictly positive
                loop {
                    let x: f64 = rng.random();
                    if x > 0.0 {
                        break x;
                    }
                }
            }
        })
        .collect();
    let start = OverlapParams { n, k, theta };
    let (q, _) = e_step_lenient(g, &start);
    expected_color_degrees(g, &q).expect("dimensions agree by construction")
}

/// Result of one EM run.
#[derive(Debug, Clone)]
pub struct EmRun {
    pub params: OverlapParams,
    pub responsibilities: Responsibilities,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood after the initialization and after every iteration.
    pub trace: Vec<f64>,
    /// Edge visits that hit a zero rate and were reset to uniform.
    pub degenerate_resets: usize,
    pub seed: u64,
}

pub(crate) fn warn_if_too_many_colors(g: &Graph, k: usize) {
    if k as u64 > g.m() {
        log::warn!(
            "{k} colors for {} edges: at least {} colors will be empty",
            g.m(),
            k as u64 - g.m()
        );
    }
}

/// Runs the reference EM from a random start drawn with `seed`.
pub fn run_em(g: &Graph, k: usize, config: &EmConfig, seed: u64) -> Result<EmRun> {
    if k == 0 {
        return Err(Error::Config("at least one color is required".into()));
    }
    config.validate()?;
    warn_if_too_many_colors(g, k);
    let mut rng = rng_from_seed(seed);
    let start = initial_color_degrees(g, k, &mut rng);
    run_em_from(g, OverlapParams::from_color_degrees(g.n(), k, &start), config, seed)
}

/// Runs the reference EM from the given propensities.
pub fn run_em_from(g: &Graph, start: OverlapParams, config: &EmConfig, seed: u64) -> Result<EmRun> {
    check_dims(g, &start)?;
    config.validate()?;
    let mut params = start;
    let mut ll = log_likelihood(g, &params);
    let mut trace = vec![ll];
    let mut degenerate_resets = 0;
    let mut stable = 0;
    let mut iterations = 0;
    let mut converged = false;
    let mut q;
    loop {
        let (next_q, bad) = e_step_lenient(g, &params);
        degenerate_resets += bad;
        q = next_q;
        params = m_step(g, &q)?;
        iterations += 1;
        let next_ll = log_likelihood(g, &params);
        trace.push(next_ll);
        let change = (next_ll - ll).abs() / next_ll.abs().max(f64::MIN_POSITIVE);
        ll = next_ll;
        if change < config.ll_tolerance || (next_ll.is_finite() && change == 0.0) {
            stable += 1;
        } else {
            stable = 0;
        }
        if stable >= config.stable_iterations {
            converged = true;
            break;
        }
        if iterations >= config.max_iterations {
            break;
        }
    }
    // report the posterior that belongs to the final parameters
    let (responsibilities, bad) = e_step_lenient(g, &params);
    degenerate_resets += bad;
    Ok(EmRun {
        params,
        responsibilities,
        log_likelihood: ll,
        iterations,
        converged,
        trace,
        degenerate_resets,
        seed,
    })
}

/// `restarts` independent runs; the one with the highest final
/// log-likelihood wins.
pub fn restart_sweep(
    g: &Graph,
    k: usize,
    config: &EmConfig,
    restarts: usize,
    seed: u64,
) -> Result<RestartSweep<EmRun>> {
    run_restarts(
        restarts,
        seed,
        config.threads,
        |s| run_em(g, k, config, s),
        |run| run.log_likelihood,
    )
}

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand_distr::Poisson;

use super::truth::GroundTruth;
use crate::error::{Error, Result};
use crate::graph::{EdgeRecord, Graph};
use crate::restarts::rng_from_seed;

/// Two overlapping communities: vertices `0..x` are in the first only,
/// `x..x+y` in the second only and the last `z` in both.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub x: usize,
    pub y: usize,
    pub z: usize,
    /// Expected degree of every vertex.
    pub k: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// `z` overlap vertices, the rest split evenly (the first community gets
    /// the odd one out).
    pub fn symmetric(n: usize, z: usize, k: f64, seed: u64) -> Self {
        let rest = n.saturating_sub(z);
        SyntheticSpec {
            n,
            x: rest - rest / 2,
            y: rest / 2,
            z,
            k,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.x + self.y + self.z != self.n {
            return Err(Error::Config(format!(
                "x + y + z = {} but n = {}",
                self.x + self.y + self.z,
                self.n
            )));
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::Config(format!("expected degree must be positive, got {}", self.k)));
        }
        if self.x + self.z == 0 || self.y + self.z == 0 {
            return Err(Error::Config("both communities need at least one member".into()));
        }
        Ok(())
    }

    /// Per-vertex propensities for the two colors.
    fn propensities(&self) -> (Vec<f64>, Vec<f64>) {
        let k = self.k;
        let s1 = (k * (self.x as f64 + self.z as f64 / 2.0)).sqrt();
        let s2 = (k * (self.y as f64 + self.z as f64 / 2.0)).sqrt();
        let mut t1 = vec![0.0; self.n];
        let mut t2 = vec![0.0; self.n];
        for i in 0..self.n {
            if i < self.x {
                t1[i] = k / s1;
            } else if i < self.x + self.y {
                t2[i] = k / s2;
            } else {
                t1[i] = k / (2.0 * s1);
                t2[i] = k / (2.0 * s2);
            }
        }
        (t1, t2)
    }
}

/// Draws a multigraph from the link-community model with the propensities of
/// `spec`: the number of color-`z` edges is Poisson with mean
/// `(sum_i theta_iz)^2 / 2` and both ends are picked with probability
/// proportional to `theta_iz`. Each vertex has expected degree `spec.k`.
pub fn generate_two_community(spec: &SyntheticSpec) -> Result<(Graph, GroundTruth)> {
    spec.validate()?;
    let mut rng = rng_from_seed(spec.seed);
    let (t1, t2) = spec.propensities();
    let mut edges = Vec::new();
    for theta in [&t1, &t2] {
        let total: f64 = theta.iter().sum();
        let mean = total * total / 2.0;
        let count = Poisson::new(mean)
            .map_err(|e| Error::Config(format!("edge count distribution: {e}")))?
            .sample(&mut rng) as usize;
        let pick = WeightedIndex::new(theta.iter()).map_err(|e| Error::Config(format!("vertex weights: {e}")))?;
        for _ in 0..count {
            let u = pick.sample(&mut rng) as u32;
            let v = pick.sample(&mut rng) as u32;
            edges.push(EdgeRecord::new(u, v, 1));
        }
    }
    let g = Graph::from_edges(spec.n, edges)?;
    let memberships = (0..spec.n)
        .map(|i| {
            if i < spec.x {
                vec![0]
            } else if i < spec.x + spec.y {
                vec![1]
            } else {
                vec![0, 1]
            }
        })
        .collect();
    Ok((g, GroundTruth::new(2, memberships)?))
}

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use super::metrics::{fraction_correct, jaccard_overlap};
use super::synthetic::{generate_two_community, SyntheticSpec};
use crate::error::{Error, Result};
use crate::fast::{fast_restart_sweep, PruneConfig};
use crate::membership::extract_cover;
use crate::naive::EmConfig;
use crate::restarts::derive_seed;

/// Parameter varied along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Expected degree `k`, with a fixed overlap split evenly.
    Degree,
    /// Size `x` of the first pure group, with fixed overlap and degree.
    Balance,
    /// Overlap size `z`, pure groups equal, fixed degree.
    Overlap,
}

impl SweepAxis {
    pub fn default_grid(self) -> Vec<f64> {
        match self {
            SweepAxis::Degree => vec![1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0],
            SweepAxis::Balance => vec![4750.0, 4000.0, 3000.0, 2000.0, 1000.0, 500.0, 0.0],
            SweepAxis::Overlap => vec![0.0, 500.0, 1000.0, 2000.0, 3000.0, 4000.0, 5000.0, 6000.0, 8000.0],
        }
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "degree-k" | "degree" | "k" => Ok(SweepAxis::Degree),
            "balance-x/y" | "balance" | "x" => Ok(SweepAxis::Balance),
            "overlap-z" | "overlap" | "z" => Ok(SweepAxis::Overlap),
            _ => Err(Error::Config(format!(
                "unknown sweep axis {s:?}; expected degree-k, balance-x/y or overlap-z"
            ))),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::Degree => "degree-k",
            SweepAxis::Balance => "balance-x/y",
            SweepAxis::Overlap => "overlap-z",
        })
    }
}

/// `a,b,c` or `start:stop:step` (inclusive of `stop` up to rounding).
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("bad grid {text:?}"));
    let parts: Vec<&str> = text.split(':').collect();
    let grid = if parts.len() == 3 {
        let [start, stop, step] = [parts[0], parts[1], parts[2]].map(|p| p.trim().parse::<f64>());
        let (start, stop, step) = (start.map_err(|_| bad())?, stop.map_err(|_| bad())?, step.map_err(|_| bad())?);
        if !(step > 0.0) || stop < start {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| start + i as f64 * step).collect()
    } else {
        text.split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?
    };
    if grid.is_empty() {
        return Err(bad());
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    pub n: usize,
    /// Degree used when the axis is not the degree.
    pub degree: f64,
    /// Overlap used when the axis is not the overlap.
    pub overlap: usize,
    pub reps: usize,
    pub restarts: usize,
    pub seed: u64,
    pub em: EmConfig,
    pub prune: PruneConfig,
    /// Worker threads for the repetitions; `0` uses every core.
    pub threads: usize,
}

impl SweepSpec {
    /// The settings of the published tests: `n = 10000`, `z = 500`, `k = 10`
    /// off-axis, twenty restarts.
    pub fn new(axis: SweepAxis) -> Self {
        SweepSpec {
            axis,
            grid: axis.default_grid(),
            n: 10_000,
            degree: 10.0,
            overlap: 500,
            reps: 100,
            restarts: 20,
            seed: 0,
            em: EmConfig::default(),
            prune: PruneConfig::default(),
            threads: 1,
        }
    }

    fn point(&self, value: f64, seed: u64) -> Result<SyntheticSpec> {
        let spec = match self.axis {
            SweepAxis::Degree => SyntheticSpec::symmetric(self.n, self.overlap, value, seed),
            SweepAxis::Overlap => {
                if value < 0.0 || value.fract() != 0.0 || value as usize > self.n {
                    return Err(Error::Config(format!("overlap {value} is not a vertex count in 0..={}", self.n)));
                }
                SyntheticSpec::symmetric(self.n, value as usize, self.degree, seed)
            }
            SweepAxis::Balance => {
                let rest = self.n.saturating_sub(self.overlap);
                if value < 0.0 || value.fract() != 0.0 || value as usize > rest {
                    return Err(Error::Config(format!("group size {value} is not a vertex count in 0..={rest}")));
                }
                let x = value as usize;
                SyntheticSpec {
                    n: self.n,
                    x,
                    y: rest - x,
                    z: self.overlap,
                    k: self.degree,
                    seed,
                }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// One line of a score table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub mean_fraction_correct: f64,
    pub stderr_fraction_correct: f64,
    pub mean_jaccard: f64,
    pub stderr_jaccard: f64,
    pub reps: usize,
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// For every grid value, fits `reps` generated networks with two colors and
/// `restarts` starts each and averages fraction-correct and overlap Jaccard.
pub fn run_benchmark_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.grid.is_empty() || spec.reps == 0 || spec.restarts == 0 {
        return Err(Error::Config("a sweep needs a grid, repetitions and restarts".into()));
    }
    let mut em = spec.em.clone();
    em.threads = 1;
    em.deterministic = true;
    let mut jobs = Vec::new();
    for (p, &value) in spec.grid.iter().enumerate() {
        let point_seed = derive_seed(spec.seed, p as u64);
        for r in 0..spec.reps {
            jobs.push((p, spec.point(value, derive_seed(point_seed, r as u64))?));
        }
    }
    let fit = |synthetic: &SyntheticSpec| -> Result<(f64, f64)> {
        let (g, truth) = generate_two_community(synthetic)?;
        let sweep = fast_restart_sweep(&g, 2, &em, &spec.prune, spec.restarts, derive_seed(synthetic.seed, u64::MAX))?;
        let cover = extract_cover(&g, &sweep.best.degrees)?;
        Ok((fraction_correct(&truth, &cover), jaccard_overlap(&truth, &cover)))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let scores: Vec<Result<(f64, f64)>> = pool.install(|| jobs.par_iter().map(|(_, s)| fit(s)).collect());
    let mut per_point = vec![(Vec::new(), Vec::new()); spec.grid.len()];
    for ((p, _), result) in jobs.iter().zip(scores) {
        let (fc, j) = result?;
        per_point[*p].0.push(fc);
        per_point[*p].1.push(j);
    }
    Ok(spec
        .grid
        .iter()
        .zip(per_point)
        .map(|(&value, (fc, j))| {
            let (mf, sf) = mean_and_stderr(&fc);
            let (mj, sj) = mean_and_stderr(&j);
            SweepRow {
                axis_value: value,
                mean_fraction_correct: mf,
                stderr_fraction_correct: sf,
                mean_jaccard: mj,
                stderr_jaccard: sj,
                reps: fc.len(),
            }
        })
        .collect())
}

/// Comma-separated table with a header row.
pub fn write_table<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "axis-value,mean-fraction-correct,stderr,mean-jaccard,stderr,reps")?;
    for r in rows {
        writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6},{}",
            r.axis_value, r.mean_fraction_correct, r.stderr_fraction_correct, r.mean_jaccard, r.stderr_jaccard, r.reps
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1,2.5, 4").unwrap(), vec![1.0, 2.5, 4.0]);
        assert_eq!(parse_grid("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(parse_grid("1:0:1").is_err());
        assert!(parse_grid("a").is_err());
    }

    #[test]
    fn axis_names() {
        assert_eq!("overlap-z".parse::<SweepAxis>().unwrap(), SweepAxis::Overlap);
        assert!("width".parse::<SweepAxis>().is_err());
        assert_eq!(SweepAxis::Balance.to_string(), "balance-x/y");
    }

    #[test]
    fn easy_point_scores_one() {
        let spec = SweepSpec {
            grid: vec![30.0],
            n: 200,
            overlap: 0,
            reps: 1,
            restarts: 5,
            seed: 3,
            ..SweepSpec::new(SweepAxis::Degree)
        };
        let rows = run_benchmark_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].mean_fraction_correct, 1.0);
        assert_eq!(rows[0].mean_jaccard, 1.0);
        let mut buf = Vec::new();
        write_table(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 2);
    }

    #[test]
    fn balance_out_of_range() {
        let spec = SweepSpec {
            grid: vec![9600.0],
            ..SweepSpec::new(SweepAxis::Balance)
        };
        assert!(run_benchmark_sweep(&spec).is_err());
    }
}

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::membership::Cover;
use crate::nonoverlap::Partition;

/// Known communities of each vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    k: usize,
    memberships: Vec<Vec<usize>>,
    /// Names of the communities, when read from a file.
    pub names: Vec<String>,
    /// Mixing parameter of an LFR benchmark, if the file records one.
    pub mixing: Option<f64>,
}

impl GroundTruth {
    pub fn new(k: usize, memberships: Vec<Vec<usize>>) -> Result<Self> {
        let memberships = normalize(k, memberships)?;
        Ok(GroundTruth {
            k,
            memberships,
            names: (0..k).map(|z| z.to_string()).collect(),
            mixing: None,
        })
    }

    pub fn from_cover(cover: &Cover) -> Self {
        GroundTruth::new(cover.k(), cover.communities().to_vec()).expect("cover ids are in range")
    }

    pub fn from_partition(part: &Partition) -> Self {
        let memberships = part.labels().iter().map(|r| r.iter().copied().collect()).collect();
        GroundTruth::new(part.k(), memberships).expect("partition ids are in range")
    }

    pub fn n(&self) -> usize {
        self.memberships.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn memberships(&self) -> &[Vec<usize>] {
        &self.memberships
    }

    pub fn communities_of(&self, i: usize) -> &[usize] {
        &self.memberships[i]
    }
}

fn normalize(k: usize, memberships: Vec<Vec<usize>>) -> Result<Vec<Vec<usize>>> {
    memberships
        .into_iter()
        .map(|mut set| {
            set.sort_unstable();
            set.dedup();
            match set.iter().find(|&&z| z >= k) {
                Some(bad) => Err(Error::Validation(format!("community {bad} out of range for {k} communities"))),
                None => Ok(set),
            }
        })
        .collect()
}

/// Reads `label community [community ...]` lines, which covers both the LFR
/// `vertex community` files and multi-community cover files. Community names
/// are arbitrary tokens, numbered in order of first appearance. Repeated
/// labels accumulate. Labels absent from `g` are skipped with a warning.
/// A comment of the form `# mixing 0.3` (or `# mu 0.3`) sets the mixing
/// parameter.
pub fn read_ground_truth(text: &str, g: &Graph) -> Result<GroundTruth> {
    read_ground_truth_for(text, g.labels())
}

/// As [`read_ground_truth`], for vertices known only by their labels. A
/// community token `-` marks a vertex with no community.
pub fn read_ground_truth_for(text: &str, labels: &[String]) -> Result<GroundTruth> {
    let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut names: Vec<String> = Vec::new();
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut memberships = vec![Vec::new(); labels.len()];
    let mut mixing = None;
    let mut skipped = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let mut parts = comment.split_whitespace();
            if let (Some("mixing" | "mu"), Some(value)) = (parts.next(), parts.next()) {
                mixing = Some(value.parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: format!("bad mixing parameter {value:?}"),
                })?);
            }
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label = tokens.next().expect("nonempty line");
        let comms: Vec<&str> = tokens.collect();
        if comms.is_empty() {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("vertex {label:?} has no community"),
            });
        }
        let Some(&i) = index.get(label) else {
            skipped += 1;
            continue;
        };
        for name in comms.into_iter().filter(|&c| c != "-") {
            let id = *ids.entry(name.to_string()).or_insert_with(|| {
                names.push(name.to_string());
                names.len() - 1
            });
            memberships[i].push(id);
        }
    }
    if skipped > 0 {
        log::warn!("{skipped} ground-truth lines name vertices that are not in the graph");
    }
    let k = names.len();
    Ok(GroundTruth {
        k,
        memberships: normalize(k, memberships)?,
        names,
        mixing,
    })
}

impl GroundTruth {
    pub fn read(path: impl AsRef<Path>, g: &Graph) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        read_ground_truth(&text, g)
    }
}

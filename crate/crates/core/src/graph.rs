//! Undirected multigraphs in compressed adjacency form.
//!
//! Adjacency values follow the usual convention for undirected networks:
//! `A_ij` is the number of edges between distinct vertices `i` and `j`, while
//! a self-loop contributes `A_ii = 2` so that every edge adds two to the sum of
//! degrees.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// One undirected edge with its multiplicity. Stored with `u <= v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeRecord {
    pub u: u32,
    pub v: u32,
    pub count: u32,
}

impl EdgeRecord {
    pub fn new(u: u32, v: u32, count: u32) -> Self {
        let (u, v) = if u <= v { (u, v) } else { (v, u) };
        EdgeRecord { u, v, count }
    }

    #[inline]
    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }

    /// Number of edge-ends this record places at each endpoint, i.e. `A_uv`
    /// for distinct endpoints and `A_uu` for a self-loop.
    #[inline]
    pub fn weight(&self) -> f64 {
        if self.is_loop() {
            2.0 * self.count as f64
        } else {
            self.count as f64
        }
    }
}

/// How vertex tokens in an edge list become vertex indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Treat each line as a directed arc and collapse `(u,v)`/`(v,u)` pairs
    /// into a single undirected edge.
    pub symmetrize: bool,
    /// `None` compacts arbitrary labels to `0..n` in first-seen order.
    /// `Some(base)` requires integer ids and uses `id - base` directly, so
    /// ids that never appear become isolated vertices.
    pub index_base: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    labels: Vec<String>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    counts: Vec<u32>,
    degrees: Vec<u64>,
    edges: Vec<EdgeRecord>,
    m: u64,
}

impl Graph {
    /// Builds a graph on `n` vertices labelled `0..n`.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = EdgeRecord>) -> Result<Self> {
        let labels = (0..n).map(|i| i.to_string()).collect();
        Self::with_labels(labels, edges)
    }

    /// Builds a graph whose vertex `i` carries `labels[i]`. Repeated records
    /// for the same vertex pair accumulate multiplicity.
    pub fn with_labels(
        labels: Vec<String>,
        edges: impl IntoIterator<Item = EdgeRecord>,
    ) -> Result<Self> {
        let n = labels.len();
        if n > u32::MAX as usize {
            return Err(Error::Validation(format!("{n} vertices exceed the u32 index space")));
        }
        let mut merged: Vec<EdgeRecord> = Vec::new();
        for e in edges {
            let e = EdgeRecord::new(e.u, e.v, e.count);
            if e.v as usize >= n {
                return Err(Error::VertexOutOfRange {
                    vertex: e.v as usize,
                    n,
                });
            }
            if e.count == 0 {
                return Err(Error::Validation(format!(
                    "edge ({}, {}) has zero multiplicity",
                    e.u, e.v
                )));
            }
            merged.push(e);
        }
        merged.sort_unstable_by_key(|e| (e.u, e.v));
        merged.dedup_by(|next, kept| {
            if next.u == kept.u && next.v == kept.v {
                kept.count += next.count;
                true
            } else {
                false
            }
        });

        let mut row_len = vec![0usize; n];
        for e in &merged {
            row_len[e.u as usize] += 1;
            if !e.is_loop() {
                row_len[e.v as usize] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for len in &row_len {
            offsets.push(offsets.last().unwrap() + len);
        }
        let total = *offsets.last().unwrap();
        let mut neighbors = vec![0u32; total];
        let mut counts = vec![0u32; total];
        let mut cursor = offsets[..n].to_vec();
        let mut degrees = vec![0u64; n];
        let mut m = 0u64;
        for e in &merged {
            let (u, v) = (e.u as usize, e.v as usize);
            neighbors[cursor[u]] = e.v;
            counts[cursor[u]] = e.count;
            cursor[u] += 1;
            m += e.count as u64;
            if e.is_loop() {
                degrees[u] += 2 * e.count as u64;
            } else {
                neighbors[cursor[v]] = e.u;
                counts[cursor[v]] = e.count;
                cursor[v] += 1;
                degrees[u] += e.count as u64;
                degrees[v] += e.count as u64;
            }
        }
        for i in 0..n {
            let (lo, hi) = (offsets[i], offsets[i + 1]);
            let mut row: Vec<(u32, u32)> = neighbors[lo..hi]
                .iter()
                .copied()
                .zip(counts[lo..hi].iter().copied())
                .collect();
            row.sort_unstable();
            for (slot, (j, c)) in row.into_iter().enumerate() {
                neighbors[lo + slot] = j;
                counts[lo + slot] = c;
            }
        }

        Ok(Graph {
            labels,
            offsets,
            neighbors,
            counts,
            degrees,
            edges: merged,
            m,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Number of undirected edges counted with multiplicity; a self-loop
    /// counts once.
    #[inline]
    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn degree(&self, i: usize) -> Result<u64> {
        self.degrees
            .get(i)
            .copied()
            .ok_or(Error::VertexOutOfRange { vertex: i, n: self.n() })
    }

    #[inline]
    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    /// Distinct undirected vertex pairs, sorted, with `u <= v`.
    #[inline]
    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    /// `(neighbor, multiplicity)` pairs of `i`, sorted by neighbor. A self-loop
    /// appears once with its loop count.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        let (lo, hi) = (self.offsets[i], self.offsets[i + 1]);
        self.neighbors[lo..hi]
            .iter()
            .zip(&self.counts[lo..hi])
            .map(|(&j, &c)| (j as usize, c))
    }

    pub fn multiplicity(&self, i: usize, j: usize) -> u32 {
        let (lo, hi) = (self.offsets[i], self.offsets[i + 1]);
        match self.neighbors[lo..hi].binary_search(&(j as u32)) {
            Ok(p) => self.counts[lo + p],
            Err(_) => 0,
        }
    }

    /// Adjacency matrix element with the `A_ii = 2` self-loop convention.
    pub fn adjacency(&self, i: usize, j: usize) -> u64 {
        let c = self.multiplicity(i, j) as u64;
        if i == j {
            2 * c
        } else {
            c
        }
    }

    #[inline]
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn is_isolated(&self, i: usize) -> bool {
        self.degrees[i] == 0
    }

    pub fn isolated_vertices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.is_isolated(i)).collect()
    }

    pub fn label_index(&self) -> HashMap<&str, usize> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect()
    }
}

/// Parses an edge list: two vertex tokens per line plus an optional positive
/// multiplicity. Blank lines and lines starting with `#` are skipped.
pub fn load_edge_list(text: &str, options: &LoadOptions) -> Result<Graph> {
    let mut ids = VertexIds::new(options.index_base);
    // (source, target) -> number of lines naming that ordered pair
    let mut arcs: HashMap<(u32, u32), u32> = HashMap::new();
    let mut order: Vec<(u32, u32)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = lineno + 1;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 2 && tokens.len() != 3 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 2 or 3 columns, found {}", tokens.len()),
            });
        }
        let count = match tokens.get(2) {
            Some(tok) => match tok.parse::<u32>() {
                Ok(c) if c > 0 => c,
                _ => {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("multiplicity {tok:?} is not a positive integer"),
                    })
                }
            },
            None => 1,
        };
        let u = ids.resolve(tokens[0], lineno)?;
        let v = ids.resolve(tokens[1], lineno)?;
        let key = (u, v);
        let slot = arcs.entry(key).or_insert(0);
        if *slot == 0 {
            order.push(key);
        }
        *slot += count;
    }

    let mut records = Vec::with_capacity(order.len());
    let mut done = std::collections::HashSet::new();
    for &(u, v) in &order {
        let forward = arcs[&(u, v)];
        if !options.symmetrize || u == v {
            records.push(EdgeRecord::new(u, v, forward));
            continue;
        }
        if !done.insert((u.min(v), u.max(v))) {
            continue;
        }
        // a reciprocated arc pair is one undirected edge
        let backward = arcs.get(&(v, u)).copied().unwrap_or(0);
        records.push(EdgeRecord::new(u, v, forward.max(backward)));
    }

    Graph::with_labels(ids.into_labels(), records)
}

pub fn read_edge_list(path: impl AsRef<Path>, options: &LoadOptions) -> Result<Graph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_edge_list(&text, options)
}

struct VertexIds {
    base: Option<u64>,
    by_label: HashMap<String, u32>,
    labels: Vec<String>,
}

impl VertexIds {
    fn new(base: Option<u64>) -> Self {
        VertexIds {
            base,
            by_label: HashMap::new(),
            labels: Vec::new(),
        }
    }

    fn resolve(&mut self, token: &str, line: usize) -> Result<u32> {
        if let Ok(x) = token.parse::<i64>() {
            if x < 0 {
                return Err(Error::Validation(format!(
                    "line {line}: negative vertex id {x}"
                )));
            }
        }
        match self.base {
            None => {
                if let Some(&id) = self.by_label.get(token) {
                    return Ok(id);
                }
                let id = self.labels.len() as u32;
                self.by_label.insert(token.to_string(), id);
                self.labels.push(token.to_string());
                Ok(id)
            }
            Some(base) => {
                let x: u64 = token.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("vertex id {token:?} is not an integer"),
                })?;
                if x < base {
                    return Err(Error::Validation(format!(
                        "line {line}: vertex id {x} is below the index base {base}"
                    )));
                }
                let idx = x - base;
                if idx >= u32::MAX as u64 {
                    return Err(Error::Validation(format!("line {line}: vertex id {x} too large")));
                }
                let idx = idx as usize;
                while self.labels.len() <= idx {
                    let next = self.labels.len() as u64 + base;
                    self.labels.push(next.to_string());
                }
                Ok(idx as u32)
            }
        }
    }

    fn into_labels(self) -> Vec<String> {
        self.labels
    }
}

/// Writes `label label [count]` lines that reload to the same graph.
///
/// Edges are ordered so that every vertex is first mentioned in index order,
/// which makes first-seen compaction reproduce the original numbering.
pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> std::io::Result<()> {
    let n = g.n();
    let mut emitted = vec![false; g.edges().len()];
    let edge_index: HashMap<(u32, u32), usize> = g
        .edges()
        .iter()
        .enumerate()
        .map(|(p, e)| ((e.u, e.v), p))
        .collect();
    let mut seen = vec![false; n];
    let mut ordered = Vec::with_capacity(g.edges().len());

    for k in 0..n {
        if seen[k] || g.is_isolated(k) {
            continue;
        }
        // prefer an edge back to an already-mentioned vertex, then a loop,
        // then an edge to the next fresh vertex
        let intro = g
            .neighbors(k)
            .find(|&(j, _)| j < k && seen[j])
            .map(|(j, _)| (j as u32, k as u32))
            .or_else(|| (g.multiplicity(k, k) > 0).then_some((k as u32, k as u32)))
            .or_else(|| {
                g.neighbors(k)
                    .find(|&(j, _)| j == k + 1)
                    .map(|(j, _)| (k as u32, j as u32))
            })
            .or_else(|| g.neighbors(k).next().map(|(j, _)| (k as u32, j as u32)));
        if let Some((a, b)) = intro {
            let key = if a <= b { (a, b) } else { (b, a) };
            let p = edge_index[&key];
            if !emitted[p] {
                emitted[p] = true;
                ordered.push((a, b, g.edges()[p].count));
            }
            seen[a as usize] = true;
            seen[b as usize] = true;
        }
    }
    for (p, e) in g.edges().iter().enumerate() {
        if !emitted[p] {
            ordered.push((e.u, e.v, e.count));
        }
    }

    let mut line = String::new();
    for (a, b, c) in ordered {
        line.clear();
        let _ = write!(line, "{} {}", g.label(a as usize), g.label(b as usize));
        if c > 1 {
            let _ = write!(line, " {c}");
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// The induced subgraph on the largest connected component, with the map from
/// old vertex ids to new ones. Ties go to the component containing the
/// smallest vertex id. Labels are carried over.
pub fn largest_component(g: &Graph) -> Result<(Graph, Vec<Option<usize>>)> {
    let n = g.n();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut component = vec![usize::MAX; n];
    let mut best = (0usize, 0usize);
    let mut queue = VecDeque::new();
    let mut next_id = 0;
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let id = next_id;
        next_id += 1;
        component[start] = id;
        queue.push_back(start);
        let mut size = 0;
        while let Some(v) = queue.pop_front() {
            size += 1;
            for (w, _) in g.neighbors(v) {
                if component[w] == usize::MAX {
                    component[w] = id;
                    queue.push_back(w);
                }
            }
        }
        if size > best.1 {
            best = (id, size);
        }
    }

    let mut old_to_new = vec![None; n];
    let mut labels = Vec::with_capacity(best.1);
    for v in 0..n {
        if component[v] == best.0 {
            old_to_new[v] = Some(labels.len());
            labels.push(g.label(v).to_string());
        }
    }
    let edges = g.edges().iter().filter_map(|e| {
        let u = old_to_new[e.u as usize]?;
        let v = old_to_new[e.v as usize]?;
        Some(EdgeRecord::new(u as u32, v as u32, e.count))
    });
    let sub = Graph::with_labels(labels, edges)?;
    Ok((sub, old_to_new))
}

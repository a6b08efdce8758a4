//! Community detection with a Poisson link-community model.
//!
//! Edges of an undirected network are treated as carrying one of `K` hidden
//! colors; vertex `i` has propensity `theta[i][z]` for color `z`, and the
//! number of color-`z` edges between `i` and `j` is Poisson with mean
//! `theta[i][z] * theta[j][z]`. Fitting the propensities by maximum likelihood
//! with expectation-maximization yields overlapping communities: a vertex
//! belongs to every color it has, on average, more than one edge of.
//!
//! * [`graph`] loads and stores undirected multigraphs.
//! * [`naive`] is the reference EM with explicit edge responsibilities.
//! * [`fast`] is the production EM over color degrees with pruning.
//! * [`membership`] turns a fit into covers, edge colorings and result files.
//! * [`nonoverlap`] derives hard partitions and refines them under the
//!   degree-corrected blockmodel.
//! * [`bench`] generates synthetic test networks and scores results.
//! * [`cli`] implements the `linkcomm` command-line tool.

pub mod bench;
pub mod cli;
pub mod error;
pub mod fast;
pub mod graph;
pub mod membership;
pub mod naive;
pub mod nonoverlap;
mod restarts;

pub use error::{Error, Result};
pub use fast::{run_fast_em, ColorDegrees, ColorTotals, FastRun, PruneConfig};
pub use graph::{largest_component, load_edge_list, read_edge_list, write_edge_list, EdgeRecord, Graph, LoadOptions};
pub use membership::{edge_colors, extract_cover, Cover, EdgeColoring};
pub use naive::{log_likelihood, restart_sweep, run_em, EmConfig, EmRun, OverlapParams, Responsibilities};
pub use nonoverlap::{run_nonoverlap, BlockParams, NonoverlapConfig, Partition};
pub use restarts::{derive_seed, RestartSweep};

//! Fixtures shared by the benchmarks.

use gpal_core::data::generate_sbm;
use gpal_core::{PreparedGraph, SbmConfig};

/// The default 300-node, 4-class SBM used throughout the benchmarks.
pub fn sbm_graph(num_nodes: usize, seed: u64) -> PreparedGraph {
    let config = SbmConfig {
        num_nodes,
        seed,
        ..SbmConfig::default()
    };
    PreparedGraph::new(generate_sbm(&config).expect("default SBM config is valid"))
}

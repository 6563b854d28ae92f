//! Synthetic graph generation and the graph and checkpoint file formats.

mod checkpoint;
mod graph_file;
mod locate;
mod sbm;

pub use checkpoint::{load_checkpoint, parse_checkpoint, save_checkpoint, write_checkpoint, Checkpoint, CheckpointMeta, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use graph_file::{load_graph, parse_graph, save_graph, write_graph};
pub use sbm::{generate_sbm, generate_sbm_with_centroids, SbmConfig};

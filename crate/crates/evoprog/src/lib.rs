//! Battery capacity-fade prognostics built on [`evoprog_core`]: capacity CSV
//! input, seeded synthetic fixtures, model snapshots, and the experiment
//! pipeline behind the `evoprog` command.

pub mod config;
pub mod dataio;
pub mod export;
pub mod pipeline;
pub mod snapshot;
pub mod synth;

pub use config::{Algorithm, ExperimentConfig};
pub use dataio::{load_capacity, Battery, DataError};
pub use pipeline::{run, RunReport};

//! Command-line pipeline around the `corana` library: ingest a script or
//! table, decompose it, project supplementary elements, cluster the row
//! sequence, run the style test and emit CSV/JSON/SVG artifacts.

pub mod config;
pub mod error;
pub mod pipeline;
pub mod plot;

pub use config::{ClusterInput, InputSource, PipelineConfig};
pub use error::CliError;
pub use pipeline::{run_pipeline, RunReport};
pub use plot::{emit_dendrogram_svg, emit_plane_svg, PlaneRender};

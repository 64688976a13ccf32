//! File formats: JSON scene descriptions, trace persistence (binary and CSV),
//! and PGM heat-map export.

mod heatmap;
mod scene;
mod trace_file;

pub use heatmap::{HeatmapError, Scaling, export_heatmap};
pub use scene::{SceneError, load_scene, parse_scene, serialize_scene};
pub use trace_file::{
    TRACE_MAGIC, TRACE_VERSION, TraceFileError, TraceFormat, decode_trace, encode_trace,
    read_trace, trace_from_csv, trace_to_csv, write_trace,
};

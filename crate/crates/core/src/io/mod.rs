//! File formats for sequences, velocity fields, datasets and reports.

mod binary;
mod csv;
mod dataset;
mod pgm;

pub use binary::{
    decode_field, decode_sequence, encode_field, encode_sequence, read_field, read_sequence, write_field,
    write_sequence, DTYPE_F32, FIELD_MAGIC, SEQUENCE_MAGIC,
};
pub use csv::{parse_metrics_csv, write_metrics_csv, AGGREGATE_NAME, METRICS_HEADER};
pub use dataset::{
    dataset_dirs, dataset_name, read_dataset, read_json, read_manifest, write_dataset, write_dataset_set, write_json,
    Manifest, INFO_FILE, MANIFEST_FILE, SEQUENCE_FILE, TRUTH_FILE,
};
pub use pgm::{export_pgm, scale_pixel, write_pgm, PgmScaling};

/// Writes `bytes` to `path` through a temporary sibling file.
pub fn write_bytes(path: impl AsRef<std::path::Path>, bytes: &[u8]) -> crate::Result<()> {
    binary::write_atomic(path.as_ref(), bytes)
}

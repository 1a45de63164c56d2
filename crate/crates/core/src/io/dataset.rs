use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::binary::{read_field, read_sequence, write_atomic, write_field, write_sequence};
use crate::error::{Error, Result};
use crate::scenesim::{Dataset, DatasetInfo, Scenario};

pub const SEQUENCE_FILE: &str = "seq.iseq";
pub const TRUTH_FILE: &str = "truth.vfld";
pub const INFO_FILE: &str = "info.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Index of a directory of datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: Scenario,
    pub base_seed: u64,
    pub dims: [usize; 3],
    /// Subdirectory names, in generation order.
    pub datasets: Vec<String>,
}

pub fn dataset_name(scenario: Scenario, index: usize) -> String {
    format!("{}_{index:02}", scenario.name())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn write_dataset(dir: impl AsRef<Path>, d: &Dataset) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    write_sequence(dir.join(SEQUENCE_FILE), &d.seq)?;
    write_field(dir.join(TRUTH_FILE), &d.truth_field)?;
    write_json(&dir.join(INFO_FILE), &d.info)
}

pub fn read_dataset(dir: impl AsRef<Path>) -> Result<Dataset> {
    let dir = dir.as_ref();
    let seq = read_sequence(dir.join(SEQUENCE_FILE))?;
    let truth_field = read_field(dir.join(TRUTH_FILE))?;
    let info: DatasetInfo = read_json(&dir.join(INFO_FILE))?;
    if seq.dims() != info.dims || truth_field.dims() != info.dims {
        return Err(Error::Malformed(format!(
            "dataset files in {} disagree on dimensions",
            dir.display()
        )));
    }
    Ok(Dataset { seq, truth_field, info })
}

/// Writes each dataset to its own subdirectory plus a manifest.
pub fn write_dataset_set(dir: impl AsRef<Path>, base_seed: u64, datasets: &[Dataset]) -> Result<Manifest> {
    let dir = dir.as_ref();
    let first = datasets
        .first()
        .ok_or_else(|| Error::InvalidArgument("no datasets to write".into()))?;
    fs::create_dir_all(dir)?;
    let mut names = Vec::with_capacity(datasets.len());
    for (i, d) in datasets.iter().enumerate() {
        let name = dataset_name(d.scenario(), i);
        write_dataset(dir.join(&name), d)?;
        names.push(name);
    }
    let manifest = Manifest {
        scenario: first.scenario(),
        base_seed,
        dims: first.info.dims,
        datasets: names,
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

pub fn read_manifest(dir: impl AsRef<Path>) -> Result<Manifest> {
    read_json(&dir.as_ref().join(MANIFEST_FILE))
}

/// Dataset directories under `dir`: the manifest entries, or `dir` itself.
pub fn dataset_dirs(dir: impl AsRef<Path>) -> Result<Vec<(String, PathBuf)>> {
    let dir = dir.as_ref();
    if dir.join(MANIFEST_FILE).exists() {
        let m = read_manifest(dir)?;
        return Ok(m.datasets.into_iter().map(|n| (n.clone(), dir.join(n))).collect());
    }
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    Ok(vec![(name, dir.to_path_buf())])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenesim::{generate, SimOptions};

    #[test]
    fn dataset_round_trip() {
        let tmp = tempfile::tempdir().unwrap();
        let d = generate(5, Scenario::Tf, [16, 16, 4], &SimOptions::default()).unwrap();
        write_dataset(tmp.path().join("a"), &d).unwrap();
        let back = read_dataset(tmp.path().join("a")).unwrap();
        assert_eq!(back.seq, d.seq);
        assert_eq!(back.truth_field, d.truth_field);
        assert_eq!(back.info, d.info);
    }

    #[test]
    fn set_round_trip_through_manifest() {
        let tmp = tempfile::tempdir().unwrap();
        let ds: Vec<Dataset> = (0..3)
            .map(|i| generate(i, Scenario::Tu, [8, 8, 2], &SimOptions::default()).unwrap())
            .collect();
        let m = write_dataset_set(tmp.path(), 9, &ds).unwrap();
        assert_eq!(m.datasets, vec!["TU_00", "TU_01", "TU_02"]);
        assert_eq!(read_manifest(tmp.path()).unwrap(), m);
        let dirs = dataset_dirs(tmp.path()).unwrap();
        assert_eq!(dirs.len(), 3);
        assert_eq!(read_dataset(&dirs[1].1).unwrap().seq, ds[1].seq);
        assert_eq!(dataset_dirs(tmp.path().join("TU_00")).unwrap()[0].0, "TU_00");
    }
}

use std::path::{Path, PathBuf};

use stpef::io::{self, read_sequence, SEQUENCE_FILE};
use stpef::{Error, ImageSequence};

/// One sequence to process, loaded on demand.
pub struct Input {
    pub name: String,
    /// Output goes to a per-dataset subdirectory.
    pub nested: bool,
    path: PathBuf,
}

impl Input {
    pub fn sequence(&self) -> Result<ImageSequence, Error> {
        read_sequence(&self.path)
    }
}

/// Expands a `.iseq` file, a dataset directory or a directory of datasets.
pub fn resolve_inputs(path: &Path) -> Result<Vec<Input>, Error> {
    if path.is_file() {
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("input").to_string();
        return Ok(vec![Input {
            name,
            nested: false,
            path: path.to_path_buf(),
        }]);
    }
    if !path.is_dir() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{} does not exist", path.display()),
        )));
    }
    let dirs = io::dataset_dirs(path)?;
    // Mirrors how `metrics` pairs predictions with a truth set.
    let nested = dirs.len() > 1 || path.join(io::MANIFEST_FILE).exists();
    Ok(dirs
        .into_iter()
        .map(|(name, dir)| Input {
            name,
            nested,
            path: dir.join(SEQUENCE_FILE),
        })
        .collect())
}

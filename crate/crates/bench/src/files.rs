//! Tensor files on disk. Byte layouts are documented in
//! `npqn_core::problems::io`.

use std::path::{Path, PathBuf};

use npqn_core::problems::io::{read_csv, read_dtns, read_idx_images, write_dtns};
use npqn_core::DenseTensor;

use crate::config::FileFormat;

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: npqn_core::Error },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FileError + '_ {
    move |source| FileError::Io { path: path.to_path_buf(), source }
}

pub fn load_tensor(path: &Path, format: FileFormat) -> Result<DenseTensor, FileError> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    let parsed = match format {
        FileFormat::Dtns => read_dtns(&bytes),
        FileFormat::Idx => read_idx_images(&bytes),
        FileFormat::Csv => match std::str::from_utf8(&bytes) {
            Ok(text) => read_csv(text, None),
            Err(e) => Err(npqn_core::Error::Format { format: "CSV", offset: e.valid_up_to(), reason: "invalid UTF-8".into() }),
        },
    };
    parsed.map_err(|source| FileError::Parse { path: path.to_path_buf(), source })
}

pub fn save_dtns(path: &Path, t: &DenseTensor) -> Result<(), FileError> {
    std::fs::write(path, write_dtns(t)).map_err(io_err(path))
}

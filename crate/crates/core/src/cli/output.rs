use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use super::{CliError, Format};

/// Writes `path` by filling a temporary file in the same directory and renaming it.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> Result<(), CliError>) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = NamedTempFile::new_in(dir)?;
    fill(tmp.as_file_mut())?;
    tmp.as_file_mut().flush()?;
    tmp.persist(path).map_err(|e| CliError::Io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

pub fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("report types serialize");
    v.push(b'\n');
    v
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    write_atomic(path, |w| Ok(w.write_all(&json_bytes(value))?))
}

pub fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// Prints `rows` as pretty JSON or as a CSV table.
pub fn print_rows<T: Serialize>(out: &mut dyn Write, format: Format, rows: &[T]) -> Result<(), CliError> {
    match format {
        Format::Json => out.write_all(&json_bytes(rows))?,
        Format::Csv => {
            let mut wr = csv::Writer::from_writer(out);
            for r in rows {
                wr.serialize(r).map_err(csv_err)?;
            }
            wr.flush()?;
        }
    }
    Ok(())
}

/// Creates the output directory if one was requested.
pub fn out_dir(out: &Option<PathBuf>) -> Result<Option<&Path>, CliError> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            Ok(Some(dir.as_path()))
        }
        None => Ok(None),
    }
}

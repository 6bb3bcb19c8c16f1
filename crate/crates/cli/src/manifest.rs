//! `manifest.json`: what a run read, what it resolved and what it wrote.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a, I: Serialize, P: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    input: &'a I,
    params: &'a P,
    files: Vec<FileEntry>,
}

pub fn sha256_file(path: &Path) -> Result<(u64, String), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok((bytes.len() as u64, hex::encode(Sha256::digest(&bytes))))
}

/// Lists `files` (sorted by name, paths relative to `dir`) with their hashes.
/// Holds no timestamps or absolute paths, so reruns are byte-identical.
pub fn write<I: Serialize, P: Serialize>(
    dir: &Path,
    command: &str,
    input: &I,
    params: &P,
    files: &[PathBuf],
) -> Result<PathBuf, CliError> {
    let mut entries = files
        .iter()
        .map(|p| {
            let (bytes, sha256) = sha256_file(p)?;
            let name = p.strip_prefix(dir).unwrap_or(p).to_string_lossy().into_owned();
            Ok(FileEntry { name, bytes, sha256 })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    entries.sort_by(|a, b| a.name.cmp(&b.name));
    let m = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        input,
        params,
        files: entries,
    };
    let path = dir.join(MANIFEST);
    stet::io::write_report_json(&path, &m)?;
    Ok(path)
}

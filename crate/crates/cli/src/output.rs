//! Report envelopes and append-only, versioned output files.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Undetermined,
    Violation,
    Partial,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Pass | Status::Undetermined => 0,
            Status::Violation => 1,
            Status::Partial => 3,
        }
    }
}

/// Every JSON report has this shape; `input` echoes the parsed input file.
#[derive(Debug, Serialize)]
pub struct Envelope<T: Serialize> {
    pub schema_version: u32,
    pub command: &'static str,
    pub input: serde_json::Value,
    pub seed: Option<u64>,
    pub status: Status,
    pub result: T,
}

pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn new(root: PathBuf) -> Result<OutputDir, CliError> {
        fs::create_dir_all(&root).map_err(|e| CliError::io(&root, e))?;
        Ok(OutputDir { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Writes `files` (extension, contents) as `{stem}.v{N}.{ext}` with the
    /// smallest N free for every extension. Existing files are never
    /// touched.
    pub fn write_versioned(&self, stem: &str, files: &[(&str, String)]) -> Result<Vec<PathBuf>, CliError> {
        let path = |n: u32, ext: &str| self.root.join(format!("{stem}.v{n}.{ext}"));
        let mut n = 1;
        while files.iter().any(|(ext, _)| path(n, ext).exists()) {
            n += 1;
        }
        let mut written = Vec::with_capacity(files.len());
        for (ext, contents) in files {
            let p = path(n, ext);
            let mut f = OpenOptions::new().write(true).create_new(true).open(&p).map_err(|e| CliError::io(&p, e))?;
            f.write_all(contents.as_bytes()).map_err(|e| CliError::io(&p, e))?;
            written.push(p);
        }
        Ok(written)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

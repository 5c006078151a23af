//! Inputs, output files and the run manifest.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use multifrac::Error;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(msg) => write!(f, "{msg}"),
        }
    }
}

impl CliError {
    /// 2 for empty or unreachable levels, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_infeasibility() => 2,
            _ => 1,
        }
    }
}

/// Run-wide settings after flags, manifest and defaults are merged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub seed: u64,
    pub workers: usize,
    pub nmax: Option<usize>,
    pub tol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub config_path: String,
    /// The config as read, so the manifest alone can repeat the run.
    pub config_text: String,
    pub settings: Settings,
    pub resolved: Value,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
    pub wall_time_seconds: f64,
}

/// The config text to run, and the manifest it came from if the path
/// pointed at one.
pub struct Input {
    pub path: PathBuf,
    pub text: String,
    pub hash: FileHash,
    pub manifest: Option<Manifest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Reads a config file, or the config embedded in a manifest.
pub fn load_input(path: &Path) -> Result<Input, CliError> {
    let raw = fs::read(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let hash = FileHash {
        path: path.display().to_string(),
        sha256: sha256_hex(&raw),
        bytes: raw.len(),
    };
    let text = String::from_utf8(raw).map_err(|_| Error::config(1, "config is not valid UTF-8"))?;
    if text.trim_start().starts_with('{') {
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|e| Error::config(e.line(), format!("unreadable manifest: {e}")))?;
        return Ok(Input {
            path: path.to_path_buf(),
            text: manifest.config_text.clone(),
            hash,
            manifest: Some(manifest),
        });
    }
    Ok(Input {
        path: path.to_path_buf(),
        text,
        hash,
        manifest: None,
    })
}

/// Files written by one run, in order.
pub struct Output {
    dir: PathBuf,
    files: Vec<FileHash>,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        self.files.push(FileHash {
            path: name.to_string(),
            sha256: sha256_hex(contents.as_bytes()),
            bytes: contents.len(),
        });
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn files(&self) -> &[FileHash] {
        &self.files
    }

    /// Writes the manifest itself; it is not listed among the outputs.
    pub fn finish(self, manifest: &Manifest) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(manifest).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        let path = self.dir.join(MANIFEST);
        fs::write(&path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_abc() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(Error::config(3, "x")).exit_code(), 1);
        assert_eq!(CliError::from(Error::LevelNotWitnessed).exit_code(), 2);
        assert_eq!(CliError::Io("x".into()).exit_code(), 1);
    }
}

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::commands::Command;
use super::config::RunConfig;
use crate::error::{Error, Result};

pub const PROVENANCE_FILE: &str = "provenance.json";

/// Everything needed to re-run a command and check its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub command: Command,
    pub config: RunConfig,
    pub config_hash: String,
    pub seed: u64,
    /// Crate name to version.
    pub modules: BTreeMap<String, String>,
    /// Absolute input path to SHA-256.
    pub inputs: BTreeMap<PathBuf, String>,
    /// Output path relative to the output directory, to SHA-256.
    pub outputs: BTreeMap<PathBuf, String>,
}

impl Provenance {
    pub fn write(&self, out_dir: &Path) -> Result<()> {
        let f = std::fs::File::create(out_dir.join(PROVENANCE_FILE))?;
        serde_json::to_writer_pretty(f, self)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        Ok(serde_json::from_reader(std::fs::File::open(path)?)?)
    }
}

pub fn modules() -> BTreeMap<String, String> {
    BTreeMap::from([(
        env!("CARGO_PKG_NAME").to_string(),
        env!("CARGO_PKG_VERSION").to_string(),
    )])
}

pub fn sha256_file(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    Ok(hex::encode(Sha256::digest(std::fs::read(path)?)))
}

pub fn hash_inputs(paths: &[PathBuf]) -> Result<BTreeMap<PathBuf, String>> {
    paths.iter().map(|p| Ok((p.clone(), sha256_file(p)?))).collect()
}

/// Hashes every file under `dir` except the provenance record itself.
pub fn hash_outputs(dir: &Path) -> Result<BTreeMap<PathBuf, String>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d)? {
            let p = entry?.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).expect("walked below dir").to_path_buf();
                if rel != Path::new(PROVENANCE_FILE) {
                    out.insert(rel, sha256_file(&p)?);
                }
            }
        }
    }
    Ok(out)
}

/// Result of re-running a recorded command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub original: PathBuf,
    pub identical: bool,
    pub missing: Vec<PathBuf>,
    pub extra: Vec<PathBuf>,
    pub differing: Vec<PathBuf>,
}

pub fn compare_outputs(
    original: &Path,
    expected: &BTreeMap<PathBuf, String>,
    actual: &BTreeMap<PathBuf, String>,
) -> ReplayReport {
    let missing: Vec<PathBuf> = expected.keys().filter(|k| !actual.contains_key(*k)).cloned().collect();
    let extra: Vec<PathBuf> = actual.keys().filter(|k| !expected.contains_key(*k)).cloned().collect();
    let differing: Vec<PathBuf> = expected
        .iter()
        .filter(|(k, v)| actual.get(*k).is_some_and(|a| a != *v))
        .map(|(k, _)| k.clone())
        .collect();
    ReplayReport {
        original: original.to_path_buf(),
        identical: missing.is_empty() && extra.is_empty() && differing.is_empty(),
        missing,
        extra,
        differing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_hashes_skip_record_and_recurse() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("sub")).unwrap();
        std::fs::write(dir.path().join("a.csv"), "1").unwrap();
        std::fs::write(dir.path().join("sub/b.csv"), "2").unwrap();
        std::fs::write(dir.path().join(PROVENANCE_FILE), "{}").unwrap();
        let h = hash_outputs(dir.path()).unwrap();
        let keys: Vec<_> = h.keys().cloned().collect();
        assert_eq!(keys, vec![PathBuf::from("a.csv"), PathBuf::from("sub/b.csv")]);
        assert_eq!(
            h[Path::new("a.csv")],
            "6b86b273ff34fce19d6b804eff5a3f5747ada4eaa22f1d49c01e52ddb7875b4b"
        );
    }

    #[test]
    fn comparison_classifies_differences() {
        let e = BTreeMap::from([
            (PathBuf::from("a"), "1".to_string()),
            (PathBuf::from("b"), "2".to_string()),
        ]);
        let a = BTreeMap::from([
            (PathBuf::from("a"), "1".to_string()),
            (PathBuf::from("c"), "3".to_string()),
        ]);
        let r = compare_outputs(Path::new("x"), &e, &a);
        assert!(!r.identical);
        assert_eq!(r.missing, vec![PathBuf::from("b")]);
        assert_eq!(r.extra, vec![PathBuf::from("c")]);
        assert!(compare_outputs(Path::new("x"), &e, &e).identical);
    }
}

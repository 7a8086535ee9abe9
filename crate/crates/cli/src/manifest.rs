//! Run manifests and staged outputs.
//!
//! A stage writes into `<out>/.staging/<stage>/`. On success the files move
//! into `<out>` and `<out>/<stage>.manifest.json` records what went in and
//! what came out; on failure the staging directory is moved under
//! `<out>/failed/<stage>/` so partial outputs never mix with good ones.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileHash {
    pub fn of(path: &Path) -> std::io::Result<Self> {
        Ok(Self {
            path: path.to_path_buf(),
            sha256: sha256_file(path)?,
        })
    }
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = reader.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub stage: String,
    pub tool_version: String,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
    pub seeds: Vec<u64>,
    pub backends: BTreeMap<String, String>,
    pub parameters: serde_json::Value,
    pub duration_ms: u128,
}

pub fn manifest_path(out: &Path, stage: &str) -> PathBuf {
    out.join(format!("{stage}.manifest.json"))
}

impl Manifest {
    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(std::io::Error::other)
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        text.push('\n');
        sdohkg::backend::atomic_write(path, text.as_bytes())
    }

    /// Files whose current hash differs from the recorded one, or that are
    /// gone, with the reason.
    pub fn verify(&self) -> Vec<(PathBuf, String)> {
        self.inputs
            .iter()
            .chain(&self.outputs)
            .filter_map(|f| match sha256_file(&f.path) {
                Ok(h) if h == f.sha256 => None,
                Ok(h) => Some((f.path.clone(), format!("hash {h} != recorded {}", f.sha256))),
                Err(e) => Some((f.path.clone(), e.to_string())),
            })
            .collect()
    }
}

/// Output files of one stage run, written to a private directory first.
pub struct Staging {
    out: PathBuf,
    stage: String,
    dir: PathBuf,
    files: Vec<String>,
}

impl Staging {
    pub fn begin(out: &Path, stage: &str) -> std::io::Result<Self> {
        let dir = out.join(".staging").join(stage);
        if dir.exists() {
            fs::remove_dir_all(&dir)?;
        }
        fs::create_dir_all(&dir)?;
        Ok(Self {
            out: out.to_path_buf(),
            stage: stage.to_string(),
            dir,
            files: Vec::new(),
        })
    }

    /// Where to write output `name` (relative to the output directory).
    pub fn file(&mut self, name: &str) -> std::io::Result<PathBuf> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Ok(path)
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> std::io::Result<()> {
        let path = self.file(name)?;
        fs::write(path, contents)
    }

    /// Moves the staged files into place and returns their final paths.
    pub fn commit(self) -> std::io::Result<Vec<PathBuf>> {
        let mut done = Vec::with_capacity(self.files.len());
        for name in &self.files {
            let from = self.dir.join(name);
            let to = self.out.join(name);
            if let Some(parent) = to.parent() {
                fs::create_dir_all(parent)?;
            }
            fs::rename(&from, &to)?;
            done.push(to);
        }
        fs::remove_dir_all(&self.dir)?;
        Ok(done)
    }

    /// Moves whatever was written under `failed/<stage>/`.
    pub fn quarantine(self) -> std::io::Result<PathBuf> {
        let target = self.out.join("failed").join(&self.stage);
        if target.exists() {
            fs::remove_dir_all(&target)?;
        }
        fs::create_dir_all(target.parent().expect("has parent"))?;
        fs::rename(&self.dir, &target)?;
        Ok(target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha_of_known_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("abc");
        fs::write(&p, b"abc").unwrap();
        assert_eq!(
            sha256_file(&p).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn commit_and_quarantine() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = Staging::begin(dir.path(), "x").unwrap();
        s.write("a.txt", "1").unwrap();
        s.write("sub/b.txt", "2").unwrap();
        let done = s.commit().unwrap();
        assert_eq!(done.len(), 2);
        assert_eq!(fs::read_to_string(dir.path().join("sub/b.txt")).unwrap(), "2");

        let mut s = Staging::begin(dir.path(), "y").unwrap();
        s.write("partial.txt", "half").unwrap();
        let q = s.quarantine().unwrap();
        assert_eq!(q, dir.path().join("failed/y"));
        assert!(q.join("partial.txt").exists());
        assert!(!dir.path().join("partial.txt").exists());
    }

    #[test]
    fn verify_flags_changes() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("in.txt");
        fs::write(&p, "v1").unwrap();
        let m = Manifest {
            version: MANIFEST_VERSION,
            stage: "t".into(),
            tool_version: "0".into(),
            inputs: vec![FileHash::of(&p).unwrap()],
            outputs: vec![],
            seeds: vec![],
            backends: BTreeMap::new(),
            parameters: serde_json::Value::Null,
            duration_ms: 0,
        };
        assert!(m.verify().is_empty());
        fs::write(&p, "v2").unwrap();
        assert_eq!(m.verify().len(), 1);
    }
}

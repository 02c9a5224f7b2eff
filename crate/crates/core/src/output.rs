//! Output plumbing: atomic file writes and the run-metadata header.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Write `bytes` to a temporary file next to `path`, then rename it into
/// place. A failure leaves no partially written file at `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Provenance stamped into every report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMeta {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
}

impl RunMeta {
    /// `config` is any serializable description of the run; its canonical
    /// JSON is hashed.
    pub fn new<C: Serialize>(command: &str, seed: u64, config: &C) -> Self {
        let json = serde_json::to_vec(config).unwrap_or_default();
        let digest = Sha256::digest(&json);
        Self {
            tool: "readlab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            config_hash: hex::encode(&digest[..8]),
        }
    }

    /// One-line comment header for CSV/TSV/text outputs.
    pub fn comment_line(&self) -> String {
        format!(
            "# {} {} command={} seed={} config={}\n",
            self.tool, self.version, self.command, self.seed, self.config_hash
        )
    }
}

/// Serialize as pretty JSON with a trailing newline.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("report types serialize");
    v.push(b'\n');
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn meta_hash_depends_on_config() {
        let a = RunMeta::new("score", 0, &("x", 1));
        let b = RunMeta::new("score", 0, &("x", 1));
        let c = RunMeta::new("score", 0, &("x", 2));
        assert_eq!(a, b);
        assert_ne!(a.config_hash, c.config_hash);
        assert!(a.comment_line().starts_with("# readlab "));
    }
}

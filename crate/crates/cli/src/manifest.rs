//! Run manifests: what produced a file, from which inputs, and how long it took.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: Vec<String>,
    pub seed: Option<u64>,
    pub precision_digits: Option<u32>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub wall_seconds: f64,
    pub version: String,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    #[cfg(test)]
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// `out.txt` is described by `out.txt.manifest.json`.
pub fn path_for(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}

pub fn digest_file(path: &Path) -> std::io::Result<FileDigest> {
    let bytes = std::fs::read(path)?;
    Ok(FileDigest { path: path.display().to_string(), sha256: Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect() })
}

/// One-line JSON error record for stderr.
pub fn error_record(kind: &str, message: &str) -> String {
    serde_json::json!({ "error": kind, "message": message }).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_roundtrip() {
        let m = RunManifest {
            command: "omega".into(),
            arguments: vec!["--mode".into(), "zero".into()],
            seed: Some(7),
            precision_digits: Some(50),
            inputs: vec![],
            outputs: vec![FileDigest { path: "w.txt".into(), sha256: "ab".into() }],
            wall_seconds: 0.25,
            version: "0.1.0".into(),
        };
        assert_eq!(RunManifest::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn sibling_path() {
        assert_eq!(path_for(Path::new("out/w.txt")), PathBuf::from("out/w.txt.manifest.json"));
    }

    #[test]
    fn error_record_is_json() {
        let v: serde_json::Value = serde_json::from_str(&error_record("parse", "bad \"x\"")).unwrap();
        assert_eq!(v["error"], "parse");
    }
}

//! Run provenance. A manifest pins everything that determines an output
//! file: the command, the resolved parameter values, digests of the files
//! read, and the seed. Two runs with equal manifests (wall time aside)
//! produce byte-equal outputs.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

use crate::commands::CliError;

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    /// Resolved parameter snapshot after defaults, config file, and flags.
    pub config: BTreeMap<String, String>,
    /// Input path -> SHA-256 of its bytes.
    pub inputs: BTreeMap<String, String>,
    pub seed: u64,
    pub version: String,
    /// Informational; excluded from any equality contract.
    pub wall_time_s: f64,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError {
        code: 2,
        msg: format!("cannot read {}: {e}", path.display()),
    })?;
    let mut h = Sha256::new();
    h.update(&bytes);
    Ok(format!("{:x}", h.finalize()))
}

/// Writes `text` to `out` plus the sidecar `<out>.manifest.json`, or prints
/// to stdout when no output path was given.
pub fn emit(out: Option<&Path>, text: &str, m: &RunManifest) -> Result<(), CliError> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => {
            let io_err = |e: std::io::Error, p: &Path| CliError {
                code: 2,
                msg: format!("cannot write {}: {e}", p.display()),
            };
            std::fs::write(path, text).map_err(|e| io_err(e, path))?;
            let mut mp = path.as_os_str().to_owned();
            mp.push(".manifest.json");
            let mp = Path::new(&mp);
            let body = serde_json::to_string_pretty(m).expect("manifest serializes");
            std::fs::write(mp, body).map_err(|e| io_err(e, mp))?;
            Ok(())
        }
    }
}

//! Run manifests: enough to reproduce an artifact directory byte for byte.

use std::path::{Path, PathBuf};

use anyhow::Context;
use sha2::{Digest, Sha256};

/// Resolves an output directory against `CREWSCHED_OUT_ROOT` when relative,
/// and creates it.
pub fn resolve_out_dir(out: &Path) -> anyhow::Result<PathBuf> {
    let resolved = if out.is_relative() {
        match std::env::var_os("CREWSCHED_OUT_ROOT") {
            Some(root) => PathBuf::from(root).join(out),
            None => out.to_path_buf(),
        }
    } else {
        out.to_path_buf()
    };
    std::fs::create_dir_all(&resolved)
        .with_context(|| format!("creating output directory {}", resolved.display()))?;
    Ok(resolved)
}

pub fn write_manifest(
    dir: &Path,
    command: &str,
    config_repr: &str,
    seed: Option<u64>,
    threads: usize,
) -> anyhow::Result<()> {
    let mut hasher = Sha256::new();
    hasher.update(config_repr.as_bytes());
    let hash = hex_string(&hasher.finalize());
    let manifest = serde_json::json!({
        "command": command,
        "config_hash": hash,
        "seed": seed,
        "threads": threads,
        "version": env!("CARGO_PKG_VERSION"),
    });
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(())
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

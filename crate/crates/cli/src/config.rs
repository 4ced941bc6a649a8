//! Run manifests and the flat key=value config file.
//!
//! Every generating command writes `<output>.manifest.json` recording its
//! full configuration and seed; `--from-manifest` reruns it and must
//! reproduce the output byte for byte.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GenerateManifest {
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub width: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub distance: Option<usize>,
    pub n: usize,
    pub seed: u64,
    pub out: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub vocab: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub templates: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PermuteManifest {
    pub dataset: PathBuf,
    pub distance: usize,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EvalManifest {
    pub dataset: PathBuf,
    pub regime: String,
    pub shots: usize,
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub base_url: Option<String>,
    pub max_tokens: usize,
    pub temperature: f64,
    pub concurrency: usize,
    pub retries: usize,
    pub resamples: usize,
    pub seed: u64,
    pub out_metrics: PathBuf,
    pub out_records: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub vocab: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub templates: Option<PathBuf>,
}

/// Manifest path for an output file: `data.jsonl` -> `data.jsonl.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

pub fn write_manifest<T: Serialize>(out: &Path, manifest: &T) -> Result<PathBuf> {
    let path = manifest_path(out);
    let json = serde_json::to_string_pretty(manifest)?;
    std::fs::write(&path, json.as_bytes())
        .with_context(|| format!("writing manifest {}", path.display()))?;
    Ok(path)
}

pub fn read_manifest<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading manifest {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

/// Flat key = value config file (TOML syntax, no tables). Values in the
/// file fill in flags the command line left unset.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    table: toml::Table,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<ConfigFile> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let table: toml::Table = text
            .parse()
            .with_context(|| format!("parsing config {}", path.display()))?;
        for (key, value) in &table {
            if value.is_table() || value.is_array() {
                bail!("config key {key} must be a scalar");
            }
        }
        Ok(ConfigFile { table })
    }

    pub fn string(&self, key: &str) -> Option<String> {
        self.table.get(key).and_then(|v| v.as_str()).map(str::to_string)
    }

    pub fn usize(&self, key: &str) -> Option<usize> {
        self.table.get(key).and_then(|v| v.as_integer()).map(|v| v as usize)
    }

    pub fn u64(&self, key: &str) -> Option<u64> {
        self.table.get(key).and_then(|v| v.as_integer()).map(|v| v as u64)
    }

    pub fn f64(&self, key: &str) -> Option<f64> {
        self.table
            .get(key)
            .and_then(|v| v.as_float().or_else(|| v.as_integer().map(|i| i as f64)))
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.string(key).map(PathBuf::from)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_path_appends_suffix() {
        assert_eq!(
            manifest_path(Path::new("out/data.jsonl")),
            PathBuf::from("out/data.jsonl.manifest.json")
        );
    }

    #[test]
    fn config_file_reads_scalars() {
        let dir = std::env::temp_dir().join(format!("cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.toml");
        std::fs::write(&path, "family = \"linear-depth\"\ndepth = 6\nseed = 7\n").unwrap();
        let cfg = ConfigFile::load(&path).unwrap();
        assert_eq!(cfg.string("family").as_deref(), Some("linear-depth"));
        assert_eq!(cfg.usize("depth"), Some(6));
        assert_eq!(cfg.u64("seed"), Some(7));
        assert_eq!(cfg.usize("missing"), None);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}

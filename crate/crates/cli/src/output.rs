//! Output plumbing: lossless CSV, JSON reports, JSON-lines measurement
//! records, stable seed derivation, and the per-run record with its file
//! manifest.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ScenarioConfig;

/// Environment variable overriding the default output root.
pub const OUT_ROOT_ENV: &str = "MACROQUBIT_OUT_ROOT";
/// Default output root when neither `--out` nor the environment override is
/// present.
pub const DEFAULT_OUT_ROOT: &str = "runs";

/// Render a float with 17 significant digits (lossless round trip of f64).
pub fn fmt_f64(value: f64) -> String {
    format!("{value:.16e}")
}

/// Write a CSV file: header row, then rows of 17-significant-digit floats,
/// in fixed column order.
pub fn write_csv(
    path: &Path,
    header: &[&str],
    rows: impl Iterator<Item = Vec<f64>>,
) -> std::io::Result<()> {
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let cells: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    fs::write(path, text)
}

/// Write a pretty JSON report (stable field order from the struct).
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    fs::write(path, text)
}

/// Write one JSON object per line.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> std::io::Result<()> {
    let mut file = fs::File::create(path)?;
    for item in items {
        let line = serde_json::to_string(item).expect("record serializes");
        file.write_all(line.as_bytes())?;
        file.write_all(b"\n")?;
    }
    Ok(())
}

/// Hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

/// Stable seed derivation: SHA-256 over (master seed, task tag, task index),
/// first 8 bytes little-endian.  Used for per-measurement and per-sweep-cell
/// streams so parallel execution cannot reorder randomness.
pub fn derive_seed(master: u64, tag: &str, index: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(tag.as_bytes());
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is long enough"))
}

/// Where a run writes its files.
pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    /// Resolve the output directory: explicit `--out`, else the config's
    /// `output_dir`, else `<root>/<scenario>-seed<seed>` where `<root>` is
    /// the environment override or `runs`.  Relative paths from the config
    /// also resolve under the root.  Creates the directory.
    pub fn resolve(
        cli_out: Option<&Path>,
        config: &ScenarioConfig,
    ) -> std::io::Result<Self> {
        let root_base = std::env::var(OUT_ROOT_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|_| PathBuf::from(DEFAULT_OUT_ROOT));
        let root = match (cli_out, &config.output_dir) {
            (Some(path), _) => path.to_path_buf(),
            (None, Some(dir)) => {
                let dir = PathBuf::from(dir);
                if dir.is_absolute() {
                    dir
                } else {
                    root_base.join(dir)
                }
            }
            (None, None) => root_base.join(format!(
                "{}-seed{}",
                config.scenario.name(),
                config.seed
            )),
        };
        fs::create_dir_all(&root)?;
        Ok(Self { root })
    }

    /// Use an exact directory (creates it).
    pub fn at(path: PathBuf) -> std::io::Result<Self> {
        fs::create_dir_all(&path)?;
        Ok(Self { root: path })
    }

    /// The directory itself.
    pub fn path(&self) -> &Path {
        &self.root
    }

    /// A file inside the directory.
    pub fn file(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }
}

/// What a run wrote and how to reproduce it.  `duration_seconds` is the one
/// field excluded from the byte-identity contract (wall-clock time is not
/// reproducible); every numeric output file is byte-identical across reruns
/// of the same config and seed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    /// Tool version (crate version).
    pub tool_version: String,
    /// Scenario tag.
    pub scenario: String,
    /// Master seed the run used.
    pub seed: u64,
    /// SHA-256 of `config_snapshot.json` as written.
    pub config_sha256: String,
    /// Wall-clock duration (excluded from reproducibility comparisons).
    pub duration_seconds: f64,
    /// Every file the run wrote (including this record), relative names.
    pub manifest: Vec<String>,
    /// The config as run (canonical snapshot, destination stripped).
    pub config: ScenarioConfig,
}

/// Tracks files written during a run and finalizes the record.
pub struct RunWriter {
    dir: OutputDir,
    files: Vec<String>,
    started: std::time::Instant,
    config: ScenarioConfig,
}

impl RunWriter {
    /// Start a run in `dir`, immediately writing `config_snapshot.json`.
    pub fn begin(dir: OutputDir, config: &ScenarioConfig) -> std::io::Result<Self> {
        let mut writer = Self {
            dir,
            files: Vec::new(),
            started: std::time::Instant::now(),
            config: config.canonical_snapshot(),
        };
        let snapshot = config.canonical_json();
        fs::write(writer.dir.file("config_snapshot.json"), &snapshot)?;
        writer.files.push("config_snapshot.json".to_string());
        Ok(writer)
    }

    /// The output directory.
    pub fn dir(&self) -> &OutputDir {
        &self.dir
    }

    /// Write a CSV output and record it in the manifest.
    pub fn csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: impl Iterator<Item = Vec<f64>>,
    ) -> std::io::Result<()> {
        write_csv(&self.dir.file(name), header, rows)?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Write a JSON report and record it in the manifest.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> std::io::Result<()> {
        write_json(&self.dir.file(name), value)?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Write a JSON-lines file and record it in the manifest.
    pub fn jsonl<T: Serialize>(&mut self, name: &str, items: &[T]) -> std::io::Result<()> {
        write_jsonl(&self.dir.file(name), items)?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Finish the run: write `run_record.json` and return the record.
    pub fn finish(mut self) -> std::io::Result<RunRecord> {
        let snapshot = self.config.canonical_json();
        let mut manifest = self.files.clone();
        manifest.push("run_record.json".to_string());
        manifest.sort();
        let record = RunRecord {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            scenario: self.config.scenario.name().to_string(),
            seed: self.config.seed,
            config_sha256: sha256_hex(snapshot.as_bytes()),
            duration_seconds: self.started.elapsed().as_secs_f64(),
            manifest,
            config: self.config.clone(),
        };
        write_json(&self.dir.file("run_record.json"), &record)?;
        self.files.push("run_record.json".to_string());
        Ok(record)
    }
}

//! Cartesian parameter sweeps: substitute axis values into a base scenario
//! config, run every cell in its own subdirectory with a derived seed, and
//! summarize the grid in one CSV.

use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, ScenarioConfig, ScenarioTag, SweepBlock};
use crate::output::{derive_seed, fmt_f64, sha256_hex, write_json, OutputDir};
use crate::scenarios::{run_scenario, RunError, ScenarioMetrics, METRIC_COLUMNS};

/// Outcome of one sweep cell.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellStatus {
    /// Cell index (row-major over the axes, last axis fastest).
    pub cell: usize,
    /// Subdirectory name holding the cell's outputs.
    pub dir: String,
    /// Seed the cell ran with.
    pub seed: u64,
    /// Axis values substituted into the base config, in axis order.
    pub values: Vec<f64>,
    /// `"ok"` or `"failed"`.
    pub status: String,
    /// Failure message, when the cell failed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Summary metrics (defaults when the cell failed).
    pub metrics: ScenarioMetrics,
}

/// What the sweep wrote and how every cell fared.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRecord {
    /// Tool version (crate version).
    pub tool_version: String,
    /// Always `"sweep"`.
    pub scenario: String,
    /// Master seed; per-cell seeds derive from it.
    pub seed: u64,
    /// SHA-256 of `config_snapshot.json` as written.
    pub config_sha256: String,
    /// Wall-clock duration (excluded from any byte-identity expectations).
    pub duration_seconds: f64,
    /// Number of cells in the Cartesian product.
    pub cell_count: usize,
    /// Worker threads used.
    pub workers: usize,
    /// Indices of failed cells (empty on full success).
    pub failed_cells: Vec<usize>,
    /// Per-cell outcomes in cell order.
    pub cells: Vec<CellStatus>,
    /// Top-level files the sweep wrote (cell files appear in the cells'
    /// own run records).
    pub manifest: Vec<String>,
}

/// Run a sweep config: every cell in `out/cell_NNN/`, a summary CSV and a
/// sweep record in `out`.  Cell failures do not abort the sweep; they are
/// reported in `failed_cells` (the binary maps any failures to exit 4).
pub fn run_sweep(
    config: &ScenarioConfig,
    out: OutputDir,
    workers_override: Option<usize>,
) -> Result<SweepRecord, RunError> {
    config.validate()?;
    if config.scenario != ScenarioTag::Sweep {
        return Err(ConfigError {
            problems: vec![format!(
                "scenario: the sweep coordinator needs a sweep config (got '{}')",
                config.scenario.name()
            )],
        }
        .into());
    }
    let started = std::time::Instant::now();
    let block = config.sweep.as_ref().expect("validated");
    let cells = block.cell_count();
    let workers = workers_override
        .or(block.workers)
        .unwrap_or(1)
        .clamp(1, cells.max(1));

    let snapshot = config.canonical_json();
    fs::write(out.file("config_snapshot.json"), &snapshot)
        .map_err(|e| sweep_runtime(e))?;

    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<CellStatus>>> = (0..cells).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::SeqCst);
                if index >= cells {
                    break;
                }
                let outcome = run_cell(block, config.seed, index, out.path());
                *slots[index].lock().expect("cell slot lock") = Some(outcome);
            });
        }
    });
    let outcomes: Vec<CellStatus> = slots
        .into_iter()
        .map(|slot| {
            slot.into_inner()
                .expect("cell slot lock")
                .expect("every cell index was claimed by a worker")
        })
        .collect();

    write_summary_csv(&out, block, &outcomes).map_err(sweep_runtime)?;

    let failed_cells: Vec<usize> = outcomes
        .iter()
        .filter(|c| c.status != "ok")
        .map(|c| c.cell)
        .collect();
    let mut manifest = vec![
        "config_snapshot.json".to_string(),
        "sweep_summary.csv".to_string(),
        "sweep_record.json".to_string(),
    ];
    manifest.sort();
    let record = SweepRecord {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        scenario: ScenarioTag::Sweep.name().to_string(),
        seed: config.seed,
        config_sha256: sha256_hex(snapshot.as_bytes()),
        duration_seconds: started.elapsed().as_secs_f64(),
        cell_count: cells,
        workers,
        failed_cells,
        cells: outcomes,
        manifest,
    };
    write_json(&out.file("sweep_record.json"), &record).map_err(sweep_runtime)?;
    Ok(record)
}

fn sweep_runtime(e: impl std::fmt::Display) -> RunError {
    RunError::Runtime {
        scenario: ScenarioTag::Sweep.name().to_string(),
        message: e.to_string(),
    }
}

/// Substitute the derived seed and this cell's axis values into the base
/// config document.  An explicit `/seed` axis overrides the derived seed.
fn cell_config_json(
    block: &SweepBlock,
    master: u64,
    index: usize,
) -> Result<serde_json::Value, ConfigError> {
    let mut doc = block.base.clone();
    match doc.pointer_mut("/seed") {
        Some(slot) => *slot = serde_json::json!(derive_seed(master, "sweep-cell", index as u64)),
        None => {
            return Err(ConfigError {
                problems: vec!["sweep.base: missing 'seed' field".to_string()],
            })
        }
    }
    let values = block.cell_values(index);
    for (axis, value) in block.axes.iter().zip(&values) {
        let slot = doc.pointer_mut(&axis.pointer).ok_or_else(|| ConfigError {
            problems: vec![format!(
                "sweep.axes pointer '{}' not found in the base config",
                axis.pointer
            )],
        })?;
        *slot = number_value(*value);
    }
    if let Some(obj) = doc.as_object_mut() {
        // Each cell's destination is the sweep's business, not the base's.
        obj.remove("output_dir");
    }
    Ok(doc)
}

/// Whole-valued axis values become JSON integers so integer-typed fields
/// (spin size, level number, seed) accept them.
fn number_value(v: f64) -> serde_json::Value {
    // 2^53: largest magnitude below which every integer is exact in f64.
    if v.fract() == 0.0 && v.abs() <= 9.007_199_254_740_992e15 {
        if v >= 0.0 {
            serde_json::json!(v as u64)
        } else {
            serde_json::json!(v as i64)
        }
    } else {
        serde_json::Value::from(v)
    }
}

fn run_cell(block: &SweepBlock, master: u64, index: usize, root: &Path) -> CellStatus {
    let dir_name = format!("cell_{index:03}");
    let cell_dir = root.join(&dir_name);
    let values = block.cell_values(index);
    let attempt = (|| -> Result<(u64, ScenarioMetrics), RunError> {
        let doc = cell_config_json(block, master, index)?;
        let config: ScenarioConfig = serde_json::from_value(doc).map_err(|e| ConfigError {
            problems: vec![format!("sweep cell {index}: {e}")],
        })?;
        if config.scenario == ScenarioTag::Sweep {
            return Err(ConfigError {
                problems: vec![
                    "sweep.base.scenario: nested sweeps are not supported".to_string(),
                ],
            }
            .into());
        }
        let seed = config.seed;
        let out = OutputDir::at(cell_dir.clone()).map_err(sweep_runtime)?;
        let (_, metrics) = run_scenario(&config, out)?;
        Ok((seed, metrics))
    })();
    match attempt {
        Ok((seed, metrics)) => CellStatus {
            cell: index,
            dir: dir_name,
            seed,
            values,
            status: "ok".to_string(),
            error: None,
            metrics,
        },
        Err(e) => {
            let _ = fs::create_dir_all(&cell_dir);
            let _ = write_json(
                &cell_dir.join("error.json"),
                &serde_json::json!({ "cell": index, "error": e.to_string() }),
            );
            CellStatus {
                cell: index,
                dir: dir_name,
                seed: derive_seed(master, "sweep-cell", index as u64),
                values,
                status: "failed".to_string(),
                error: Some(e.to_string()),
                metrics: ScenarioMetrics::default(),
            }
        }
    }
}

/// One row per cell: index, seed, status, the axis values (columns named by
/// their JSON pointers), then the summary metrics.
fn write_summary_csv(
    out: &OutputDir,
    block: &SweepBlock,
    outcomes: &[CellStatus],
) -> std::io::Result<()> {
    let mut text = String::from("cell,seed,status");
    for axis in &block.axes {
        text.push(',');
        text.push_str(&axis.pointer);
    }
    for column in METRIC_COLUMNS {
        text.push(',');
        text.push_str(column);
    }
    text.push('\n');
    for outcome in outcomes {
        text.push_str(&format!(
            "{},{},{}",
            outcome.cell, outcome.seed, outcome.status
        ));
        for value in &outcome.values {
            text.push(',');
            text.push_str(&fmt_f64(*value));
        }
        for cell in outcome.metrics.row() {
            text.push(',');
            text.push_str(&cell);
        }
        text.push('\n');
    }
    fs::write(out.file("sweep_summary.csv"), text)
}

//! JSON and CSV shapes emitted by the subcommands. Schemas live in `docs/schema/`.

use std::path::Path;

use q2logic::device::AmplitudeEntry;
use q2logic::perf::{BitstreamTime, ProgramTime};
use q2logic::scheduler::{SystemConfig, UtilizationReport};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct ConfigView {
    pub n_qpu: usize,
    pub n_sysqbits: usize,
}

impl From<&SystemConfig> for ConfigView {
    fn from(c: &SystemConfig) -> Self {
        ConfigView { n_qpu: c.n_qpu, n_sysqbits: c.n_sysqbits }
    }
}

#[derive(Debug, Serialize)]
pub struct CompileReport {
    pub circuit: String,
    pub n_qubits: usize,
    pub gate_count: usize,
    pub cnot_count: usize,
    pub config: ConfigView,
    pub remote_controls: bool,
    pub bitstream_count: usize,
    pub mean_utilization: f64,
    pub bitstreams: Vec<q2logic::scheduler::UtilizationRecord>,
    pub output: String,
    pub gate_table: String,
}

#[derive(Debug, Serialize)]
pub struct Verification {
    pub max_linf: f64,
    pub tolerance: f64,
    pub oracle_norm: f64,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct SimulateReport {
    pub n_qubits: usize,
    pub bitstream_count: usize,
    pub norm: f64,
    pub top: Vec<AmplitudeEntry>,
    pub verification: Option<Verification>,
    pub state_dump: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct EstimateReport {
    pub n_qubits: usize,
    pub bitstream_count: usize,
    pub f_max: f64,
    pub f_mem: f64,
    pub burst_width_bits: u32,
    pub t_cfg: f64,
    pub total_seconds: f64,
    pub penalty_band_count: usize,
    pub bitstreams: Vec<BitstreamTime>,
}

/// One row of the full run report (also the CSV row).
#[derive(Debug, Serialize)]
pub struct BitstreamRow {
    pub index: usize,
    pub window_start: usize,
    pub occupied: usize,
    pub utilization: f64,
    pub rotation: i32,
    pub alpha: f64,
    pub relative_cost: f64,
    pub seconds: f64,
    pub bandwidth_bytes_per_s: f64,
    pub in_penalty_band: bool,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub circuit: String,
    pub n_qubits: usize,
    pub gate_count: usize,
    pub cnot_count: usize,
    pub config: ConfigView,
    pub remote_controls: bool,
    pub bitstream_count: usize,
    pub mean_utilization: f64,
    pub total_seconds: f64,
    pub bitstreams: Vec<BitstreamRow>,
    pub verification: Option<Verification>,
    pub norm: Option<f64>,
}

pub fn rows(util: &UtilizationReport, time: &ProgramTime) -> Vec<BitstreamRow> {
    util.bitstreams
        .iter()
        .zip(&time.bitstreams)
        .map(|(u, t)| BitstreamRow {
            index: u.index,
            window_start: u.window_start,
            occupied: u.occupied,
            utilization: u.utilization,
            rotation: u.rotation,
            alpha: t.alpha,
            relative_cost: u.relative_cost,
            seconds: t.seconds,
            bandwidth_bytes_per_s: t.bandwidth_bytes_per_s,
            in_penalty_band: t.in_penalty_band,
        })
        .collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let to_io = |e: csv::Error| CliError::Io { path: path.to_path_buf(), source: e.into() };
    let mut w = csv::Writer::from_path(path).map_err(to_io)?;
    for r in rows {
        w.serialize(r).map_err(to_io)?;
    }
    w.flush().map_err(CliError::io(path))
}

pub fn print_json<T: Serialize>(value: &T) {
    print_stdout(&format!("{}\n", serde_json::to_string_pretty(value).expect("report serializes")));
}

/// Writes to stdout, staying quiet when the reader has gone away (`| head`).
pub fn print_stdout(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

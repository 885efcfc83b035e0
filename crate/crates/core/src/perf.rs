//! Analytic bitstream execution-time model.
//!
//! One bitstream streams the whole state (8 bytes per single-precision complex
//! amplitude) through the QPU chain:
//!
//! ```text
//! t = t_cfg + 8·2^n / (α(r) · min(f_mem, f_max) · (1 + B_lw/128))
//! ```
//!
//! `α(r)` folds the achievable fraction of peak stream bandwidth together with
//! the write-back penalty of rotation `r`. Frequencies are in Hz, times in
//! seconds. The QPU count does not appear: chain depth adds pipeline latency
//! only, and enters through the number of bitstreams instead.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scheduler::BitstreamPlan;

/// Widest burst-coalesced load the state reader supports, in bits.
pub const MAX_BURST_WIDTH_BITS: u32 = 2048;

/// Rotation magnitudes that serialize write-back across interleaved DDR banks.
pub const PENALTY_BAND: std::ops::RangeInclusive<u32> = 4..=12;
/// Stream efficiency of the built-in table outside the penalty band.
pub const DEFAULT_ALPHA: f64 = 0.8;
/// Slowdown inside the penalty band for the built-in table.
pub const BAND_SLOWDOWN: f64 = 12.0;

#[derive(Debug, Error, PartialEq)]
pub enum PerfError {
    #[error("line {line}: malformed alpha row `{text}`")]
    MalformedRow { line: usize, text: String },
    #[error("line {line}: alpha {alpha} outside (0, 1]")]
    AlphaOutOfRange { line: usize, alpha: f64 },
    #[error("no alpha for rotation {0} and no default row")]
    MissingRotation(i32),
    #[error("rotation {rotation} outside (-{n_qubits}, {n_qubits})")]
    RotationOutOfRange { rotation: i32, n_qubits: usize },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

/// Rotation-indexed efficiency table with an optional default row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaTable {
    entries: BTreeMap<i32, f64>,
    default: Option<f64>,
}

impl Default for AlphaTable {
    /// `α = 0.8` except for `|r| ∈ [4, 12]`, where it drops twelvefold.
    fn default() -> Self {
        let mut entries = BTreeMap::new();
        for r in PENALTY_BAND {
            let r = r as i32;
            entries.insert(r, DEFAULT_ALPHA / BAND_SLOWDOWN);
            entries.insert(-r, DEFAULT_ALPHA / BAND_SLOWDOWN);
        }
        AlphaTable { entries, default: Some(DEFAULT_ALPHA) }
    }
}

impl AlphaTable {
    pub fn new(entries: BTreeMap<i32, f64>, default: Option<f64>) -> Self {
        AlphaTable { entries, default }
    }

    /// A table with the same α for every rotation.
    pub fn uniform(alpha: f64) -> Self {
        AlphaTable { entries: BTreeMap::new(), default: Some(alpha) }
    }

    /// Parses `rotation,alpha` rows. `default,alpha` sets the fallback; `#`
    /// starts a comment and a leading `rotation,alpha` header is skipped.
    pub fn parse(text: &str) -> Result<Self, PerfError> {
        let mut entries = BTreeMap::new();
        let mut default = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let malformed = || PerfError::MalformedRow { line, text: raw.to_string() };
            let mut cols = body.split(',').map(str::trim);
            let (key, val) = match (cols.next(), cols.next(), cols.next()) {
                (Some(k), Some(v), None) => (k, v),
                _ => return Err(malformed()),
            };
            if key.eq_ignore_ascii_case("rotation") && val.eq_ignore_ascii_case("alpha") {
                continue;
            }
            let alpha: f64 = val.parse().map_err(|_| malformed())?;
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(PerfError::AlphaOutOfRange { line, alpha });
            }
            if key.eq_ignore_ascii_case("default") {
                default = Some(alpha);
            } else {
                let r: i32 = key.parse().map_err(|_| malformed())?;
                if r.unsigned_abs() > u8::MAX as u32 {
                    return Err(malformed());
                }
                entries.insert(r, alpha);
            }
        }
        Ok(AlphaTable { entries, default })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("rotation,alpha\n");
        for (r, a) in &self.entries {
            let _ = writeln!(out, "{r},{a}");
        }
        if let Some(d) = self.default {
            let _ = writeln!(out, "default,{d}");
        }
        out
    }

    pub fn alpha(&self, rotation: i32) -> Result<f64, PerfError> {
        self.entries.get(&rotation).copied().or(self.default).ok_or(PerfError::MissingRotation(rotation))
    }

    /// Best α anywhere in the table.
    pub fn best(&self) -> Option<f64> {
        self.entries.values().copied().chain(self.default).reduce(f64::max)
    }

    /// Relative cost of rotation `r`: `best α / α(r)`, so 1.0 means no penalty.
    pub fn penalty(&self, rotation: i32) -> Result<f64, PerfError> {
        let a = self.alpha(rotation)?;
        Ok(self.best().unwrap_or(a) / a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfParams {
    /// Device clock, Hz.
    pub f_max: f64,
    /// Peak memory clock, Hz.
    pub f_mem: f64,
    /// Burst load width of the state reader, bits.
    pub burst_width_bits: u32,
    /// Configuration overhead per bitstream, seconds.
    pub t_cfg: f64,
    pub alpha: AlphaTable,
}

impl PerfParams {
    /// DE10-Agilex-like platform: 16 QPUs at 228.46 MHz against DDR4-2400
    /// banks (1.2 GHz clock, 76.8 GB/s aggregate), 2048-bit bursts.
    pub fn de10_agilex() -> Self {
        PerfParams {
            f_max: 228.46e6,
            f_mem: 1.2e9,
            burst_width_bits: MAX_BURST_WIDTH_BITS,
            t_cfg: 10e-6,
            alpha: AlphaTable::default(),
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "de10-agilex" | "agilex" => Some(Self::de10_agilex()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), PerfError> {
        let bad = |what: &str| Err(PerfError::InvalidParam(what.to_string()));
        if !(self.f_max > 0.0 && self.f_max.is_finite()) {
            return bad("f_max must be positive");
        }
        if !(self.f_mem > 0.0 && self.f_mem.is_finite()) {
            return bad("f_mem must be positive");
        }
        if self.burst_width_bits == 0 || self.burst_width_bits > MAX_BURST_WIDTH_BITS {
            return bad("burst width must be in 1..=2048 bits");
        }
        if !(self.t_cfg >= 0.0 && self.t_cfg.is_finite()) {
            return bad("t_cfg must be non-negative");
        }
        Ok(())
    }

    /// Bytes per second moved at efficiency `alpha`.
    pub fn stream_rate(&self, alpha: f64) -> f64 {
        alpha * self.f_mem.min(self.f_max) * (1.0 + self.burst_width_bits as f64 / 128.0)
    }
}

/// Size of an `n`-qubit single-precision state in bytes.
pub fn state_bytes(n_qubits: usize) -> f64 {
    8.0 * (1u64 << n_qubits) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitstreamTime {
    pub index: usize,
    pub rotation: i32,
    pub alpha: f64,
    /// State-streaming part of the estimate, seconds.
    pub data_seconds: f64,
    pub seconds: f64,
    /// Bytes / data_seconds.
    pub bandwidth_bytes_per_s: f64,
    pub in_penalty_band: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgramTime {
    pub total_seconds: f64,
    pub bitstreams: Vec<BitstreamTime>,
}

fn check_rotation(n_qubits: usize, rotation: i32) -> Result<(), PerfError> {
    if rotation.unsigned_abs() as usize >= n_qubits.max(1) {
        return Err(PerfError::RotationOutOfRange { rotation, n_qubits });
    }
    Ok(())
}

/// Data term of the model: seconds spent streaming the state once.
pub fn data_time(p: &PerfParams, n_qubits: usize, rotation: i32) -> Result<f64, PerfError> {
    check_rotation(n_qubits, rotation)?;
    Ok(state_bytes(n_qubits) / p.stream_rate(p.alpha.alpha(rotation)?))
}

/// Estimated seconds for one bitstream over an `n`-qubit state.
pub fn bitstream_time(p: &PerfParams, n_qubits: usize, rotation: i32) -> Result<f64, PerfError> {
    Ok(p.t_cfg + data_time(p, n_qubits, rotation)?)
}

/// Per-bitstream breakdown and total, using each plan's write-back rotation.
pub fn program_time(p: &PerfParams, plans: &[BitstreamPlan], n_qubits: usize) -> Result<ProgramTime, PerfError> {
    let mut bitstreams = Vec::with_capacity(plans.len());
    let mut total = 0.0;
    for (index, plan) in plans.iter().enumerate() {
        let r = plan.rotation_out;
        let data = data_time(p, n_qubits, r)?;
        let seconds = p.t_cfg + data;
        total += seconds;
        bitstreams.push(BitstreamTime {
            index,
            rotation: r,
            alpha: p.alpha.alpha(r)?,
            data_seconds: data,
            seconds,
            bandwidth_bytes_per_s: state_bytes(n_qubits) / data,
            in_penalty_band: p.alpha.penalty(r)? > 1.0,
        });
    }
    Ok(ProgramTime { total_seconds: total, bitstreams })
}

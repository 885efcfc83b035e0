//! Functional model of the streaming pipeline.
//!
//! The state is streamed in chunks of `2^k` amplitudes (`k` = window width).
//! Every chunk passes the QPU chain in slot order; each QPU updates the pairs
//! of local labels that differ in its target bit and emits the chunk in
//! arrival order. A controlled QPU keeps the incoming value wherever the
//! control bit of the global arrival index is 0. The state writer then stores
//! arrival index `i` at `writer_rotate_index(i, r)` in the other buffer.
//!
//! Chunks within a bitstream are independent, so they are processed in
//! parallel; bitstreams run strictly in order.

use std::io::{self, Write};

use num_complex::{Complex32, Complex64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitstream::{plans_to_bitstreams, Bitstream, Opcode, QpuRecord};
use crate::oracle::DenseState;
use crate::scheduler::{BitstreamPlan, QubitMapping, SystemConfig};

/// Default register cap: 2^30 amplitudes of 8 bytes = 8 GiB per buffer.
pub const DEFAULT_MAX_QUBITS: usize = 30;

/// Below this many amplitudes the chunk loop stays on the calling thread.
const PAR_THRESHOLD: usize = 1 << 14;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DeviceError {
    #[error("{n_qubits} qubits outside 1..={cap}")]
    TooManyQubits { n_qubits: usize, cap: usize },
    #[error("bitstream is for {config} qubits, state has {state}")]
    ConfigMismatch { config: usize, state: usize },
    #[error("QPU {slot}: target bit {target} outside the {window}-bit chunk")]
    TargetOutOfChunk { slot: usize, target: usize, window: usize },
    #[error("QPU {slot}: invalid control bit {control} (target {target}, {n_qubits} qubits)")]
    BadControl { slot: usize, control: usize, target: usize, n_qubits: usize },
    #[error("chunk order is not a permutation of 0..{0}")]
    BadChunkOrder(usize),
}

/// Single-precision state plus the current physical layout.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex32>,
    scratch: Vec<Complex32>,
    mapping: QubitMapping,
}

/// `|0…0⟩` in canonical layout, capped at [`DEFAULT_MAX_QUBITS`].
pub fn init_state(n_qubits: usize) -> Result<StateVector, DeviceError> {
    init_state_capped(n_qubits, DEFAULT_MAX_QUBITS)
}

pub fn init_state_capped(n_qubits: usize, cap: usize) -> Result<StateVector, DeviceError> {
    if n_qubits == 0 || n_qubits > cap || n_qubits >= usize::BITS as usize {
        return Err(DeviceError::TooManyQubits { n_qubits, cap });
    }
    let mut amps = vec![Complex32::new(0.0, 0.0); 1 << n_qubits];
    amps[0] = Complex32::new(1.0, 0.0);
    Ok(StateVector { n_qubits, amps, scratch: Vec::new(), mapping: QubitMapping::canonical(n_qubits) })
}

impl StateVector {
    /// Wraps raw amplitudes in canonical layout.
    ///
    /// Panics unless the length is a power of two of at least 2.
    pub fn from_amplitudes(amps: Vec<Complex32>) -> Self {
        assert!(amps.len() >= 2 && amps.len().is_power_of_two());
        let n_qubits = amps.len().trailing_zeros() as usize;
        StateVector { n_qubits, amps, scratch: Vec::new(), mapping: QubitMapping::canonical(n_qubits) }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex32] {
        &self.amps
    }

    pub fn mapping(&self) -> QubitMapping {
        self.mapping
    }

    /// Σ|α|², accumulated in double precision.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| (a.re as f64).powi(2) + (a.im as f64).powi(2)).sum()
    }

    /// L∞ distance to a reference state, comparing in canonical layout.
    pub fn max_abs_diff(&self, reference: &DenseState) -> f64 {
        assert_eq!(self.n_qubits, reference.n_qubits());
        let canon = canonicalize(self.clone());
        canon
            .amps
            .iter()
            .zip(reference.amplitudes())
            .map(|(a, b)| (Complex64::new(a.re as f64, a.im as f64) - b).norm())
            .fold(0.0, f64::max)
    }

    /// The `count` largest-magnitude amplitudes as `(index, amplitude)`,
    /// ties broken by lower index.
    pub fn top_amplitudes(&self, count: usize) -> Vec<(usize, Complex32)> {
        let mut idx: Vec<usize> = (0..self.amps.len()).collect();
        idx.sort_by(|&a, &b| self.amps[b].norm_sqr().total_cmp(&self.amps[a].norm_sqr()).then(a.cmp(&b)));
        idx.truncate(count);
        idx.into_iter().map(|i| (i, self.amps[i])).collect()
    }

    /// Raw little-endian interleaved `(re, im)` f32 dump.
    pub fn write_raw<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut buf = Vec::with_capacity(self.amps.len() * 8);
        for a in &self.amps {
            buf.extend_from_slice(&a.re.to_le_bytes());
            buf.extend_from_slice(&a.im.to_le_bytes());
        }
        w.write_all(&buf)
    }
}

/// Write-back address transform: destination bit `j` takes source bit
/// `(j + r) mod n`, i.e. a right rotation of the `n`-bit address by `r`.
pub fn writer_rotate_index(addr: usize, r: i32, n: usize) -> usize {
    let shift = (r as i64).rem_euclid(n as i64) as u32;
    if shift == 0 {
        return addr;
    }
    let mask = if n == usize::BITS as usize { usize::MAX } else { (1usize << n) - 1 };
    ((addr >> shift) | (addr << (n as u32 - shift))) & mask
}

/// Applies one QPU to a chunk in place, preserving arrival order.
///
/// `chunk.len()` must be `2^k`; `chunk_index · 2^k` is the global arrival
/// index of the chunk's first value.
pub fn qpu_apply(chunk: &mut [Complex32], record: &QpuRecord, chunk_index: usize, k: usize) -> Result<(), DeviceError> {
    debug_assert_eq!(chunk.len(), 1 << k);
    let target = record.target as usize;
    if record.opcode == Opcode::Nop {
        return Ok(());
    }
    if target >= k {
        return Err(DeviceError::TargetOutOfChunk { slot: 0, target, window: k });
    }
    let cmask = match record.opcode {
        Opcode::Controlled => 1usize << record.control,
        _ => 0,
    };
    let base = chunk_index << k;
    let half = 1usize << target;
    let [m00, m01, m10, m11] = record.matrix;
    for (blk, block) in chunk.chunks_exact_mut(2 * half).enumerate() {
        let (lo, hi) = block.split_at_mut(half);
        let blk_base = base + blk * 2 * half;
        for j in 0..half {
            // both labels of a pair share every bit except the target
            if (blk_base + j) & cmask != cmask {
                continue;
            }
            let (a, b) = (lo[j], hi[j]);
            lo[j] = m00 * a + m01 * b;
            hi[j] = m10 * a + m11 * b;
        }
    }
    Ok(())
}

fn validate(state: &StateVector, bs: &Bitstream) -> Result<usize, DeviceError> {
    let n = state.n_qubits;
    if bs.header.n_qubits as usize != n {
        return Err(DeviceError::ConfigMismatch { config: bs.header.n_qubits as usize, state: n });
    }
    let k = bs.header.config().window();
    for (slot, r) in bs.records.iter().enumerate() {
        if r.opcode == Opcode::Nop {
            continue;
        }
        let (target, control) = (r.target as usize, r.control as usize);
        if target >= k {
            return Err(DeviceError::TargetOutOfChunk { slot, target, window: k });
        }
        if r.opcode == Opcode::Controlled && (control >= n || control == target) {
            return Err(DeviceError::BadControl { slot, control, target, n_qubits: n });
        }
    }
    Ok(k)
}

fn run_chain(chunk: &mut [Complex32], records: &[QpuRecord], chunk_index: usize, k: usize) {
    for r in records {
        qpu_apply(chunk, r, chunk_index, k).expect("records validated before streaming");
    }
}

fn write_back(state: &mut StateVector, r: i32) {
    if r == 0 {
        return;
    }
    let n = state.n_qubits;
    let src = &state.amps;
    state.scratch.resize(src.len(), Complex32::new(0.0, 0.0));
    // dst[rotate(i, r)] = src[i]  <=>  dst[j] = src[rotate(j, -r)]
    let gather = |(j, d): (usize, &mut Complex32)| *d = src[writer_rotate_index(j, -r, n)];
    if src.len() >= PAR_THRESHOLD {
        state.scratch.par_iter_mut().enumerate().for_each(gather);
    } else {
        state.scratch.iter_mut().enumerate().for_each(gather);
    }
    std::mem::swap(&mut state.amps, &mut state.scratch);
    state.mapping = state.mapping.rotated(r);
}

/// Streams the state once through the configured QPU chain.
pub fn run_bitstream(state: &mut StateVector, bs: &Bitstream) -> Result<(), DeviceError> {
    let k = validate(state, bs)?;
    let chunk = 1usize << k;
    if state.amps.len() >= PAR_THRESHOLD {
        state.amps.par_chunks_mut(chunk).enumerate().for_each(|(ci, c)| run_chain(c, &bs.records, ci, k));
    } else {
        state.amps.chunks_mut(chunk).enumerate().for_each(|(ci, c)| run_chain(c, &bs.records, ci, k));
    }
    write_back(state, bs.header.rotation as i32);
    Ok(())
}

/// Sequential variant visiting chunks in the given order.
pub fn run_bitstream_ordered(state: &mut StateVector, bs: &Bitstream, order: &[usize]) -> Result<(), DeviceError> {
    let k = validate(state, bs)?;
    let n_chunks = state.amps.len() >> k;
    let mut seen = vec![false; n_chunks];
    if order.len() != n_chunks || order.iter().any(|&c| c >= n_chunks || std::mem::replace(&mut seen[c], true)) {
        return Err(DeviceError::BadChunkOrder(n_chunks));
    }
    let chunk = 1usize << k;
    for &ci in order {
        run_chain(&mut state.amps[ci * chunk..(ci + 1) * chunk], &bs.records, ci, k);
    }
    write_back(state, bs.header.rotation as i32);
    Ok(())
}

/// Runs bitstreams in order.
pub fn run_program(state: &mut StateVector, program: &[Bitstream]) -> Result<(), DeviceError> {
    for bs in program {
        run_bitstream(state, bs)?;
    }
    Ok(())
}

/// Encodes scheduler plans to device records and runs them.
pub fn run_plans(state: &mut StateVector, plans: &[BitstreamPlan], cfg: &SystemConfig) -> Result<(), DeviceError> {
    run_program(state, &plans_to_bitstreams(plans, cfg))
}

/// Permutes amplitudes back to canonical layout (`window_start = 0`).
pub fn canonicalize(mut state: StateVector) -> StateVector {
    let s = state.mapping.window_start as i32;
    write_back(&mut state, -s);
    state
}

/// Compact JSON-friendly view of a state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSummary {
    pub n_qubits: usize,
    pub norm: f64,
    pub window_start: usize,
    pub top: Vec<AmplitudeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeEntry {
    pub index: usize,
    pub re: f32,
    pub im: f32,
    pub probability: f64,
}

impl StateVector {
    pub fn summary(&self, top: usize) -> StateSummary {
        StateSummary {
            n_qubits: self.n_qubits,
            norm: self.norm_sqr(),
            window_start: self.mapping.window_start,
            top: self
                .top_amplitudes(top)
                .into_iter()
                .map(|(index, a)| AmplitudeEntry {
                    index,
                    re: a.re,
                    im: a.im,
                    probability: (a.re as f64).powi(2) + (a.im as f64).powi(2),
                })
                .collect(),
        }
    }
}

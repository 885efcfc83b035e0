//! Greedy packing of a circuit into rotation-linked bitstreams.
//!
//! Each bitstream operates on a cyclic window of `k = n_sysqbits` logical
//! qubits that sit at physical bit positions `0..k`. Logical qubit `q` is at
//! physical position `(q - s) mod n` where `s` is the window start. The
//! write-back rotation of bitstream `i` moves the layout to the window of
//! bitstream `i + 1`; the last one restores `s = 0`.
//!
//! Per step every window start is scored by greedily filling up to `n_qpu`
//! slots with the lowest-id ready gate that fits, dividing the gate count by
//! the rotation penalty needed to reach that window.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{build_dag, Circuit, DepDag, Frontier, GateId};
use crate::matrix::GateMatrix;
use crate::perf::{AlphaTable, PerfError};

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("invalid system config: {0}")]
    InvalidConfig(String),
    #[error("circuit has {circuit} qubits but the config is for {config}")]
    QubitMismatch { circuit: usize, config: usize },
    #[error("gate {gate} (control q{control}, target q{target}) cannot fit a {window}-qubit window")]
    Unschedulable { gate: GateId, control: usize, target: usize, window: usize },
    #[error("rotation cost: {0}")]
    Penalty(#[from] PerfError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub n_qpu: usize,
    pub n_sysqbits: usize,
    pub n_qubits: usize,
}

impl SystemConfig {
    pub fn new(n_qpu: usize, n_sysqbits: usize, n_qubits: usize) -> Result<Self, ScheduleError> {
        let cfg = SystemConfig { n_qpu, n_sysqbits, n_qubits };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ScheduleError> {
        let bad = |m: &str| Err(ScheduleError::InvalidConfig(m.to_string()));
        if self.n_qpu == 0 || self.n_qpu > u8::MAX as usize {
            return bad("n_qpu must be in 1..=255");
        }
        if self.n_sysqbits == 0 || self.n_sysqbits > u8::MAX as usize {
            return bad("n_sysqbits must be in 1..=255");
        }
        if self.n_qubits == 0 || self.n_qubits > u8::MAX as usize {
            return bad("n_qubits must be in 1..=255");
        }
        Ok(())
    }

    /// Effective window width: the whole register when `n_sysqbits >= n_qubits`.
    pub fn window(&self) -> usize {
        self.n_sysqbits.min(self.n_qubits)
    }
}

/// Current physical layout: logical qubit `window_start` sits at bit 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitMapping {
    pub window_start: usize,
    pub n_qubits: usize,
}

impl QubitMapping {
    pub fn canonical(n_qubits: usize) -> Self {
        QubitMapping { window_start: 0, n_qubits }
    }

    pub fn physical(&self, logical: usize) -> usize {
        (logical + self.n_qubits - self.window_start) % self.n_qubits
    }

    pub fn logical(&self, physical: usize) -> usize {
        (physical + self.window_start) % self.n_qubits
    }

    /// Layout after a write-back rotation by `r`.
    pub fn rotated(&self, r: i32) -> Self {
        let n = self.n_qubits as i64;
        let s = (self.window_start as i64 + r as i64).rem_euclid(n) as usize;
        QubitMapping { window_start: s, n_qubits: self.n_qubits }
    }
}

/// A gate bound to one QPU slot, operands in physical bit positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedGate {
    pub gate_id: GateId,
    pub target: usize,
    pub control: Option<usize>,
    pub matrix: GateMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Slot {
    Nop,
    Gate(PlacedGate),
}

impl Slot {
    pub fn gate(&self) -> Option<&PlacedGate> {
        match self {
            Slot::Nop => None,
            Slot::Gate(g) => Some(g),
        }
    }
}

/// One hardware configuration: a full pass of the state through the chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitstreamPlan {
    pub window_start: usize,
    /// One entry per QPU, in chain order.
    pub slots: Vec<Slot>,
    /// Write-back rotation applied after this pass.
    pub rotation_out: i32,
}

impl BitstreamPlan {
    pub fn scheduled_gate_ids(&self) -> Vec<GateId> {
        self.slots.iter().filter_map(|s| s.gate().map(|g| g.gate_id)).collect()
    }

    pub fn occupied(&self) -> usize {
        self.slots.iter().filter(|s| s.gate().is_some()).count()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleOptions {
    /// Accept controls outside the window (the device reads them from the
    /// global address); by default both operands must be in-window.
    pub remote_controls: bool,
}

/// Minimal-magnitude rotation taking window start `s_prev` to `s_next`,
/// in `(-n/2, n/2]`.
pub fn rotation_between(s_prev: usize, s_next: usize, n: usize) -> i32 {
    let d = (s_next + n - s_prev % n) % n;
    if 2 * d > n {
        d as i32 - n as i32
    } else {
        d as i32
    }
}

fn in_window(q: usize, s: usize, cfg: &SystemConfig) -> bool {
    (q + cfg.n_qubits - s) % cfg.n_qubits < cfg.window()
}

fn fits(circuit: &Circuit, g: GateId, s: usize, cfg: &SystemConfig, opts: ScheduleOptions) -> bool {
    let gate = &circuit.gates()[g];
    in_window(gate.target, s, cfg)
        && (opts.remote_controls || gate.control().is_none_or(|c| in_window(c, s, cfg)))
}

/// Greedy fill of one bitstream with window start `s`: repeatedly place the
/// lowest-id gate that is ready (counting gates already placed in this
/// bitstream as done) and fits the window, up to `n_qpu` gates.
pub fn score_window(
    frontier: &Frontier,
    dag: &DepDag,
    circuit: &Circuit,
    cfg: &SystemConfig,
    s: usize,
    opts: ScheduleOptions,
) -> Vec<GateId> {
    let mut heap: BinaryHeap<Reverse<GateId>> = frontier
        .ready()
        .iter()
        .copied()
        .filter(|&g| fits(circuit, g, s, cfg, opts))
        .map(Reverse)
        .collect();
    let mut pending: HashMap<GateId, u8> = HashMap::new();
    let mut placed = Vec::new();
    while placed.len() < cfg.n_qpu {
        let Some(Reverse(g)) = heap.pop() else { break };
        placed.push(g);
        for &succ in dag.succs(g) {
            let left = pending.entry(succ).or_insert_with(|| frontier.pending(succ));
            *left -= 1;
            if *left == 0 && fits(circuit, succ, s, cfg, opts) {
                heap.push(Reverse(succ));
            }
        }
    }
    placed
}

struct Candidate {
    s: usize,
    rotation: i32,
    penalty: f64,
    gates: Vec<GateId>,
}

impl Candidate {
    fn score(&self) -> f64 {
        self.gates.len() as f64 / self.penalty
    }

    /// `Less` means `self` is the better pick.
    fn rank(&self, other: &Candidate) -> Ordering {
        other
            .score()
            .total_cmp(&self.score())
            .then(self.penalty.total_cmp(&other.penalty))
            .then(self.rotation.unsigned_abs().cmp(&other.rotation.unsigned_abs()))
            .then(self.s.cmp(&other.s))
    }
}

/// Schedules with the default options (both operands in-window).
pub fn schedule(circuit: &Circuit, cfg: &SystemConfig, cost: &AlphaTable) -> Result<Vec<BitstreamPlan>, ScheduleError> {
    schedule_with(circuit, cfg, cost, ScheduleOptions::default())
}

pub fn schedule_with(
    circuit: &Circuit,
    cfg: &SystemConfig,
    cost: &AlphaTable,
    opts: ScheduleOptions,
) -> Result<Vec<BitstreamPlan>, ScheduleError> {
    cfg.validate()?;
    if circuit.n_qubits != cfg.n_qubits {
        return Err(ScheduleError::QubitMismatch { circuit: circuit.n_qubits, config: cfg.n_qubits });
    }
    let n = cfg.n_qubits;
    let k = cfg.window();

    if !opts.remote_controls {
        for g in circuit.gates() {
            if let Some(c) = g.control() {
                let d = (c + n - g.target) % n;
                if d.min(n - d) >= k {
                    return Err(ScheduleError::Unschedulable { gate: g.id, control: c, target: g.target, window: k });
                }
            }
        }
    }

    // penalty indexed by r + n
    let penalty: Vec<f64> =
        (-(n as i32) + 1..n as i32).map(|r| cost.penalty(r)).collect::<Result<_, _>>()?;
    let penalty_of = |r: i32| penalty[(r + n as i32 - 1) as usize];

    let dag = build_dag(circuit);
    let mut frontier = Frontier::new(&dag);
    let starts: Vec<usize> = if k >= n { vec![0] } else { (0..n).collect() };
    let mut plans: Vec<BitstreamPlan> = Vec::new();
    let mut current = 0usize;

    while !frontier.is_exhausted() {
        let candidates: Vec<Candidate> = starts
            .par_iter()
            .map(|&s| {
                let rotation = rotation_between(current, s, n);
                Candidate { s, rotation, penalty: penalty_of(rotation), gates: score_window(&frontier, &dag, circuit, cfg, s, opts) }
            })
            .collect();
        let best = if plans.is_empty() && !candidates[0].gates.is_empty() {
            // The initial layout is canonical; stay on it if anything fits.
            &candidates[0]
        } else {
            candidates.iter().min_by(|a, b| a.rank(b)).expect("at least one window start")
        };
        if best.gates.is_empty() {
            let g = *frontier.ready().iter().next().expect("unfinished circuit has a ready gate");
            let gate = &circuit.gates()[g];
            return Err(ScheduleError::Unschedulable {
                gate: g,
                control: gate.control().unwrap_or(gate.target),
                target: gate.target,
                window: k,
            });
        }
        if best.s != current {
            match plans.last_mut() {
                Some(prev) => prev.rotation_out = best.rotation,
                // relayout pass before the first real bitstream
                None => plans.push(BitstreamPlan {
                    window_start: current,
                    slots: vec![Slot::Nop; cfg.n_qpu],
                    rotation_out: best.rotation,
                }),
            }
        }
        let mapping = QubitMapping { window_start: best.s, n_qubits: n };
        let mut slots: Vec<Slot> = best
            .gates
            .iter()
            .map(|&g| {
                let gate = &circuit.gates()[g];
                Slot::Gate(PlacedGate {
                    gate_id: g,
                    target: mapping.physical(gate.target),
                    control: gate.control().map(|c| mapping.physical(c)),
                    matrix: gate.matrix,
                })
            })
            .collect();
        slots.resize(cfg.n_qpu, Slot::Nop);
        for &g in &best.gates {
            frontier.complete(&dag, g);
        }
        current = best.s;
        plans.push(BitstreamPlan { window_start: best.s, slots, rotation_out: 0 });
    }
    if let Some(last) = plans.last_mut() {
        last.rotation_out = rotation_between(last.window_start, 0, n);
    }
    Ok(plans)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilizationRecord {
    pub index: usize,
    pub window_start: usize,
    pub occupied: usize,
    pub utilization: f64,
    pub rotation: i32,
    /// Rotation penalty relative to the best α (1.0 = none).
    pub relative_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilizationReport {
    pub bitstreams: Vec<UtilizationRecord>,
    pub mean_utilization: f64,
    pub total_gates: usize,
}

pub fn utilization_report(
    plans: &[BitstreamPlan],
    cfg: &SystemConfig,
    cost: &AlphaTable,
) -> Result<UtilizationReport, ScheduleError> {
    let mut bitstreams = Vec::with_capacity(plans.len());
    for (index, p) in plans.iter().enumerate() {
        let occupied = p.occupied();
        bitstreams.push(UtilizationRecord {
            index,
            window_start: p.window_start,
            occupied,
            utilization: occupied as f64 / cfg.n_qpu as f64,
            rotation: p.rotation_out,
            relative_cost: cost.penalty(p.rotation_out)?,
        });
    }
    let mean_utilization = if bitstreams.is_empty() {
        0.0
    } else {
        bitstreams.iter().map(|b| b.utilization).sum::<f64>() / bitstreams.len() as f64
    };
    let total_gates = bitstreams.iter().map(|b| b.occupied).sum();
    Ok(UtilizationReport { bitstreams, mean_utilization, total_gates })
}

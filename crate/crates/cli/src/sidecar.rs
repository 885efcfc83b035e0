//! Gate table written next to each `.q2l` so `simulate --verify` can rebuild
//! the reference circuit. The device never reads it.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use q2logic::bitstream::{Bitstream, Opcode};
use q2logic::circuit::{Circuit, Gate};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const FORMAT: &str = "q2l-gate-table";

#[derive(Debug, Serialize, Deserialize)]
pub struct GateTable {
    pub format: String,
    pub version: u32,
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

/// `adder.q2l` → `adder.gates.json`.
pub fn path_for(q2l: &Path) -> PathBuf {
    q2l.with_extension("gates.json")
}

pub fn write(path: &Path, circuit: &Circuit) -> Result<(), CliError> {
    let table = GateTable { format: FORMAT.into(), version: 1, n_qubits: circuit.n_qubits, gates: circuit.gates().to_vec() };
    let text = serde_json::to_string_pretty(&table).expect("gate table serializes");
    std::fs::write(path, text).map_err(CliError::io(path))
}

pub fn read(path: &Path) -> Result<GateTable, CliError> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    let bad = |message: String| CliError::Sidecar { path: path.to_path_buf(), message };
    let table: GateTable = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    if table.format != FORMAT || table.version != 1 {
        return Err(bad(format!("not a version-1 {FORMAT}")));
    }
    Ok(table)
}

/// Reference circuit in the order the bitstreams execute the gates.
///
/// Fails when the records and the table disagree on gate ids, qubit counts or
/// operand kinds.
pub fn circuit_for(table: &GateTable, program: &[Bitstream]) -> Result<Circuit, CliError> {
    let n = program.first().map_or(table.n_qubits, |b| b.header.n_qubits as usize);
    if n != table.n_qubits {
        return Err(CliError::Mismatch(format!("gate table has {} qubits, bitstreams {n}", table.n_qubits)));
    }
    let by_id: HashMap<usize, (usize, &Gate)> = table.gates.iter().enumerate().map(|(i, g)| (g.id, (i, g))).collect();
    let mut used = vec![false; table.gates.len()];
    let mut circuit = Circuit::new(n);
    for rec in program.iter().flat_map(|b| &b.records).filter(|r| r.opcode != Opcode::Nop) {
        let id = rec.gate_id as usize;
        let &(idx, gate) = by_id.get(&id).ok_or_else(|| CliError::Mismatch(format!("record names unknown gate {id}")))?;
        if (rec.opcode == Opcode::Controlled) != gate.is_controlled() {
            return Err(CliError::Mismatch(format!("gate {id}: record and table disagree on control")));
        }
        if std::mem::replace(&mut used[idx], true) {
            return Err(CliError::Mismatch(format!("gate {id} appears twice in the bitstreams")));
        }
        let pushed = match gate.control() {
            Some(c) => circuit.push_controlled(c, gate.target, gate.matrix, gate.source_tag.clone()),
            None => circuit.push_unary(gate.target, gate.matrix, gate.source_tag.clone()),
        };
        pushed.map_err(|e| CliError::Mismatch(format!("gate {id}: {e}")))?;
    }
    if let Some(missing) = used.iter().position(|u| !u) {
        return Err(CliError::Mismatch(format!("gate {} never scheduled", table.gates[missing].id)));
    }
    Ok(circuit)
}

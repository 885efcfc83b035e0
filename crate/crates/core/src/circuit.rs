//! Primitive circuit IR: unary and singly-controlled gates, their per-qubit
//! dependency DAG and ready-set bookkeeping.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::matrix::GateMatrix;

pub type GateId = usize;

#[derive(Debug, Error, PartialEq)]
pub enum CircuitError {
    #[error("gate {gate}: qubit {qubit} out of range for a {n_qubits}-qubit circuit")]
    QubitOutOfRange { gate: GateId, qubit: usize, n_qubits: usize },
    #[error("gate {gate}: control and target are both qubit {qubit}")]
    ControlIsTarget { gate: GateId, qubit: usize },
    #[error("gate {gate}: matrix is not unitary")]
    NotUnitary { gate: GateId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateKind {
    Unary,
    /// The matrix is applied to the target where the control qubit is 1.
    Controlled { control: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub id: GateId,
    #[serde(flatten)]
    pub kind: GateKind,
    pub target: usize,
    pub matrix: GateMatrix,
    /// Name of the source statement this gate was lowered from.
    pub source_tag: String,
}

impl Gate {
    pub fn control(&self) -> Option<usize> {
        match self.kind {
            GateKind::Unary => None,
            GateKind::Controlled { control } => Some(control),
        }
    }

    pub fn is_controlled(&self) -> bool {
        self.control().is_some()
    }

    /// Qubits this gate reads or writes: target first, then control.
    pub fn qubits(&self) -> SmallVec<[usize; 2]> {
        let mut q = SmallVec::new();
        q.push(self.target);
        if let Some(c) = self.control() {
            q.push(c);
        }
        q
    }

    pub fn is_cnot(&self) -> bool {
        self.is_controlled() && self.matrix.approx_eq(&GateMatrix::pauli_x(), 1e-12)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit { n_qubits, gates: Vec::new() }
    }

    /// Builds a circuit from gates in program order. Ids are reassigned densely.
    pub fn from_gates(n_qubits: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self, CircuitError> {
        let mut c = Circuit::new(n_qubits);
        for g in gates {
            match g.kind {
                GateKind::Unary => c.push_unary(g.target, g.matrix, g.source_tag)?,
                GateKind::Controlled { control } => {
                    c.push_controlled(control, g.target, g.matrix, g.source_tag)?
                }
            };
        }
        Ok(c)
    }

    pub fn push_unary(
        &mut self,
        target: usize,
        matrix: GateMatrix,
        tag: impl Into<String>,
    ) -> Result<GateId, CircuitError> {
        self.push(GateKind::Unary, target, matrix, tag.into())
    }

    pub fn push_controlled(
        &mut self,
        control: usize,
        target: usize,
        matrix: GateMatrix,
        tag: impl Into<String>,
    ) -> Result<GateId, CircuitError> {
        self.push(GateKind::Controlled { control }, target, matrix, tag.into())
    }

    fn push(
        &mut self,
        kind: GateKind,
        target: usize,
        matrix: GateMatrix,
        source_tag: String,
    ) -> Result<GateId, CircuitError> {
        let id = self.gates.len();
        let n_qubits = self.n_qubits;
        let check = |qubit: usize| {
            if qubit >= n_qubits {
                Err(CircuitError::QubitOutOfRange { gate: id, qubit, n_qubits })
            } else {
                Ok(())
            }
        };
        check(target)?;
        if let GateKind::Controlled { control } = kind {
            check(control)?;
            if control == target {
                return Err(CircuitError::ControlIsTarget { gate: id, qubit: target });
            }
        }
        if !matrix.is_unitary(1e-9) {
            return Err(CircuitError::NotUnitary { gate: id });
        }
        self.gates.push(Gate { id, kind, target, matrix, source_tag });
        Ok(id)
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_cnot()).count()
    }

    pub fn controlled_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_controlled()).count()
    }
}

/// Qubit-collision dependencies: each gate depends on the most recent earlier
/// gate touching each of its qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepDag {
    preds: Vec<SmallVec<[GateId; 2]>>,
    succs: Vec<SmallVec<[GateId; 2]>>,
}

pub fn build_dag(circuit: &Circuit) -> DepDag {
    let n = circuit.len();
    let mut last: Vec<Option<GateId>> = vec![None; circuit.n_qubits];
    let mut preds = Vec::with_capacity(n);
    let mut succs: Vec<SmallVec<[GateId; 2]>> = vec![SmallVec::new(); n];
    for g in circuit.gates() {
        let mut p: SmallVec<[GateId; 2]> = SmallVec::new();
        for q in g.qubits() {
            if let Some(prev) = last[q] {
                if !p.contains(&prev) {
                    p.push(prev);
                }
            }
            last[q] = Some(g.id);
        }
        p.sort_unstable();
        for &prev in &p {
            succs[prev].push(g.id);
        }
        preds.push(p);
    }
    DepDag { preds, succs }
}

impl DepDag {
    pub fn len(&self) -> usize {
        self.preds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preds.is_empty()
    }

    pub fn preds(&self, g: GateId) -> &[GateId] {
        &self.preds[g]
    }

    pub fn succs(&self, g: GateId) -> &[GateId] {
        &self.succs[g]
    }

    /// Checks that `order` visits every gate once with each gate after its preds.
    pub fn is_topological(&self, order: &[GateId]) -> bool {
        if order.len() != self.len() {
            return false;
        }
        let mut position = vec![usize::MAX; self.len()];
        for (i, &g) in order.iter().enumerate() {
            if g >= self.len() || position[g] != usize::MAX {
                return false;
            }
            position[g] = i;
        }
        (0..self.len()).all(|g| self.preds[g].iter().all(|&p| position[p] < position[g]))
    }

    /// Graphviz rendering; edges point from a gate to the gates that wait on it.
    pub fn to_dot(&self, circuit: &Circuit) -> String {
        let mut out = String::from("digraph deps {\n  node [shape=box];\n");
        for g in circuit.gates() {
            let label = match g.control() {
                Some(c) => format!("{}: {} q{}->q{}", g.id, g.source_tag, c, g.target),
                None => format!("{}: {} q{}", g.id, g.source_tag, g.target),
            };
            let _ = writeln!(out, "  g{} [label=\"{}\"];", g.id, label);
        }
        for (g, ps) in self.preds.iter().enumerate() {
            for p in ps {
                let _ = writeln!(out, "  g{p} -> g{g};");
            }
        }
        out.push_str("}\n");
        out
    }
}

/// All gates not in `done` whose predecessors are all in `done`, ascending.
pub fn ready_frontier(dag: &DepDag, done: &[bool]) -> Vec<GateId> {
    (0..dag.len())
        .filter(|&g| !done[g] && dag.preds(g).iter().all(|&p| done[p]))
        .collect()
}

/// Incremental ready-set tracking for a consumption loop over the DAG.
#[derive(Debug, Clone)]
pub struct Frontier {
    pending: Vec<u8>,
    done: Vec<bool>,
    ready: BTreeSet<GateId>,
    n_done: usize,
}

impl Frontier {
    pub fn new(dag: &DepDag) -> Self {
        let pending: Vec<u8> = (0..dag.len()).map(|g| dag.preds(g).len() as u8).collect();
        let ready = (0..dag.len()).filter(|&g| pending[g] == 0).collect();
        Frontier { pending, done: vec![false; dag.len()], ready, n_done: 0 }
    }

    pub fn ready(&self) -> &BTreeSet<GateId> {
        &self.ready
    }

    pub fn is_done(&self, g: GateId) -> bool {
        self.done[g]
    }

    pub fn done(&self) -> &[bool] {
        &self.done
    }

    /// Unresolved predecessor count of `g`.
    pub fn pending(&self, g: GateId) -> u8 {
        self.pending[g]
    }

    pub fn is_exhausted(&self) -> bool {
        self.n_done == self.done.len()
    }

    /// Marks a ready gate as executed and releases its successors.
    ///
    /// Panics if `g` is not currently ready.
    pub fn complete(&mut self, dag: &DepDag, g: GateId) {
        assert!(self.ready.remove(&g), "gate {g} completed while not ready");
        self.done[g] = true;
        self.n_done += 1;
        for &s in dag.succs(g) {
            self.pending[s] -= 1;
            if self.pending[s] == 0 {
                self.ready.insert(s);
            }
        }
    }
}

//! Dense double-precision Schrödinger reference simulator.
//!
//! Gates are applied by the pair iteration: for target `q`, every index pair
//! `(i, i | 1<<q)` with bit `q` of `i` clear is multiplied by the 2×2 matrix.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::circuit::{Circuit, GateKind};
use crate::matrix::GateMatrix;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("qubit {qubit} out of range for {n_qubits} qubits")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("control and target are both qubit {0}")]
    ControlIsTarget(usize),
}

/// States at or above this size use the rayon pair loop.
const PAR_THRESHOLD: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl DenseState {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        DenseState { n_qubits, amps }
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Self {
        assert!(amps.len().is_power_of_two(), "state length must be a power of two");
        DenseState { n_qubits: amps.len().trailing_zeros() as usize, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check(&self, q: usize) -> Result<(), OracleError> {
        if q >= self.n_qubits {
            Err(OracleError::QubitOutOfRange { qubit: q, n_qubits: self.n_qubits })
        } else {
            Ok(())
        }
    }

    pub fn apply_unary(&mut self, m: &GateMatrix, q: usize) -> Result<(), OracleError> {
        self.check(q)?;
        apply_pairs(&mut self.amps, m, q, None);
        Ok(())
    }

    pub fn apply_controlled(&mut self, m: &GateMatrix, control: usize, target: usize) -> Result<(), OracleError> {
        self.check(control)?;
        self.check(target)?;
        if control == target {
            return Err(OracleError::ControlIsTarget(control));
        }
        apply_pairs(&mut self.amps, m, target, Some(control));
        Ok(())
    }
}

fn apply_pairs(amps: &mut [Complex64], m: &GateMatrix, target: usize, control: Option<usize>) {
    let stride = 1usize << target;
    let [m00, m01, m10, m11] = m.0;
    let cmask = control.map_or(0, |c| 1usize << c);
    // Blocks of 2·stride hold `stride` pairs (lo[j], hi[j]); bit `target` of
    // the base index is 0 in `lo`.
    let kernel = |(blk, block): (usize, &mut [Complex64])| {
        let base = blk * 2 * stride;
        let (lo, hi) = block.split_at_mut(stride);
        for j in 0..stride {
            if (base + j) & cmask != cmask {
                continue;
            }
            let (a, b) = (lo[j], hi[j]);
            lo[j] = m00 * a + m01 * b;
            hi[j] = m10 * a + m11 * b;
        }
    };
    if amps.len() >= PAR_THRESHOLD {
        amps.par_chunks_mut(2 * stride).enumerate().for_each(kernel);
    } else {
        amps.chunks_mut(2 * stride).enumerate().for_each(kernel);
    }
}

/// Runs a circuit from `|0…0⟩` in program order.
pub fn run(circuit: &Circuit) -> DenseState {
    let mut state = DenseState::zero(circuit.n_qubits);
    for g in circuit.gates() {
        // Circuit construction already validated operands.
        match g.kind {
            GateKind::Unary => apply_pairs(&mut state.amps, &g.matrix, g.target, None),
            GateKind::Controlled { control } => apply_pairs(&mut state.amps, &g.matrix, g.target, Some(control)),
        }
    }
    state
}

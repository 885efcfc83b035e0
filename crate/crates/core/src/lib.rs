//! Compiler, scheduler and functional simulator for a streaming quantum-circuit overlay.
//!
//! Pipeline: [`qasm::parse_qasm`] → [`qasm::lower`] → [`scheduler::schedule`]
//! → [`bitstream::encode`] → [`device::run_program`]. [`oracle`] is the
//! double-precision reference and [`perf`] the runtime model.

pub mod bitstream;
pub mod circuit;
pub mod corpus;
pub mod device;
pub mod matrix;
pub mod oracle;
pub mod perf;
pub mod qasm;
pub mod scheduler;

pub use bitstream::{Bitstream, BitstreamError, BitstreamHeader, Opcode, QpuRecord};
pub use circuit::{build_dag, Circuit, CircuitError, DepDag, Frontier, Gate, GateId, GateKind};
pub use device::{canonicalize, init_state, run_bitstream, run_program, writer_rotate_index, DeviceError, StateVector};
pub use matrix::GateMatrix;
pub use oracle::DenseState;
pub use perf::{AlphaTable, PerfError, PerfParams};
pub use scheduler::{schedule, BitstreamPlan, PlacedGate, QubitMapping, ScheduleError, Slot, SystemConfig};

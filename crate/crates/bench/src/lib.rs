//! Shared fixtures for the benchmarks.

use q2logic::circuit::Circuit;
use q2logic::corpus::Family;
use q2logic::qasm::{lower, parse_qasm};

pub fn circuit(family: Family, n: usize) -> Circuit {
    lower(&parse_qasm(&family.generate(n)).expect("corpus parses")).expect("corpus lowers")
}

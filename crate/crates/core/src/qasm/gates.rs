//! Built-in gate set (`qelib1.inc` subset plus the `U`/`CX` primitives) and
//! the standard matrices for the unary ones.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;

use super::QasmError;
use crate::matrix::GateMatrix;

/// How a built-in call lowers onto the device's primitive gate set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinKind {
    Unary,
    /// First operand is the control, second the target.
    Controlled,
    /// Lowered by decomposition into unary and controlled gates.
    Composite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Builtin {
    pub name: &'static str,
    pub n_params: usize,
    pub n_qubits: usize,
    pub kind: BuiltinKind,
}

const fn b(name: &'static str, n_params: usize, n_qubits: usize, kind: BuiltinKind) -> Builtin {
    Builtin { name, n_params, n_qubits, kind }
}

use BuiltinKind::*;

pub const BUILTINS: &[Builtin] = &[
    b("U", 3, 1, Unary),
    b("u3", 3, 1, Unary),
    b("u", 3, 1, Unary),
    b("u2", 2, 1, Unary),
    b("u1", 1, 1, Unary),
    b("p", 1, 1, Unary),
    b("id", 0, 1, Unary),
    b("x", 0, 1, Unary),
    b("y", 0, 1, Unary),
    b("z", 0, 1, Unary),
    b("h", 0, 1, Unary),
    b("s", 0, 1, Unary),
    b("sdg", 0, 1, Unary),
    b("t", 0, 1, Unary),
    b("tdg", 0, 1, Unary),
    b("sx", 0, 1, Unary),
    b("sxdg", 0, 1, Unary),
    b("rx", 1, 1, Unary),
    b("ry", 1, 1, Unary),
    b("rz", 1, 1, Unary),
    b("CX", 0, 2, Controlled),
    b("cx", 0, 2, Controlled),
    b("cy", 0, 2, Controlled),
    b("cz", 0, 2, Controlled),
    b("ch", 0, 2, Controlled),
    b("cu1", 1, 2, Controlled),
    b("cp", 1, 2, Controlled),
    b("crz", 1, 2, Controlled),
    b("swap", 0, 2, Composite),
    b("rzz", 1, 2, Composite),
    b("ccx", 0, 3, Composite),
    b("cswap", 0, 3, Composite),
];

pub fn builtin(name: &str) -> Option<&'static Builtin> {
    BUILTINS.iter().find(|g| g.name == name)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn expi(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

/// `u3(θ,φ,λ) = [[cos(θ/2), −e^{iλ}sin(θ/2)], [e^{iφ}sin(θ/2), e^{i(φ+λ)}cos(θ/2)]]`.
pub fn u3(theta: f64, phi: f64, lambda: f64) -> GateMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    GateMatrix::new(
        c(co, 0.0),
        -expi(lambda) * s,
        expi(phi) * s,
        expi(phi + lambda) * co,
    )
}

/// Standard matrix of a unary built-in gate.
pub fn gate_matrix(name: &str, params: &[f64]) -> Result<GateMatrix, QasmError> {
    let info = builtin(name)
        .filter(|g| g.kind == Unary)
        .ok_or_else(|| QasmError::UnknownGate { pos: None, name: name.to_string() })?;
    check_arity(info, params)?;
    Ok(unary_matrix(name, params))
}

/// Matrix applied to the target of a controlled built-in when its control is 1.
pub fn controlled_base(name: &str, params: &[f64]) -> Result<GateMatrix, QasmError> {
    let info = builtin(name)
        .filter(|g| g.kind == Controlled)
        .ok_or_else(|| QasmError::UnknownGate { pos: None, name: name.to_string() })?;
    check_arity(info, params)?;
    Ok(match name {
        "CX" | "cx" => unary_matrix("x", &[]),
        "cy" => unary_matrix("y", &[]),
        "cz" => unary_matrix("z", &[]),
        "ch" => unary_matrix("h", &[]),
        "cu1" | "cp" => unary_matrix("u1", params),
        // qelib1's crz body yields diag(e^{-iλ/2}, e^{iλ/2}) on the target.
        "crz" => GateMatrix::diag(expi(-params[0] / 2.0), expi(params[0] / 2.0)),
        _ => unreachable!("controlled table out of sync: {name}"),
    })
}

fn check_arity(info: &Builtin, params: &[f64]) -> Result<(), QasmError> {
    if params.len() != info.n_params {
        return Err(QasmError::ParamArity {
            pos: None,
            name: info.name.to_string(),
            expected: info.n_params,
            found: params.len(),
        });
    }
    Ok(())
}

fn unary_matrix(name: &str, p: &[f64]) -> GateMatrix {
    let h = FRAC_1_SQRT_2;
    match name {
        "U" | "u3" | "u" => u3(p[0], p[1], p[2]),
        "u2" => u3(FRAC_PI_2, p[0], p[1]),
        "u1" | "p" => u3(0.0, 0.0, p[0]),
        "id" => GateMatrix::identity(),
        "x" => GateMatrix::pauli_x(),
        "y" => GateMatrix::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)),
        "z" => GateMatrix::diag(c(1.0, 0.0), c(-1.0, 0.0)),
        "h" => GateMatrix::new(c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)),
        "s" => GateMatrix::diag(c(1.0, 0.0), c(0.0, 1.0)),
        "sdg" => GateMatrix::diag(c(1.0, 0.0), c(0.0, -1.0)),
        "t" => GateMatrix::diag(c(1.0, 0.0), expi(FRAC_PI_4)),
        "tdg" => GateMatrix::diag(c(1.0, 0.0), expi(-FRAC_PI_4)),
        "sx" => GateMatrix::new(c(0.5, 0.5), c(0.5, -0.5), c(0.5, -0.5), c(0.5, 0.5)),
        "sxdg" => GateMatrix::new(c(0.5, -0.5), c(0.5, 0.5), c(0.5, 0.5), c(0.5, -0.5)),
        "rx" => u3(p[0], -FRAC_PI_2, FRAC_PI_2),
        "ry" => u3(p[0], 0.0, 0.0),
        "rz" => GateMatrix::diag(expi(-p[0] / 2.0), expi(p[0] / 2.0)),
        _ => unreachable!("unary table out of sync: {name}"),
    }
}

use super::gates::{self, BuiltinKind};
use super::{QasmError, SourceCircuit, Statement};
use crate::circuit::Circuit;
use crate::matrix::GateMatrix;

/// A primitive gate before ids are assigned: `(control, target, matrix)`.
pub type Primitive = (Option<usize>, usize, GateMatrix);

/// Lowers every statement into unary and singly-controlled gates.
pub fn lower(src: &SourceCircuit) -> Result<Circuit, QasmError> {
    let mut circuit = Circuit::new(src.n_qubits);
    for st in &src.statements {
        for (control, target, m) in lower_statement(st)? {
            let pushed = match control {
                Some(c) => circuit.push_controlled(c, target, m, st.name.as_str()),
                None => circuit.push_unary(target, m, st.name.as_str()),
            };
            pushed.map_err(|e| QasmError::Unsupported { pos: st.pos, what: e.to_string() })?;
        }
    }
    Ok(circuit)
}

/// Primitive expansion of one built-in call.
pub fn lower_statement(st: &Statement) -> Result<Vec<Primitive>, QasmError> {
    let info = gates::builtin(&st.name)
        .ok_or_else(|| QasmError::UnknownGate { pos: Some(st.pos), name: st.name.clone() })?;
    if st.qubits.len() != info.n_qubits {
        return Err(QasmError::QubitArity {
            pos: st.pos,
            name: st.name.clone(),
            expected: info.n_qubits,
            found: st.qubits.len(),
        });
    }
    let q = &st.qubits;
    let unary = |name: &str, params: &[f64], t: usize| -> Result<Primitive, QasmError> {
        Ok((None, t, gates::gate_matrix(name, params).map_err(|e| e.with_pos(st.pos))?))
    };
    let cx = |c: usize, t: usize| -> Primitive { (Some(c), t, GateMatrix::pauli_x()) };
    Ok(match info.kind {
        BuiltinKind::Unary => vec![unary(&st.name, &st.params, q[0])?],
        BuiltinKind::Controlled => {
            let m = gates::controlled_base(&st.name, &st.params).map_err(|e| e.with_pos(st.pos))?;
            vec![(Some(q[0]), q[1], m)]
        }
        BuiltinKind::Composite => match st.name.as_str() {
            "swap" => vec![cx(q[0], q[1]), cx(q[1], q[0]), cx(q[0], q[1])],
            "rzz" => vec![cx(q[0], q[1]), unary("u1", &st.params, q[1])?, cx(q[0], q[1])],
            "ccx" => toffoli(q[0], q[1], q[2])?,
            "cswap" => {
                let mut v = vec![cx(q[2], q[1])];
                v.extend(toffoli(q[0], q[1], q[2])?);
                v.push(cx(q[2], q[1]));
                v
            }
            other => {
                return Err(QasmError::Unsupported { pos: st.pos, what: format!("multi-qubit gate `{other}`") })
            }
        },
    })
}

/// The standard 15-gate {h, t, tdg, cx} Toffoli network.
fn toffoli(a: usize, b: usize, c: usize) -> Result<Vec<Primitive>, QasmError> {
    let h = gates::gate_matrix("h", &[])?;
    let t = gates::gate_matrix("t", &[])?;
    let tdg = gates::gate_matrix("tdg", &[])?;
    let x = GateMatrix::pauli_x();
    Ok(vec![
        (None, c, h),
        (Some(b), c, x),
        (None, c, tdg),
        (Some(a), c, x),
        (None, c, t),
        (Some(b), c, x),
        (None, c, tdg),
        (Some(a), c, x),
        (None, b, t),
        (None, c, t),
        (None, c, h),
        (Some(a), b, x),
        (None, a, t),
        (None, b, tdg),
        (Some(a), b, x),
    ])
}

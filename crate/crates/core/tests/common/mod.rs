//! Test-side reference implementations, written independently of the crate's
//! algorithms: a brute-force Kronecker simulator, a plan checker and random
//! circuit generators.
#![allow(dead_code)]

use std::collections::HashMap;

use num_complex::Complex64;
use q2logic::circuit::{Circuit, GateId};
use q2logic::matrix::GateMatrix;
use q2logic::qasm::gates::u3;
use q2logic::scheduler::{rotation_between, BitstreamPlan, PlacedGate, Slot, SystemConfig};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub type Dense = Vec<Vec<Complex64>>;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn eye(d: usize) -> Dense {
    (0..d).map(|i| (0..d).map(|j| c(if i == j { 1.0 } else { 0.0 })).collect()).collect()
}

fn kron(a: &Dense, b: &Dense) -> Dense {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn add(a: &Dense, b: &Dense) -> Dense {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect()).collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let d = a.len();
    let mut out = vec![vec![c(0.0); d]; d];
    for i in 0..d {
        for k in 0..d {
            if a[i][k] == c(0.0) {
                continue;
            }
            for j in 0..d {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn matvec(a: &Dense, v: &[Complex64]) -> Vec<Complex64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

fn two(m: &GateMatrix) -> Dense {
    vec![vec![m.get(0, 0), m.get(0, 1)], vec![m.get(1, 0), m.get(1, 1)]]
}

/// `⊗` over qubits n-1 … 0 (qubit 0 is the least significant index bit),
/// with `ops[q]` on qubit q.
fn kron_all(ops: &[Dense]) -> Dense {
    let mut out = vec![vec![c(1.0)]];
    for op in ops.iter().rev() {
        out = kron(&out, op);
    }
    out
}

/// Full 2^n × 2^n operator of one gate, built from Kronecker products.
pub fn gate_operator(n: usize, target: usize, control: Option<usize>, m: &GateMatrix) -> Dense {
    let id2 = eye(2);
    match control {
        None => {
            let ops: Vec<Dense> = (0..n).map(|q| if q == target { two(m) } else { id2.clone() }).collect();
            kron_all(&ops)
        }
        Some(ctl) => {
            let p0 = vec![vec![c(1.0), c(0.0)], vec![c(0.0), c(0.0)]];
            let p1 = vec![vec![c(0.0), c(0.0)], vec![c(0.0), c(1.0)]];
            let off: Vec<Dense> = (0..n).map(|q| if q == ctl { p0.clone() } else { id2.clone() }).collect();
            let on: Vec<Dense> = (0..n)
                .map(|q| if q == ctl { p1.clone() } else if q == target { two(m) } else { id2.clone() })
                .collect();
            add(&kron_all(&off), &kron_all(&on))
        }
    }
}

/// State after the circuit by multiplying explicit operators onto |0…0⟩.
pub fn kron_run(circuit: &Circuit) -> Vec<Complex64> {
    let n = circuit.n_qubits;
    let mut v = vec![c(0.0); 1 << n];
    v[0] = c(1.0);
    for g in circuit.gates() {
        v = matvec(&gate_operator(n, g.target, g.control(), &g.matrix), &v);
    }
    v
}

pub fn linf(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn random_unitary(r: &mut StdRng) -> GateMatrix {
    let a = |r: &mut StdRng| r.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    let m = u3(a(r), a(r), a(r));
    let phase = Complex64::from_polar(1.0, a(r));
    GateMatrix(m.0.map(|x| x * phase))
}

/// Cyclic distance between qubits on an `n`-ring.
pub fn ring_distance(a: usize, b: usize, n: usize) -> usize {
    let d = (a + n - b) % n;
    d.min(n - d)
}

/// Random circuit whose controlled gates keep control and target within
/// cyclic distance `< max_dist`.
pub fn random_circuit_local(r: &mut StdRng, n: usize, n_gates: usize, max_dist: usize) -> Circuit {
    let mut circ = Circuit::new(n);
    for _ in 0..n_gates {
        let t = r.gen_range(0..n);
        let want_ctl = n >= 2 && max_dist >= 2 && r.gen_bool(0.4);
        if want_ctl {
            let candidates: Vec<usize> = (0..n).filter(|&q| q != t && ring_distance(q, t, n) < max_dist).collect();
            if !candidates.is_empty() {
                let ctl = candidates[r.gen_range(0..candidates.len())];
                let m = if r.gen_bool(0.5) { GateMatrix::pauli_x() } else { random_unitary(r) };
                circ.push_controlled(ctl, t, m, "rand").unwrap();
                continue;
            }
        }
        circ.push_unary(t, random_unitary(r), "rand").unwrap();
    }
    circ
}

pub fn random_circuit(r: &mut StdRng, n: usize, n_gates: usize) -> Circuit {
    random_circuit_local(r, n, n_gates, n)
}

/// Independent validity check of a schedule. Returns the first violation.
pub fn check_plans(circuit: &Circuit, cfg: &SystemConfig, plans: &[BitstreamPlan], remote: bool) -> Result<(), String> {
    let n = cfg.n_qubits;
    let k = cfg.n_sysqbits.min(n);
    let mut position: HashMap<GateId, (usize, usize)> = HashMap::new();
    let mut s = 0usize;
    for (p, plan) in plans.iter().enumerate() {
        if plan.slots.len() != cfg.n_qpu {
            return Err(format!("plan {p}: {} slots for {} QPUs", plan.slots.len(), cfg.n_qpu));
        }
        if plan.window_start != s {
            return Err(format!("plan {p}: window {} but rotations lead to {s}", plan.window_start));
        }
        for (slot, g) in plan.slots.iter().enumerate().filter_map(|(i, sl)| sl.gate().map(|g| (i, g))) {
            if position.insert(g.gate_id, (p, slot)).is_some() {
                return Err(format!("gate {} scheduled twice", g.gate_id));
            }
            let gate = circuit.gates().get(g.gate_id).ok_or(format!("unknown gate {}", g.gate_id))?;
            let phys = |q: usize| (q + n - s) % n;
            if g.target != phys(gate.target) || g.target >= k {
                return Err(format!("gate {}: target placed at {} (logical {}, s={s})", g.gate_id, g.target, gate.target));
            }
            if g.control != gate.control().map(phys) {
                return Err(format!("gate {}: control mismatch", g.gate_id));
            }
            if let Some(cp) = g.control {
                if !remote && cp >= k {
                    return Err(format!("gate {}: control at {cp} outside window", g.gate_id));
                }
            }
            if !g.matrix.approx_eq(&gate.matrix, 0.0) {
                return Err(format!("gate {}: matrix altered", g.gate_id));
            }
        }
        let r = plan.rotation_out;
        if 2 * r.unsigned_abs() as usize > n {
            return Err(format!("plan {p}: rotation {r} out of range"));
        }
        s = (s as i64 + r as i64).rem_euclid(n as i64) as usize;
    }
    if s != 0 {
        return Err(format!("program ends at window {s}"));
    }
    if position.len() != circuit.len() {
        return Err(format!("{} of {} gates scheduled", position.len(), circuit.len()));
    }
    // every pair of gates sharing a qubit keeps program order
    let mut last: HashMap<usize, GateId> = HashMap::new();
    for g in circuit.gates() {
        for q in g.qubits() {
            if let Some(&prev) = last.get(&q) {
                if position[&prev] >= position[&g.id] {
                    return Err(format!("gate {} runs before its predecessor {prev}", g.id));
                }
            }
            last.insert(q, g.id);
        }
    }
    Ok(())
}

/// Random schedulable circuit plus a config for it.
pub fn random_case(r: &mut StdRng, max_n: usize, max_gates: usize) -> (Circuit, SystemConfig) {
    let n = r.gen_range(2..=max_n);
    let k = r.gen_range(2..=n + 2);
    let n_qpu = r.gen_range(1..=12);
    let n_gates = r.gen_range(0..=max_gates);
    let circ = random_circuit_local(r, n, n_gates, k.min(n));
    (circ, SystemConfig::new(n_qpu, k, n).unwrap())
}

pub fn quantized(m: GateMatrix) -> GateMatrix {
    GateMatrix::from_f32(m.to_f32())
}

/// Random well-formed plan list: window starts chained by rotations, ending at 0.
pub fn random_plans(r: &mut StdRng) -> (SystemConfig, Vec<BitstreamPlan>) {
    let n = r.gen_range(1..=20);
    let k = r.gen_range(1..=n + 1);
    let cfg = SystemConfig::new(r.gen_range(1..=16), k, n).unwrap();
    let w = cfg.window();
    let count = r.gen_range(1..=6);
    let mut plans = Vec::new();
    let mut s = 0usize;
    let mut id = 0;
    for i in 0..count {
        let slots = (0..cfg.n_qpu)
            .map(|_| match r.gen_range(0..3) {
                0 => Slot::Nop,
                kind => {
                    let target = r.gen_range(0..w);
                    let control = (kind == 2 && n >= 2).then(|| loop {
                        let c = r.gen_range(0..n);
                        if c != target {
                            break c;
                        }
                    });
                    id += 1 + r.gen_range(0..3);
                    let m = GateMatrix([0; 4].map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))));
                    Slot::Gate(PlacedGate { gate_id: id, target, control, matrix: quantized(m) })
                }
            })
            .collect();
        let next = if i + 1 == count { 0 } else { r.gen_range(0..n) };
        let rotation = rotation_between(s, next, n);
        plans.push(BitstreamPlan { window_start: s, slots, rotation_out: rotation });
        s = next;
    }
    (cfg, plans)
}

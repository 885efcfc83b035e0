//! Benchmark circuit generators in QASMBench style, emitted as OpenQASM 2.0
//! text so they exercise the full frontend.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::str::FromStr;

const HEADER: &str = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";

/// Opening of the 4-qubit adder: two X and two T gates on q0/q1 are
/// independent of the H + CNOT pair on q2/q3 that gates everything after.
pub const ADDER_FRAGMENT: &str = "OPENQASM 2.0;
include \"qelib1.inc\";
qreg q[4];
x q[0];
x q[1];
h q[3];
cx q[3],q[2];
t q[0];
t q[1];
t q[2];
tdg q[3];
cx q[1],q[2];
t q[2];
cx q[0],q[1];
cx q[2],q[3];
";

/// Small 4-qubit adder benchmark.
pub const ADDER_N4: &str = "OPENQASM 2.0;
include \"qelib1.inc\";
qreg q[4];
creg c[4];
x q[0];
x q[1];
h q[3];
cx q[2],q[3];
t q[0];
t q[1];
t q[2];
tdg q[3];
cx q[0],q[1];
cx q[2],q[3];
cx q[3],q[0];
cx q[1],q[2];
cx q[0],q[1];
cx q[2],q[3];
tdg q[0];
tdg q[1];
tdg q[2];
t q[3];
cx q[0],q[1];
cx q[2],q[3];
s q[3];
cx q[3],q[0];
h q[3];
measure q -> c;
";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Adder,
    CatState,
    Ising,
    Qft,
    WState,
    Vqc,
}

impl Family {
    pub const ALL: [Family; 6] =
        [Family::Adder, Family::CatState, Family::Ising, Family::Qft, Family::WState, Family::Vqc];

    pub fn name(self) -> &'static str {
        match self {
            Family::Adder => "adder",
            Family::CatState => "cat_state",
            Family::Ising => "ising",
            Family::Qft => "qft",
            Family::WState => "wstate",
            Family::Vqc => "vqc",
        }
    }

    pub fn min_qubits(self) -> usize {
        match self {
            Family::Adder => 4,
            Family::CatState | Family::Ising | Family::WState | Family::Vqc => 2,
            Family::Qft => 1,
        }
    }

    /// QASM source for an `n`-qubit instance.
    ///
    /// Panics if `n < self.min_qubits()`.
    pub fn generate(self, n: usize) -> String {
        assert!(n >= self.min_qubits(), "{} needs at least {} qubits", self.name(), self.min_qubits());
        match self {
            Family::Adder => adder(n),
            Family::CatState => cat_state(n),
            Family::Ising => ising(n, 2),
            Family::Qft => qft(n),
            Family::WState => wstate(n),
            Family::Vqc => vqc(n, 28),
        }
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s || (s == "cat" && *f == Family::CatState))
            .ok_or_else(|| format!("unknown circuit family `{s}`"))
    }
}

fn start(n: usize) -> String {
    format!("{HEADER}qreg q[{n}];\n")
}

/// `|0…0⟩ + |1…1⟩` via one H and a CNOT chain.
pub fn cat_state(n: usize) -> String {
    let mut s = start(n);
    s.push_str("h q[0];\n");
    for i in 0..n - 1 {
        let _ = writeln!(s, "cx q[{}],q[{}];", i, i + 1);
    }
    s
}

/// Ripple-carry adder over `(n - 2) / 2`-bit operands, `a` in superposition.
pub fn adder(n: usize) -> String {
    let m = (n - 2) / 2;
    let a_bits: Vec<Option<bool>> = vec![None; m];
    let b_bits: Vec<Option<bool>> = (0..m).map(|i| Some(i % 2 == 0)).collect();
    adder_with_inputs(n, &a_bits, &b_bits)
}

/// Layout: `q[0]` carry-in, `b_i = q[1 + 2i]`, `a_i = q[2 + 2i]`, carry-out
/// `q[2m + 1]`. `None` inputs get a Hadamard, `Some(true)` an X.
pub(crate) fn adder_with_inputs(n: usize, a: &[Option<bool>], b: &[Option<bool>]) -> String {
    let m = a.len();
    assert!(m >= 1 && b.len() == m && 2 * m + 2 <= n);
    let mut s = String::from(HEADER);
    s.push_str("gate majority a,b,c { cx c,b; cx c,a; ccx a,b,c; }\n");
    s.push_str("gate unmaj a,b,c { ccx a,b,c; cx c,a; cx a,b; }\n");
    let _ = writeln!(s, "qreg q[{n}];\ncreg c[{n}];");
    let bq = |i: usize| 1 + 2 * i;
    let aq = |i: usize| 2 + 2 * i;
    for i in 0..m {
        for (bit, q) in [(a[i], aq(i)), (b[i], bq(i))] {
            match bit {
                None => {
                    let _ = writeln!(s, "h q[{q}];");
                }
                Some(true) => {
                    let _ = writeln!(s, "x q[{q}];");
                }
                Some(false) => {}
            }
        }
    }
    let _ = writeln!(s, "majority q[0],q[{}],q[{}];", bq(0), aq(0));
    for i in 1..m {
        let _ = writeln!(s, "majority q[{}],q[{}],q[{}];", aq(i - 1), bq(i), aq(i));
    }
    let _ = writeln!(s, "cx q[{}],q[{}];", aq(m - 1), 2 * m + 1);
    for i in (1..m).rev() {
        let _ = writeln!(s, "unmaj q[{}],q[{}],q[{}];", aq(i - 1), bq(i), aq(i));
    }
    let _ = writeln!(s, "unmaj q[0],q[{}],q[{}];", bq(0), aq(0));
    s.push_str("measure q -> c;\n");
    s
}

/// Transverse-field Ising evolution: nearest-neighbour ZZ terms then an X layer per step.
pub fn ising(n: usize, steps: usize) -> String {
    let mut s = start(n);
    s.push_str("h q;\n");
    for step in 0..steps {
        for i in 0..n - 1 {
            let j = 0.3 + 0.05 * ((i + step) % 5) as f64;
            let _ = writeln!(s, "cx q[{i}],q[{}];\nrz({j:.6}) q[{}];\ncx q[{i}],q[{}];", i + 1, i + 1, i + 1);
        }
        let _ = writeln!(s, "rx({:.6}) q;", 0.4 + 0.1 * step as f64);
    }
    s
}

/// Quantum Fourier transform with each `cu1` written out as its qelib1 body
/// (three `u1` and two `cx`).
pub fn qft(n: usize) -> String {
    let mut s = start(n);
    for j in 0..n {
        let _ = writeln!(s, "h q[{j}];");
        for k in j + 1..n {
            let half = PI / (1u64 << (k - j)) as f64 / 2.0;
            let _ = writeln!(
                s,
                "u1({half:.15}) q[{k}];\ncx q[{k}],q[{j}];\nu1({:.15}) q[{j}];\ncx q[{k}],q[{j}];\nu1({half:.15}) q[{j}];",
                -half
            );
        }
    }
    s
}

/// Linear W-state preparation: the excitation starts on `q[n-1]` and is
/// split down the register one qubit at a time.
pub fn wstate(n: usize) -> String {
    let mut s = start(n);
    let _ = writeln!(s, "x q[{}];", n - 1);
    for i in (1..n).rev() {
        let theta = (1.0 / ((i + 1) as f64).sqrt()).acos();
        let _ = writeln!(
            s,
            "ry({:.15}) q[{}];\ncz q[{i}],q[{}];\nry({theta:.15}) q[{}];\ncx q[{}],q[{i}];",
            -theta,
            i - 1,
            i - 1,
            i - 1,
            i - 1
        );
    }
    s
}

/// Variational classifier: `reps` rounds of a ZZ feature map over neighbours
/// plus a rotation layer, then a final rotation block. With 27 qubits and
/// 28 rounds this is 4560 gates of which 1456 are CNOTs.
pub fn vqc(n: usize, reps: usize) -> String {
    let angle = |a: usize, b: usize| 0.05 + 0.37 * ((a * 7 + b * 13) % 17) as f64;
    let mut s = start(n);
    s.push_str("h q;\n");
    for r in 0..reps {
        for i in 0..n {
            let _ = writeln!(s, "rz({:.6}) q[{i}];", angle(i, r));
        }
        for i in 0..n - 1 {
            let _ = writeln!(
                s,
                "cx q[{i}],q[{}];\nrz({:.6}) q[{}];\ncx q[{i}],q[{}];",
                i + 1,
                angle(i + 3, r + 1),
                i + 1,
                i + 1
            );
        }
        for i in 0..n {
            let _ = writeln!(s, "ry({:.6}) q[{i}];\nrz({:.6}) q[{i}];", angle(i + 1, r + 2), angle(i + 2, r + 5));
        }
    }
    for (layer, g) in ["ry", "rz", "ry"].into_iter().enumerate() {
        for i in 0..n {
            let _ = writeln!(s, "{g}({:.6}) q[{i}];", angle(i + layer, reps + layer));
        }
    }
    s
}

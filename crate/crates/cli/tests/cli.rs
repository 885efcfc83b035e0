use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn q2l(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_q2l")).args(args).output().expect("binary runs")
}

fn ok_json(out: &Output) -> Value {
    assert!(out.status.success(), "exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn schema_check(name: &str, doc: &Value) {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "docs", "schema", &format!("{name}.schema.json")].iter().collect();
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    if let Err(errors) = compiled.validate(doc) {
        let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("{name} output violates schema: {msgs:?}");
    };
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn generate(dir: &TempDir, family: &str, n: usize) -> PathBuf {
    let out = q2l(&["generate", family, "--qubits", &n.to_string()]);
    assert!(out.status.success());
    write(dir, &format!("{family}{n}.qasm"), std::str::from_utf8(&out.stdout).unwrap())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn compile(qasm: &Path, out: &Path, nqpu: usize, k: usize, extra: &[&str]) -> Value {
    let (nq, kk) = (nqpu.to_string(), k.to_string());
    let mut args = vec!["compile", s(qasm), "--nqpu", &nq, "--sysqbits", &kk, "--out", s(out)];
    args.extend_from_slice(extra);
    let v = ok_json(&q2l(&args));
    schema_check("compile", &v);
    v
}

#[test]
fn fragment_schedule_report() {
    let dir = TempDir::new().unwrap();
    let qasm = write(&dir, "fragment.qasm", q2logic::corpus::ADDER_FRAGMENT);
    let v = compile(&qasm, &dir.path().join("f.q2l"), 4, 2, &[]);
    let b = v["bitstreams"].as_array().unwrap();
    assert_eq!(b[0]["utilization"], 1.0);
    assert_eq!(b[0]["rotation"], 2);
    assert_eq!(b[1]["rotation"], -1);
}

#[test]
fn wide_window_never_rotates() {
    let dir = TempDir::new().unwrap();
    let qasm = generate(&dir, "qft", 6);
    let v = compile(&qasm, &dir.path().join("q.q2l"), 8, 6, &[]);
    assert!(v["bitstreams"].as_array().unwrap().iter().all(|b| b["rotation"] == 0));
}

#[test]
fn compile_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let qasm = generate(&dir, "ising", 9);
    let (a, b) = (dir.path().join("a.q2l"), dir.path().join("b.q2l"));
    compile(&qasm, &a, 8, 4, &[]);
    compile(&qasm, &b, 8, 4, &[]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn cat_state_16_verifies() {
    let dir = TempDir::new().unwrap();
    let qasm = generate(&dir, "cat_state", 16);
    let out = dir.path().join("cat.q2l");
    compile(&qasm, &out, 16, 6, &[]);
    let v = ok_json(&q2l(&["simulate", s(&out), "--verify"]));
    schema_check("simulate", &v);
    assert_eq!(v["verification"]["passed"], true);
    let top: Vec<u64> = v["top"].as_array().unwrap()[..2].iter().map(|a| a["index"].as_u64().unwrap()).collect();
    assert_eq!(top, vec![0, 65535]);
    for a in &v["top"].as_array().unwrap()[..2] {
        assert!((a["re"].as_f64().unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-4);
    }
}

#[test]
fn pipeline_verifies_every_family() {
    let dir = TempDir::new().unwrap();
    for family in ["adder", "cat_state", "ising", "qft", "wstate", "vqc"] {
        for n in [4, 11, 16] {
            let qasm = generate(&dir, family, n);
            let out = dir.path().join(format!("{family}{n}.q2l"));
            compile(&qasm, &out, 16, 6, &["--remote-controls"]);
            let v = ok_json(&q2l(&["simulate", s(&out), "--verify"]));
            let linf = v["verification"]["max_linf"].as_f64().unwrap();
            assert!(linf < 1e-4, "{family}-{n}: {linf}");
        }
    }
}

#[test]
fn adder_matches_reference() {
    let dir = TempDir::new().unwrap();
    let qasm = generate(&dir, "adder", 4);
    let out = dir.path().join("adder.q2l");
    compile(&qasm, &out, 4, 4, &[]);
    let v = ok_json(&q2l(&["simulate", s(&out), "--verify"]));
    assert!(v["verification"]["max_linf"].as_f64().unwrap() < 1e-4);
}

#[test]
fn corrupted_file_exits_3() {
    let dir = TempDir::new().unwrap();
    let qasm = generate(&dir, "cat_state", 5);
    let out = dir.path().join("c.q2l");
    compile(&qasm, &out, 4, 3, &[]);
    let mut bytes = std::fs::read(&out).unwrap();
    bytes[0] = b'Z';
    std::fs::write(&out, &bytes).unwrap();
    assert_eq!(q2l(&["simulate", s(&out)]).status.code(), Some(3));
    std::fs::write(&out, &bytes[..30]).unwrap();
    assert_eq!(q2l(&["simulate", s(&out)]).status.code(), Some(3));
    assert_eq!(q2l(&["simulate", s(&dir.path().join("missing.q2l"))]).status.code(), Some(3));
}

#[test]
fn tampered_gate_table_fails_verification() {
    let dir = TempDir::new().unwrap();
    let qasm = generate(&dir, "wstate", 6);
    let out = dir.path().join("w.q2l");
    compile(&qasm, &out, 8, 4, &[]);
    let table = dir.path().join("w.gates.json");
    let mut t: Value = serde_json::from_str(&std::fs::read_to_string(&table).unwrap()).unwrap();
    // turn the first gate's matrix into identity
    t["gates"][0]["matrix"] = serde_json::json!([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]);
    std::fs::write(&table, t.to_string()).unwrap();
    let r = q2l(&["simulate", s(&out), "--verify"]);
    assert_eq!(r.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(v["verification"]["passed"], false);
    // a looser tolerance accepts the same run
    assert_eq!(q2l(&["simulate", s(&out), "--verify", "--tolerance", "10"]).status.code(), Some(0));
}

#[test]
fn estimate_worked_example() {
    let dir = TempDir::new().unwrap();
    let qasm = write(&dir, "one.qasm", "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[20];\nh q[0];\n");
    let out = dir.path().join("one.q2l");
    compile(&qasm, &out, 1, 20, &[]);
    let alpha = write(&dir, "alpha.csv", "rotation,alpha\ndefault,1.0\n");
    let base = ["estimate", s(&out), "--fmax", "200e6", "--fmem", "200e6", "--tcfg", "0", "--alpha-table", s(&alpha)];
    let mut args = base.to_vec();
    args.extend(["--blw", "128"]);
    let v = ok_json(&q2l(&args));
    schema_check("estimate", &v);
    let t = v["total_seconds"].as_f64().unwrap();
    assert!((t - 0.02097152).abs() / 0.02097152 < 1e-9, "{t}");
    let mut args = base.to_vec();
    args.extend(["--blw", "256"]);
    let t2 = ok_json(&q2l(&args))["total_seconds"].as_f64().unwrap();
    assert!((t / t2 - 1.5).abs() < 1e-12);
    // t_cfg adds per bitstream
    let mut args = base.to_vec();
    args.extend(["--blw", "128"]);
    args[7] = "1e-3";
    let t3 = ok_json(&q2l(&args))["total_seconds"].as_f64().unwrap();
    assert!((t3 - t - 1e-3).abs() < 1e-12);
}

#[test]
fn penalty_band_is_flagged() {
    let dir = TempDir::new().unwrap();
    let qasm = write(&dir, "far.qasm", "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[16];\nh q[0];\nh q[8];\n");
    let out = dir.path().join("far.q2l");
    compile(&qasm, &out, 2, 2, &[]);
    let v = ok_json(&q2l(&["estimate", s(&out)]));
    assert!(v["penalty_band_count"].as_u64().unwrap() >= 1);
    let flagged = v["bitstreams"].as_array().unwrap().iter().filter(|b| b["in_penalty_band"] == true).count();
    assert_eq!(flagged as u64, v["penalty_band_count"].as_u64().unwrap());
}

#[test]
fn report_json_and_csv() {
    let dir = TempDir::new().unwrap();
    let qasm = generate(&dir, "qft", 10);
    let csv = dir.path().join("r.csv");
    let v = ok_json(&q2l(&["report", s(&qasm), "--nqpu", "8", "--sysqbits", "4", "--remote-controls", "--csv", s(&csv)]));
    schema_check("report", &v);
    let n = v["bitstream_count"].as_u64().unwrap() as usize;
    assert_eq!(v["bitstreams"].as_array().unwrap().len(), n);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), n + 1);
    assert!(text.starts_with("index,window_start,occupied,utilization,rotation,alpha"));
    let occupied: u64 = v["bitstreams"].as_array().unwrap().iter().map(|b| b["occupied"].as_u64().unwrap()).sum();
    assert_eq!(occupied, v["gate_count"].as_u64().unwrap());
    let sum: f64 = v["bitstreams"].as_array().unwrap().iter().map(|b| b["seconds"].as_f64().unwrap()).sum();
    assert!((sum - v["total_seconds"].as_f64().unwrap()).abs() < 1e-15);
    assert_eq!(v["verification"]["passed"], true);
}

#[test]
fn compile_csv_and_dot() {
    let dir = TempDir::new().unwrap();
    let qasm = write(&dir, "bell.qasm", "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\nh q[0];\ncx q[0],q[1];\n");
    let (csv, dot) = (dir.path().join("b.csv"), dir.path().join("b.dot"));
    let v = compile(&qasm, &dir.path().join("b.q2l"), 1, 2, &["--csv", s(&csv), "--dot", s(&dot)]);
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count() as u64, v["bitstream_count"].as_u64().unwrap() + 1);
    let dot = std::fs::read_to_string(&dot).unwrap();
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("g0 -> g1"));
}

#[test]
fn dump_state_is_raw_f32() {
    let dir = TempDir::new().unwrap();
    let qasm = write(&dir, "bell.qasm", "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[3];\nh q[0];\ncx q[0],q[2];\n");
    let out = dir.path().join("b.q2l");
    compile(&qasm, &out, 2, 2, &[]);
    let dump = dir.path().join("state.bin");
    ok_json(&q2l(&["simulate", s(&out), "--dump-state", s(&dump)]));
    let raw = std::fs::read(&dump).unwrap();
    assert_eq!(raw.len(), 8 * 8);
    let f = |i: usize| f32::from_le_bytes(raw[4 * i..4 * i + 4].try_into().unwrap());
    assert!((f(0) - std::f32::consts::FRAC_1_SQRT_2).abs() < 1e-6);
    assert!((f(2 * 5) - std::f32::consts::FRAC_1_SQRT_2).abs() < 1e-6);
    assert_eq!(f(2), 0.0);
}

#[test]
fn error_exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.qasm", "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\nfoo q[0];\n");
    let r = q2l(&["compile", s(&bad), "--nqpu", "2", "--sysqbits", "2", "--out", s(&dir.path().join("x.q2l"))]);
    assert_eq!(r.status.code(), Some(1));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("bad.qasm:4:1"), "{err}");

    let far = write(&dir, "far.qasm", "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[8];\ncx q[0],q[4];\n");
    let r = q2l(&["compile", s(&far), "--nqpu", "2", "--sysqbits", "3", "--out", s(&dir.path().join("y.q2l"))]);
    assert_eq!(r.status.code(), Some(2));

    let r = q2l(&["compile", s(&far), "--nqpu", "0", "--sysqbits", "3", "--out", s(&dir.path().join("y.q2l"))]);
    assert_eq!(r.status.code(), Some(1));
    assert_eq!(q2l(&["compile"]).status.code(), Some(1));
    assert_eq!(q2l(&["generate", "nope", "-q", "3"]).status.code(), Some(1));
    let missing = dir.path().join("nothing.qasm");
    let r = q2l(&["compile", s(&missing), "--nqpu", "2", "--sysqbits", "3", "--out", s(&dir.path().join("z.q2l"))]);
    assert_eq!(r.status.code(), Some(3));
    let qasm = generate(&dir, "cat_state", 4);
    let out = dir.path().join("c.q2l");
    compile(&qasm, &out, 2, 2, &[]);
    assert_eq!(q2l(&["estimate", s(&out), "--fmax", "-5"]).status.code(), Some(1));
    assert_eq!(q2l(&["estimate", s(&out), "--preset", "unknown"]).status.code(), Some(1));
}

#[test]
fn measurement_warning_carries_position() {
    let dir = TempDir::new().unwrap();
    let qasm = write(&dir, "m.qasm", "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\ncreg c[2];\nh q[0];\nmeasure q -> c;\n");
    let r = q2l(&["compile", s(&qasm), "--nqpu", "2", "--sysqbits", "2", "--out", s(&dir.path().join("m.q2l"))]);
    assert!(r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("m.qasm:6:1: warning"));
}

#[test]
fn thread_cap_flag_and_env() {
    let dir = TempDir::new().unwrap();
    let qasm = generate(&dir, "ising", 15);
    let out = dir.path().join("i.q2l");
    compile(&qasm, &out, 8, 6, &[]);
    let one = ok_json(&q2l(&["--threads", "1", "simulate", s(&out), "--verify"]));
    let env = Command::new(env!("CARGO_BIN_EXE_q2l")).env("Q2L_THREADS", "2").args(["simulate", s(&out)]).output().unwrap();
    let env = ok_json(&env);
    let all = ok_json(&q2l(&["simulate", s(&out)]));
    assert_eq!(one["top"], all["top"]);
    assert_eq!(env["top"], all["top"]);
    assert_eq!(q2l(&["--threads", "0", "simulate", s(&out)]).status.code(), Some(1));
}

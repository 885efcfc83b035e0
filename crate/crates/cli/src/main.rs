use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use q2logic::bitstream::{decode, decode_bitstreams, encode, Bitstream};
use q2logic::circuit::{build_dag, Circuit};
use q2logic::corpus::Family;
use q2logic::device::{canonicalize, init_state, run_plans, run_program, StateVector};
use q2logic::oracle;
use q2logic::perf::{program_time, AlphaTable, PerfParams};
use q2logic::qasm::{lower, parse_qasm};
use q2logic::scheduler::{schedule_with, utilization_report, BitstreamPlan, ScheduleOptions, SystemConfig};

mod error;
mod report;
mod sidecar;

use error::CliError;
use report::{CompileReport, ConfigView, EstimateReport, RunReport, SimulateReport, Verification};

#[derive(Parser, Debug)]
#[command(name = "q2l", version, about = "Compile, simulate and estimate quantum circuits on a streaming gate-pipeline overlay")]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true, env = "Q2L_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Schedule a QASM file into a .q2l bitstream file plus gate table.
    Compile {
        qasm: PathBuf,
        #[command(flatten)]
        sched: SchedArgs,
        /// Output .q2l path; the gate table goes beside it as <name>.gates.json.
        #[arg(long, short)]
        out: PathBuf,
        /// Also write the dependency DAG in DOT format.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Also write per-bitstream utilization as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run a .q2l file through the device model.
    Simulate {
        q2l: PathBuf,
        /// Compare against the double-precision reference built from the gate table.
        #[arg(long)]
        verify: bool,
        /// Gate table (default: beside the .q2l).
        #[arg(long)]
        gates: Option<PathBuf>,
        /// Largest allowed L∞ distance from the reference state.
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
        /// Write the final state as raw little-endian (re, im) f32 pairs.
        #[arg(long)]
        dump_state: Option<PathBuf>,
        /// Number of largest amplitudes to report.
        #[arg(long, default_value_t = 8)]
        top: usize,
    },
    /// Estimate execution time of a .q2l file.
    Estimate {
        q2l: PathBuf,
        #[command(flatten)]
        perf: PerfArgs,
        /// Rotation efficiency table (default: built-in).
        #[arg(long)]
        alpha_table: Option<PathBuf>,
        /// Also write per-bitstream times as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compile, estimate and verify in one go.
    Report {
        qasm: PathBuf,
        #[command(flatten)]
        sched: SchedArgs,
        #[command(flatten)]
        perf: PerfArgs,
        /// Skip the device run and reference comparison.
        #[arg(long)]
        no_verify: bool,
        /// Largest allowed L∞ distance from the reference state.
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
        /// Also write the per-bitstream report rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print a benchmark circuit as QASM.
    Generate {
        /// adder, cat_state, ising, qft, wstate or vqc
        family: String,
        /// Number of qubits.
        #[arg(long, short)]
        qubits: usize,
    },
}

#[derive(Args, Debug)]
struct SchedArgs {
    /// QPUs in the chain.
    #[arg(long)]
    nqpu: usize,
    /// Window width in qubits.
    #[arg(long)]
    sysqbits: usize,
    /// Rotation efficiency table (CSV `rotation,alpha`, optional `default,alpha`).
    #[arg(long)]
    alpha_table: Option<PathBuf>,
    /// Allow controls outside the window.
    #[arg(long)]
    remote_controls: bool,
}

#[derive(Args, Debug)]
struct PerfArgs {
    /// Platform preset the explicit flags override.
    #[arg(long, default_value = "de10-agilex")]
    preset: String,
    /// Device clock in Hz.
    #[arg(long)]
    fmax: Option<f64>,
    /// Memory clock in Hz.
    #[arg(long)]
    fmem: Option<f64>,
    /// Burst load width in bits.
    #[arg(long)]
    blw: Option<u32>,
    /// Per-bitstream configuration time in seconds.
    #[arg(long)]
    tcfg: Option<f64>,
}

fn read_alpha(path: Option<&Path>) -> Result<AlphaTable, CliError> {
    match path {
        None => Ok(AlphaTable::default()),
        Some(p) => Ok(AlphaTable::parse(&fs::read_to_string(p).map_err(CliError::io(p))?)?),
    }
}

impl PerfArgs {
    fn params(&self, alpha: AlphaTable) -> Result<PerfParams, CliError> {
        let mut p = PerfParams::preset(&self.preset)
            .ok_or_else(|| CliError::BadParams(format!("unknown preset `{}`", self.preset)))?;
        p.f_max = self.fmax.unwrap_or(p.f_max);
        p.f_mem = self.fmem.unwrap_or(p.f_mem);
        p.burst_width_bits = self.blw.unwrap_or(p.burst_width_bits);
        p.t_cfg = self.tcfg.unwrap_or(p.t_cfg);
        p.alpha = alpha;
        p.validate()?;
        Ok(p)
    }
}

fn load_circuit(path: &Path) -> Result<Circuit, CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let src = parse_qasm(&text).map_err(|e| CliError::parse(path, &e))?;
    for w in &src.warnings {
        eprintln!("{}:{w}", path.display());
    }
    lower(&src).map_err(|e| CliError::parse(path, &e))
}

fn circuit_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

struct Compiled {
    circuit: Circuit,
    cfg: SystemConfig,
    alpha: AlphaTable,
    plans: Vec<BitstreamPlan>,
}

fn compile(qasm: &Path, sched: &SchedArgs) -> Result<Compiled, CliError> {
    let circuit = load_circuit(qasm)?;
    let alpha = read_alpha(sched.alpha_table.as_deref())?;
    let cfg = SystemConfig::new(sched.nqpu, sched.sysqbits, circuit.n_qubits)?;
    let opts = ScheduleOptions { remote_controls: sched.remote_controls };
    let plans = schedule_with(&circuit, &cfg, &alpha, opts)?;
    Ok(Compiled { circuit, cfg, alpha, plans })
}

fn read_program(path: &Path) -> Result<Vec<Bitstream>, CliError> {
    let bytes = fs::read(path).map_err(CliError::io(path))?;
    decode_bitstreams(&bytes).map_err(|source| CliError::Decode { path: path.to_path_buf(), source })
}

fn verify(program: &[Bitstream], table: &Path, tolerance: f64, state: &StateVector) -> Result<Verification, CliError> {
    let circuit = sidecar::circuit_for(&sidecar::read(table)?, program)?;
    let reference = oracle::run(&circuit);
    let max_linf = state.max_abs_diff(&reference);
    Ok(Verification { max_linf, tolerance, oracle_norm: reference.norm_sqr(), passed: max_linf <= tolerance })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Compile { qasm, sched, out, dot, csv } => {
            let c = compile(&qasm, &sched)?;
            let util = utilization_report(&c.plans, &c.cfg, &c.alpha)?;
            fs::write(&out, encode(&c.plans, &c.cfg)).map_err(CliError::io(&out))?;
            let table = sidecar::path_for(&out);
            sidecar::write(&table, &c.circuit)?;
            if let Some(p) = &dot {
                fs::write(p, build_dag(&c.circuit).to_dot(&c.circuit)).map_err(CliError::io(p))?;
            }
            if let Some(p) = &csv {
                report::write_csv(p, &util.bitstreams)?;
            }
            report::print_json(&CompileReport {
                circuit: circuit_name(&qasm),
                n_qubits: c.circuit.n_qubits,
                gate_count: c.circuit.len(),
                cnot_count: c.circuit.cnot_count(),
                config: ConfigView::from(&c.cfg),
                remote_controls: sched.remote_controls,
                bitstream_count: c.plans.len(),
                mean_utilization: util.mean_utilization,
                bitstreams: util.bitstreams,
                output: out.display().to_string(),
                gate_table: table.display().to_string(),
            });
        }
        Command::Simulate { q2l, verify: check, gates, tolerance, dump_state, top } => {
            if tolerance.is_nan() || tolerance < 0.0 {
                return Err(CliError::BadParams("tolerance must be non-negative".into()));
            }
            // decoding rejects empty files, so there is at least one bitstream
            let program = read_program(&q2l)?;
            let n = program[0].header.n_qubits as usize;
            let mut state = init_state(n)?;
            run_program(&mut state, &program)?;
            let state = canonicalize(state);
            if let Some(p) = &dump_state {
                let f = fs::File::create(p).map_err(CliError::io(p))?;
                state.write_raw(std::io::BufWriter::new(f)).map_err(CliError::io(p))?;
            }
            let verification = if check {
                let table = gates.unwrap_or_else(|| sidecar::path_for(&q2l));
                Some(verify(&program, &table, tolerance, &state)?)
            } else {
                None
            };
            let summary = state.summary(top);
            let failed = verification.as_ref().filter(|v| !v.passed).map(|v| (v.max_linf, v.tolerance));
            report::print_json(&SimulateReport {
                n_qubits: n,
                bitstream_count: program.len(),
                norm: summary.norm,
                top: summary.top,
                verification,
                state_dump: dump_state.map(|p| p.display().to_string()),
            });
            if let Some((linf, tolerance)) = failed {
                return Err(CliError::Verification { linf, tolerance });
            }
        }
        Command::Estimate { q2l, perf, alpha_table, csv } => {
            let params = perf.params(read_alpha(alpha_table.as_deref())?)?;
            let bytes = fs::read(&q2l).map_err(CliError::io(&q2l))?;
            let (cfg, plans) = decode(&bytes).map_err(|source| CliError::Decode { path: q2l.clone(), source })?;
            let n = cfg.n_qubits;
            let time = program_time(&params, &plans, n)?;
            if let Some(p) = &csv {
                report::write_csv(p, &time.bitstreams)?;
            }
            report::print_json(&EstimateReport {
                n_qubits: n,
                bitstream_count: plans.len(),
                f_max: params.f_max,
                f_mem: params.f_mem,
                burst_width_bits: params.burst_width_bits,
                t_cfg: params.t_cfg,
                total_seconds: time.total_seconds,
                penalty_band_count: time.bitstreams.iter().filter(|b| b.in_penalty_band).count(),
                bitstreams: time.bitstreams,
            });
        }
        Command::Report { qasm, sched, perf, no_verify, tolerance, csv } => {
            let c = compile(&qasm, &sched)?;
            let params = perf.params(c.alpha.clone())?;
            let util = utilization_report(&c.plans, &c.cfg, &c.alpha)?;
            let time = program_time(&params, &c.plans, c.circuit.n_qubits)?;
            let (verification, norm) = if no_verify {
                (None, None)
            } else {
                let mut state = init_state(c.circuit.n_qubits)?;
                run_plans(&mut state, &c.plans, &c.cfg)?;
                let reference = oracle::run(&c.circuit);
                let max_linf = state.max_abs_diff(&reference);
                let v = Verification { max_linf, tolerance, oracle_norm: reference.norm_sqr(), passed: max_linf <= tolerance };
                (Some(v), Some(state.norm_sqr()))
            };
            let rows = report::rows(&util, &time);
            if let Some(p) = &csv {
                report::write_csv(p, &rows)?;
            }
            let failed = verification.as_ref().filter(|v| !v.passed).map(|v| (v.max_linf, v.tolerance));
            report::print_json(&RunReport {
                circuit: circuit_name(&qasm),
                n_qubits: c.circuit.n_qubits,
                gate_count: c.circuit.len(),
                cnot_count: c.circuit.cnot_count(),
                config: ConfigView::from(&c.cfg),
                remote_controls: sched.remote_controls,
                bitstream_count: c.plans.len(),
                mean_utilization: util.mean_utilization,
                total_seconds: time.total_seconds,
                bitstreams: rows,
                verification,
                norm,
            });
            if let Some((linf, tolerance)) = failed {
                return Err(CliError::Verification { linf, tolerance });
            }
        }
        Command::Generate { family, qubits } => {
            let fam: Family = family.parse().map_err(CliError::BadParams)?;
            if qubits < fam.min_qubits() {
                return Err(CliError::BadParams(format!("{} needs at least {} qubits", fam.name(), fam.min_qubits())));
            }
            report::print_stdout(&fam.generate(qubits));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors share the bad-parameter exit code
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().expect("thread pool configured once");
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

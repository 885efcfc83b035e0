use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use q2logic::bitstream::{decode, encode, plans_to_bitstreams};
use q2logic::corpus::Family;
use q2logic::device::{init_state, run_bitstream, run_program};
use q2logic::oracle;
use q2logic::perf::AlphaTable;
use q2logic::scheduler::{schedule, SystemConfig};
use q2logic_bench::circuit;

fn scheduler(c: &mut Criterion) {
    let mut g = c.benchmark_group("schedule");
    for (fam, n, q, k) in [(Family::Qft, 27, 48, 14), (Family::Vqc, 27, 48, 14), (Family::Ising, 20, 16, 6)] {
        let circ = circuit(fam, n);
        let cfg = SystemConfig::new(q, k, n).unwrap();
        g.throughput(Throughput::Elements(circ.len() as u64));
        g.bench_function(BenchmarkId::new(fam.name(), format!("n{n}_q{q}_k{k}")), |b| {
            b.iter(|| schedule(&circ, &cfg, &AlphaTable::default()).unwrap())
        });
    }
    g.finish();
}

fn device(c: &mut Criterion) {
    let mut g = c.benchmark_group("device");
    g.sample_size(20);
    for n in [16, 20] {
        let circ = circuit(Family::Ising, n);
        let cfg = SystemConfig::new(16, 10, n).unwrap();
        let program = plans_to_bitstreams(&schedule(&circ, &cfg, &AlphaTable::default()).unwrap(), &cfg);
        g.throughput(Throughput::Bytes(8 << n));
        g.bench_function(BenchmarkId::new("one_bitstream", n), |b| {
            let mut s = init_state(n).unwrap();
            b.iter(|| run_bitstream(&mut s, &program[0]).unwrap())
        });
        g.bench_function(BenchmarkId::new("ising_program", n), |b| {
            b.iter(|| {
                let mut s = init_state(n).unwrap();
                run_program(&mut s, &program).unwrap();
                s
            })
        });
    }
    g.finish();
}

fn reference(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle");
    g.sample_size(20);
    for n in [12, 16] {
        let circ = circuit(Family::Qft, n);
        g.bench_function(BenchmarkId::new("qft", n), |b| b.iter(|| oracle::run(&circ)));
    }
    g.finish();
}

fn format(c: &mut Criterion) {
    let circ = circuit(Family::Vqc, 27);
    let cfg = SystemConfig::new(48, 14, 27).unwrap();
    let plans = schedule(&circ, &cfg, &AlphaTable::default()).unwrap();
    let bytes = encode(&plans, &cfg);
    let mut g = c.benchmark_group("bitstream");
    g.throughput(Throughput::Bytes(bytes.len() as u64));
    g.bench_function("encode_vqc27", |b| b.iter(|| encode(&plans, &cfg)));
    g.bench_function("decode_vqc27", |b| b.iter(|| decode(&bytes).unwrap()));
    g.finish();
}

criterion_group!(benches, scheduler, device, reference, format);
criterion_main!(benches);

mod common;

use common::rng;
use proptest::prelude::*;
use q2logic::perf::{bitstream_time, data_time, program_time, AlphaTable, PerfParams};
use q2logic::scheduler::{BitstreamPlan, Slot};
use rand::Rng;

fn params(alpha: f64, f_max: f64, f_mem: f64, blw: u32, t_cfg: f64) -> PerfParams {
    PerfParams { f_max, f_mem, burst_width_bits: blw, t_cfg, alpha: AlphaTable::uniform(alpha) }
}

/// Direct evaluation of the model for cross-checking.
fn expected(alpha: f64, f: f64, blw: f64, t_cfg: f64, n: u32) -> f64 {
    t_cfg + 8.0 * 2f64.powi(n as i32) / (alpha * f * (1.0 + blw / 128.0))
}

#[test]
fn matches_direct_formula() {
    let mut r = rng(60);
    for _ in 0..1000 {
        let (a, fm, fx) = (r.gen_range(0.01..1.0), r.gen_range(1e6..2e9), r.gen_range(1e6..2e9));
        let (blw, t, n) = (r.gen_range(1..=2048u32), r.gen_range(0.0..1e-3), r.gen_range(1..=34u32));
        let got = bitstream_time(&params(a, fx, fm, blw, t), n as usize, 0).unwrap();
        let want = expected(a, fm.min(fx), blw as f64, t, n);
        assert!((got - want).abs() <= 1e-12 * want);
    }
}

#[test]
fn program_time_is_sum_of_bitstreams() {
    let p = PerfParams::de10_agilex();
    let plans: Vec<BitstreamPlan> = [3, -5, 0, 8, -6]
        .iter()
        .map(|&r| BitstreamPlan { window_start: 0, slots: vec![Slot::Nop], rotation_out: r })
        .collect();
    let t = program_time(&p, &plans, 20).unwrap();
    let sum: f64 = plans.iter().map(|pl| bitstream_time(&p, 20, pl.rotation_out).unwrap()).sum();
    assert_eq!(t.total_seconds, sum);
    assert_eq!(t.bitstreams.len(), 5);
    assert_eq!(
        t.bitstreams.iter().map(|b| b.in_penalty_band).collect::<Vec<_>>(),
        vec![false, true, false, true, true]
    );
}

#[test]
fn preset_stays_under_platform_bandwidth() {
    let p = PerfParams::de10_agilex();
    for n in 1..=30usize {
        for r in -(n as i32 - 1)..n as i32 {
            let bw = 8.0 * 2f64.powi(n as i32) / data_time(&p, n, r).unwrap();
            assert!(bw <= 76.8e9, "n={n} r={r} bw={bw}");
        }
    }
}

#[test]
fn out_of_band_plans_dominate() {
    let p = PerfParams::de10_agilex();
    let mut r = rng(61);
    for _ in 0..200 {
        let n = r.gen_range(13..=30usize);
        let len = r.gen_range(1..20);
        let mk = |rots: Vec<i32>| -> Vec<BitstreamPlan> {
            rots.into_iter().map(|r| BitstreamPlan { window_start: 0, slots: vec![], rotation_out: r }).collect()
        };
        let band: Vec<i32> = (0..len).map(|_| r.gen_range(4..=12) * if r.gen_bool(0.5) { 1 } else { -1 }).collect();
        let clear: Vec<i32> = (0..len).map(|_| r.gen_range(-3..=3)).collect();
        let slow = program_time(&p, &mk(band), n).unwrap().total_seconds;
        let fast = program_time(&p, &mk(clear), n).unwrap().total_seconds;
        assert!(fast < slow);
    }
}

#[test]
fn alpha_table_text_round_trip() {
    let t = AlphaTable::default();
    assert_eq!(AlphaTable::parse(&t.to_text()).unwrap(), t);
    assert!(AlphaTable::parse("0,0.5").unwrap().alpha(1).is_err());
    assert!(AlphaTable::parse("0,1.5").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn time_is_monotone(
        a in 0.01f64..0.99, f in 1e6f64..1e9, blw in 1u32..2048, t in 0.0f64..1e-3, n in 1usize..30,
        da in 1.001f64..1.5, df in 1.001f64..2.0, db in 1u32..64, dt in 1e-7f64..1e-4,
    ) {
        let base = bitstream_time(&params(a, f, f * 2.0, blw, t), n, 0).unwrap();
        prop_assert!(bitstream_time(&params((a * da).min(1.0), f, f * 2.0, blw, t), n, 0).unwrap() < base);
        prop_assert!(bitstream_time(&params(a, f * df, f * 2.0 * df, blw, t), n, 0).unwrap() < base);
        prop_assert!(bitstream_time(&params(a, f, f * 2.0, (blw + db).min(2048), t), n, 0).unwrap() < base || blw == 2048);
        prop_assert!(bitstream_time(&params(a, f, f * 2.0, blw, t + dt), n, 0).unwrap() > base);
        prop_assert!(bitstream_time(&params(a, f, f * 2.0, blw, t), n + 1, 0).unwrap() > base);
    }
}

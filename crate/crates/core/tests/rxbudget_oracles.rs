use std::f64::consts::PI;

use phasor_core::rxbudget::{
    benchmark_fom, friis_cascade, iip3_cascade, linear_pc_states, p1db_from_iip3, parse_benchmark_csv,
    power_total, taper_budget, GainState, Iip3Combining, StageSpec,
};
use phasor_core::taper::{planar_taper, taylor_line_taper, TaperSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TABLE1: &str = include_str!("../../../data/table1.csv");

fn stage(name: &str, g: f64, nf: f64, iip3: Option<f64>) -> StageSpec {
    let mut s = GainState::new(name, g, nf, 0.0);
    s.iip3_dbm = iip3;
    StageSpec::single(name, s)
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Noise-wave simulation: each stage adds input-referred noise of power
/// (F − 1)·kT0B to the signal before amplifying it.
fn monte_carlo_nf(stages: &[(f64, f64)], samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = 0.0;
    let g_tot: f64 = stages.iter().map(|s| 10f64.powf(s.0 / 10.0)).product();
    for _ in 0..samples {
        let mut re = gaussian(&mut rng);
        let mut im = gaussian(&mut rng);
        for &(g_db, nf_db) in stages {
            let excess = (10f64.powf(nf_db / 10.0) - 1.0).sqrt();
            re += excess * gaussian(&mut rng);
            im += excess * gaussian(&mut rng);
            let a = 10f64.powf(g_db / 20.0);
            re *= a;
            im *= a;
        }
        acc += (re * re + im * im) / 2.0;
    }
    10.0 * (acc / samples as f64 / g_tot).log10()
}

#[test]
fn two_stage_friis_matches_noise_simulation() {
    let r = friis_cascade(&[stage("a", 16.0, 5.5, None), stage("b", 0.0, 10.0, None)]).unwrap();
    assert!((r.nf_db - 5.77).abs() < 0.01);
    let mc = monte_carlo_nf(&[(16.0, 5.5), (0.0, 10.0)], 400_000, 7);
    assert!((mc - r.nf_db).abs() < 0.05, "{mc} vs {}", r.nf_db);
}

/// Memoryless cubic y = a1·x + a3·x³ with power P = A²/2 in mW.
#[derive(Clone, Copy)]
struct Cubic {
    a1: f64,
    a3: f64,
}

impl Cubic {
    fn new(gain_db: f64, iip3_dbm: f64) -> Self {
        let a1 = 10f64.powf(gain_db / 20.0);
        let a_ip3_sq = 2.0 * 10f64.powf(iip3_dbm / 10.0);
        Self { a1, a3: -4.0 / 3.0 * a1 / a_ip3_sq }
    }
    fn apply(&self, x: f64) -> f64 {
        self.a1 * x + self.a3 * x * x * x
    }
}

/// Two-tone drive of a chain of cubics, returning (fundamental, IM3) output
/// powers in dBm from an exact-bin DFT.
fn two_tone(chain: &[Cubic], pin_dbm: f64) -> (f64, f64) {
    let n = 1024;
    let (k1, k2) = (20usize, 21usize);
    let amp = (2.0 * 10f64.powf(pin_dbm / 10.0)).sqrt();
    let y: Vec<f64> = (0..n)
        .map(|t| {
            let ph = 2.0 * PI * t as f64 / n as f64;
            let x = amp * ((k1 as f64 * ph).cos() + (k2 as f64 * ph).cos());
            chain.iter().fold(x, |v, c| c.apply(v))
        })
        .collect();
    let bin = |k: usize| {
        let (mut re, mut im) = (0.0, 0.0);
        for (t, v) in y.iter().enumerate() {
            let ph = 2.0 * PI * (k * t) as f64 / n as f64;
            re += v * ph.cos();
            im -= v * ph.sin();
        }
        let a = 2.0 * re.hypot(im) / n as f64;
        10.0 * (a * a / 2.0).log10()
    };
    (bin(k1), bin(2 * k1 - k2))
}

#[test]
fn cascaded_intercept_matches_polynomial_two_tone() {
    let chain = [stage("lna", 16.0, 5.5, Some(-20.0)), stage("mix", 10.0, 10.0, Some(0.0))];
    let formula = iip3_cascade(&chain, Iip3Combining::Coherent).unwrap();
    let cubics = [Cubic::new(16.0, -20.0), Cubic::new(10.0, 0.0)];
    let pin = -70.0;
    let (fund, im3) = two_tone(&cubics, pin);
    let oracle = pin + (fund - im3) / 2.0;
    assert!((oracle - formula).abs() < 0.5, "{oracle} vs {formula}");

    // Single stage: the oracle recovers the intercept it was built with.
    let (fund, im3) = two_tone(&cubics[..1], pin);
    assert!((pin + (fund - im3) / 2.0 + 20.0).abs() < 0.01);
}

#[test]
fn cubic_backoff_matches_compression_sweep() {
    for iip3 in [-20.0, 0.0, 7.0] {
        let c = Cubic::new(12.0, iip3);
        // Single tone: fundamental amplitude a1·A + (3/4)·a3·A³.
        let dev = |a: f64| 20.0 * ((c.a1 * a + 0.75 * c.a3 * a.powi(3)) / (c.a1 * a)).log10() + 1.0;
        let (mut lo, mut hi) = (1e-9, (4.0 / 3.0 * c.a1 / -c.a3).sqrt());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if dev(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let p1db = 10.0 * (lo * lo / 2.0).log10();
        assert!((p1db - p1db_from_iip3(iip3)).abs() < 0.05, "{p1db}");
    }
    assert!((p1db_from_iip3(0.0) + 9.64).abs() < 0.005);
    assert!((p1db_from_iip3(-19.16) + 28.8).abs() <= 1.5);
}

#[test]
fn published_power_values() {
    let recs = parse_benchmark_csv(TABLE1).unwrap();
    let pc = |w: &str, s: &str| recs.iter().find(|r| r.work == w && r.state == s).unwrap().pc_mw.unwrap();
    let mk = |p: f64| StageSpec::single("v", GainState::new("v", 10.0, 5.0, p));
    assert!((power_total(&[mk(pc("VG-LNA2", "high"))]) - 0.91).abs() < 1e-12);
    assert!((power_total(&[mk(pc("VG-LNA2", "low"))]) - 0.40).abs() < 1e-12);
    assert_eq!(power_total(&[]), 0.0);
}

#[test]
fn benchmark_ratios_from_transcribed_table() {
    let recs = parse_benchmark_csv(TABLE1).unwrap();
    assert_eq!(recs.len(), 14);
    let r2 = benchmark_fom(&recs, "VG-LNA2").unwrap();
    let vs3 = r2.comparisons.iter().find(|c| c.theirs == "[3]").unwrap();
    assert_eq!(vs3.units, 34);
    // Their low-power state against our high-power state.
    assert_eq!(vs3.units_worst_case, 23);
    let r1 = benchmark_fom(&recs, "VG-LNA1").unwrap();
    let vs2 = r1.comparisons.iter().find(|c| c.theirs == "[2]").unwrap();
    assert_eq!(vs2.units, 16);
    assert_eq!(vs2.units_worst_case, 16);
}

#[test]
fn benchmark_ratios_do_not_depend_on_power_unit() {
    let recs = parse_benchmark_csv(TABLE1).unwrap();
    let watts: Vec<_> = recs
        .iter()
        .cloned()
        .map(|mut r| {
            r.pc_mw = r.pc_mw.map(|p| p / 1000.0);
            r
        })
        .collect();
    for ours in ["VG-LNA1", "VG-LNA2"] {
        let a = benchmark_fom(&recs, ours).unwrap();
        let b = benchmark_fom(&watts, ours).unwrap();
        for (x, y) in a.comparisons.iter().zip(&b.comparisons) {
            assert_eq!((x.units, x.units_worst_case), (y.units, y.units_worst_case));
        }
    }
}

fn vglna_stage(n: usize) -> StageSpec {
    StageSpec { name: "vglna".into(), states: linear_pc_states((8.1, 0.40), (15.7, 0.91), n).unwrap(), selected: 0 }
}

#[test]
fn tapered_array_power_by_direct_summation() {
    let t = taylor_line_taper(&TaperSpec::new(8, 18.0, 4).unwrap()).unwrap();
    let w = planar_taper(&t, &t);
    let st = vglna_stage(16);
    let b = taper_budget(&w, &st, 0.5).unwrap();

    // Independent summation: nearest state to each element's ideal gain.
    let peak = w.as_slice().iter().cloned().fold(0.0, f64::max);
    let mut total = 0.0;
    for &x in w.as_slice() {
        let target = 15.7 + 20.0 * (x / peak).log10();
        let s = st
            .states
            .iter()
            .min_by(|a, b| (a.gain_db - target).abs().total_cmp(&(b.gain_db - target).abs()))
            .unwrap();
        total += s.pc_mw;
    }
    assert!((b.total_pc_mw - total).abs() < 1e-12);
    // Frozen from the summation above.
    assert!((b.total_pc_mw - 43.144).abs() < 1e-9, "{}", b.total_pc_mw);
    assert!(b.total_pc_mw < 64.0 * 0.91);
    assert!((b.savings_mw - (64.0 * 0.91 - 43.144)).abs() < 1e-9);
}

#[test]
fn stronger_taper_never_costs_more_power() {
    let st = vglna_stage(16);
    let mut prev = f64::INFINITY;
    // Beyond about 19.6 dB the taper range exceeds the 7.6 dB state span.
    for i in 0..=30 {
        let sll = 18.0 + 0.05 * i as f64;
        let t = taylor_line_taper(&TaperSpec::new(8, sll, 4).unwrap()).unwrap();
        let b = taper_budget(&planar_taper(&t, &t), &st, 0.5).unwrap();
        assert!(b.total_pc_mw <= prev + 1e-12, "{sll}");
        prev = b.total_pc_mw;
    }
}

fn arb_stage() -> impl Strategy<Value = (f64, f64, f64)> {
    (-10.0f64..30.0, 0.0f64..15.0, -30.0f64..20.0)
}

proptest! {
    #[test]
    fn total_noise_factor_at_least_first_stage(stages in proptest::collection::vec(arb_stage(), 1..6)) {
        let chain: Vec<_> = stages.iter().map(|&(g, nf, ip)| stage("s", g, nf, Some(ip))).collect();
        let r = friis_cascade(&chain).unwrap();
        prop_assert!(10f64.powf(r.nf_db / 10.0) >= 10f64.powf(stages[0].1 / 10.0) * (1.0 - 1e-12));
    }

    #[test]
    fn unity_stage_insertion_is_exact(stages in proptest::collection::vec(arb_stage(), 1..6), at in 0usize..6) {
        let chain: Vec<_> = stages.iter().map(|&(g, nf, ip)| stage("s", g, nf, Some(ip))).collect();
        let mut with = chain.clone();
        with.insert(at.min(chain.len()), stage("unity", 0.0, 0.0, Some(f64::INFINITY)));
        prop_assert_eq!(friis_cascade(&chain).unwrap(), friis_cascade(&with).unwrap());
        for c in [Iip3Combining::Coherent, Iip3Combining::Incoherent] {
            prop_assert_eq!(iip3_cascade(&chain, c).unwrap(), iip3_cascade(&with, c).unwrap());
        }
    }

    #[test]
    fn cascade_intercept_below_every_referred_stage(stages in proptest::collection::vec(arb_stage(), 1..6)) {
        let chain: Vec<_> = stages.iter().map(|&(g, nf, ip)| stage("s", g, nf, Some(ip))).collect();
        let mut pre = 0.0;
        let mut bound = f64::INFINITY;
        for &(g, _, ip) in &stages {
            bound = bound.min(ip - pre);
            pre += g;
        }
        for c in [Iip3Combining::Coherent, Iip3Combining::Incoherent] {
            prop_assert!(iip3_cascade(&chain, c).unwrap() <= bound + 1e-9);
        }
    }

    #[test]
    fn larger_intercept_larger_compression(a in -40.0f64..20.0, d in 0.001f64..20.0) {
        prop_assert!(p1db_from_iip3(a + d) > p1db_from_iip3(a));
    }
}

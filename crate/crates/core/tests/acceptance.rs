//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on
//! any failure.

mod common;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use lsim_core::decks::{generate_cmls, generate_ulpls, DeckKind, DeckParams};
use lsim_core::devices::{mos_eval, temperature_adjust, MosModel, Polarity, T_NOMINAL};
use lsim_core::engine::{dc_operating_point, Integrator, SolveOptions};
use lsim_core::measure::{
    min_vin_for_circuit, run_and_measure, FunctionalPredicate, MeasureReport, Testbench, MIN_VIN_TOL,
};
use lsim_core::netlist::{load, Circuit, DeviceKind, Drive};
use lsim_core::variation::{
    run_campaign, sample_mc, temp_sweep, worst_case_sizing, CampaignSetup, ToleranceSpec, PDP_BINS,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

const MC_SEED: u64 = 42;
const MC_SAMPLES: usize = 200;
const GOLDEN_DRIFT: f64 = 5e-3;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn deck(kind: DeckKind, vin: f64) -> Circuit {
    load(&kind.generate(&DeckParams::default().with_vin(vin)).unwrap()).unwrap()
}

fn nominal(c: &Circuit) -> Result<MeasureReport, String> {
    run_and_measure(c, "out", &FunctionalPredicate::default(), &SolveOptions::default())
        .map(|(_, r)| r)
        .map_err(|e| e.to_string())
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn solver_oracle() -> Outcome {
    let start = Instant::now();
    let fine = rc_error(&rc_step(TAU / 100.0, Integrator::Trapezoidal));
    let elapsed = start.elapsed();
    let coarse = rc_error(&rc_step(TAU / 50.0, Integrator::Trapezoidal));
    let ratio = coarse / fine;
    check(
        fine < 1e-3 && (3.5..4.5).contains(&ratio) && elapsed < Duration::from_secs(1),
        format!("max error {fine:.3e}, halving ratio {ratio:.3}, {:.3} s", secs(elapsed)),
    )
}

fn dc_oracle() -> Outcome {
    let c = load("div\nV1 a 0 DC 1.2\nR1 a b 3k\nR2 b 0 1k\n").unwrap();
    let op = dc_operating_point(&c, T_NOMINAL, &SolveOptions::default()).map_err(|e| e.to_string())?;
    let want = 1.2 * 1.0 / 4.0;
    let div = ((op.voltage("b").unwrap() - want) / want).abs();
    let mut diode: f64 = 0.0;
    for (r, w, l) in [(100e3, 200e-9, 200e-9), (1e6, 1e-6, 40e-9), (10e6, 100e-9, 1e-6)] {
        let (text, v) = diode_case(r, w, l);
        let op = dc_operating_point(&load(&text).unwrap(), T_NOMINAL, &SolveOptions::default())
            .map_err(|e| e.to_string())?;
        diode = diode.max((op.voltage("d").unwrap() - v).abs());
    }
    check(
        div < 1e-9 && diode < 1e-9,
        format!("divider relative error {div:.1e}, diode node error {diode:.1e} V"),
    )
}

fn device_model() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut points = 0;
    while points < 1000 {
        let pol = if rng.gen_bool(0.5) { Polarity::N } else { Polarity::P };
        let m = MosModel::default_for(pol);
        let tp = temperature_adjust(
            &m,
            rng.gen_range(100e-9..2e-6),
            rng.gen_range(40e-9..1e-6),
            rng.gen_range(233.15..398.15),
        )
        .unwrap();
        let (vg, vd, vs) = (
            rng.gen_range(-0.2f64..1.0),
            rng.gen_range(-0.2f64..1.0),
            rng.gen_range(-0.2f64..1.0),
        );
        if (vd - vs).abs() < 1e-3 {
            continue;
        }
        worst = worst.max(fd_mismatch(&m, &tp, vg, vd, vs, 1e-6));
        points += 1;
    }
    let m = MosModel::default_for(Polarity::N);
    let tp = temperature_adjust(&m, 200e-9, 40e-9, T_NOMINAL).unwrap();
    let grid: Vec<f64> = (0..=40).map(|k| 0.02 * k as f64).collect();
    let mut zero_ok = true;
    let mut mono_ok = true;
    for &a in &grid {
        for &b in &grid {
            zero_ok &= mos_eval(&m, &tp, a, b, b).i_ds == 0.0;
        }
        for pair in grid.windows(2) {
            mono_ok &= mos_eval(&m, &tp, pair[1], a + 0.02, 0.0).i_ds
                >= mos_eval(&m, &tp, pair[0], a + 0.02, 0.0).i_ds;
            mono_ok &= mos_eval(&m, &tp, a, pair[1], 0.0).i_ds >= mos_eval(&m, &tp, a, pair[0], 0.0).i_ds;
        }
    }
    check(
        worst < 1e-4 && zero_ok && mono_ok,
        format!("worst partial mismatch {worst:.2e} over 1000 points, zero-vds {zero_ok}, monotone {mono_ok}"),
    )
}

fn level_conversion() -> Outcome {
    let start = Instant::now();
    let r = nominal(&deck(DeckKind::Ulpls, 0.4))?;
    let elapsed = start.elapsed();
    check(
        r.functional && r.v_out_high >= 0.99 * 0.8 && r.v_out_low <= 0.01 * 0.8 && elapsed < Duration::from_secs(5),
        format!(
            "vout high {:.4} V, low {:.2e} V, {:.2} s",
            r.v_out_high,
            r.v_out_low,
            secs(elapsed)
        ),
    )
}

fn golden_min_vin() -> Result<f64, String> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/min_vin.txt");
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    text.trim().parse().map_err(|e| format!("golden value: {e}"))
}

fn low_voltage_detection() -> Outcome {
    let r = nominal(&deck(DeckKind::Ulpls, 0.1))?;
    let found = min_vin_for_circuit(
        &deck(DeckKind::Ulpls, 0.4),
        "out",
        &FunctionalPredicate::default(),
        &SolveOptions::default(),
        0.02,
        0.4,
        MIN_VIN_TOL,
    )
    .map_err(|e| e.to_string())?;
    let golden = golden_min_vin()?;
    check(
        r.functional && found <= 0.150 && (found - golden).abs() <= GOLDEN_DRIFT,
        format!(
            "functional at 0.1 V: {}, min V_in {:.1} mV (golden {:.1} mV)",
            r.functional,
            found * 1e3,
            golden * 1e3
        ),
    )
}

/// Supply power from a trapezoid over raw samples in the same window,
/// independent of the measurement module.
fn supply_power_direct(c: &Circuit) -> Result<f64, String> {
    let tb = Testbench::from_circuit(c, "out").map_err(|e| e.to_string())?;
    let (step, stop) = c.tran().unwrap();
    let w = lsim_core::engine::transient(c, step, stop, T_NOMINAL, &SolveOptions::default(), Integrator::Trapezoidal)
        .map_err(|e| e.to_string())?;
    let (t0, t1) = (tb.period, (stop / tb.period).floor() * tb.period);
    let mut energy = 0.0;
    for (name, v) in &tb.supplies {
        let i = w.source_current(name).unwrap();
        for k in 1..w.times.len() {
            let (a, b) = (w.times[k - 1], w.times[k]);
            if a >= t0 - 1e-15 && b <= t1 + 1e-15 {
                energy += 0.5 * v * (i[k - 1] + i[k]) * (b - a);
            }
        }
    }
    Ok(energy / (t1 - t0))
}

fn power_plausibility() -> Outcome {
    let c = deck(DeckKind::Ulpls, 0.1);
    let r = nominal(&c)?;
    let floor = 100e3 * 200e-15 * 0.8 * 0.8;
    let direct = supply_power_direct(&c)?;
    let agree = ((direct - r.p_avg) / r.p_avg).abs();
    let pdp = ((r.pdp - r.p_avg * r.t_d_max) / r.pdp).abs();
    check(
        r.p_avg >= floor && r.p_avg <= 130e-9 && agree < 1e-3 && pdp < 1e-3,
        format!(
            "P_avg {:.2} nW in [{:.1}, 130] nW, direct integral {:.2} nW, PDP {:.3e} J = P x {:.1} ns",
            r.p_avg * 1e9,
            floor * 1e9,
            direct * 1e9,
            r.pdp,
            r.t_d_max * 1e9
        ),
    )
}

fn temperature_robustness() -> Outcome {
    let temps = [-40.0, 0.0, 27.0, 125.0];
    let res = temp_sweep(&deck(DeckKind::Ulpls, 0.1), &temps, &CampaignSetup::default(), 1)
        .map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut all = true;
    let mut p = Vec::new();
    for (t, v) in temps.iter().zip(&res.results) {
        match v.report {
            Some(r) => {
                all &= r.functional;
                p.push(r.p_avg);
                parts.push(format!("{t} C {:.1} nW swing {:.0} mV", r.p_avg * 1e9, (r.v_out_high - r.v_out_low) * 1e3));
            }
            None => {
                all = false;
                parts.push(format!("{t} C failed"));
            }
        }
    }
    let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
    check(
        all && hi / lo < 10.0,
        format!("{}; power ratio {:.2}", parts.join(", "), hi / lo),
    )
}

fn mc_bytes(variants: &[lsim_core::variation::Variant], workers: usize) -> Result<(Vec<u8>, Vec<u8>, usize, usize), String> {
    let res = run_campaign(variants, &CampaignSetup::default(), workers).map_err(|e| e.to_string())?;
    let mut table = Vec::new();
    res.write_mc_csv(&mut table, MC_SEED).unwrap();
    let mut hist = Vec::new();
    res.write_histogram_csv(&mut hist).unwrap();
    Ok((table, hist, res.functional_count(), res.pdp_histogram.len()))
}

fn monte_carlo() -> Outcome {
    let base = deck(DeckKind::Ulpls, 0.1);
    let tol = ToleranceSpec::default();
    let start = Instant::now();
    let variants = sample_mc(&base, &tol, MC_SAMPLES, MC_SEED).map_err(|e| e.to_string())?;
    let (table, hist, ok, bins) = mc_bytes(&variants, 1)?;
    let elapsed = start.elapsed();
    let again = sample_mc(&base, &tol, MC_SAMPLES, MC_SEED).map_err(|e| e.to_string())?;
    let (table4, hist4, _, _) = mc_bytes(&again, 4)?;
    let same = table == table4 && hist == hist4;
    check(
        ok * 100 >= 95 * MC_SAMPLES && bins == PDP_BINS && same && elapsed < Duration::from_secs(120),
        format!(
            "{ok}/{MC_SAMPLES} functional, {bins} bins, 1 vs 4 workers identical: {same}, {:.1} s",
            secs(elapsed)
        ),
    )
}

fn worst_case() -> Outcome {
    let variants = worst_case_sizing(&deck(DeckKind::Ulpls, 0.1), ["MN1", "MN2"], 0.04).map_err(|e| e.to_string())?;
    let res = run_campaign(&variants, &CampaignSetup::default(), 1).map_err(|e| e.to_string())?;
    let mut all = variants.len() == 4;
    let mut parts = Vec::new();
    for v in &res.results {
        match v.report {
            Some(r) => {
                all &= r.functional && r.t_d_rise.is_finite() && r.t_d_fall.is_finite();
                parts.push(format!("{} rise {:.0} ns fall {:.0} ns", v.label, r.t_d_rise * 1e9, r.t_d_fall * 1e9));
            }
            None => {
                all = false;
                parts.push(format!("{} failed", v.label));
            }
        }
    }
    check(all, parts.join(", "))
}

/// Total DC supply current with the input pulse replaced by a constant
/// at its high level.
fn static_current(text: &str) -> Result<f64, String> {
    let mut c = load(text).map_err(|e| e.to_string())?;
    let mut supplies = Vec::new();
    for d in &mut c.devices {
        if let DeviceKind::VSource { drive, .. } = &mut d.kind {
            match *drive {
                Drive::Pulse(p) => *drive = Drive::Dc(p.v2),
                Drive::Dc(_) => supplies.push(d.name.clone()),
            }
        }
    }
    let op = dc_operating_point(&c, T_NOMINAL, &SolveOptions::default()).map_err(|e| e.to_string())?;
    Ok(supplies.iter().map(|s| op.source_current(s).unwrap().abs()).sum())
}

fn baseline_contrast() -> Outcome {
    let mut dcvs = Vec::new();
    for vin in [0.2, 0.1] {
        let r = nominal(&deck(DeckKind::Dcvs, vin));
        dcvs.push(r.map_or(false, |r| r.functional));
    }
    let ulpls = nominal(&deck(DeckKind::Ulpls, 0.1))?.functional;
    let p = DeckParams::default();
    let i_cmls = static_current(&generate_cmls(&p).unwrap())?;
    let i_ulpls = static_current(&generate_ulpls(&p).unwrap())?;
    check(
        !dcvs[0] && !dcvs[1] && ulpls && i_cmls > i_ulpls,
        format!(
            "DCVS functional at 0.2/0.1 V: {}/{}, ULPLS at 0.1 V: {ulpls}, static current CMLS {:.2e} A vs ULPLS {:.2e} A",
            dcvs[0], dcvs[1], i_cmls, i_ulpls
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("solver oracle", solver_oracle),
        ("dc oracle", dc_oracle),
        ("device model", device_model),
        ("level conversion", level_conversion),
        ("low-voltage detection", low_voltage_detection),
        ("power plausibility", power_plausibility),
        ("temperature robustness", temperature_robustness),
        ("monte carlo", monte_carlo),
        ("worst-case sizing", worst_case),
        ("baseline contrast", baseline_contrast),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(d) => println!("criterion {}: PASS {name}: {d}", k + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {d}", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

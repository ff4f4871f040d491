//! Independent reference solutions shared by the integration tests.
#![allow(dead_code)]

use lsim_core::devices::{mos_eval, temperature_adjust, MosModel, Polarity, TempParams, T_NOMINAL};
use lsim_core::engine::{transient, Integrator, SolveOptions, Waveform};
use lsim_core::netlist::load;

pub const TAU: f64 = 1e-6;

/// Unit step into a 1 kΩ / 1 nF low-pass, sampled at `h`.
pub fn rc_step(h: f64, integrator: Integrator) -> Waveform {
    let deck = "rc\nV1 in 0 PULSE(0 1 0 1p 1p 1 2)\nR1 in out 1k\nC1 out 0 1n\n";
    let c = load(deck).unwrap();
    transient(&c, h, 5.0 * TAU, T_NOMINAL, &SolveOptions::default(), integrator).unwrap()
}

/// Largest deviation of `out` from `1 − exp(−t/τ)`.
pub fn rc_error(w: &Waveform) -> f64 {
    let v = w.node("out").unwrap();
    w.times
        .iter()
        .zip(v)
        .map(|(t, v)| (v - (1.0 - (-t / TAU).exp())).abs())
        .fold(0.0, f64::max)
}

/// Root of a monotone scalar function by bisection.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    assert!(f_lo * f(hi) <= 0.0, "root not bracketed");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Diode-connected NMOS fed from 0.8 V through `r` ohms: deck and the
/// drain voltage found by bisection on the device current alone.
pub fn diode_case(r: f64, w: f64, l: f64) -> (String, f64) {
    let deck = format!(
        "diode\n.model n22 nmos\nV1 vdd 0 DC 0.8\nR1 vdd d {r}\nM1 d d 0 0 n22 W={w} L={l}\n"
    );
    let m = MosModel::default_for(Polarity::N);
    let tp = temperature_adjust(&m, w, l, T_NOMINAL).unwrap();
    let v = bisect(|v| (0.8 - v) / r - mos_eval(&m, &tp, v, v, 0.0).i_ds, 0.0, 0.8);
    (deck, v)
}

/// Central-difference check of the three partials at one bias point.
/// Returns the worst per-partial relative mismatch.
pub fn fd_mismatch(m: &MosModel, tp: &TempParams, vg: f64, vd: f64, vs: f64, h: f64) -> f64 {
    let e = mos_eval(m, tp, vg, vd, vs);
    let i = |g: f64, d: f64, s: f64| mos_eval(m, tp, g, d, s).i_ds;
    let fd = [
        (i(vg + h, vd, vs) - i(vg - h, vd, vs)) / (2.0 * h),
        (i(vg, vd + h, vs) - i(vg, vd - h, vs)) / (2.0 * h),
        (i(vg, vd, vs + h) - i(vg, vd, vs - h)) / (2.0 * h),
    ];
    let an = [e.g_m, e.g_ds, e.g_ms];
    fd.iter()
        .zip(an)
        .map(|(f, a)| (f - a).abs() / a.abs().max(f.abs()).max(1e-30))
        .fold(0.0, f64::max)
}

//! Figures of merit from transient waveforms.

use std::io::{self, Write};

use crate::devices::kelvin;
use crate::engine::{transient, Integrator, SimError, SolveOptions, Waveform};
use crate::netlist::{Circuit, DeviceKind, Drive};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeasureError {
    #[error("missing {edge} output edge after input edge at t = {after:.6e} s")]
    MissingEdge { edge: &'static str, after: f64 },
    #[error("no {0} input edge in the record")]
    NoInputEdge(&'static str),
    #[error("unknown source `{0}`")]
    UnknownSource(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("bad measurement window [{0:e}, {1:e}]")]
    BadWindow(f64, f64),
    #[error("testbench: {0}")]
    Testbench(String),
    #[error("bracket: {0}")]
    Bracket(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Rising,
    Falling,
}

impl Edge {
    fn name(self) -> &'static str {
        match self {
            Edge::Rising => "rising",
            Edge::Falling => "falling",
        }
    }
}

/// Times at which `v` crosses `level` in direction `dir`, linearly
/// interpolated. A series that only touches the level is not a crossing.
pub fn crossing_times(t: &[f64], v: &[f64], level: f64, dir: Edge) -> Vec<f64> {
    let mut out = Vec::new();
    // Index of the last sample strictly off the level, with its side.
    let mut last: Option<(usize, bool)> = None;
    for k in 0..v.len().min(t.len()) {
        if v[k] == level {
            continue;
        }
        let above = v[k] > level;
        if let Some((j, was_above)) = last {
            let wanted = match dir {
                Edge::Rising => !was_above && above,
                Edge::Falling => was_above && !above,
            };
            if wanted {
                // Crossing lies in (t[j], t[k]]; samples between sit on the level.
                let tc = if k == j + 1 {
                    t[j] + (level - v[j]) / (v[k] - v[j]) * (t[k] - t[j])
                } else {
                    t[j + 1]
                };
                if out.last().map_or(true, |p| tc > *p) {
                    out.push(tc);
                }
            }
        }
        last = Some((k, above));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delays {
    pub rise: f64,
    pub fall: f64,
    pub max: f64,
}

/// Mean delay from each input edge to the first following output edge of
/// the same direction. Every input edge must be answered before the next
/// input edge of that direction (or the end of the record).
pub fn prop_delay(
    t: &[f64],
    v_in: &[f64],
    v_out: &[f64],
    in_mid: f64,
    out_mid: f64,
) -> Result<Delays, MeasureError> {
    let one = |dir: Edge| -> Result<f64, MeasureError> {
        let ins = crossing_times(t, v_in, in_mid, dir);
        let outs = crossing_times(t, v_out, out_mid, dir);
        if ins.is_empty() {
            return Err(MeasureError::NoInputEdge(dir.name()));
        }
        let mut sum = 0.0;
        for (i, &ti) in ins.iter().enumerate() {
            let limit = ins.get(i + 1).copied().unwrap_or(f64::INFINITY);
            match outs.iter().find(|&&to| to >= ti) {
                Some(&to) if to < limit => sum += to - ti,
                _ => {
                    return Err(MeasureError::MissingEdge {
                        edge: dir.name(),
                        after: ti,
                    })
                }
            }
        }
        Ok(sum / ins.len() as f64)
    };
    let rise = one(Edge::Rising)?;
    let fall = one(Edge::Falling)?;
    Ok(Delays {
        rise,
        fall,
        max: rise.max(fall),
    })
}

/// Linear interpolation of a sampled series at `x`.
fn interp(t: &[f64], y: &[f64], x: f64) -> f64 {
    let k = t.partition_point(|&ti| ti < x);
    if k == 0 {
        return y[0];
    }
    if k >= t.len() {
        return y[t.len() - 1];
    }
    let (t0, t1) = (t[k - 1], t[k]);
    if t1 == t0 {
        return y[k];
    }
    y[k - 1] + (y[k] - y[k - 1]) * (x - t0) / (t1 - t0)
}

/// Trapezoidal integral of `y` over `[a, b]`, clipping the end segments.
pub fn integrate(t: &[f64], y: &[f64], a: f64, b: f64) -> f64 {
    let mut pts: Vec<(f64, f64)> = vec![(a, interp(t, y, a))];
    pts.extend(
        t.iter()
            .zip(y)
            .filter(|(ti, _)| **ti > a && **ti < b)
            .map(|(ti, yi)| (*ti, *yi)),
    );
    pts.push((b, interp(t, y, b)));
    pts.windows(2)
        .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
        .sum()
}

/// Average power delivered by the named supplies over `[t0, t1]`.
pub fn avg_power(
    w: &Waveform,
    supplies: &[(&str, f64)],
    t0: f64,
    t1: f64,
) -> Result<f64, MeasureError> {
    let (first, last) = match (w.times.first(), w.times.last()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => return Err(MeasureError::BadWindow(t0, t1)),
    };
    if !(t1 > t0) || t0 < first || t1 > last * (1.0 + 1e-12) {
        return Err(MeasureError::BadWindow(t0, t1));
    }
    let mut energy = 0.0;
    for (name, volts) in supplies {
        let i = w
            .source_current(name)
            .ok_or_else(|| MeasureError::UnknownSource(name.to_string()))?;
        energy += volts * integrate(&w.times, i, t0, t1.min(last));
    }
    Ok(energy / (t1 - t0))
}

/// When a level-shifter output counts as following its input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalPredicate {
    pub swing_frac_high: f64,
    pub swing_frac_low: f64,
    pub min_cycles: usize,
}

impl Default for FunctionalPredicate {
    fn default() -> Self {
        Self {
            swing_frac_high: 0.9,
            swing_frac_low: 0.1,
            min_cycles: 3,
        }
    }
}

/// Per-cycle swing summary from [`FunctionalPredicate::evaluate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwingCheck {
    pub functional: bool,
    /// Lowest per-cycle maximum over the evaluated cycles.
    pub v_high: f64,
    /// Highest per-cycle minimum over the evaluated cycles.
    pub v_low: f64,
    pub cycles: usize,
}

impl FunctionalPredicate {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0 < self.swing_frac_low
            && self.swing_frac_low < self.swing_frac_high
            && self.swing_frac_high < 1.0)
        {
            return Err("need 0 < swing_frac_low < swing_frac_high < 1".into());
        }
        if self.min_cycles == 0 {
            return Err("min_cycles must be at least 1".into());
        }
        Ok(())
    }

    /// Check the full input periods starting at `start`. A cycle passes
    /// when the output rises above the high fraction of `vddh`, falls
    /// below the low fraction, and crosses mid-rail both ways.
    pub fn evaluate(&self, t: &[f64], v_out: &[f64], vddh: f64, period: f64, start: f64) -> SwingCheck {
        let end = t.last().copied().unwrap_or(0.0);
        let n = (((end - start) / period) * (1.0 + 1e-9)).floor().max(0.0) as usize;
        let (hi, lo, mid) = (
            self.swing_frac_high * vddh,
            self.swing_frac_low * vddh,
            0.5 * vddh,
        );
        let mut best = 0;
        let mut run = 0;
        let mut v_high = f64::INFINITY;
        let mut v_low = f64::NEG_INFINITY;
        for k in 0..n {
            let a = start + k as f64 * period;
            let b = a + period;
            let lo_i = t.partition_point(|&x| x < a);
            let hi_i = t.partition_point(|&x| x <= b * (1.0 + 1e-12));
            let (ts, vs) = (&t[lo_i..hi_i], &v_out[lo_i..hi_i]);
            let vmax = vs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let vmin = vs.iter().copied().fold(f64::INFINITY, f64::min);
            v_high = v_high.min(vmax);
            v_low = v_low.max(vmin);
            let ok = vmax > hi
                && vmin < lo
                && !crossing_times(ts, vs, mid, Edge::Rising).is_empty()
                && !crossing_times(ts, vs, mid, Edge::Falling).is_empty();
            run = if ok { run + 1 } else { 0 };
            best = best.max(run);
        }
        if n == 0 {
            v_high = f64::NAN;
            v_low = f64::NAN;
        }
        SwingCheck {
            functional: best >= self.min_cycles,
            v_high,
            v_low,
            cycles: n,
        }
    }
}

/// Names, levels and timing of a level-shifter testbench deck.
#[derive(Debug, Clone, PartialEq)]
pub struct Testbench {
    pub input_source: String,
    pub input_node: String,
    pub output_node: String,
    /// DC sources feeding the circuit, with their values.
    pub supplies: Vec<(String, f64)>,
    pub vddh: f64,
    pub vddl: f64,
    /// Input pulse swing `v2 − v1`.
    pub vin: f64,
    pub in_mid: f64,
    pub period: f64,
}

impl Testbench {
    /// The single `PULSE` source is the input; every DC source is a
    /// supply. The highest supply is VddH, the lowest VddL.
    pub fn from_circuit(c: &Circuit, output_node: &str) -> Result<Self, MeasureError> {
        let mut input = None;
        let mut supplies = Vec::new();
        for d in &c.devices {
            if let DeviceKind::VSource { pos, drive, .. } = &d.kind {
                match drive {
                    Drive::Pulse(p) => {
                        if input.is_some() {
                            return Err(MeasureError::Testbench(
                                "more than one pulse source".into(),
                            ));
                        }
                        input = Some((d.name.clone(), c.node_names[*pos].clone(), *p));
                    }
                    Drive::Dc(v) => supplies.push((d.name.clone(), *v)),
                }
            }
        }
        let (input_source, input_node, p) =
            input.ok_or_else(|| MeasureError::Testbench("no pulse input source".into()))?;
        if supplies.is_empty() {
            return Err(MeasureError::Testbench("no DC supply".into()));
        }
        let output_node = output_node.to_ascii_lowercase();
        if c.node_index(&output_node).map_or(true, |i| i == 0) {
            return Err(MeasureError::UnknownNode(output_node));
        }
        let vddh = supplies.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
        let vddl = supplies.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        Ok(Self {
            input_source,
            input_node,
            output_node,
            supplies,
            vddh,
            vddl,
            vin: p.v2 - p.v1,
            in_mid: 0.5 * (p.v1 + p.v2),
            period: p.t_period,
        })
    }

    /// Steady-state window: whole periods after the first. Records shorter
    /// than two periods fall back to the whole periods from zero.
    pub fn power_window(&self, t_end: f64) -> (f64, f64) {
        let n = ((t_end / self.period) * (1.0 + 1e-9)).floor();
        if n >= 2.0 {
            (self.period, n * self.period)
        } else if n >= 1.0 {
            (0.0, self.period)
        } else {
            (0.0, t_end)
        }
    }

    /// Start of the cycles checked by the functional predicate.
    pub fn cycle_start(&self, t_end: f64) -> f64 {
        self.power_window(t_end).0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureReport {
    pub vin: f64,
    pub vddl: f64,
    pub vddh: f64,
    /// °C.
    pub temp: f64,
    pub v_out_high: f64,
    pub v_out_low: f64,
    pub t_d_rise: f64,
    pub t_d_fall: f64,
    pub t_d_max: f64,
    pub p_avg: f64,
    pub pdp: f64,
    pub functional: bool,
}

pub const REPORT_HEADER: &str = "vin,vddl,vddh,temp,vout_high,vout_low,tdr,tdf,tdmax,pavg,pdp,functional";

impl MeasureReport {
    pub fn csv_row(&self) -> String {
        let f = crate::engine::sci9;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            f(self.vin),
            f(self.vddl),
            f(self.vddh),
            f(self.temp),
            f(self.v_out_high),
            f(self.v_out_low),
            f(self.t_d_rise),
            f(self.t_d_fall),
            f(self.t_d_max),
            f(self.p_avg),
            f(self.pdp),
            self.functional
        )
    }
}

pub fn write_report_csv<W: Write>(mut w: W, reports: &[MeasureReport]) -> io::Result<()> {
    writeln!(w, "{REPORT_HEADER}")?;
    for r in reports {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Measure a finished transient. A missing output edge is an error.
pub fn measure(
    w: &Waveform,
    tb: &Testbench,
    pred: &FunctionalPredicate,
    temp: f64,
) -> Result<MeasureReport, MeasureError> {
    match measure_all(w, tb, pred, temp)? {
        (r, None) => Ok(r),
        (_, Some(e)) => Err(e),
    }
}

/// Like [`measure`], but a delay failure still yields a report: delays
/// and PDP are NaN, the circuit counts as not functional, and the delay
/// error is returned alongside.
pub fn measure_all(
    w: &Waveform,
    tb: &Testbench,
    pred: &FunctionalPredicate,
    temp: f64,
) -> Result<(MeasureReport, Option<MeasureError>), MeasureError> {
    let v_in = w
        .node(&tb.input_node)
        .ok_or_else(|| MeasureError::UnknownNode(tb.input_node.clone()))?;
    let v_out = w
        .node(&tb.output_node)
        .ok_or_else(|| MeasureError::UnknownNode(tb.output_node.clone()))?;
    let t_end = w.times.last().copied().unwrap_or(0.0);
    let swing = pred.evaluate(&w.times, v_out, tb.vddh, tb.period, tb.cycle_start(t_end));
    let (t0, t1) = tb.power_window(t_end);
    let supplies: Vec<(&str, f64)> = tb.supplies.iter().map(|(n, v)| (n.as_str(), *v)).collect();
    let p_avg = avg_power(w, &supplies, t0, t1)?;
    let (d, err) = match prop_delay(&w.times, v_in, v_out, tb.in_mid, 0.5 * tb.vddh) {
        Ok(d) => (d, None),
        Err(e) => (
            Delays {
                rise: f64::NAN,
                fall: f64::NAN,
                max: f64::NAN,
            },
            Some(e),
        ),
    };
    let report = MeasureReport {
        vin: tb.vin,
        vddl: tb.vddl,
        vddh: tb.vddh,
        temp,
        v_out_high: swing.v_high,
        v_out_low: swing.v_low,
        t_d_rise: d.rise,
        t_d_fall: d.fall,
        t_d_max: d.max,
        p_avg,
        pdp: p_avg * d.max,
        functional: err.is_none() && swing.functional && swing.v_high > swing.v_low,
    };
    Ok((report, err))
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Transient of `c` using its own `.tran` card and `.temp`, then measure.
pub fn run_and_measure(
    c: &Circuit,
    output_node: &str,
    pred: &FunctionalPredicate,
    opts: &SolveOptions,
) -> Result<(Waveform, MeasureReport), RunError> {
    let tb = Testbench::from_circuit(c, output_node)?;
    let (step, stop) = c
        .tran()
        .ok_or_else(|| SimError::InvalidAnalysis("deck has no .tran card".into()))?;
    let w = transient(c, step, stop, kelvin(c.global_temp), opts, Integrator::Trapezoidal)?;
    let r = measure(&w, &tb, pred, c.global_temp)?;
    Ok((w, r))
}

/// Functional check only; a missing edge means not functional.
pub fn is_functional(
    c: &Circuit,
    output_node: &str,
    pred: &FunctionalPredicate,
    opts: &SolveOptions,
) -> Result<bool, RunError> {
    match run_and_measure(c, output_node, pred, opts) {
        Ok((_, r)) => Ok(r.functional),
        Err(RunError::Measure(MeasureError::MissingEdge { .. })) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Default bisection resolution for [`min_vin_search`], volts.
pub const MIN_VIN_TOL: f64 = 5e-3;

/// Smallest amplitude in `[lo, hi]` at which `probe` reports a working
/// circuit, to within `tol`. The bracket is checked first: the probe must
/// fail at `lo` and pass at `hi`.
pub fn min_vin_search<E, F>(mut probe: F, lo: f64, hi: f64, tol: f64) -> Result<f64, RunError>
where
    F: FnMut(f64) -> Result<bool, E>,
    RunError: From<E>,
{
    if !(lo < hi) || !(tol > 0.0) {
        return Err(MeasureError::Bracket(format!("need lo < hi and tol > 0, got [{lo}, {hi}], {tol}")).into());
    }
    if !probe(hi)? {
        return Err(MeasureError::Bracket(format!("not functional at the upper bound {hi} V")).into());
    }
    if probe(lo)? {
        return Err(MeasureError::Bracket(format!("already functional at the lower bound {lo} V")).into());
    }
    let (mut a, mut b) = (lo, hi);
    while b - a >= tol {
        let mid = 0.5 * (a + b);
        if probe(mid)? {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(b)
}

/// Set the amplitude of the single pulse source of `c` to `v` (0 → v).
pub fn set_input_amplitude(c: &mut Circuit, v: f64) -> Result<(), MeasureError> {
    let mut found = false;
    for d in &mut c.devices {
        if let DeviceKind::VSource {
            drive: Drive::Pulse(p),
            ..
        } = &mut d.kind
        {
            p.v2 = p.v1 + v;
            found = true;
        }
    }
    if found {
        Ok(())
    } else {
        Err(MeasureError::Testbench("no pulse input source".into()))
    }
}

/// [`min_vin_search`] over the input amplitude of a deck.
pub fn min_vin_for_circuit(
    c: &Circuit,
    output_node: &str,
    pred: &FunctionalPredicate,
    opts: &SolveOptions,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64, RunError> {
    let probe = |v: f64| -> Result<bool, RunError> {
        let mut c = c.clone();
        set_input_amplitude(&mut c, v)?;
        is_functional(&c, output_node, pred, opts)
    };
    min_vin_search(probe, lo, hi, tol)
}

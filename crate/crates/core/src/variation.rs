//! Monte Carlo, corner, temperature and sizing campaigns over a base deck.
//!
//! Every variant is an independent [`Circuit`]. Random draws for variant
//! `k` come from a ChaCha8 stream selected by `k` under the campaign seed,
//! so a variant does not depend on how many others were generated or on
//! which worker ran it.

use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::devices::{kelvin, TEMP_RANGE};
use crate::engine::{sci9, SolveOptions};
use crate::measure::{
    measure_all, FunctionalPredicate, MeasureReport, RunError, Testbench, REPORT_HEADER,
};
use crate::netlist::{Circuit, DeviceKind, Drive};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VariationError {
    #[error("tolerance {0} outside [0, 0.5)")]
    Tolerance(f64),
    #[error("unknown device `{0}`")]
    UnknownDevice(String),
    #[error("`{0}` is not a MOSFET")]
    NotMosfet(String),
    #[error("deck has no DC supply to vary")]
    NoSupply,
    #[error("temperature {0} °C outside the model range")]
    Temperature(f64),
    #[error("campaign needs at least one variant")]
    Empty,
    #[error("all {0} variants failed; first: {1}")]
    AllFailed(usize, String),
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToleranceSpec {
    /// Fractional tolerance on both supplies.
    pub supply_tol: f64,
    /// Fractional tolerance on MOSFET widths.
    pub size_tol: f64,
    /// Restrict width variation to these devices; `None` varies all.
    pub scoped_devices: Option<Vec<String>>,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        Self {
            supply_tol: 0.10,
            size_tol: 0.04,
            scoped_devices: None,
        }
    }
}

impl ToleranceSpec {
    pub fn validate(&self) -> Result<(), VariationError> {
        for t in [self.supply_tol, self.size_tol] {
            if !(0.0..0.5).contains(&t) {
                return Err(VariationError::Tolerance(t));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub id: usize,
    /// Short description (`mc`, `corner hl-`, `T=-40`, ...).
    pub label: String,
    pub vddh_mult: f64,
    pub vddl_mult: f64,
    /// Width multiplier per varied MOSFET, deck order.
    pub w_mults: Vec<(String, f64)>,
    pub circuit: Circuit,
}

/// Names of the highest and lowest DC supplies.
fn supply_names(c: &Circuit) -> Result<(String, String), VariationError> {
    let mut dc: Vec<(String, f64)> = c
        .devices
        .iter()
        .filter_map(|d| match &d.kind {
            DeviceKind::VSource {
                drive: Drive::Dc(v),
                ..
            } => Some((d.name.clone(), *v)),
            _ => None,
        })
        .collect();
    if dc.is_empty() {
        return Err(VariationError::NoSupply);
    }
    // Stable sort keeps deck order among equal values.
    dc.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok((dc[0].0.clone(), dc[dc.len() - 1].0.clone()))
}

fn mosfets(c: &Circuit, scope: Option<&[String]>) -> Result<Vec<String>, VariationError> {
    match scope {
        None => Ok(c
            .devices
            .iter()
            .filter(|d| matches!(d.kind, DeviceKind::Mosfet { .. }))
            .map(|d| d.name.clone())
            .collect()),
        Some(names) => names
            .iter()
            .map(|n| match c.device(n) {
                Some(d) if matches!(d.kind, DeviceKind::Mosfet { .. }) => Ok(d.name.clone()),
                Some(_) => Err(VariationError::NotMosfet(n.clone())),
                None => Err(VariationError::UnknownDevice(n.clone())),
            })
            .collect(),
    }
}

fn build(
    base: &Circuit,
    id: usize,
    label: String,
    vddh_mult: f64,
    vddl_mult: f64,
    w_mults: Vec<(String, f64)>,
) -> Result<Variant, VariationError> {
    let (hi, lo) = supply_names(base)?;
    let mut c = base.clone();
    // With a single supply both names coincide; apply one multiplier.
    let scale = [(hi.clone(), vddh_mult), (lo.clone(), vddl_mult)];
    for (name, m) in scale.iter().take(if hi == lo { 1 } else { 2 }) {
        if let Some(DeviceKind::VSource {
            drive: Drive::Dc(v), ..
        }) = c.device_mut(name).map(|d| &mut d.kind)
        {
            *v *= m;
        }
    }
    for (name, m) in &w_mults {
        if let Some(DeviceKind::Mosfet { w, .. }) = c.device_mut(name).map(|d| &mut d.kind) {
            *w *= m;
        }
    }
    Ok(Variant {
        id,
        label,
        vddh_mult,
        vddl_mult,
        w_mults,
        circuit: c,
    })
}

/// Clipped Gaussian multiplier: σ = tol/3, limited to 1 ± tol.
fn draw(rng: &mut ChaCha8Rng, tol: f64) -> f64 {
    if tol == 0.0 {
        return 1.0;
    }
    let n = Normal::new(0.0, tol / 3.0).expect("finite positive sigma");
    1.0 + n.sample(rng).clamp(-tol, tol)
}

/// Random generator for variant `k` of campaign `seed`.
pub fn variant_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

/// `n` Monte Carlo variants. Draw order per variant: VddH, VddL, then
/// each varied MOSFET width in deck order.
pub fn sample_mc(
    base: &Circuit,
    tol: &ToleranceSpec,
    n: usize,
    seed: u64,
) -> Result<Vec<Variant>, VariationError> {
    tol.validate()?;
    let devs = mosfets(base, tol.scoped_devices.as_deref())?;
    (0..n)
        .map(|k| {
            let mut rng = variant_rng(seed, k);
            let vh = draw(&mut rng, tol.supply_tol);
            let vl = draw(&mut rng, tol.supply_tol);
            let ws = devs
                .iter()
                .map(|d| (d.clone(), draw(&mut rng, tol.size_tol)))
                .collect();
            build(base, k, "mc".into(), vh, vl, ws)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CornerAxes {
    SupplyOnly,
    SupplyAndSize,
}

/// Deterministic extremes, lexicographic over (VddH, VddL[, W]) with the
/// low value first.
pub fn corners(
    base: &Circuit,
    tol: &ToleranceSpec,
    axes: CornerAxes,
) -> Result<Vec<Variant>, VariationError> {
    tol.validate()?;
    let devs = mosfets(base, tol.scoped_devices.as_deref())?;
    let s = [1.0 - tol.supply_tol, 1.0 + tol.supply_tol];
    let z = [1.0 - tol.size_tol, 1.0 + tol.size_tol];
    let sign = |i: usize| if i == 0 { 'l' } else { 'h' };
    let mut out = Vec::new();
    for (i, vh) in s.iter().enumerate() {
        for (j, vl) in s.iter().enumerate() {
            match axes {
                CornerAxes::SupplyOnly => {
                    let label = format!("corner {}{}", sign(i), sign(j));
                    out.push(build(base, out.len(), label, *vh, *vl, Vec::new())?);
                }
                CornerAxes::SupplyAndSize => {
                    for (k, wm) in z.iter().enumerate() {
                        let label = format!("corner {}{}{}", sign(i), sign(j), sign(k));
                        let ws = devs.iter().map(|d| (d.clone(), *wm)).collect();
                        out.push(build(base, out.len(), label, *vh, *vl, ws)?);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// The four width combinations `W·(1 ± tol)` on two devices.
pub fn worst_case_sizing(
    base: &Circuit,
    devices: [&str; 2],
    tol: f64,
) -> Result<Vec<Variant>, VariationError> {
    if !(0.0..0.5).contains(&tol) {
        return Err(VariationError::Tolerance(tol));
    }
    let names = mosfets(base, Some(&[devices[0].to_string(), devices[1].to_string()]))?;
    let m = [1.0 - tol, 1.0 + tol];
    let sign = |x: f64| if x < 1.0 { '-' } else { '+' };
    let mut out = Vec::new();
    for a in m {
        for b in m {
            let label = format!("{}{} {}{}", names[0], sign(a), names[1], sign(b));
            let ws = vec![(names[0].clone(), a), (names[1].clone(), b)];
            out.push(build(base, out.len(), label, 1.0, 1.0, ws)?);
        }
    }
    Ok(out)
}

/// One variant per temperature (°C).
pub fn temp_variants(base: &Circuit, temps: &[f64]) -> Result<Vec<Variant>, VariationError> {
    temps
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            if !(TEMP_RANGE.0..=TEMP_RANGE.1).contains(&kelvin(t)) {
                return Err(VariationError::Temperature(t));
            }
            let mut v = build(base, k, format!("T={t}"), 1.0, 1.0, Vec::new())?;
            v.circuit.global_temp = t;
            Ok(v)
        })
        .collect()
}

/// How each variant is measured.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignSetup {
    pub output_node: String,
    pub predicate: FunctionalPredicate,
    pub options: SolveOptions,
}

impl Default for CampaignSetup {
    fn default() -> Self {
        Self {
            output_node: "out".into(),
            predicate: FunctionalPredicate::default(),
            options: SolveOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantResult {
    pub id: usize,
    pub label: String,
    pub vddh_mult: f64,
    pub vddl_mult: f64,
    pub w_mults: Vec<(String, f64)>,
    /// Measured figures; delays are NaN when an output edge was missing.
    pub report: Option<MeasureReport>,
    /// Simulation or measurement failure message.
    pub error: Option<String>,
}

impl VariantResult {
    pub fn functional(&self) -> bool {
        self.report.map_or(false, |r| r.functional)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Stats {
    /// Sample statistics of the finite values; `None` if there are none.
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Stats> {
        let v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
        if v.is_empty() {
            return None;
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = if v.len() > 1 {
            v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Some(Stats {
            mean,
            stddev: var.sqrt(),
            min: v.iter().copied().fold(f64::INFINITY, f64::min),
            max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            count: v.len(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bin {
    pub low: f64,
    pub high: f64,
    pub count: usize,
}

/// Equal-width histogram over `[min, max]`; the top edge belongs to the
/// last bin. Non-finite values are ignored.
pub fn histogram(values: &[f64], bins: usize) -> Vec<Bin> {
    let v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let mut out: Vec<Bin> = (0..bins)
        .map(|k| Bin {
            low: lo + width * k as f64,
            high: if k + 1 == bins { hi } else { lo + width * (k + 1) as f64 },
            count: 0,
        })
        .collect();
    for x in v {
        let k = if width > 0.0 {
            (((x - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        out[k].count += 1;
    }
    out
}

pub const PDP_BINS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignResult {
    pub results: Vec<VariantResult>,
    pub p_avg: Option<Stats>,
    pub t_d_max: Option<Stats>,
    pub pdp: Option<Stats>,
    /// PDP of functional variants.
    pub pdp_histogram: Vec<Bin>,
}

impl CampaignResult {
    pub fn functional_count(&self) -> usize {
        self.results.iter().filter(|r| r.functional()).count()
    }

    /// Variants without a report (simulation failures), with messages.
    pub fn failures(&self) -> Vec<(usize, &str)> {
        self.results
            .iter()
            .filter(|r| r.report.is_none())
            .map(|r| (r.id, r.error.as_deref().unwrap_or("")))
            .collect()
    }

    pub fn reports(&self) -> Vec<MeasureReport> {
        self.results.iter().filter_map(|r| r.report).collect()
    }

    /// `variant,seed,vddh_mult,vddl_mult,<w(...)>,pavg,tdmax,pdp,functional`.
    pub fn write_mc_csv<W: Write>(&self, mut w: W, seed: u64) -> io::Result<()> {
        let mut header = vec!["variant", "seed", "vddh_mult", "vddl_mult"]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>();
        if let Some(first) = self.results.first() {
            header.extend(first.w_mults.iter().map(|(n, _)| format!("w({})", n.to_ascii_lowercase())));
        }
        header.extend(["pavg", "tdmax", "pdp", "functional"].map(String::from));
        writeln!(w, "{}", header.join(","))?;
        for r in &self.results {
            let mut row = vec![
                r.id.to_string(),
                seed.to_string(),
                sci9(r.vddh_mult),
                sci9(r.vddl_mult),
            ];
            row.extend(r.w_mults.iter().map(|(_, m)| sci9(*m)));
            let (p, t, e) = r
                .report
                .map_or((f64::NAN, f64::NAN, f64::NAN), |m| (m.p_avg, m.t_d_max, m.pdp));
            row.extend([sci9(p), sci9(t), sci9(e), r.functional().to_string()]);
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Measurement report rows prefixed with the variant id and label.
    pub fn write_report_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "variant,label,{REPORT_HEADER}")?;
        for r in &self.results {
            match &r.report {
                Some(m) => writeln!(w, "{},{},{}", r.id, r.label, m.csv_row())?,
                None => writeln!(w, "{},{},{}false", r.id, r.label, "NaN,".repeat(11))?,
            }
        }
        Ok(())
    }

    pub fn write_histogram_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "bin_low,bin_high,count")?;
        for b in &self.pdp_histogram {
            writeln!(w, "{},{},{}", sci9(b.low), sci9(b.high), b.count)?;
        }
        Ok(())
    }
}

fn run_one(v: &Variant, setup: &CampaignSetup) -> VariantResult {
    let (report, error) = match simulate(v, setup) {
        Ok((r, e)) => (Some(r), e.map(|e| e.to_string())),
        Err(e) => (None, Some(e.to_string())),
    };
    VariantResult {
        id: v.id,
        label: v.label.clone(),
        vddh_mult: v.vddh_mult,
        vddl_mult: v.vddl_mult,
        w_mults: v.w_mults.clone(),
        report,
        error,
    }
}

fn simulate(
    v: &Variant,
    setup: &CampaignSetup,
) -> Result<(MeasureReport, Option<crate::measure::MeasureError>), RunError> {
    let c = &v.circuit;
    let tb = Testbench::from_circuit(c, &setup.output_node)?;
    let (step, stop) = c.tran().ok_or_else(|| {
        crate::engine::SimError::InvalidAnalysis("deck has no .tran card".into())
    })?;
    let w = crate::engine::transient(
        c,
        step,
        stop,
        kelvin(c.global_temp),
        &setup.options,
        crate::engine::Integrator::Trapezoidal,
    )?;
    Ok(measure_all(&w, &tb, &setup.predicate, c.global_temp)?)
}

/// Simulate and measure every variant on a pool of `workers` threads.
/// Results keep variant order. Individual failures are recorded; the
/// campaign fails only when every variant fails to simulate.
pub fn run_campaign(
    variants: &[Variant],
    setup: &CampaignSetup,
    workers: usize,
) -> Result<CampaignResult, VariationError> {
    if variants.is_empty() {
        return Err(VariationError::Empty);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| VariationError::Pool(e.to_string()))?;
    let results: Vec<VariantResult> =
        pool.install(|| variants.par_iter().map(|v| run_one(v, setup)).collect());
    if results.iter().all(|r| r.report.is_none()) {
        let first = results[0].error.clone().unwrap_or_default();
        return Err(VariationError::AllFailed(results.len(), first));
    }
    let reports: Vec<MeasureReport> = results.iter().filter_map(|r| r.report).collect();
    let functional: Vec<f64> = reports.iter().filter(|r| r.functional).map(|r| r.pdp).collect();
    Ok(CampaignResult {
        p_avg: Stats::of(reports.iter().map(|r| r.p_avg)),
        t_d_max: Stats::of(reports.iter().map(|r| r.t_d_max)),
        pdp: Stats::of(reports.iter().map(|r| r.pdp)),
        pdp_histogram: histogram(&functional, PDP_BINS),
        results,
    })
}

/// Run `base` at each temperature.
pub fn temp_sweep(
    base: &Circuit,
    temps: &[f64],
    setup: &CampaignSetup,
    workers: usize,
) -> Result<CampaignResult, VariationError> {
    run_campaign(&temp_variants(base, temps)?, setup, workers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decks::{generate_ulpls, DeckParams};
    use crate::netlist::load;

    fn base() -> Circuit {
        load(&generate_ulpls(&DeckParams::default().with_vin(0.1)).unwrap()).unwrap()
    }

    fn dc(c: &Circuit, name: &str) -> f64 {
        match c.device(name).unwrap().kind {
            DeviceKind::VSource {
                drive: Drive::Dc(v), ..
            } => v,
            _ => panic!(),
        }
    }

    fn width(c: &Circuit, name: &str) -> f64 {
        match c.device(name).unwrap().kind {
            DeviceKind::Mosfet { w, .. } => w,
            _ => panic!(),
        }
    }

    #[test]
    fn zero_tolerance_is_nominal() {
        let b = base();
        let tol = ToleranceSpec {
            supply_tol: 0.0,
            size_tol: 0.0,
            scoped_devices: None,
        };
        let v = sample_mc(&b, &tol, 1, 7).unwrap();
        assert_eq!(v[0].vddh_mult, 1.0);
        assert!(v[0].w_mults.iter().all(|(_, m)| *m == 1.0));
        assert_eq!(v[0].circuit, b);
        for c in corners(&b, &tol, CornerAxes::SupplyAndSize).unwrap() {
            assert_eq!(c.circuit, b);
        }
        for c in worst_case_sizing(&b, ["MN1", "MN2"], 0.0).unwrap() {
            assert_eq!(c.circuit, b);
        }
    }

    #[test]
    fn mc_is_seeded_and_order_free() {
        let b = base();
        let tol = ToleranceSpec::default();
        let a = sample_mc(&b, &tol, 200, 42).unwrap();
        assert_eq!(a, sample_mc(&b, &tol, 200, 42).unwrap());
        assert_ne!(a, sample_mc(&b, &tol, 200, 43).unwrap());
        // Variant 57 is the same whether 58 or 200 were drawn.
        assert_eq!(a[57], sample_mc(&b, &tol, 58, 42).unwrap()[57]);
        assert_eq!(a[0].w_mults.len(), 14);
        for v in &a {
            assert!((v.vddh_mult - 1.0).abs() <= 0.10 + 1e-12 && (v.vddl_mult - 1.0).abs() <= 0.10 + 1e-12);
            assert!(v.w_mults.iter().all(|(_, m)| (m - 1.0).abs() <= 0.04 + 1e-12));
        }
    }

    #[test]
    fn mc_sigma() {
        let tol = 0.10;
        let draws: Vec<f64> = (0..10_000)
            .map(|k| draw(&mut variant_rng(9, k), tol))
            .collect();
        let s = Stats::of(draws).unwrap();
        assert!((s.mean - 1.0).abs() < 1e-3);
        assert!((s.stddev / (tol / 3.0) - 1.0).abs() < 0.05, "{}", s.stddev);
        assert!(s.max <= 1.0 + tol + 1e-12 && s.min >= 1.0 - tol - 1e-12);
    }

    #[test]
    fn scoped_sizes() {
        let b = base();
        let tol = ToleranceSpec {
            scoped_devices: Some(vec!["mn1".into(), "MN2".into()]),
            ..Default::default()
        };
        let v = sample_mc(&b, &tol, 3, 1).unwrap();
        assert_eq!(v[0].w_mults.len(), 2);
        assert_eq!(width(&v[0].circuit, "MP1"), width(&b, "MP1"));
        let bad = ToleranceSpec {
            scoped_devices: Some(vec!["MQ7".into()]),
            ..Default::default()
        };
        assert!(matches!(sample_mc(&b, &bad, 1, 1), Err(VariationError::UnknownDevice(_))));
        let cap = ToleranceSpec {
            scoped_devices: Some(vec!["CL".into()]),
            ..Default::default()
        };
        assert!(matches!(sample_mc(&b, &cap, 1, 1), Err(VariationError::NotMosfet(_))));
        assert!(ToleranceSpec { supply_tol: 0.6, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn corner_sets() {
        let b = base();
        let tol = ToleranceSpec::default();
        let s = corners(&b, &tol, CornerAxes::SupplyOnly).unwrap();
        assert_eq!(s.len(), 4);
        assert!((dc(&s[0].circuit, "VDDH") - 0.72).abs() < 1e-12);
        assert!((dc(&s[0].circuit, "VDDL") - 0.36).abs() < 1e-12);
        assert!((dc(&s[3].circuit, "VDDH") - 0.88).abs() < 1e-12);
        let vh: Vec<f64> = s.iter().map(|v| dc(&v.circuit, "VDDH")).collect();
        assert!(vh.iter().any(|v| (v - 0.72).abs() < 1e-12) && vh.iter().any(|v| (v - 0.88).abs() < 1e-12));
        let z = corners(&b, &tol, CornerAxes::SupplyAndSize).unwrap();
        assert_eq!(z.len(), 8);
        assert!((width(&z[0].circuit, "MN1") - 192e-9).abs() < 1e-18);
        assert!((width(&z[1].circuit, "MN1") - 208e-9).abs() < 1e-18);
        let ids: Vec<usize> = z.iter().map(|v| v.id).collect();
        assert_eq!(ids, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn worst_case_widths() {
        let b = base();
        let v = worst_case_sizing(&b, ["MN1", "MN2"], 0.04).unwrap();
        assert_eq!(v.len(), 4);
        let mut w1: Vec<f64> = v.iter().map(|x| width(&x.circuit, "MN1")).collect();
        w1.dedup_by(|a, b| (*a - *b).abs() < 1e-18);
        assert!((w1[0] - 192e-9).abs() < 1e-18 && (w1[1] - 208e-9).abs() < 1e-18);
        assert!(worst_case_sizing(&b, ["MN1", "MX"], 0.04).is_err());
    }

    #[test]
    fn temps_checked() {
        let b = base();
        let v = temp_variants(&b, &[-40.0, 125.0]).unwrap();
        assert_eq!(v[1].circuit.global_temp, 125.0);
        assert!(temp_variants(&b, &[300.0]).is_err());
    }

    #[test]
    fn histogram_edges() {
        let h = histogram(&[0.0, 1.0, 2.0, 3.0, 4.0, f64::NAN], 4);
        assert_eq!(h.iter().map(|b| b.count).collect::<Vec<_>>(), vec![1, 1, 1, 2]);
        assert_eq!((h[0].low, h[3].high), (0.0, 4.0));
        let flat = histogram(&[2.0; 5], 20);
        assert_eq!(flat.len(), 20);
        assert_eq!(flat[0].count, 5);
        assert!(histogram(&[], 20).is_empty());
    }

    #[test]
    fn empty_campaign() {
        assert_eq!(
            run_campaign(&[], &CampaignSetup::default(), 1),
            Err(VariationError::Empty)
        );
    }
}

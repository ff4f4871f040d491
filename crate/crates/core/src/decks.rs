//! Reference netlists: the ultra-low-power level shifter and two baselines.
//!
//! Each generator emits a complete deck (models, supplies, input pulse,
//! load, `.temp`, `.tran`) whose header records the parameters used.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::devices::{MosModel, Polarity};
use crate::engine::{dc_operating_point, SolveOptions};
use crate::netlist::{self, Circuit};

/// Edge time of the generated input pulse.
pub const EDGE_TIME: f64 = 10e-9;
/// Default transient step of generated decks.
pub const DEFAULT_STEP: f64 = 1e-9;
/// Input periods simulated by a generated deck.
pub const DEFAULT_PERIODS: usize = 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid deck parameters: {0}")]
pub struct DeckError(pub String);

#[derive(Debug, Clone, PartialEq)]
pub struct DeckParams {
    pub vddh: f64,
    pub vddl: f64,
    /// Input pulse amplitude (volts); the pulse runs 0 → amplitude.
    pub vin_amplitude: f64,
    pub f_oper: f64,
    pub c_load: f64,
    /// °C.
    pub temp: f64,
    /// Per-device `(W, L)` replacements, keyed by upper-case device name.
    pub sizes: BTreeMap<String, (f64, f64)>,
    pub t_step: f64,
    pub periods: usize,
}

impl Default for DeckParams {
    fn default() -> Self {
        Self {
            vddh: 0.8,
            vddl: 0.4,
            vin_amplitude: 0.4,
            f_oper: 100e3,
            c_load: 200e-15,
            temp: 27.0,
            sizes: BTreeMap::new(),
            t_step: DEFAULT_STEP,
            periods: DEFAULT_PERIODS,
        }
    }
}

impl DeckParams {
    pub fn with_vin(mut self, v: f64) -> Self {
        self.vin_amplitude = v;
        self
    }

    pub fn period(&self) -> f64 {
        1.0 / self.f_oper
    }

    /// High time of the input pulse: half a period minus one edge.
    pub fn pulse_width(&self) -> f64 {
        self.period() / 2.0 - EDGE_TIME
    }

    pub fn t_stop(&self) -> f64 {
        self.periods as f64 * self.period()
    }

    pub fn validate(&self) -> Result<(), DeckError> {
        let fail = |m: &str| Err(DeckError(m.to_string()));
        if !(self.vddl > 0.0 && self.vddl <= self.vddh) {
            return fail("need 0 < vddl <= vddh");
        }
        if !(self.vin_amplitude > 0.0) {
            return fail("input amplitude must be positive");
        }
        if !(self.f_oper > 0.0) || !(self.pulse_width() > 0.0) {
            return fail("operating frequency too high for the pulse edges");
        }
        if !(self.c_load > 0.0) {
            return fail("load capacitance must be positive");
        }
        if !(self.t_step > 0.0) || self.periods == 0 {
            return fail("transient step and period count must be positive");
        }
        for (name, (w, l)) in &self.sizes {
            if !(*w > 0.0 && *l > 0.0) {
                return Err(DeckError(format!("size override for {name} must be positive")));
            }
        }
        Ok(())
    }

    fn size(&self, name: &str, w: f64, l: f64) -> (f64, f64) {
        self.sizes
            .get(&name.to_ascii_uppercase())
            .copied()
            .unwrap_or((w, l))
    }
}

/// Shortest netlist spelling of `v` with an SI suffix.
pub fn eng(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    const SUFFIXES: [(f64, &str); 7] = [
        (1e6, "meg"),
        (1e3, "k"),
        (1.0, ""),
        (1e-3, "m"),
        (1e-6, "u"),
        (1e-9, "n"),
        (1e-12, "p"),
    ];
    let a = v.abs();
    let (scale, suffix) = SUFFIXES
        .iter()
        .copied()
        .find(|(s, _)| a >= *s * (1.0 - 1e-12))
        .unwrap_or((1e-15, "f"));
    let mant = v / scale;
    let rounded = (mant * 1e9).round() / 1e9;
    format!("{rounded}{suffix}")
}

struct Mos {
    name: &'static str,
    d: &'static str,
    g: &'static str,
    s: &'static str,
    p: bool,
    w: f64,
    l: f64,
    role: &'static str,
}

const fn m(
    name: &'static str,
    d: &'static str,
    g: &'static str,
    s: &'static str,
    p: bool,
    w: f64,
    l: f64,
    role: &'static str,
) -> Mos {
    Mos {
        name,
        d,
        g,
        s,
        p,
        w,
        l,
        role,
    }
}

const N: bool = false;
const P: bool = true;

const ULPLS: [Mos; 14] = [
    m("MP4", "a", "0", "vddl", P, 200e-9, 400e-9, "reference current, gate grounded (VddL)"),
    m("MP6", "b", "in", "vddl", P, 500e-9, 400e-9, "input sense, 2.5x the reference (VddL)"),
    m("MN1", "a", "a", "0", N, 200e-9, 400e-9, "divider/ratio pair, diode side: biases MN2"),
    m("MN2", "b", "a", "0", N, 200e-9, 400e-9, "divider/ratio pair, sink: sets detection threshold"),
    m("MP8", "bb", "b", "vddl", P, 300e-9, 40e-9, "VddL input inverter, pull-up"),
    m("MN8", "bb", "b", "0", N, 100e-9, 40e-9, "VddL input inverter, pull-down"),
    m("MP1", "y", "y", "vddh", P, 200e-9, 80e-9, "mirror master (diode)"),
    m("MP3", "x", "x", "y", P, 200e-9, 80e-9, "current-limiting PMOS diode in series with MP1"),
    m("MN3", "x", "b", "0", N, 100e-9, 400e-9, "mirror input device, driven by sensed input"),
    m("MP2", "ob", "y", "vddh", P, 1.6e-6, 80e-9, "mirrored pull-up, 8x MP1"),
    m("MN4", "ob", "bb", "0", N, 500e-9, 40e-9, "pull-down, driven by the VddL inverter"),
    m("MP5", "ob", "bb", "vddh", P, 100e-9, 1e-6, "enhanced pull-up, off while bb is high"),
    m("MP9", "out", "ob", "vddh", P, 400e-9, 200e-9, "output inverter, pull-up"),
    m("MN9", "out", "ob", "0", N, 200e-9, 200e-9, "output inverter, pull-down"),
];

const CMLS: [Mos; 6] = [
    m("MP7", "inb", "in", "vddl", P, 200e-9, 40e-9, "VddL input inverter, pull-up"),
    m("MN7", "inb", "in", "0", N, 100e-9, 40e-9, "VddL input inverter, pull-down"),
    m("MP1", "x", "x", "vddh", P, 200e-9, 200e-9, "mirror master (diode)"),
    m("MN1", "x", "in", "0", N, 1e-6, 40e-9, "master pull-down, driven by the input"),
    m("MP2", "out", "x", "vddh", P, 200e-9, 200e-9, "mirrored pull-up"),
    m("MN2", "out", "inb", "0", N, 1e-6, 40e-9, "output pull-down, driven by the inverter"),
];

const DCVS: [Mos; 6] = [
    m("MP7", "inb", "in", "vddl", P, 200e-9, 40e-9, "VddL input inverter, pull-up"),
    m("MN7", "inb", "in", "0", N, 100e-9, 40e-9, "VddL input inverter, pull-down"),
    m("MP1", "outb", "out", "vddh", P, 100e-9, 1e-6, "cross-coupled pull-up"),
    m("MP2", "out", "outb", "vddh", P, 100e-9, 1e-6, "cross-coupled pull-up"),
    m("MN1", "outb", "in", "0", N, 4e-6, 40e-9, "input pull-down"),
    m("MN2", "out", "inb", "0", N, 4e-6, 40e-9, "complement pull-down"),
];

fn render(title: &str, blurb: &[&str], devices: &[Mos], p: &DeckParams) -> Result<String, DeckError> {
    p.validate()?;
    for name in p.sizes.keys() {
        if !devices.iter().any(|d| d.name.eq_ignore_ascii_case(name)) {
            return Err(DeckError(format!("size override for unknown device {name}")));
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "{title}");
    for line in blurb {
        let _ = writeln!(s, "* {line}");
    }
    let _ = writeln!(
        s,
        "* generated: vddh={} vddl={} vin={} f={} cload={} temp={}",
        eng(p.vddh),
        eng(p.vddl),
        eng(p.vin_amplitude),
        eng(p.f_oper),
        eng(p.c_load),
        eng(p.temp)
    );
    let _ = writeln!(s, "*");
    let _ = writeln!(s, "* device roles");
    for d in devices {
        let _ = writeln!(s, "*   {:<4} {}", d.name, d.role);
    }
    let _ = writeln!(s, "*");
    let n = MosModel::default_for(Polarity::N);
    let pm = MosModel::default_for(Polarity::P);
    let _ = writeln!(s, ".model n22 {}", n.card_body());
    let _ = writeln!(s, ".model p22 {}", pm.card_body());
    let _ = writeln!(s, "VDDH vddh 0 DC {}", eng(p.vddh));
    let _ = writeln!(s, "VDDL vddl 0 DC {}", eng(p.vddl));
    let _ = writeln!(
        s,
        "VIN in 0 PULSE(0 {} 0 {} {} {} {})",
        eng(p.vin_amplitude),
        eng(EDGE_TIME),
        eng(EDGE_TIME),
        eng(p.pulse_width()),
        eng(p.period())
    );
    for d in devices {
        let (w, l) = p.size(d.name, d.w, d.l);
        let (model, rail) = if d.p { ("p22", bulk_rail(d.s)) } else { ("n22", "0") };
        let _ = writeln!(
            s,
            "{} {} {} {} {} {} W={} L={}",
            d.name,
            d.d,
            d.g,
            d.s,
            rail,
            model,
            eng(w),
            eng(l)
        );
    }
    let _ = writeln!(s, "CL out 0 {}", eng(p.c_load));
    let _ = writeln!(s, ".temp {}", eng(p.temp));
    let _ = writeln!(s, ".tran {} {}", eng(p.t_step), eng(p.t_stop()));
    let _ = writeln!(s, ".end");
    Ok(s)
}

/// PMOS bulks sit on the supply of their own domain.
fn bulk_rail(source: &str) -> &'static str {
    if source == "vddl" {
        "vddl"
    } else {
        "vddh"
    }
}

/// The 14-transistor ultra-low-power level shifter.
///
/// The input is sensed ratiometrically in the VddL domain: MP6 (gate on
/// the input) competes with MN2, which mirrors the grounded-gate reference
/// MP4 through MN1. Node `b` falls once the input raises the source-gate
/// drive of MP6 enough to drop its current below the mirrored reference;
/// the MN1/MN2 ratio sets that threshold. The restored `b`/`bb` pair then
/// drives a current-mirror stage into VddH whose master branch carries a
/// series diode MP3 to cap its static current.
pub fn generate_ulpls(p: &DeckParams) -> Result<String, DeckError> {
    render(
        "ulpls ultra-low-power level shifter",
        &[
            "VddL input sense + inverter, current-mirror up-conversion, VddH output inverter.",
            "out follows in; nodes: b = sensed (inverted) input, bb = restored input,",
            "y/x = mirror master stack, ob = mirror output (inverted).",
        ],
        &ULPLS,
        p,
    )
}

/// Textbook current-mirror level shifter with a VddL input inverter.
pub fn generate_cmls(p: &DeckParams) -> Result<String, DeckError> {
    render(
        "cmls current-mirror level shifter",
        &["Baseline: diode master MP1/MN1, mirrored output MP2/MN2, VddL input inverter."],
        &CMLS,
        p,
    )
}

/// Textbook cross-coupled (DCVS) level shifter with a VddL input inverter.
pub fn generate_dcvs(p: &DeckParams) -> Result<String, DeckError> {
    render(
        "dcvs cross-coupled level shifter",
        &["Baseline: cross-coupled PMOS MP1/MP2, input pull-downs MN1/MN2, VddL input inverter."],
        &DCVS,
        p,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeckKind {
    Ulpls,
    Cmls,
    Dcvs,
}

impl DeckKind {
    pub fn generate(self, p: &DeckParams) -> Result<String, DeckError> {
        match self {
            DeckKind::Ulpls => generate_ulpls(p),
            DeckKind::Cmls => generate_cmls(p),
            DeckKind::Dcvs => generate_dcvs(p),
        }
    }

    pub fn file_name(self) -> &'static str {
        match self {
            DeckKind::Ulpls => "ulpls.sp",
            DeckKind::Cmls => "cmls.sp",
            DeckKind::Dcvs => "dcvs.sp",
        }
    }
}

/// Result of [`validate_deck`].
#[derive(Debug, Clone, PartialEq)]
pub struct DeckDiagnostics {
    pub ok: bool,
    pub nodes: Vec<String>,
    pub mosfets: usize,
    pub messages: Vec<String>,
}

/// Parse, elaborate and solve the operating point of `text`.
pub fn validate_deck(text: &str) -> DeckDiagnostics {
    let mut d = DeckDiagnostics {
        ok: false,
        nodes: Vec::new(),
        mosfets: 0,
        messages: Vec::new(),
    };
    let c: Circuit = match netlist::load(text) {
        Ok(c) => c,
        Err(e) => {
            d.messages.push(e.to_string());
            return d;
        }
    };
    d.nodes = c.node_names[1..].to_vec();
    d.mosfets = c.mosfet_count();
    d.messages.extend(c.diagnostics.iter().cloned());
    match dc_operating_point(&c, crate::devices::kelvin(c.global_temp), &SolveOptions::default()) {
        Ok(op) => {
            d.ok = true;
            d.messages
                .push(format!("operating point found ({:?})", op.strategy));
        }
        Err(e) => d.messages.push(e.to_string()),
    }
    d
}

//! Single-expression MOSFET model valid from weak to strong inversion.
//!
//! The drain current is the difference of forward and reverse components,
//!
//! ```text
//! I = I_S · [F((v_p − v_s)/V_T) − F((v_p − v_d)/V_T)] · (1 + λ·|v_ds|)
//! F(x) = ln²(1 + e^{x/2}),   v_p = (v_g − V_th(T)) / n,   I_S = 2·n·kp(T)·(W/L)·V_T²
//! ```
//!
//! with all voltages measured from the lower of drain and source. It is
//! exponential in `v_g` well below threshold (slope `n·V_T·ln 10` per
//! decade) and square-law well above it. PMOS devices are evaluated in
//! the mirrored frame: all terminal voltages and the current are negated.
//! The bulk terminal is not used.

use super::DeviceError;

/// Boltzmann constant over elementary charge, V/K.
pub const K_OVER_Q: f64 = 8.617_333_262e-5;
/// Reference temperature of the default cards (27 °C).
pub const T_NOMINAL: f64 = 300.15;
/// Model validity window, kelvin.
pub const TEMP_RANGE: (f64, f64) = (200.0, 450.0);
/// Terminal voltages are clamped to ±this before evaluation.
pub const V_CLAMP: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    N,
    P,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MosModel {
    pub polarity: Polarity,
    /// Threshold magnitude at `t0`, volts.
    pub vth0: f64,
    /// Sub-threshold slope factor.
    pub n_slope: f64,
    /// μ·C_ox at `t0`, A/V².
    pub kp: f64,
    /// Channel-length modulation, 1/V.
    pub lambda: f64,
    /// Gate capacitance per area, F/m².
    pub cox_area: f64,
    /// Reference temperature, kelvin.
    pub t0: f64,
    /// Threshold temperature coefficient, V/K (threshold falls with T).
    pub tc_vth: f64,
    /// Mobility temperature exponent.
    pub mu_exp: f64,
}

impl MosModel {
    /// Committed calibration of the 22 nm-class cards `n22` / `p22`.
    ///
    /// `kp` puts the NMOS on-current (W/L = 5, v_gs = v_ds = 0.8 V) near
    /// 50 µA and sizes the PMOS so a 500 nm PMOS matches a 200 nm NMOS.
    pub fn default_for(polarity: Polarity) -> Self {
        match polarity {
            Polarity::N => Self {
                polarity,
                vth0: 0.503,
                n_slope: 1.35,
                kp: 300e-6,
                lambda: 0.15,
                cox_area: 0.03,
                t0: T_NOMINAL,
                tc_vth: 1.0e-3,
                mu_exp: 1.5,
            },
            Polarity::P => Self {
                polarity,
                vth0: 0.460,
                n_slope: 1.35,
                kp: 90e-6,
                lambda: 0.15,
                cox_area: 0.03,
                t0: T_NOMINAL,
                tc_vth: 1.0e-3,
                mu_exp: 1.5,
            },
        }
    }

    /// Apply one `.model` card key.
    pub fn set_param(&mut self, key: &str, value: f64) -> Result<(), String> {
        match key.to_ascii_lowercase().as_str() {
            "vth0" => self.vth0 = value,
            "n" => self.n_slope = value,
            "kp" => self.kp = value,
            "lambda" => self.lambda = value,
            "cox" => self.cox_area = value,
            "tcvth" => self.tc_vth = value,
            "muexp" => self.mu_exp = value,
            other => return Err(format!("unknown model parameter `{other}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(1.0..=2.0).contains(&self.n_slope) {
            return Err(format!("n = {} outside [1, 2]", self.n_slope));
        }
        if !(self.kp > 0.0) {
            return Err("kp must be positive".into());
        }
        if !(self.vth0 > 0.0) {
            return Err("vth0 must be positive (magnitude)".into());
        }
        if !(self.lambda >= 0.0) {
            return Err("lambda must be non-negative".into());
        }
        if !(self.tc_vth >= 0.0) {
            return Err("tcvth must be non-negative".into());
        }
        if !(self.cox_area >= 0.0) {
            return Err("cox must be non-negative".into());
        }
        Ok(())
    }

    /// `.model` card body: type keyword plus every parameter.
    pub fn card_body(&self) -> String {
        use crate::netlist::format_value as f;
        let kind = match self.polarity {
            Polarity::N => "nmos",
            Polarity::P => "pmos",
        };
        format!(
            "{kind} (vth0={} n={} kp={} lambda={} cox={} tcvth={} muexp={})",
            f(self.vth0),
            f(self.n_slope),
            f(self.kp),
            f(self.lambda),
            f(self.cox_area),
            f(self.tc_vth),
            f(self.mu_exp)
        )
    }
}

/// Temperature- and geometry-resolved parameters of one instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TempParams {
    pub vth_t: f64,
    pub kp_t: f64,
    /// Specific current 2·n·kp(T)·(W/L)·V_T², amperes.
    pub is_t: f64,
    /// Thermal voltage kT/q.
    pub v_t: f64,
}

pub fn temperature_adjust(
    model: &MosModel,
    w: f64,
    l: f64,
    t_kelvin: f64,
) -> Result<TempParams, DeviceError> {
    if !(TEMP_RANGE.0..=TEMP_RANGE.1).contains(&t_kelvin) {
        return Err(DeviceError::TemperatureOutOfRange(t_kelvin));
    }
    let v_t = K_OVER_Q * t_kelvin;
    let kp_t = model.kp * (t_kelvin / model.t0).powf(-model.mu_exp);
    Ok(TempParams {
        vth_t: model.vth0 - model.tc_vth * (t_kelvin - model.t0),
        kp_t,
        is_t: 2.0 * model.n_slope * kp_t * (w / l) * v_t * v_t,
        v_t,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Off,
    Weak,
    Strong,
}

/// Drain current and its partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MosEval {
    /// Drain-to-source current through the channel, amperes.
    pub i_ds: f64,
    /// ∂i_ds/∂v_g.
    pub g_m: f64,
    /// ∂i_ds/∂v_d.
    pub g_ds: f64,
    /// ∂i_ds/∂v_s.
    pub g_ms: f64,
    pub region: Region,
}

#[inline]
fn softplus(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

#[inline]
fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// F(x) and dF/dx for x in thermal-voltage units.
#[inline]
fn interp(x: f64) -> (f64, f64) {
    let sp = softplus(0.5 * x);
    (sp * sp, sp * sigmoid(0.5 * x))
}

/// Evaluate with pre-resolved temperature parameters; this is the hot path
/// used by the engine.
pub fn eval(model: &MosModel, tp: &TempParams, vg: f64, vd: f64, vs: f64) -> MosEval {
    let sign = match model.polarity {
        Polarity::N => 1.0,
        Polarity::P => -1.0,
    };
    let c = |v: f64| (sign * v).clamp(-V_CLAMP, V_CLAMP);
    let e = eval_n(model, tp, c(vg), c(vd), c(vs));
    MosEval {
        i_ds: sign * e.i_ds,
        ..e
    }
}

fn eval_n(model: &MosModel, tp: &TempParams, vg: f64, vd: f64, vs: f64) -> MosEval {
    // Voltages are taken relative to the lower of drain and source (the
    // bulk follows the conducting source), which keeps the expression
    // drain/source symmetric without a body effect.
    let source_is_ref = vs <= vd;
    let vref = if source_is_ref { vs } else { vd };
    let (vg, vd, vs) = (vg - vref, vd - vref, vs - vref);

    let n = model.n_slope;
    let vt = tp.v_t;
    let vp = (vg - tp.vth_t) / n;
    let (ff, dff) = interp((vp - vs) / vt);
    let (fr, dfr) = interp((vp - vd) / vt);
    let i0 = tp.is_t * (ff - fr);
    let vds = vd - vs;
    let clm = 1.0 + model.lambda * vds.abs();
    let dclm = if vds == 0.0 { 0.0 } else { model.lambda * vds.signum() };

    let di_dvg = tp.is_t * (dff - dfr) / (n * vt);
    let di_dvd = tp.is_t * dfr / vt;
    let di_dvs = -tp.is_t * dff / vt;

    let g_m = di_dvg * clm;
    let mut g_ds = di_dvd * clm + i0 * dclm;
    let mut g_ms = di_dvs * clm - i0 * dclm;
    // Chain rule through the reference terminal.
    let total = g_m + g_ds + g_ms;
    if source_is_ref {
        g_ms -= total;
    } else {
        g_ds -= total;
    }

    let ic = ff.max(fr);
    let region = if ic < 1e-6 {
        Region::Off
    } else if ic < 1.0 {
        Region::Weak
    } else {
        Region::Strong
    };
    MosEval {
        i_ds: i0 * clm,
        g_m,
        g_ds,
        g_ms,
        region,
    }
}

/// Convenience wrapper resolving temperature on every call.
pub fn mos_ids(
    model: &MosModel,
    w: f64,
    l: f64,
    vg: f64,
    vd: f64,
    vs: f64,
    t_kelvin: f64,
) -> Result<MosEval, DeviceError> {
    let tp = temperature_adjust(model, w, l, t_kelvin)?;
    Ok(eval(model, &tp, vg, vd, vs))
}

/// Gate capacitance `cox·W·L` (voltage independent).
pub fn gate_capacitance(model: &MosModel, w: f64, l: f64) -> f64 {
    model.cox_area * w * l
}

/// Gate charge and capacitance at gate voltage `vg`.
pub fn mos_gate_charge(model: &MosModel, w: f64, l: f64, vg: f64) -> (f64, f64) {
    let c = gate_capacitance(model, w, l);
    (c * vg, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n22() -> MosModel {
        MosModel::default_for(Polarity::N)
    }
    fn p22() -> MosModel {
        MosModel::default_for(Polarity::P)
    }

    #[test]
    fn reference_point() {
        let tp = temperature_adjust(&n22(), 200e-9, 40e-9, T_NOMINAL).unwrap();
        assert_eq!(tp.vth_t, 0.503);
        assert!((tp.v_t - 0.025_87).abs() < 1e-5);
    }

    #[test]
    fn hot_threshold() {
        let tp = temperature_adjust(&n22(), 200e-9, 40e-9, 398.15).unwrap();
        assert!((tp.vth_t - 0.405).abs() < 1e-12);
    }

    #[test]
    fn temperature_domain() {
        assert!(temperature_adjust(&n22(), 1e-6, 1e-6, 150.0).is_err());
        assert!(temperature_adjust(&n22(), 1e-6, 1e-6, 500.0).is_err());
    }

    #[test]
    fn zero_vds_zero_current() {
        let m = n22();
        let e = mos_ids(&m, 200e-9, 40e-9, 0.0, 0.0, 0.0, T_NOMINAL).unwrap();
        assert_eq!(e.i_ds, 0.0);
        let e = mos_ids(&m, 200e-9, 40e-9, 0.8, 0.4, 0.4, T_NOMINAL).unwrap();
        assert_eq!(e.i_ds, 0.0);
    }

    #[test]
    fn on_current_in_calibration_window() {
        let i_on = mos_ids(&n22(), 200e-9, 40e-9, 0.8, 0.8, 0.0, T_NOMINAL)
            .unwrap()
            .i_ds;
        assert!((10e-6..100e-6).contains(&i_on), "I_on = {i_on}");
        // PMOS 500 nm pulling up with full drive, mirrored terminals.
        let i_p = mos_ids(&p22(), 500e-9, 40e-9, 0.0, 0.0, 0.8, T_NOMINAL)
            .unwrap()
            .i_ds;
        let ratio = -i_p / i_on;
        assert!((0.8..1.25).contains(&ratio), "p/n ratio {ratio}");
    }

    #[test]
    fn subthreshold_regime() {
        let e = mos_ids(&n22(), 200e-9, 40e-9, 0.3, 0.4, 0.0, T_NOMINAL).unwrap();
        assert!(e.i_ds > 0.0 && e.i_ds < 1e-6, "{}", e.i_ds);
        assert_eq!(e.region, Region::Weak);
        // Slope: one decade per n·V_T·ln10.
        let a = mos_ids(&n22(), 200e-9, 40e-9, 0.10, 0.4, 0.0, T_NOMINAL).unwrap();
        let b = mos_ids(&n22(), 200e-9, 40e-9, 0.20, 0.4, 0.0, T_NOMINAL).unwrap();
        let mv_per_dec = 100.0 / (b.i_ds / a.i_ds).log10();
        assert!((mv_per_dec - 80.4).abs() < 1.0, "{mv_per_dec}");
    }

    #[test]
    fn pmos_conducts_negative() {
        let e = mos_ids(&p22(), 500e-9, 40e-9, 0.0, 0.0, 0.8, T_NOMINAL).unwrap();
        assert!(e.i_ds < 0.0);
        assert!(e.g_m > 0.0);
    }

    #[test]
    fn gate_charge() {
        let mut m = n22();
        m.cox_area = 0.03;
        let (q, c) = mos_gate_charge(&m, 200e-9, 40e-9, 0.0);
        assert_eq!(q, 0.0);
        assert!((c - 2.4e-16).abs() < 1e-30);
        let (q1, _) = mos_gate_charge(&m, 200e-9, 40e-9, 0.5);
        let (q2, _) = mos_gate_charge(&m, 400e-9, 40e-9, 0.5);
        assert!((q2 - 2.0 * q1).abs() < 1e-30);
    }

    #[test]
    fn no_overflow_at_clamp() {
        let e = mos_ids(&n22(), 1e-6, 40e-9, 50.0, 50.0, -50.0, 250.0).unwrap();
        assert!(e.i_ds.is_finite() && e.g_m.is_finite());
    }
}

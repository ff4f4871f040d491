//! Modified nodal analysis: DC operating point and fixed-step transient.

mod linear;
mod mna;
mod newton;
mod waveform;

pub use linear::{solve_in_place, solve_linear, DenseMatrix, SingularMatrix, PIVOT_FLOOR};
pub use waveform::{sci9, Waveform};

use crate::devices::DeviceError;
use crate::netlist::Circuit;
use mna::{Reactive, Stimulus, System};
use newton::Workspace;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("no convergence{}: residual {residual:.3e} at `{worst}`", fmt_time(*.time))]
    Convergence {
        time: Option<f64>,
        residual: f64,
        worst: String,
    },
    #[error("singular matrix at `{node}` (floating node or source loop)")]
    Singular { node: String },
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error("invalid analysis: {0}")]
    InvalidAnalysis(String),
}

fn fmt_time(t: Option<f64>) -> String {
    t.map(|t| format!(" at t = {t:.6e} s")).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub reltol: f64,
    /// Volts.
    pub vntol: f64,
    /// Amperes.
    pub abstol: f64,
    pub max_newton: usize,
    pub gmin_start: f64,
    pub gmin_final: f64,
    /// Largest node-voltage change applied per Newton iteration.
    pub damping: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            reltol: 1e-3,
            vntol: 1e-6,
            abstol: 1e-12,
            max_newton: 100,
            gmin_start: 1e-3,
            gmin_final: 1e-12,
            damping: 0.3,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<(), SimError> {
        let pos = [
            self.reltol,
            self.vntol,
            self.abstol,
            self.gmin_start,
            self.gmin_final,
            self.damping,
        ];
        if pos.iter().any(|v| !(*v > 0.0)) || self.max_newton == 0 {
            return Err(SimError::InvalidAnalysis(
                "solver options must be strictly positive".into(),
            ));
        }
        if self.gmin_final >= self.gmin_start {
            return Err(SimError::InvalidAnalysis(
                "gmin_final must be below gmin_start".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    #[default]
    Trapezoidal,
    BackwardEuler,
}

/// Which homotopy produced the operating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcStrategy {
    Direct,
    GminStepping,
    SourceStepping,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    /// Indexed by node number; entry 0 is ground.
    pub node_voltages: Vec<f64>,
    /// Current delivered by each voltage source, deck order.
    pub source_currents: Vec<f64>,
    pub node_names: Vec<String>,
    pub source_names: Vec<String>,
    pub strategy: DcStrategy,
}

impl OperatingPoint {
    pub fn voltage(&self, node: &str) -> Option<f64> {
        let node = node.to_ascii_lowercase();
        self.node_names
            .iter()
            .position(|n| *n == node)
            .map(|i| self.node_voltages[i])
    }

    pub fn source_current(&self, name: &str) -> Option<f64> {
        self.source_names
            .iter()
            .position(|n| n.eq_ignore_ascii_case(name))
            .map(|i| self.source_currents[i])
    }
}

/// Solve the DC operating point with sources at their `t = 0` values.
///
/// Plain Newton first; on failure, gmin stepping by decades from
/// `gmin_start` to `gmin_final`, then source stepping in ten increments.
/// A converged point is finally re-solved without shunts when possible.
pub fn dc_operating_point(
    c: &Circuit,
    t_kelvin: f64,
    opts: &SolveOptions,
) -> Result<OperatingPoint, SimError> {
    opts.validate()?;
    let sys = System::new(c, t_kelvin)?;
    let (x, strategy) = dc_solve(&sys, opts)?;
    Ok(op_from(&sys, &x, strategy))
}

fn op_from(sys: &System, x: &[f64], strategy: DcStrategy) -> OperatingPoint {
    let mut node_voltages = vec![0.0];
    node_voltages.extend_from_slice(&x[..sys.n_kcl()]);
    OperatingPoint {
        node_voltages,
        source_currents: x[sys.n_kcl()..].to_vec(),
        node_names: sys.node_names.clone(),
        source_names: sys.source_names.clone(),
        strategy,
    }
}

fn dc_stimulus(gmin: f64, scale: f64) -> Stimulus<'static> {
    Stimulus {
        time: 0.0,
        source_scale: scale,
        gmin,
        reactive: Reactive::Dc,
    }
}

fn dc_solve(sys: &System, opts: &SolveOptions) -> Result<(Vec<f64>, DcStrategy), SimError> {
    let dim = sys.dim();
    let mut ws = Workspace::new(dim);

    let mut x = vec![0.0; dim];
    let direct = newton::solve(sys, &mut x, &dc_stimulus(opts.gmin_final, 1.0), opts, &mut ws, false);
    if direct.is_ok() {
        return Ok((polish(sys, x, opts, &mut ws), DcStrategy::Direct));
    }

    let mut x = vec![0.0; dim];
    let mut gmin = opts.gmin_start;
    let mut stepped = true;
    loop {
        let g = gmin.max(opts.gmin_final);
        if newton::solve(sys, &mut x, &dc_stimulus(g, 1.0), opts, &mut ws, false).is_err() {
            stepped = false;
            break;
        }
        if g <= opts.gmin_final {
            break;
        }
        gmin /= 10.0;
    }
    if stepped {
        return Ok((polish(sys, x, opts, &mut ws), DcStrategy::GminStepping));
    }

    let mut x = vec![0.0; dim];
    let mut last = None;
    for k in 1..=10 {
        let st = dc_stimulus(opts.gmin_final, k as f64 / 10.0);
        if let Err(f) = newton::solve(sys, &mut x, &st, opts, &mut ws, false) {
            last = Some(f);
            break;
        }
    }
    match last {
        None => Ok((polish(sys, x, opts, &mut ws), DcStrategy::SourceStepping)),
        Some(f) => Err(f.into_error(None)),
    }
}

/// Remove the gmin shunts if the circuit is well posed without them.
fn polish(sys: &System, x: Vec<f64>, opts: &SolveOptions, ws: &mut Workspace) -> Vec<f64> {
    let mut y = x.clone();
    match newton::solve(sys, &mut y, &dc_stimulus(0.0, 1.0), opts, ws, false) {
        Ok(_) => y,
        Err(_) => x,
    }
}

/// Fixed-step implicit transient from the DC operating point.
///
/// The first two steps always use backward Euler. A step whose Newton
/// solve fails is retried once as two half steps.
pub fn transient(
    c: &Circuit,
    t_step: f64,
    t_stop: f64,
    t_kelvin: f64,
    opts: &SolveOptions,
    integrator: Integrator,
) -> Result<Waveform, SimError> {
    opts.validate()?;
    if !(t_step > 0.0 && t_stop > t_step) {
        return Err(SimError::InvalidAnalysis(format!(
            "need 0 < t_step < t_stop, got {t_step} and {t_stop}"
        )));
    }
    let sys = System::new(c, t_kelvin)?;
    let (x0, _) = dc_solve(&sys, opts)?;
    let mut run = TranState::new(&sys, x0, opts);

    let n_steps = (t_stop / t_step - 1e-9).ceil() as usize;
    let mut wave = Waveform::new(&sys, n_steps + 1);
    wave.push(&sys, 0.0, &run.x, 0.0);

    for k in 0..n_steps {
        let t0 = k as f64 * t_step;
        let t1 = ((k + 1) as f64 * t_step).min(t_stop);
        let method = if k < 2 {
            Integrator::BackwardEuler
        } else {
            integrator
        };
        match run.step(t1, t1 - t0, method) {
            Ok(()) => wave.push(&sys, t1, &run.x, run.last_residual),
            Err(_) => {
                let mid = 0.5 * (t0 + t1);
                run.step(mid, mid - t0, method)
                    .map_err(|f| f.into_error(Some(mid)))?;
                wave.push(&sys, mid, &run.x, run.last_residual);
                run.step(t1, t1 - mid, method)
                    .map_err(|f| f.into_error(Some(t1)))?;
                wave.push(&sys, t1, &run.x, run.last_residual);
            }
        }
    }
    wave.newton_iterations = run.iterations;
    Ok(wave)
}

struct TranState<'s> {
    sys: &'s System,
    opts: &'s SolveOptions,
    ws: Workspace,
    x: Vec<f64>,
    x_try: Vec<f64>,
    cap_v: Vec<f64>,
    cap_i: Vec<f64>,
    cap_v_new: Vec<f64>,
    iterations: usize,
    last_residual: f64,
}

impl<'s> TranState<'s> {
    fn new(sys: &'s System, x0: Vec<f64>, opts: &'s SolveOptions) -> Self {
        let mut cap_v = Vec::new();
        sys.cap_voltages(&x0, &mut cap_v);
        let n_caps = cap_v.len();
        Self {
            sys,
            opts,
            ws: Workspace::new(sys.dim()),
            x_try: x0.clone(),
            x: x0,
            cap_v,
            cap_i: vec![0.0; n_caps],
            cap_v_new: Vec::with_capacity(n_caps),
            iterations: 0,
            last_residual: 0.0,
        }
    }

    /// Advance to `t_new`; on failure the state is left untouched.
    fn step(&mut self, t_new: f64, h: f64, method: Integrator) -> Result<(), newton::NewtonFailure> {
        let (geq_scale, hist_on) = match method {
            Integrator::BackwardEuler => (1.0 / h, false),
            Integrator::Trapezoidal => (2.0 / h, true),
        };
        let zeros;
        let hist: &[f64] = if hist_on {
            &self.cap_i
        } else {
            zeros = vec![0.0; self.cap_i.len()];
            &zeros
        };
        let st = Stimulus {
            time: t_new,
            source_scale: 1.0,
            gmin: self.opts.gmin_final,
            reactive: Reactive::Companion {
                geq_scale,
                v_prev: &self.cap_v,
                hist,
            },
        };
        self.x_try.copy_from_slice(&self.x);
        let iters = newton::solve(self.sys, &mut self.x_try, &st, self.opts, &mut self.ws, true)?;
        self.iterations += iters;
        self.last_residual = self.ws.res[..self.sys.n_kcl()]
            .iter()
            .fold(0.0f64, |m, r| m.max(r.abs()));

        self.sys.cap_voltages(&self.x_try, &mut self.cap_v_new);
        for (k, cap) in self.sys.caps.iter().enumerate() {
            let geq = geq_scale * cap.c;
            let h_k = if hist_on { self.cap_i[k] } else { 0.0 };
            self.cap_i[k] = geq * (self.cap_v_new[k] - self.cap_v[k]) - h_k;
        }
        std::mem::swap(&mut self.cap_v, &mut self.cap_v_new);
        std::mem::swap(&mut self.x, &mut self.x_try);
        Ok(())
    }
}

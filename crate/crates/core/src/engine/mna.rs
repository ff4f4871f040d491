//! MNA assembly: residual and Jacobian of the circuit equations.
//!
//! Unknowns are the non-ground node voltages followed by one branch current
//! per voltage source. Node rows hold the sum of currents leaving the node
//! through its elements; branch rows hold `v+ − v− − V(t)`. The branch
//! unknown is the current the source delivers out of its `+` terminal.

use crate::devices::{gate_capacitance, mos_eval, temperature_adjust, MosModel, TempParams};
use crate::netlist::{Circuit, DeviceKind, Drive};

use super::linear::DenseMatrix;
use super::SimError;

#[derive(Debug, Clone)]
pub(crate) struct MosInst {
    pub d: usize,
    pub g: usize,
    pub s: usize,
    pub model: MosModel,
    pub tp: TempParams,
}

#[derive(Debug, Clone)]
pub(crate) struct Source {
    pub pos: usize,
    pub neg: usize,
    pub drive: Drive,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Cap {
    pub a: usize,
    pub b: usize,
    pub c: f64,
}

/// Two-terminal conductance `g` between `a` and `b` carrying current `i`
/// from `a` to `b`.
#[inline]
fn stamp_g(jac: &mut DenseMatrix, res: &mut [f64], a: usize, b: usize, g: f64, i: f64) {
    if a != 0 {
        res[a - 1] += i;
        jac[(a - 1, a - 1)] += g;
        if b != 0 {
            jac[(a - 1, b - 1)] -= g;
        }
    }
    if b != 0 {
        res[b - 1] -= i;
        jac[(b - 1, b - 1)] += g;
        if a != 0 {
            jac[(b - 1, a - 1)] -= g;
        }
    }
}

/// Circuit resolved at one temperature, ready for repeated assembly.
#[derive(Debug, Clone)]
pub(crate) struct System {
    pub node_names: Vec<String>,
    pub source_names: Vec<String>,
    pub resistors: Vec<(usize, usize, f64)>,
    pub caps: Vec<Cap>,
    pub mos: Vec<MosInst>,
    pub sources: Vec<Source>,
}

/// Reactive-element treatment for one assembly.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Reactive<'a> {
    /// Capacitors open.
    Dc,
    /// Companion model `i = geq·(v − v_prev) − hist` per capacitor.
    Companion {
        geq_scale: f64,
        v_prev: &'a [f64],
        hist: &'a [f64],
    },
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Stimulus<'a> {
    pub time: f64,
    pub source_scale: f64,
    pub gmin: f64,
    pub reactive: Reactive<'a>,
}

impl System {
    pub fn new(c: &Circuit, t_kelvin: f64) -> Result<Self, SimError> {
        let mut sys = System {
            node_names: c.node_names.clone(),
            source_names: Vec::new(),
            resistors: Vec::new(),
            caps: Vec::new(),
            mos: Vec::new(),
            sources: Vec::new(),
        };
        for d in &c.devices {
            match &d.kind {
                DeviceKind::Resistor { a, b, ohms } => sys.resistors.push((*a, *b, 1.0 / ohms)),
                DeviceKind::Capacitor { a, b, farads } => sys.caps.push(Cap {
                    a: *a,
                    b: *b,
                    c: *farads,
                }),
                DeviceKind::VSource { pos, neg, drive } => {
                    sys.source_names.push(d.name.clone());
                    sys.sources.push(Source {
                        pos: *pos,
                        neg: *neg,
                        drive: *drive,
                    });
                }
                DeviceKind::Mosfet {
                    drain,
                    gate,
                    source,
                    model,
                    w,
                    l,
                    ..
                } => {
                    let m = c.models[model];
                    let tp = temperature_adjust(&m, *w, *l, t_kelvin)?;
                    let cg = gate_capacitance(&m, *w, *l);
                    if cg > 0.0 {
                        sys.caps.push(Cap {
                            a: *gate,
                            b: 0,
                            c: cg,
                        });
                    }
                    sys.mos.push(MosInst {
                        d: *drain,
                        g: *gate,
                        s: *source,
                        model: m,
                        tp,
                    });
                }
            }
        }
        Ok(sys)
    }

    pub fn n_nodes(&self) -> usize {
        self.node_names.len()
    }

    /// Number of unknowns.
    pub fn dim(&self) -> usize {
        self.n_nodes() - 1 + self.sources.len()
    }

    pub fn n_kcl(&self) -> usize {
        self.n_nodes() - 1
    }

    /// Node voltage from the unknown vector; ground is 0.
    #[inline]
    pub fn v(x: &[f64], node: usize) -> f64 {
        if node == 0 {
            0.0
        } else {
            x[node - 1]
        }
    }

    pub fn source_values(&self, time: f64, scale: f64) -> impl Iterator<Item = f64> + '_ {
        self.sources
            .iter()
            .map(move |s| scale * s.drive.value_at(time))
    }

    /// Fill `jac` and `res` at `x`.
    pub fn assemble(&self, x: &[f64], st: &Stimulus, jac: &mut DenseMatrix, res: &mut [f64]) {
        jac.clear();
        res.fill(0.0);
        let v = |n: usize| Self::v(x, n);

        for &(a, b, g) in &self.resistors {
            stamp_g(jac, res, a, b, g, g * (v(a) - v(b)));
        }

        if st.gmin > 0.0 {
            for k in 1..self.n_nodes() {
                res[k - 1] += st.gmin * x[k - 1];
                jac[(k - 1, k - 1)] += st.gmin;
            }
        }

        if let Reactive::Companion {
            geq_scale,
            v_prev,
            hist,
        } = st.reactive
        {
            for (k, cap) in self.caps.iter().enumerate() {
                let geq = geq_scale * cap.c;
                let dv = v(cap.a) - v(cap.b);
                let i = geq * (dv - v_prev[k]) - hist[k];
                stamp_g(jac, res, cap.a, cap.b, geq, i);
            }
        }

        for m in &self.mos {
            let e = mos_eval(&m.model, &m.tp, v(m.g), v(m.d), v(m.s));
            let (d, g, s) = (m.d, m.g, m.s);
            if d != 0 {
                res[d - 1] += e.i_ds;
                if g != 0 {
                    jac[(d - 1, g - 1)] += e.g_m;
                }
                jac[(d - 1, d - 1)] += e.g_ds;
                if s != 0 {
                    jac[(d - 1, s - 1)] += e.g_ms;
                }
            }
            if s != 0 {
                res[s - 1] -= e.i_ds;
                if g != 0 {
                    jac[(s - 1, g - 1)] -= e.g_m;
                }
                if d != 0 {
                    jac[(s - 1, d - 1)] -= e.g_ds;
                }
                jac[(s - 1, s - 1)] -= e.g_ms;
            }
        }

        let base = self.n_kcl();
        for (j, (src, value)) in self
            .sources
            .iter()
            .zip(self.source_values(st.time, st.source_scale))
            .enumerate()
        {
            let row = base + j;
            let i_b = x[row];
            if src.pos != 0 {
                res[src.pos - 1] -= i_b;
                jac[(src.pos - 1, row)] -= 1.0;
                jac[(row, src.pos - 1)] += 1.0;
            }
            if src.neg != 0 {
                res[src.neg - 1] += i_b;
                jac[(src.neg - 1, row)] += 1.0;
                jac[(row, src.neg - 1)] -= 1.0;
            }
            res[row] = v(src.pos) - v(src.neg) - value;
        }
    }

    /// Voltage across each capacitor at `x`.
    pub fn cap_voltages(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.caps.iter().map(|c| Self::v(x, c.a) - Self::v(x, c.b)));
    }

    /// Name for an unknown index (for diagnostics).
    pub fn unknown_name(&self, row: usize) -> String {
        if row < self.n_kcl() {
            self.node_names[row + 1].clone()
        } else {
            format!("i({})", self.source_names[row - self.n_kcl()])
        }
    }
}

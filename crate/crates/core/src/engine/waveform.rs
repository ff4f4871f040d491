use std::io::{self, Write};

use super::mna::System;

/// Sampled transient result: every accepted time point.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub times: Vec<f64>,
    /// Non-ground node names, column order of `node_voltages`.
    pub node_names: Vec<String>,
    pub node_voltages: Vec<Vec<f64>>,
    pub source_names: Vec<String>,
    /// Current delivered by each source out of its `+` terminal.
    pub source_currents: Vec<Vec<f64>>,
    /// Source terminal voltage `v+ − v−` at each point.
    pub source_voltages: Vec<Vec<f64>>,
    /// Largest KCL residual (A) at each accepted point.
    pub kcl_residual: Vec<f64>,
    pub newton_iterations: usize,
}

impl Waveform {
    pub(crate) fn new(sys: &System, capacity: usize) -> Self {
        let n = sys.n_kcl();
        let m = sys.sources.len();
        Self {
            times: Vec::with_capacity(capacity),
            node_names: sys.node_names[1..].to_vec(),
            node_voltages: vec![Vec::with_capacity(capacity); n],
            source_names: sys.source_names.clone(),
            source_currents: vec![Vec::with_capacity(capacity); m],
            source_voltages: vec![Vec::with_capacity(capacity); m],
            kcl_residual: Vec::with_capacity(capacity),
            newton_iterations: 0,
        }
    }

    pub(crate) fn push(&mut self, sys: &System, t: f64, x: &[f64], residual: f64) {
        let n = sys.n_kcl();
        self.times.push(t);
        for (series, v) in self.node_voltages.iter_mut().zip(&x[..n]) {
            series.push(*v);
        }
        for (j, src) in sys.sources.iter().enumerate() {
            self.source_currents[j].push(x[n + j]);
            self.source_voltages[j].push(System::v(x, src.pos) - System::v(x, src.neg));
        }
        self.kcl_residual.push(residual);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn node(&self, name: &str) -> Option<&[f64]> {
        let name = name.to_ascii_lowercase();
        self.node_names
            .iter()
            .position(|n| *n == name)
            .map(|i| self.node_voltages[i].as_slice())
    }

    pub fn source_current(&self, name: &str) -> Option<&[f64]> {
        self.source_index(name)
            .map(|i| self.source_currents[i].as_slice())
    }

    pub fn source_voltage(&self, name: &str) -> Option<&[f64]> {
        self.source_index(name)
            .map(|i| self.source_voltages[i].as_slice())
    }

    fn source_index(&self, name: &str) -> Option<usize> {
        self.source_names
            .iter()
            .position(|n| n.eq_ignore_ascii_case(name))
    }

    /// `time,<nodes...>,i(<sources>)...`, nine significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut header = vec!["time".to_string()];
        header.extend(self.node_names.iter().cloned());
        header.extend(self.source_names.iter().map(|s| format!("i({s})")));
        writeln!(w, "{}", header.join(","))?;
        let mut line = String::new();
        for k in 0..self.len() {
            line.clear();
            line.push_str(&sci9(self.times[k]));
            for s in self.node_voltages.iter().chain(&self.source_currents) {
                line.push(',');
                line.push_str(&sci9(s[k]));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Scientific notation with nine significant digits.
pub fn sci9(v: f64) -> String {
    format!("{v:.8e}")
}

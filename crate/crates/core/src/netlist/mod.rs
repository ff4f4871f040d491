//! SPICE-dialect netlist front end.
//!
//! Text is first split into a [`RawDeck`] of logical cards (comments removed,
//! `+` continuations folded), then [`elaborate`]d into a node-indexed
//! [`Circuit`]. Ground is always node 0; `0` and `gnd` name the same node.

mod elaborate;
mod parse;
mod value;

use std::collections::BTreeMap;
use std::fmt;

pub use elaborate::elaborate;
pub use parse::parse_netlist;
pub use value::{format_value, parse_value};

use crate::devices::{MosModel, PulseSpec};

/// Syntax error anchored to a source position (1-based).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetlistError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("line {line}: device `{device}` references undeclared model `{model}`")]
    UnknownModel {
        device: String,
        model: String,
        line: usize,
    },
    #[error("floating node `{node}`: only one terminal connects to it")]
    FloatingNode { node: String },
    #[error("node `{node}` has no path of elements to ground")]
    Disconnected { node: String },
    #[error("line {line}: device `{device}`: {reason}")]
    InvalidDevice {
        device: String,
        line: usize,
        reason: String,
    },
    #[error("line {line}: {reason}")]
    InvalidDirective { line: usize, reason: String },
}

/// A token with its 1-based source position.
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub text: String,
    pub line: usize,
    pub column: usize,
}

/// One logical card after comment stripping and continuation folding.
#[derive(Debug, Clone, PartialEq)]
pub struct Card {
    /// Line of the card's first physical line.
    pub line: usize,
    pub tokens: Vec<Token>,
}

impl Card {
    pub fn keyword(&self) -> &str {
        &self.tokens[0].text
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawDeck {
    pub title: String,
    pub cards: Vec<Card>,
}

/// Voltage-source drive waveform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drive {
    Dc(f64),
    Pulse(PulseSpec),
}

impl Drive {
    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            Drive::Dc(v) => *v,
            Drive::Pulse(p) => p.value_at(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DeviceKind {
    Mosfet {
        drain: usize,
        gate: usize,
        source: usize,
        bulk: usize,
        model: String,
        /// Channel width, meters.
        w: f64,
        /// Channel length, meters.
        l: f64,
    },
    Resistor {
        a: usize,
        b: usize,
        ohms: f64,
    },
    Capacitor {
        a: usize,
        b: usize,
        farads: f64,
    },
    VSource {
        pos: usize,
        neg: usize,
        drive: Drive,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceInstance {
    pub name: String,
    pub kind: DeviceKind,
}

impl DeviceInstance {
    /// Node indices touched by the device, bulk included.
    pub fn terminals(&self) -> Vec<usize> {
        match &self.kind {
            DeviceKind::Mosfet {
                drain,
                gate,
                source,
                bulk,
                ..
            } => vec![*drain, *gate, *source, *bulk],
            DeviceKind::Resistor { a, b, .. } | DeviceKind::Capacitor { a, b, .. } => vec![*a, *b],
            DeviceKind::VSource { pos, neg, .. } => vec![*pos, *neg],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalysisSpec {
    Tran { t_step: f64, t_stop: f64 },
    DcOp,
    Temp { celsius: f64 },
}

/// Default ambient temperature when a deck has no `.temp` card.
pub const DEFAULT_TEMP_C: f64 = 27.0;

/// Elaborated, validated circuit. Node 0 is ground.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub title: String,
    /// Node names indexed by node number; `node_names[0]` is `"0"`.
    pub node_names: Vec<String>,
    pub devices: Vec<DeviceInstance>,
    pub models: BTreeMap<String, MosModel>,
    pub analyses: Vec<AnalysisSpec>,
    /// Ambient temperature in °C.
    pub global_temp: f64,
    /// Non-fatal notes raised during elaboration (e.g. a replaced `.tran`).
    pub diagnostics: Vec<String>,
}

impl Circuit {
    pub fn node_count(&self) -> usize {
        self.node_names.len()
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        let name = name.to_ascii_lowercase();
        if name == "gnd" {
            return Some(0);
        }
        self.node_names.iter().position(|n| *n == name)
    }

    pub fn device(&self, name: &str) -> Option<&DeviceInstance> {
        self.devices
            .iter()
            .find(|d| d.name.eq_ignore_ascii_case(name))
    }

    pub fn device_mut(&mut self, name: &str) -> Option<&mut DeviceInstance> {
        self.devices
            .iter_mut()
            .find(|d| d.name.eq_ignore_ascii_case(name))
    }

    pub fn mosfet_count(&self) -> usize {
        self.devices
            .iter()
            .filter(|d| matches!(d.kind, DeviceKind::Mosfet { .. }))
            .count()
    }

    /// Names of voltage sources in deck order.
    pub fn source_names(&self) -> Vec<&str> {
        self.devices
            .iter()
            .filter(|d| matches!(d.kind, DeviceKind::VSource { .. }))
            .map(|d| d.name.as_str())
            .collect()
    }

    pub fn tran(&self) -> Option<(f64, f64)> {
        self.analyses.iter().rev().find_map(|a| match a {
            AnalysisSpec::Tran { t_step, t_stop } => Some((*t_step, *t_stop)),
            _ => None,
        })
    }

    /// Render back to deck text accepted by [`parse_netlist`].
    pub fn unparse(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.title);
        out.push('\n');
        for (name, m) in &self.models {
            out.push_str(&format!(".model {name} {}\n", m.card_body()));
        }
        let node = |i: usize| self.node_names[i].as_str();
        for d in &self.devices {
            let line = match &d.kind {
                DeviceKind::Mosfet {
                    drain,
                    gate,
                    source,
                    bulk,
                    model,
                    w,
                    l,
                } => format!(
                    "{} {} {} {} {} {} W={} L={}",
                    d.name,
                    node(*drain),
                    node(*gate),
                    node(*source),
                    node(*bulk),
                    model,
                    format_value(*w),
                    format_value(*l)
                ),
                DeviceKind::Resistor { a, b, ohms } => {
                    format!("{} {} {} {}", d.name, node(*a), node(*b), format_value(*ohms))
                }
                DeviceKind::Capacitor { a, b, farads } => format!(
                    "{} {} {} {}",
                    d.name,
                    node(*a),
                    node(*b),
                    format_value(*farads)
                ),
                DeviceKind::VSource { pos, neg, drive } => match drive {
                    Drive::Dc(v) => {
                        format!("{} {} {} DC {}", d.name, node(*pos), node(*neg), format_value(*v))
                    }
                    Drive::Pulse(p) => format!(
                        "{} {} {} PULSE({} {} {} {} {} {} {})",
                        d.name,
                        node(*pos),
                        node(*neg),
                        format_value(p.v1),
                        format_value(p.v2),
                        format_value(p.t_delay),
                        format_value(p.t_rise),
                        format_value(p.t_fall),
                        format_value(p.t_pw),
                        format_value(p.t_period)
                    ),
                },
            };
            out.push_str(&line);
            out.push('\n');
        }
        for a in &self.analyses {
            match a {
                AnalysisSpec::Tran { t_step, t_stop } => out.push_str(&format!(
                    ".tran {} {}\n",
                    format_value(*t_step),
                    format_value(*t_stop)
                )),
                AnalysisSpec::DcOp => out.push_str(".op\n"),
                AnalysisSpec::Temp { celsius } => {
                    out.push_str(&format!(".temp {}\n", format_value(*celsius)))
                }
            }
        }
        out.push_str(".end\n");
        out
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} nodes, {} devices",
            self.title,
            self.node_count(),
            self.devices.len()
        )
    }
}

/// Parse and elaborate in one step.
pub fn load(text: &str) -> Result<Circuit, NetlistError> {
    elaborate(&parse_netlist(text)?)
}

//! Error classes and their process exit codes.

use std::fmt;

use lsim_core::engine::SimError;
use lsim_core::measure::{MeasureError, RunError};
use lsim_core::netlist::NetlistError;
use lsim_core::variation::VariationError;

use crate::plot::PlotError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Netlist = 1,
    Convergence = 2,
    Measurement = 3,
    Usage = 4,
}

#[derive(Debug)]
pub struct Failure {
    pub kind: ExitKind,
    pub message: String,
}

impl Failure {
    pub fn new(kind: ExitKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(ExitKind::Usage, message)
    }

    pub fn code(&self) -> i32 {
        self.kind as i32
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<NetlistError> for Failure {
    fn from(e: NetlistError) -> Self {
        Self::new(ExitKind::Netlist, e.to_string())
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let kind = match e {
            SimError::Convergence { .. } | SimError::Singular { .. } => ExitKind::Convergence,
            SimError::Device(_) => ExitKind::Usage,
            SimError::InvalidAnalysis(_) => ExitKind::Netlist,
        };
        Self::new(kind, e.to_string())
    }
}

impl From<MeasureError> for Failure {
    fn from(e: MeasureError) -> Self {
        Self::new(ExitKind::Measurement, e.to_string())
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Sim(e) => e.into(),
            RunError::Measure(e) => e.into(),
        }
    }
}

impl From<VariationError> for Failure {
    fn from(e: VariationError) -> Self {
        let kind = match e {
            VariationError::AllFailed(..) | VariationError::Pool(_) => ExitKind::Convergence,
            VariationError::NoSupply => ExitKind::Netlist,
            _ => ExitKind::Usage,
        };
        Self::new(kind, e.to_string())
    }
}

impl From<PlotError> for Failure {
    fn from(e: PlotError) -> Self {
        Self::usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::usage(e.to_string())
    }
}

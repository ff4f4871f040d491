//! Device constitutive relations.

mod mos;
mod pulse;

pub use mos::{
    eval as mos_eval, gate_capacitance, mos_gate_charge, mos_ids, temperature_adjust, MosEval,
    MosModel, Polarity, Region, TempParams, K_OVER_Q, TEMP_RANGE, T_NOMINAL, V_CLAMP,
};
pub use pulse::{pulse_value, PulseSpec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DeviceError {
    #[error("temperature {0} K outside model range [200, 450] K")]
    TemperatureOutOfRange(f64),
}

/// Celsius to kelvin.
pub fn kelvin(celsius: f64) -> f64 {
    celsius + 273.15
}

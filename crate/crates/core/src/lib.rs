//! Transistor-level circuit simulation and measurement for sub-threshold
//! level shifters.
//!
//! Pipeline: [`netlist`] text → [`engine`] (DC + transient MNA solve) →
//! [`measure`] figures of merit → [`variation`] campaigns. [`decks`] holds
//! the bundled reference circuits.

pub mod devices;
pub mod netlist;
pub mod engine;
pub mod decks;
pub mod measure;
pub mod variation;

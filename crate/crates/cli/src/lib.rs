//! Command-line front end for `lsim`: runs decks, sweeps and variation
//! campaigns and writes CSV tables and SVG plots.

mod app;
mod failure;
pub mod output;
pub mod plot;

pub use app::dispatch;
pub use failure::{ExitKind, Failure};

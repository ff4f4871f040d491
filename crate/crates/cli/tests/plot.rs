use lsim_cli::plot::{emit_plot, render_svg, PlotError};
use lsim_core::decks::{generate_ulpls, DeckParams};
use lsim_core::devices::T_NOMINAL;
use lsim_core::engine::{transient, Integrator, SolveOptions, Waveform};
use lsim_core::netlist::load;

fn nominal() -> Waveform {
    let c = load(&generate_ulpls(&DeckParams::default()).unwrap()).unwrap();
    transient(&c, 2e-9, 20e-6, T_NOMINAL, &SolveOptions::default(), Integrator::Trapezoidal).unwrap()
}

#[test]
fn two_panes_two_polylines() {
    let svg = render_svg(&nominal(), &["in", "out"]).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert!(svg.contains("time (µs)") && svg.contains("out (V)"));
}

#[test]
fn identical_bytes_for_identical_input() {
    let w = nominal();
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.svg"), dir.path().join("b.svg"));
    emit_plot(&w, &["in", "out"], &a).unwrap();
    emit_plot(&w, &["in", "out"], &b).unwrap();
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn rejects_bad_node_lists() {
    let w = nominal();
    assert!(matches!(render_svg(&w, &[]), Err(PlotError::NoNodes)));
    assert!(matches!(render_svg(&w, &["in", "nowhere"]), Err(PlotError::UnknownNode(n)) if n == "nowhere"));
}

//! Stacked time-domain SVG plots, one pane per node.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use lsim_core::engine::Waveform;

use crate::output::write_atomic;

const WIDTH: f64 = 720.0;
const PANE_HEIGHT: f64 = 200.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 20.0;
const PANE_GAP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;
const X_TICKS: usize = 5;
const COLORS: [&str; 4] = ["#1f5fa8", "#b03a2e", "#2e7d32", "#6a1b9a"];

#[derive(Debug, thiserror::Error)]
pub enum PlotError {
    #[error("no nodes to plot")]
    NoNodes,
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("empty waveform")]
    Empty,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Render `nodes` of `w` as stacked panes sharing a time axis in µs.
/// Output bytes depend only on the inputs.
pub fn render_svg(w: &Waveform, nodes: &[&str]) -> Result<String, PlotError> {
    if nodes.is_empty() {
        return Err(PlotError::NoNodes);
    }
    if w.times.len() < 2 {
        return Err(PlotError::Empty);
    }
    let series: Vec<&[f64]> = nodes
        .iter()
        .map(|n| w.node(n).ok_or_else(|| PlotError::UnknownNode(n.to_string())))
        .collect::<Result<_, _>>()?;
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let height = MARGIN_TOP + nodes.len() as f64 * (PANE_HEIGHT + PANE_GAP) - PANE_GAP + MARGIN_BOTTOM;
    let t0 = w.times[0];
    let t1 = *w.times.last().unwrap();
    let x_of = |t: f64| MARGIN_LEFT + (t - t0) / (t1 - t0) * plot_w;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for (k, (name, v)) in nodes.iter().zip(&series).enumerate() {
        let top = MARGIN_TOP + k as f64 * (PANE_HEIGHT + PANE_GAP);
        let (lo, hi) = y_range(v);
        let y_of = |y: f64| top + PANE_HEIGHT - (y - lo) / (hi - lo) * PANE_HEIGHT;
        writeln!(
            s,
            r##"<rect x="{MARGIN_LEFT:.2}" y="{top:.2}" width="{plot_w:.2}" height="{PANE_HEIGHT:.2}" fill="none" stroke="#444"/>"##
        )
        .unwrap();
        for (y, anchor) in [(lo, "end"), (hi, "end")] {
            writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="{anchor}">{y:.3}</text>"#,
                MARGIN_LEFT - 6.0,
                y_of(y) + 4.0
            )
            .unwrap();
        }
        writeln!(
            s,
            r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{} (V)</text>"#,
            top + PANE_HEIGHT / 2.0,
            top + PANE_HEIGHT / 2.0,
            escape(name)
        )
        .unwrap();
        let points: Vec<String> = decimate(&w.times, v, t0, t1, plot_w as usize)
            .into_iter()
            .map(|(t, y)| format!("{:.2},{:.2}", x_of(t), y_of(y)))
            .collect();
        writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.2" points="{}"/>"#,
            COLORS[k % COLORS.len()],
            points.join(" ")
        )
        .unwrap();
    }
    let axis_y = height - MARGIN_BOTTOM;
    for i in 0..=X_TICKS {
        let t = t0 + (t1 - t0) * i as f64 / X_TICKS as f64;
        let x = x_of(t);
        writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{axis_y:.2}" x2="{x:.2}" y2="{:.2}" stroke="#444"/>"##,
            axis_y + 5.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{:.2}</text>"#,
            axis_y + 18.0,
            t * 1e6
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">time (µs)</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        axis_y + 38.0
    )
    .unwrap();
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_plot(w: &Waveform, nodes: &[&str], path: &Path) -> Result<(), PlotError> {
    let svg = render_svg(w, nodes)?;
    write_atomic(path, |out| out.write_all(svg.as_bytes()))?;
    Ok(())
}

fn y_range(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = ((hi - lo) * 0.05).max(0.05);
    (lo - pad, hi + pad)
}

/// Keep the first, lowest, highest and last sample of each pixel column,
/// in time order.
fn decimate(t: &[f64], v: &[f64], t0: f64, t1: f64, columns: usize) -> Vec<(f64, f64)> {
    let col = |x: f64| (((x - t0) / (t1 - t0)) * columns as f64).floor().min(columns as f64 - 1.0) as usize;
    let mut out = Vec::new();
    let mut start = 0;
    while start < t.len() {
        let c = col(t[start]);
        let mut end = start;
        while end + 1 < t.len() && col(t[end + 1]) == c {
            end += 1;
        }
        let (mut i_lo, mut i_hi) = (start, start);
        for i in start..=end {
            if v[i] < v[i_lo] {
                i_lo = i;
            }
            if v[i] > v[i_hi] {
                i_hi = i;
            }
        }
        let mut keep = vec![start, i_lo, i_hi, end];
        keep.sort_unstable();
        keep.dedup();
        out.extend(keep.into_iter().map(|i| (t[i], v[i])));
        start = end + 1;
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

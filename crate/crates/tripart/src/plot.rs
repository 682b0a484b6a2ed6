//! Convergence plot: both carrier residuals against iteration on a log axis.

use std::fmt::Write as _;
use std::path::Path;

use tripart_core::coordinator::Trace;

use crate::io::{write_text, IoError};

#[derive(Debug, thiserror::Error)]
pub enum PlotError {
    #[error("cannot plot an empty trace")]
    EmptyTrace,
    #[error(transparent)]
    Io(#[from] IoError),
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
/// Residuals below this are drawn on the floor of the axis.
const FLOOR: f64 = 1e-12;

/// Decades `[lo, hi]` covering every positive value and the thresholds.
pub fn decade_range(values: impl IntoIterator<Item = f64>) -> (i32, i32) {
    let mut lo = i32::MAX;
    let mut hi = i32::MIN;
    for v in values {
        let e = v.max(FLOOR).log10();
        lo = lo.min(e.floor() as i32);
        hi = hi.max(e.ceil() as i32);
    }
    if hi <= lo {
        hi = lo + 1;
    }
    (lo, hi)
}

pub fn render_convergence_svg(trace: &Trace, eps_gas: f64, eps_elec: f64) -> Result<String, PlotError> {
    let recs = &trace.records;
    if recs.is_empty() {
        return Err(PlotError::EmptyTrace);
    }
    let (lo, hi) = decade_range(recs.iter().flat_map(|r| [r.res_gas, r.res_elec]).chain([eps_gas, eps_elec]));
    let last = recs.last().map_or(0, |r| r.iter).max(1) as f64;
    let px = |k: usize| LEFT + (W - LEFT - RIGHT) * k as f64 / last;
    let py = |v: f64| {
        let e = v.max(FLOOR).log10();
        TOP + (H - TOP - BOTTOM) * (hi as f64 - e) / (hi - lo) as f64
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(s, r#"<g class="axes" stroke="black"><line x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>"#);
    for d in lo..=hi {
        let y = py(10f64.powi(d));
        let _ = writeln!(
            s,
            r##"<g class="ytick"><line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">1e{d}</text></g>"##,
            x0 - 6.0,
            y + 4.0
        );
    }
    let step = ((last / 10.0).ceil() as usize).max(1);
    for k in (0..=last as usize).step_by(step) {
        let x = px(k);
        let _ = writeln!(
            s,
            r#"<g class="xtick"><line x1="{x:.2}" y1="{y1}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{k}</text></g>"#,
            y1 + 5.0,
            y1 + 18.0
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">iteration</text>"#, (x0 + x1) / 2.0, H - 10.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">residual</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    let rules: &[(&str, f64)] = if eps_gas == eps_elec {
        &[("eps", eps_gas)]
    } else {
        &[("eps_gas", eps_gas), ("eps_elec", eps_elec)]
    };
    for (name, eps) in rules {
        let y = py(*eps);
        let _ = writeln!(
            s,
            r##"<line class="threshold" data-name="{name}" x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#555" stroke-dasharray="6 4"/>"##
        );
    }

    let series = [("res_gas", "#c0392b"), ("res_elec", "#2471a3")];
    for (i, (name, colour)) in series.iter().enumerate() {
        let pts: Vec<String> = recs
            .iter()
            .map(|r| {
                let v = if i == 0 { r.res_gas } else { r.res_elec };
                format!("{:.2},{:.2}", px(r.iter), py(v))
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="series" data-name="{name}" fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = TOP + 14.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<g class="legend"><line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/><text x="{}" y="{}">{name}</text></g>"#,
            x1 - 110.0,
            x1 - 90.0,
            x1 - 85.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn write_convergence_svg(trace: &Trace, eps_gas: f64, eps_elec: f64, path: &Path) -> Result<(), PlotError> {
    let svg = render_convergence_svg(trace, eps_gas, eps_elec)?;
    write_text(path, &svg)?;
    Ok(())
}

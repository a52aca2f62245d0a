//! Observed orders of convergence and a minimal SVG log-log plot.

use std::fmt::Write;

use crate::error::Result;
use crate::flow::{evolve, helical_exact, helical_semi_discrete, FlowConfig};
use crate::operators::l2_norm;
use crate::state::{make_grid, BoundaryMode};

/// `log(e_i / e_{i+1}) / log(r_i)` for consecutive pairs, with `r_i` the
/// ratio of consecutive step sizes.
pub fn observed_orders(sizes: &[f64], errors: &[f64]) -> Vec<f64> {
    sizes
        .windows(2)
        .zip(errors.windows(2))
        .map(|(s, e)| (e[0] / e[1]).ln() / (s[0] / s[1]).ln())
        .collect()
}

/// Order from three results at ratio-`r` refinement without a reference:
/// `log((q1 - q2) / (q2 - q3)) / log r`.
pub fn richardson_order(q: [f64; 3], r: f64) -> f64 {
    ((q[0] - q[1]) / (q[1] - q[2])).abs().ln() / r.ln()
}

pub fn min_order(orders: &[f64]) -> f64 {
    orders.iter().copied().fold(f64::INFINITY, |a, b| if b.is_nan() { f64::NAN } else { a.min(b) })
}

/// L2 error at `t_end` of the ε = 0 flow started from the helix on a
/// periodic line, against the exact helix or (with `semi_discrete`) the exact
/// solution of the spatially discrete system, which isolates the time error.
pub fn helical_error(
    extent: f64,
    alpha: f64,
    points: usize,
    k_mode: usize,
    dt: f64,
    t_end: f64,
    semi_discrete: bool,
) -> Result<f64> {
    let g = make_grid(1, &[extent], &[points], BoundaryMode::Periodic)?;
    let u0 = helical_exact(&g, k_mode, alpha, 0.0)?;
    let cfg = FlowConfig { dt, t_end, record_every: usize::MAX, ..Default::default() };
    let tr = evolve(&u0, &cfg)?;
    let exact = if semi_discrete {
        helical_semi_discrete(&g, k_mode, alpha, t_end)?
    } else {
        helical_exact(&g, k_mode, alpha, t_end)?
    };
    Ok(l2_norm(&(tr.final_state().as_field() - exact.as_field())))
}

/// Log-log line plot of `(x, y)` series.
pub fn svg_loglog(title: &str, series: &[(&str, Vec<(f64, f64)>)]) -> String {
    let (w, h, pad) = (480.0, 360.0, 50.0);
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.1.iter().copied())
        .filter(|p| p.0 > 0.0 && p.1 > 0.0)
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if pts.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let sx = |x: f64| pad + (x - x0) / (x1 - x0).max(1e-12) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0).max(1e-12) * (h - 2.0 * pad);
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">"#);
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{title}</text>"#, w / 2.0);
    let _ = writeln!(
        out,
        r#"<path d="M{pad} {pad} L{pad} {b} L{r} {b}" stroke="black" fill="none"/>"#,
        b = h - pad,
        r = w - pad
    );
    for (i, (label, data)) in series.iter().enumerate() {
        let c = colors[i % colors.len()];
        let path: Vec<String> = data
            .iter()
            .filter(|p| p.0 > 0.0 && p.1 > 0.0)
            .enumerate()
            .map(|(j, &(x, y))| format!("{}{:.1} {:.1}", if j == 0 { "M" } else { "L" }, sx(x.log10()), sy(y.log10())))
            .collect();
        let _ = writeln!(out, r#"<path d="{}" stroke="{c}" fill="none" stroke-width="2"/>"#, path.join(" "));
        let _ = writeln!(out, r#"<text x="{}" y="{}" fill="{c}" font-size="12">{label}</text>"#, w - pad - 100.0, pad + 16.0 * (i as f64 + 1.0));
    }
    out.push_str("</svg>\n");
    out
}

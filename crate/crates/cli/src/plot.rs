//! Convergence plot: `|dJ|` (top) and `chi` (bottom) against the iteration
//! index on log axes, with dashed tolerance lines and circles marking
//! multiplier updates.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{CliError, Result};
use crate::trace::TraceRow;

/// Values at or below zero are drawn at this floor.
pub const LOG_FLOOR: f64 = 1e-16;

const WIDTH: f64 = 640.0;
const PANEL_HEIGHT: f64 = 240.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 20.0;
const GAP: f64 = 50.0;

struct Panel<'a> {
    label: &'a str,
    values: Vec<f64>,
    tolerance: f64,
    markers: bool,
}

pub fn render_convergence_plot(trace: &[TraceRow], eps_opt: f64, eps_feas: f64, path: &Path) -> Result<()> {
    let svg = convergence_svg(trace, eps_opt, eps_feas).map_err(|message| CliError::Trace {
        path: path.to_path_buf(),
        message,
    })?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, svg).map_err(|e| CliError::io(path, e))
}

pub fn convergence_svg(trace: &[TraceRow], eps_opt: f64, eps_feas: f64) -> std::result::Result<String, String> {
    if trace.is_empty() {
        return Err("cannot plot an empty trace".into());
    }
    let panels = [
        Panel {
            label: "|ΔJ|",
            values: trace.iter().map(|r| r.delta_j.abs()).collect(),
            tolerance: eps_opt,
            markers: true,
        },
        Panel {
            label: "χ",
            values: trace.iter().map(|r| r.chi).collect(),
            tolerance: eps_feas,
            markers: false,
        },
    ];
    let ks: Vec<f64> = trace.iter().map(|r| r.k as f64).collect();
    let updated: Vec<bool> = trace.iter().map(|r| r.multipliers_updated).collect();

    let height = MARGIN_TOP + 2.0 * PANEL_HEIGHT + GAP + 40.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, panel) in panels.iter().enumerate() {
        let top = MARGIN_TOP + i as f64 * (PANEL_HEIGHT + GAP);
        draw_panel(&mut s, panel, &ks, &updated, top);
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">iteration k</text>"#,
        MARGIN_LEFT + (WIDTH - MARGIN_LEFT - MARGIN_RIGHT) / 2.0,
        height - 8.0
    );
    s.push_str("</svg>\n");
    Ok(s)
}

fn draw_panel(s: &mut String, panel: &Panel, ks: &[f64], updated: &[bool], top: f64) {
    let left = MARGIN_LEFT;
    let right = WIDTH - MARGIN_RIGHT;
    let bottom = top + PANEL_HEIGHT;
    let logs: Vec<f64> = panel.values.iter().map(|&v| v.max(LOG_FLOOR).log10()).collect();
    let tol_log = panel.tolerance.max(LOG_FLOOR).log10();

    let lo = logs.iter().copied().fold(tol_log, f64::min).floor();
    let mut hi = logs.iter().copied().fold(tol_log, f64::max).ceil();
    if hi <= lo {
        hi = lo + 1.0;
    }
    let (k_min, k_max) = (ks[0], ks[ks.len() - 1]);
    let k_span = if k_max > k_min { k_max - k_min } else { 1.0 };
    let x = |k: f64| {
        if k_max > k_min {
            left + (k - k_min) / k_span * (right - left)
        } else {
            (left + right) / 2.0
        }
    };
    let y = |l: f64| bottom - (l - lo) / (hi - lo) * PANEL_HEIGHT;

    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{}" height="{PANEL_HEIGHT}" fill="none" stroke="black"/>"#,
        right - left
    );
    let step = ((hi - lo) / 8.0).ceil().max(1.0);
    let mut e = lo;
    while e <= hi {
        let yy = y(e);
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{yy:.2}" x2="{right}" y2="{yy:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">1e{}</text>"##,
            left - 4.0,
            yy + 4.0,
            e as i64
        );
        e += step;
    }
    for k in ks.iter().copied().filter(|k| *k == k_min || *k == k_max) {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
            x(k),
            bottom + 14.0,
            k
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.2}" transform="rotate(-90 14 {:.2})" text-anchor="middle">{}</text>"#,
        top + PANEL_HEIGHT / 2.0,
        top + PANEL_HEIGHT / 2.0,
        panel.label
    );

    let ty = y(tol_log);
    let _ = writeln!(
        s,
        r##"<line class="tolerance" x1="{left}" y1="{ty:.2}" x2="{right}" y2="{ty:.2}" stroke="#c00" stroke-dasharray="6 4"/>"##
    );

    let points: Vec<String> = ks
        .iter()
        .zip(&logs)
        .map(|(&k, &l)| format!("{:.2},{:.2}", x(k), y(l)))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline class="series" points="{}" fill="none" stroke="#1f4e9c" stroke-width="1.5"/>"##,
        points.join(" ")
    );
    for (&k, &l) in ks.iter().zip(&logs) {
        let _ = writeln!(
            s,
            r##"<rect class="point" x="{:.2}" y="{:.2}" width="3" height="3" fill="#1f4e9c"/>"##,
            x(k) - 1.5,
            y(l) - 1.5
        );
    }
    if panel.markers {
        for ((&k, &l), _) in ks.iter().zip(&logs).zip(updated).filter(|(_, &u)| u) {
            let _ = writeln!(
                s,
                r##"<circle class="update" cx="{:.2}" cy="{:.2}" r="5" fill="none" stroke="#c00"/>"##,
                x(k),
                y(l)
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(k: usize, dj: f64, chi: f64, upd: bool) -> TraceRow {
        TraceRow {
            k,
            delta_j: dj,
            delta_l: dj,
            chi,
            rho: 1.0,
            r: 0.1,
            w: 1.0,
            delta: f64::INFINITY,
            accepted: true,
            multipliers_updated: upd,
        }
    }

    #[test]
    fn single_point_trace() {
        let svg = convergence_svg(&[row(1, 0.3, 0.0, false)], 1e-5, 1e-5).unwrap();
        assert_eq!(svg.matches("class=\"point\"").count(), 2);
        assert_eq!(svg.matches("class=\"tolerance\"").count(), 2);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }

    #[test]
    fn markers_follow_updates() {
        let trace = [
            row(1, 1.0, 1.0, true),
            row(2, -1e-3, 1e-4, false),
            row(3, 0.0, 1e-7, true),
        ];
        let svg = convergence_svg(&trace, 1e-5, 1e-5).unwrap();
        assert_eq!(svg.matches("class=\"update\"").count(), 2);
        let none = trace.map(|mut r| {
            r.multipliers_updated = false;
            r
        });
        assert_eq!(
            convergence_svg(&none, 1e-5, 1e-5).unwrap().matches("<circle").count(),
            0
        );
    }

    #[test]
    fn empty_trace_is_an_error() {
        assert!(convergence_svg(&[], 1e-5, 1e-5).is_err());
    }
}

//! Result persistence: CSV tables, the JSON iteration report, and optional
//! self-contained SVG renderings (line plots and heatmaps).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::Serialize;

use skdv::grid::{SpaceTimeGrid, TimeTrace};
use skdv::solver::IterationReport;

use crate::CliError;

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::validation(format!("cannot create {}: {e}", dir.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)
        .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))
}

/// Serializable mirror of the solver's iteration report.
#[derive(Serialize)]
pub struct ReportJson {
    pub iterates: usize,
    pub residual_history: Vec<f64>,
    pub contraction_ratio: f64,
    pub trace_errors: Vec<f64>,
    pub pde_residuals: Vec<f64>,
    pub m1: f64,
    pub m2: f64,
    pub t_local: f64,
    pub halvings: usize,
    pub converged: bool,
    pub v_imag_fraction: f64,
}

impl From<&IterationReport> for ReportJson {
    fn from(r: &IterationReport) -> Self {
        ReportJson {
            iterates: r.iterates,
            residual_history: r.residual_history.clone(),
            contraction_ratio: r.contraction_ratio,
            trace_errors: r.trace_errors.clone(),
            pde_residuals: r.pde_residuals.clone(),
            m1: r.m1,
            m2: r.m2,
            t_local: r.t_local,
            halvings: r.halvings,
            converged: r.converged,
            v_imag_fraction: r.v_imag_fraction,
        }
    }
}

pub fn write_report(dir: &Path, report: &IterationReport) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(&ReportJson::from(report))
        .expect("report serialization cannot fail");
    write_text(&dir.join("report.json"), &(json + "\n"))
}

/// Writes one half-line field as `x,t,re,im` rows (rows: half-line nodes in
/// restriction order, columns: time samples).
pub fn write_field_csv(
    path: &Path,
    grid: &SpaceTimeGrid,
    xs: &[f64],
    field: &Array2<C64>,
) -> Result<(), CliError> {
    let mut s = String::with_capacity(32 * field.len());
    s.push_str("x,t,re,im\n");
    for (j, &x) in xs.iter().enumerate() {
        for i in 0..grid.nt {
            let z = field[(j, i)];
            writeln!(s, "{x:.9e},{:.9e},{:.12e},{:.12e}", grid.t_at(i), z.re, z.im).unwrap();
        }
    }
    write_text(path, &s)
}

/// Writes named boundary traces as long-format `name,t,re,im` rows.
pub fn write_traces_csv(
    path: &Path,
    grid: &SpaceTimeGrid,
    traces: &[(&str, &TimeTrace)],
) -> Result<(), CliError> {
    let mut s = String::new();
    s.push_str("name,t,re,im\n");
    for (name, tr) in traces {
        for (i, z) in tr.values.iter().enumerate() {
            writeln!(s, "{name},{:.9e},{:.12e},{:.12e}", grid.t_at(i), z.re, z.im).unwrap();
        }
    }
    write_text(path, &s)
}

fn color_diverging(v: f64) -> (u8, u8, u8) {
    // blue (-1) .. white (0) .. red (+1)
    let v = v.clamp(-1.0, 1.0);
    if v < 0.0 {
        let t = 1.0 + v;
        ((255.0 * t) as u8, (255.0 * t) as u8, 255)
    } else {
        let t = 1.0 - v;
        (255, (255.0 * t) as u8, (255.0 * t) as u8)
    }
}

/// Self-contained SVG heatmap of the real part of a half-line field,
/// downsampled to at most 160 cells per axis.
pub fn write_heatmap_svg(
    path: &Path,
    grid: &SpaceTimeGrid,
    xs: &[f64],
    field: &Array2<C64>,
    title: &str,
) -> Result<(), CliError> {
    let (nj, ni) = (xs.len(), grid.nt);
    let step_j = nj.div_ceil(160);
    let step_i = ni.div_ceil(160);
    let cols = nj.div_ceil(step_j);
    let rows = ni.div_ceil(step_i);
    let cell = 4.0;
    let (w, h) = (cols as f64 * cell + 80.0, rows as f64 * cell + 60.0);
    let vmax = field.iter().map(|z| z.re.abs()).fold(0.0f64, f64::max).max(1e-300);
    let mut s = String::new();
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">"
    )
    .unwrap();
    writeln!(s, "<text x=\"40\" y=\"20\" font-family=\"monospace\" font-size=\"13\">{title} (|max| = {vmax:.3e})</text>").unwrap();
    for cj in 0..cols {
        for ci in 0..rows {
            let z = field[(cj * step_j, ci * step_i)].re / vmax;
            let (r, g, b) = color_diverging(z);
            writeln!(
                s,
                "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{cell}\" height=\"{cell}\" fill=\"rgb({r},{g},{b})\"/>",
                40.0 + cj as f64 * cell,
                30.0 + (rows - 1 - ci) as f64 * cell
            )
            .unwrap();
        }
    }
    writeln!(
        s,
        "<text x=\"40\" y=\"{:.0}\" font-family=\"monospace\" font-size=\"11\">x: {:.2} .. {:.2}, t: 0 .. {:.2}</text>",
        h - 10.0,
        xs[0],
        xs[xs.len() - 1],
        grid.t_max
    )
    .unwrap();
    writeln!(s, "</svg>").unwrap();
    write_text(path, &s)
}

/// Self-contained SVG line plot of the real parts of named traces.
pub fn write_traces_svg(
    path: &Path,
    grid: &SpaceTimeGrid,
    traces: &[(&str, &TimeTrace)],
) -> Result<(), CliError> {
    let (w, h) = (640.0, 360.0);
    let (ml, mr, mt, mb) = (50.0, 20.0, 30.0, 40.0);
    let vmax = traces
        .iter()
        .flat_map(|(_, tr)| tr.values.iter().map(|z| z.re.abs()))
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let colors = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"];
    let mut s = String::new();
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">"
    )
    .unwrap();
    writeln!(
        s,
        "<rect x=\"{ml}\" y=\"{mt}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#444\"/>",
        w - ml - mr,
        h - mt - mb
    )
    .unwrap();
    for (idx, (name, tr)) in traces.iter().enumerate() {
        let color = colors[idx % colors.len()];
        let mut pts = String::new();
        for (i, z) in tr.values.iter().enumerate() {
            let px = ml + (w - ml - mr) * grid.t_at(i) / grid.t_max;
            let py = mt + (h - mt - mb) * (0.5 - 0.5 * z.re / vmax);
            write!(pts, "{px:.1},{py:.1} ").unwrap();
        }
        writeln!(
            s,
            "<polyline points=\"{pts}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\"/>"
        )
        .unwrap();
        writeln!(
            s,
            "<text x=\"{:.0}\" y=\"{:.0}\" font-family=\"monospace\" font-size=\"11\" fill=\"{color}\">{name}</text>",
            ml + 8.0 + 90.0 * (idx as f64),
            h - 12.0
        )
        .unwrap();
    }
    writeln!(
        s,
        "<text x=\"{ml}\" y=\"18\" font-family=\"monospace\" font-size=\"12\">boundary traces, re; vertical scale +-{vmax:.3e}</text>"
    )
    .unwrap();
    writeln!(s, "</svg>").unwrap();
    write_text(path, &s)
}

//! `surface.ply`, `fields.csv` and `report.json`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::mesh::slice_mesh;
use super::report::DiagnosticsReport;
use super::{GluedHypersurface, SurfaceParams};
use crate::error::{GluerError, Result};
use crate::matcher::{MatchConfig, OuterIterate};
use crate::planar::{PlanarField, PlanarGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub n: usize,
    pub params: SurfaceParams,
    pub period_vector: Vec<f64>,
    pub tilt_angle: f64,
    pub c0: f64,
    pub config: MatchConfig,
    pub outer_log: Vec<OuterIterate>,
    pub diagnostics: DiagnosticsReport,
}

impl RunReport {
    pub fn new(s: &GluedHypersurface, config: &MatchConfig, diagnostics: DiagnosticsReport) -> Self {
        RunReport {
            version: env!("CARGO_PKG_VERSION").into(),
            n: s.n,
            params: s.params,
            period_vector: s.period_vector.0.clone(),
            tilt_angle: s.tilt_angle,
            c0: s.state.c0,
            config: *config,
            outer_log: s.state.iteration_log.clone(),
            diagnostics,
        }
    }
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> GluerError + '_ {
    move |source| GluerError::Io { path: path.to_path_buf(), source }
}

pub fn write_report<T: Serialize>(report: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    fs::write(path, text).map_err(io(path))
}

pub fn read_report(path: &Path) -> Result<RunReport> {
    let text = fs::read_to_string(path).map_err(io(path))?;
    Ok(serde_json::from_str(&text)?)
}

/// ASCII PLY of the slice mesh; vertices only for `n > 3`.
pub fn ply_text(s: &GluedHypersurface) -> String {
    let mesh = slice_mesh(s);
    let faces = if s.n == 3 { &mesh.faces[..] } else { &[][..] };
    let mut out = String::new();
    let _ = writeln!(out, "ply\nformat ascii 1.0\ncomment slice x3 = 0 of one period, n = {}", s.n);
    let _ = writeln!(out, "element vertex {}\nproperty double x\nproperty double y\nproperty double z", mesh.vertices.len());
    if !faces.is_empty() {
        let _ = writeln!(out, "element face {}\nproperty list uchar int vertex_indices", faces.len());
    }
    out.push_str("end_header\n");
    for v in &mesh.vertices {
        let _ = writeln!(out, "{} {} {}", v[0], v[1], v[2]);
    }
    for f in faces {
        let _ = write!(out, "{}", f.len());
        for i in f {
            let _ = write!(out, " {i}");
        }
        out.push('\n');
    }
    out
}

const HEADER: &str = "piece,i,k,a,b,value,correction";

/// Plane rows `(x1, r, ubar, v)`, then neck rows `(t, theta, w, v)`.
pub fn fields_text(s: &GluedHypersurface) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    let (u, v) = (&s.planar.ubar, &s.planar.v);
    let g = &u.grid;
    for i in 0..g.ntau {
        for k in 0..g.nsigma {
            let (x, r) = g.node(i, k);
            let _ = writeln!(out, "plane,{i},{k},{x},{r},{},{}", u.at(i, k), v.at(i, k));
        }
    }
    let (w, nv) = (&s.neck.w_total, &s.neck.v);
    for (i, t) in w.grid.t_nodes.iter().enumerate() {
        for (k, th) in w.grid.theta.nodes.iter().enumerate() {
            let _ = writeln!(out, "neck,{i},{k},{t},{th},{},{}", w.at(i, k), nv.at(i, k));
        }
    }
    out
}

/// Planar `(ubar, v)` back from `fields.csv` on a known grid.
pub fn read_fields_csv(path: &Path, grid: &PlanarGrid, mu: f64, nu: f64) -> Result<(PlanarField, PlanarField)> {
    let text = fs::read_to_string(path).map_err(io(path))?;
    let bad = |line: usize, why: &str| GluerError::Config { field: format!("{}:{line}", path.display()), reason: why.into() };
    let mut lines = text.lines();
    if lines.next() != Some(HEADER) {
        return Err(bad(1, "unexpected header"));
    }
    let mut u = PlanarField { mu, nu, ..PlanarField::zeros(grid) };
    let mut v = u.clone();
    let mut seen = 0;
    for (ln, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 7 {
            return Err(bad(ln + 2, "expected 7 columns"));
        }
        if cols[0] != "plane" {
            continue;
        }
        let idx = |c: &str| c.parse::<usize>().map_err(|_| bad(ln + 2, "bad index"));
        let num = |c: &str| c.parse::<f64>().map_err(|_| bad(ln + 2, "bad number"));
        let (i, k) = (idx(cols[1])?, idx(cols[2])?);
        if i >= grid.ntau || k >= grid.nsigma {
            return Err(bad(ln + 2, "index outside the grid"));
        }
        u.values[i * grid.nsigma + k] = num(cols[5])?;
        v.values[i * grid.nsigma + k] = num(cols[6])?;
        seen += 1;
    }
    if seen != grid.len() {
        return Err(bad(0, "plane rows do not cover the grid"));
    }
    Ok((u, v))
}

/// Writes the three artifacts into `dir`, creating it if needed.
pub fn export_artifacts(s: &GluedHypersurface, report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io(dir))?;
    let ply = dir.join("surface.ply");
    fs::write(&ply, ply_text(s)).map_err(io(&ply))?;
    let csv = dir.join("fields.csv");
    fs::write(&csv, fields_text(s)).map_err(io(&csv))?;
    let json = dir.join("report.json");
    write_report(report, &json)?;
    Ok(vec![ply, csv, json])
}

use std::sync::OnceLock;

use riemann_gluer::assembly::export::{fields_text, ply_text};
use riemann_gluer::assembly::*;
use riemann_gluer::geometry::{Dimension, ScaleParameters};
use riemann_gluer::matcher::{MatchConfig, Matcher};
use riemann_gluer::planar::planar_weighted_norm;

struct Run {
    surface: GluedHypersurface,
    report: RunReport,
}

fn run() -> &'static Run {
    static RUN: OnceLock<Run> = OnceLock::new();
    RUN.get_or_init(|| {
        let s = ScaleParameters::new(Dimension::new(3).unwrap(), 1e-3).unwrap();
        let config = MatchConfig::default();
        let out = Matcher::new(s, config).unwrap().solve().unwrap();
        let surface = assemble(&out).unwrap();
        let diag = residual_report(&surface).unwrap();
        let report = RunReport::new(&surface, &config, diag);
        Run { surface, report }
    })
}

#[test]
fn period_is_symmetric_and_has_one_tunnel() {
    let Run { surface: s, report } = run();
    let d = &report.diagnostics;
    let ds = s.state.scales.data_scale();
    assert!(s.params.h_eps > 0.0);
    assert_eq!(s.period_vector.0, vec![1.0, 0.0, 0.0, s.params.h_eps]);
    assert!(d.invariance_defect < 1e-10, "{}", d.invariance_defect);
    assert!(d.interface_gap < 1e-8 * ds && d.periodicity_residual < 1e-8 * ds);
    assert_eq!(d.tunnels, Some(1));
    assert!(d.self_intersection_min_gap > 0.0);
    assert!(d.failures.is_empty(), "{:?}", d.failures);
}

#[test]
fn translated_copy_meets_the_upper_ring() {
    let s = &run().surface;
    // the upper neck ring of one period closes onto the plane ring about -x*
    // of the copy shifted by d
    let next = s.translated(1.0);
    let (nt, m) = s.neck_shape;
    let (ntau, ns) = s.plane_shape;
    let mean = |pts: Vec<&Vec<f64>>| {
        let k = pts.len() as f64;
        (pts.iter().map(|p| p[0]).sum::<f64>() / k, pts.iter().map(|p| p[3]).sum::<f64>() / k)
    };
    let top = mean((0..m).map(|k| &s.neck_samples[(nt - 1) * m + k].point.0).collect());
    let row = if next.plane_samples[0].point.0[0] < next.plane_samples[(ntau - 1) * ns].point.0[0] { 0 } else { ntau - 1 };
    let ring = mean((0..ns).map(|k| &next.plane_samples[row * ns + k].point.0).collect());
    let r = s.state.scales.r_eps * s.placement.scale;
    assert!((top.0 - ring.0).abs() < 0.5 * r && (top.1 - ring.1).abs() < 0.5 * r, "{top:?} {ring:?}");
}

#[test]
fn report_json_round_trips() {
    let r = &run().report;
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("report.json");
    write_report(r, &p).unwrap();
    assert_eq!(&read_report(&p).unwrap(), r);
}

#[test]
fn ply_counts_match_the_sampling() {
    let s = &run().surface;
    let text = ply_text(s);
    let (ntau, ns) = s.plane_shape;
    let (nt, m) = s.neck_shape;
    let nv = 2 * (ntau * ns + nt * m);
    assert!(text.contains(&format!("element vertex {nv}\n")));
    let body = text.split("end_header\n").nth(1).unwrap();
    assert!(body.lines().count() > nv);
}

#[test]
fn fields_csv_reproduces_weighted_norms() {
    let Run { surface: s, report } = run();
    let dir = tempfile::tempdir().unwrap();
    let files = export_artifacts(s, report, dir.path()).unwrap();
    assert_eq!(files.len(), 3);
    let csv = dir.path().join("fields.csv");
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), fields_text(s));
    let v = &s.planar.v;
    let (_, back) = read_fields_csv(&csv, &v.grid, v.mu, v.nu).unwrap();
    let (a, b) = (planar_weighted_norm(v), planar_weighted_norm(&back));
    assert!((a - b).abs() <= 1e-15 * a, "{a} {b}");
}

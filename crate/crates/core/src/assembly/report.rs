//! Global diagnostics of an assembled period.

use serde::{Deserialize, Serialize};

use super::levelset::{level_set_asphericity, LevelSetMode};
use super::mesh::slice_mesh;
use super::GluedHypersurface;
use crate::error::Result;
use crate::geometry::normal_graph::{fit_slope, mean_curvature_normal_graph};
use crate::geometry::Catenoid;
use crate::neck::{NeckConfig, NeckContext, NeckSolution};
use crate::planar::{apply_laplacian, xi_nonlinearity, ExteriorExtension, PlanarConfig, PlanarContext, PlanarField, PlanarSolution};
use crate::spectral::ThetaGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

fn named(name: &str, value: f64) -> NamedValue {
    NamedValue { name: name.into(), value }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub module: String,
    pub invariant: String,
    pub measured: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    /// Sup of the value and normal-derivative jumps across `|y| = r_eps`.
    pub c1_jump: f64,
    pub c1_jump_over_data_scale: f64,
    pub h_residual_sup: f64,
    /// `H` residuals of each piece at the run resolution and at half of it,
    /// and the resulting log2 slopes.
    pub h_residuals: Vec<NamedValue>,
    pub contraction_factors: Vec<NamedValue>,
    pub decay_fits: Vec<NamedValue>,
    pub asphericity: f64,
    pub self_intersection_min_gap: f64,
    pub h_eps: f64,
    pub invariance_defect: f64,
    pub interface_gap: f64,
    pub periodicity_residual: f64,
    pub tunnels: Option<i64>,
    pub end_slope_residual: Option<f64>,
    pub outer_norm_over_bound: f64,
    pub failures: Vec<Failure>,
}

/// Sup of `|H|` of the neck immersion.
pub fn neck_h_residual(sol: &NeckSolution) -> Result<f64> {
    let cat = Catenoid::new(sol.scales.n)?;
    Ok(mean_curvature_normal_graph(&cat, &sol.scales, &sol.w_total)?.values.iter().fold(0.0, |a, v| a.max(v.abs())))
}

/// Sup of `|Delta u - Xi(u)| / W` over interior nodes with `|x| < 3` away
/// from the excised balls.
pub fn planar_h_residual(ubar: &PlanarField) -> f64 {
    let g = &ubar.grid;
    let res = apply_laplacian(ubar).sub(&xi_nonlinearity(ubar));
    let d = crate::planar::cartesian_derivatives(ubar);
    let mut e: f64 = 0.0;
    for i in 1..g.ntau - 1 {
        for k in 0..g.nsigma {
            let (x, r) = g.node(i, k);
            let dist = (x - 1.0).hypot(r).min((x + 1.0).hypot(r));
            if x.hypot(r) < 3.0 && dist > 2.0 * g.r_eps {
                let [w1, wr, ..] = d[i * g.nsigma + k];
                e = e.max(res.at(i, k).abs() / (1.0 + w1 * w1 + wr * wr).sqrt());
            }
        }
    }
    e
}

fn coarse_neck(sol: &NeckSolution) -> Result<NeckSolution> {
    let c = sol.config;
    // both directions: the theta stencil has its own second-order floor
    NeckContext::new(sol.scales, NeckConfig { ht: 2.0 * c.ht, theta_nodes: c.theta_nodes / 2, ..c })?.solve(&sol.h_perp)
}

fn coarse_planar(sol: &PlanarSolution) -> Result<PlanarSolution> {
    PlanarContext::new(sol.scales, PlanarConfig { nsigma: sol.config.nsigma / 2, ..sol.config })?.solve(sol.params, &sol.h_bar)
}

/// Minimum over sampled pairs of nearby sheets and the neck of their
/// separation, in the unplaced frame.
fn min_gap(s: &GluedHypersurface) -> f64 {
    let t = s.params.t;
    let u = &s.planar.ubar;
    let g = &u.grid;
    let sheet = |k: f64, x1: f64, r: f64| u.eval(x1 - 2.0 * k, r).ok().map(|v| v + 2.0 * k * t);
    let mut gap = f64::INFINITY;
    for i in 0..g.ntau {
        for k in 0..g.nsigma {
            let (x, r) = g.node(i, k);
            if x.hypot(r) < 6.0 {
                if let Some(up) = sheet(1.0, x, r) {
                    gap = gap.min((up - u.at(i, k)).abs());
                }
            }
        }
    }
    let c = s.neck.scales.catenoid_scale();
    let cat = Catenoid::new(s.neck.scales.n).expect("dimension of a solved neck");
    let w = &s.neck.w_total;
    for (i, &tt) in w.grid.t_nodes.iter().enumerate() {
        for (k, &th) in w.grid.theta.nodes.iter().enumerate() {
            let (p, _) = crate::geometry::normal_graph::perturbed_point(&cat, &s.neck.scales, tt, th, w.at(i, k));
            let (x1, r, z) = (1.0 + c * p[0], c * p[1], t + c * p[2]);
            gap = gap.min(2.0 * c * p[0].hypot(p[1]));
            for kk in [-1.0, 2.0] {
                if let Some(h) = sheet(kk, x1, r) {
                    gap = gap.min((z - h).abs());
                }
            }
        }
    }
    gap * s.placement.scale
}

/// Log-slope of `|u - slope x1|` at radii 8..64 along a fixed direction.
fn end_decay(s: &GluedHypersurface) -> Option<f64> {
    let radii = [8.0, 16.0, 32.0, 64.0];
    let vals: Option<Vec<f64>> =
        radii.iter().map(|&q: &f64| s.planar.ubar.eval(0.8 * q, 0.6 * q).ok().map(|v| (v - s.params.end_slope * 0.8 * q).abs())).collect();
    vals.filter(|v| v.iter().all(|x| *x > 0.0)).map(|v| fit_slope(&radii, &v))
}

pub fn residual_report(s: &GluedHypersurface) -> Result<DiagnosticsReport> {
    let st = &s.state;
    let ds = st.scales.data_scale();
    let theta = ThetaGrid::new(st.scales.n, s.planar.config.theta_nodes, s.planar.config.j_max)?;

    let hn = neck_h_residual(&s.neck)?;
    let hp = planar_h_residual(&s.planar.ubar);
    let hn2 = neck_h_residual(&coarse_neck(&s.neck)?)?;
    let hp2 = planar_h_residual(&coarse_planar(&s.planar)?.ubar);
    let (sn, sp) = ((hn2 / hn).log2(), (hp2 / hp).log2());
    let h_residuals = vec![
        named("neck", hn),
        named("neck_coarse", hn2),
        named("neck_slope", sn),
        named("planar", hp),
        named("planar_coarse", hp2),
        named("planar_slope", sp),
    ];

    let neck_ratio = st.iteration_log.iter().map(|l| l.neck_max_ratio).fold(0.0, f64::max);
    let planar_ratio = st.iteration_log.iter().map(|l| l.planar_max_ratio).fold(0.0, f64::max);
    let contraction_factors = vec![named("neck", neck_ratio), named("planar", planar_ratio), named("outer", st.max_ratio())];

    let mut decay_fits = Vec::new();
    if let Some(p) = ExteriorExtension::new(&s.planar.h_bar, &theta).remainder_decay {
        decay_fits.push(named("hat_remainder", p));
    }
    if let Some(p) = end_decay(s) {
        decay_fits.push(named("end_minus_slope", p));
    }

    let asphericity = level_set_asphericity(st.scales.n, st.scales.epsilon, LevelSetMode::Solved(&s.planar), 64)?;
    let gap = min_gap(s);
    let tunnels = slice_mesh(s).quotient_topology().tunnels();
    let c1 = st.mismatch.sup();
    let outer = st.norm(&theta) / (2.0 * st.c0 * ds);
    let invariance = s.invariance_defect();
    let end_slope_residual = s.end_slope_residual(4.0);

    let tol = 1e-8 * ds * s.placement.scale;
    let mut failures = Vec::new();
    let mut check = |module: &str, invariant: &str, measured: f64, threshold: f64, ok: bool| {
        if !ok {
            failures.push(Failure { module: module.into(), invariant: invariant.into(), measured, threshold });
        }
    };
    check("gluing_matcher", "c1_jump < 1e-8 eps r_eps^2", c1, 1e-8 * ds, c1 < 1e-8 * ds);
    check("gluing_matcher", "norm <= 2 c0 eps r_eps^2", outer, 1.0, outer <= 1.0);
    for c in &contraction_factors {
        check("gluing_matcher", &format!("{} contraction <= 0.6", c.name), c.value, 0.6, c.value <= 0.6);
    }
    check("assembly_export", "h_eps > 0", s.params.h_eps, 0.0, s.params.h_eps > 0.0);
    check("assembly_export", "invariance under G", invariance, 1e-10, invariance < 1e-10);
    check("assembly_export", "interface gap", s.interface_gap, tol, s.interface_gap < tol);
    check("assembly_export", "periodicity residual", s.periodicity_residual, tol, s.periodicity_residual < tol);
    check("assembly_export", "one tunnel", tunnels.unwrap_or(-1) as f64, 1.0, tunnels == Some(1));
    check("assembly_export", "self intersection gap > 0", gap, 0.0, gap > 0.0);
    let slope = end_slope_residual.map_or(f64::MAX, f64::abs);
    check("assembly_export", "straightened end slope", slope, 1e-8, slope < 1e-8);
    check("assembly_export", "neck H residual order 2", sn, 2.0, (sn - 2.0).abs() < 0.3);
    check("assembly_export", "planar H residual order 2", sp, 2.0, (sp - 2.0).abs() < 0.3);
    check("assembly_export", "level set asphericity > 1e-3", asphericity, 1e-3, asphericity > 1e-3);

    Ok(DiagnosticsReport {
        c1_jump: c1,
        c1_jump_over_data_scale: c1 / ds,
        h_residual_sup: hn.max(hp),
        h_residuals,
        contraction_factors,
        decay_fits,
        asphericity,
        self_intersection_min_gap: gap,
        h_eps: s.params.h_eps,
        invariance_defect: invariance,
        interface_gap: s.interface_gap,
        periodicity_residual: s.periodicity_residual,
        tunnels,
        end_slope_residual,
        outer_norm_over_bound: outer,
        failures,
    })
}

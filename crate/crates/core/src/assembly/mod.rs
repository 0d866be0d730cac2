//! One period of the hypersurface: the planar piece and the neck placed in
//! `R^(n+1)`, the end straightened, and the translation `d_eps`.
//!
//! Everything is axisymmetric about the `e1` axis, so samples live in the
//! meridian slice `(x1, |x_bar|, x^(n+1))`, stored along `e2`.

pub mod export;
pub mod levelset;
pub mod mesh;
pub mod report;

use serde::{Deserialize, Serialize};

use crate::error::{GluerError, Result};
use crate::geometry::normal_graph::perturbed_point;
use crate::geometry::{AmbientPoint, Catenoid, ScaleParameters};
use crate::matcher::{MatchOutcome, MatchState};
use crate::neck::{ring_heights, NeckSolution};
use crate::planar::model::{hat_value, model_value};
use crate::planar::PlanarSolution;

pub use export::{export_artifacts, read_fields_csv, read_report, write_report, RunReport};
pub use levelset::{circle_analogue_asphericity, level_set_asphericity, LevelSetMode};
pub use mesh::{slice_mesh, SliceMesh, Topology};
pub use report::{residual_report, DiagnosticsReport, Failure, NamedValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Piece {
    Neck,
    Plane,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub piece: Piece,
    pub i: usize,
    pub k: usize,
    pub point: AmbientPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceParams {
    pub epsilon: f64,
    pub rho: f64,
    pub t: f64,
    /// Slope `rho - 2^(1-n) eps` of the end before straightening.
    pub end_slope: f64,
    pub h_eps: f64,
}

/// Rotation by `angle` in the `(e1, e_(n+1))` plane followed by a dilation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub angle: f64,
    pub scale: f64,
}

impl Placement {
    pub fn apply(&self, x1: f64, z: f64) -> (f64, f64) {
        let (s, c) = self.angle.sin_cos();
        (self.scale * (c * x1 - s * z), self.scale * (s * x1 + c * z))
    }

    /// Slice point `(x1, r, z)` to `R^(n+1)`.
    pub fn point(&self, n: usize, x1: f64, r: f64, z: f64) -> AmbientPoint {
        let (a, b) = self.apply(x1, z);
        let mut p = vec![0.0; n + 1];
        p[0] = a;
        p[1] = self.scale * r;
        p[n] = b;
        AmbientPoint(p)
    }
}

#[derive(Debug, Clone)]
pub struct GluedHypersurface {
    pub n: usize,
    pub params: SurfaceParams,
    pub period_vector: AmbientPoint,
    pub tilt_angle: f64,
    pub placement: Placement,
    /// Row-major `(t, theta)` and `(tau, sigma)` samples.
    pub neck_samples: Vec<Sample>,
    pub plane_samples: Vec<Sample>,
    pub neck_shape: (usize, usize),
    pub plane_shape: (usize, usize),
    /// Sup of the height gap between the lower neck ring and the plane at `x*`.
    pub interface_gap: f64,
    /// Same for the upper neck ring against the translated ring at `-x*`.
    pub periodicity_residual: f64,
    pub state: MatchState,
    pub neck: NeckSolution,
    pub planar: PlanarSolution,
}

/// `(1, t)` and its image `(-1, -t)` under `(x1, z) -> (-x1, -z)`; their
/// difference is the period before straightening.
fn raw_period(t: f64) -> (f64, f64) {
    let c = (1.0, t);
    let g = (-c.0, -c.1);
    (c.0 - g.0, c.1 - g.1)
}

/// Height of the planar piece on the sphere `|x - c e1| = r_eps`, where the
/// correction `v` vanishes.
pub fn plane_ring_height(planar: &PlanarSolution, centre: f64, theta: f64) -> Result<f64> {
    let s = &planar.scales;
    let th = planar_theta(planar)?;
    let (x1, r) = (centre + s.r_eps * theta.cos(), s.r_eps * theta.sin());
    Ok(model_value(s, planar.params, x1, r).0 + hat_value(&planar.h_bar, &th, s.r_eps, x1, r)?.0)
}

fn planar_theta(planar: &PlanarSolution) -> Result<crate::spectral::ThetaGrid> {
    crate::spectral::ThetaGrid::new(planar.scales.n, planar.config.theta_nodes, planar.config.j_max)
}

/// Neck sample `(x1, r, z)` before placement, centred at `(1, t)`.
fn neck_slice_point(cat: &Catenoid, scales: &ScaleParameters, neck: &NeckSolution, t_off: f64, i: usize, k: usize) -> (f64, f64, f64) {
    let w = &neck.w_total;
    let (p, _) = perturbed_point(cat, scales, w.grid.t_nodes[i], w.grid.theta.nodes[k], w.at(i, k));
    let c = scales.catenoid_scale();
    (1.0 + c * p[0], c * p[1], t_off + c * p[2])
}

pub fn assemble(outcome: &MatchOutcome) -> Result<GluedHypersurface> {
    let MatchOutcome { state, neck, planar } = outcome;
    let scales = state.scales;
    let n = scales.n.get();
    let nf = n as f64;
    let t = state.t_offset;
    let end_slope = state.rho - 2f64.powf(1.0 - nf) * scales.epsilon;
    let tilt_angle = -end_slope.atan();
    let (d1, dz) = Placement { angle: tilt_angle, scale: 1.0 }.apply(raw_period(t).0, raw_period(t).1);
    let h_eps = dz / d1;
    if !(h_eps > 0.0) {
        return Err(GluerError::NonPositivePeriod(h_eps));
    }
    let placement = Placement { angle: tilt_angle, scale: 1.0 / d1 };
    let mut period = vec![0.0; n + 1];
    period[0] = 1.0;
    period[n] = h_eps;

    let cat = Catenoid::new(scales.n)?;
    let g = &neck.w_total.grid;
    let (nt, m) = (g.nt(), g.nth());
    let mut neck_samples = Vec::with_capacity(nt * m);
    for i in 0..nt {
        for k in 0..m {
            let (x1, r, z) = neck_slice_point(&cat, &scales, neck, t, i, k);
            neck_samples.push(Sample { piece: Piece::Neck, i, k, point: placement.point(n, x1, r, z) });
        }
    }
    let pg = &planar.ubar.grid;
    let mut plane_samples = Vec::with_capacity(pg.len());
    for i in 0..pg.ntau {
        for k in 0..pg.nsigma {
            let (x1, r) = pg.node(i, k);
            plane_samples.push(Sample { piece: Piece::Plane, i, k, point: placement.point(n, x1, r, planar.ubar.at(i, k)) });
        }
    }

    let lower = ring_heights(neck, scales.r_eps, false)?;
    let upper = ring_heights(neck, scales.r_eps, true)?;
    let (mut gap, mut per) = (0.0f64, 0.0f64);
    for (k, th) in g.theta.nodes.iter().enumerate() {
        gap = gap.max((t + lower[k] - plane_ring_height(planar, 1.0, *th)?).abs());
        per = per.max((t + upper[k] - (plane_ring_height(planar, -1.0, *th)? + raw_period(t).1)).abs());
    }

    Ok(GluedHypersurface {
        n,
        params: SurfaceParams { epsilon: scales.epsilon, rho: state.rho, t, end_slope, h_eps },
        period_vector: AmbientPoint(period),
        tilt_angle,
        placement,
        neck_samples,
        plane_samples,
        neck_shape: (nt, m),
        plane_shape: (pg.ntau, pg.nsigma),
        interface_gap: gap * placement.scale,
        periodicity_residual: per * placement.scale,
        state: state.clone(),
        neck: neck.clone(),
        planar: planar.clone(),
    })
}

/// `(x, x^(n+1)) -> (-x1, x_bar, -x^(n+1))`.
pub fn generator(p: &AmbientPoint) -> AmbientPoint {
    let mut q = p.0.clone();
    let n = q.len() - 1;
    q[0] = -q[0];
    q[n] = -q[n];
    AmbientPoint(q)
}

impl GluedHypersurface {
    pub fn translate(&self, p: &AmbientPoint, k: f64) -> AmbientPoint {
        AmbientPoint(p.0.iter().zip(&self.period_vector.0).map(|(a, d)| a + k * d).collect())
    }

    /// Copy of the samples shifted by `k d_eps`.
    pub fn translated(&self, k: f64) -> GluedHypersurface {
        let mut out = self.clone();
        for s in out.neck_samples.iter_mut().chain(out.plane_samples.iter_mut()) {
            s.point = self.translate(&s.point, k);
        }
        out
    }

    /// Sup over samples of the distance from `G p` to the matching sample of
    /// the surface (the mirrored plane node, or the mirrored neck node of the
    /// copy shifted by `-d_eps`), relative to `1 + |p|`.
    pub fn invariance_defect(&self) -> f64 {
        let dist = |a: &AmbientPoint, b: &AmbientPoint| a.0.iter().zip(&b.0).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let (nt, m) = self.neck_shape;
        let (ntau, ns) = self.plane_shape;
        let mut worst: f64 = 0.0;
        for s in &self.plane_samples {
            let img = &self.plane_samples[(ntau - 1 - s.i) * ns + s.k].point;
            worst = worst.max(dist(&generator(&s.point), img) / (1.0 + s.point.norm()));
        }
        for s in &self.neck_samples {
            let img = self.translate(&self.neck_samples[(nt - 1 - s.i) * m + (m - 1 - s.k)].point, -1.0);
            worst = worst.max(dist(&generator(&s.point), &img) / (1.0 + s.point.norm()));
        }
        worst
    }

    /// Far-field slope of the straightened end: least squares of height
    /// against `x1` and the dipole `x1 |x|^(-n)` over plane samples with
    /// `|x| > r0`. Samples only reach `|x|` of a few tens, where the dipole
    /// still dominates any slope below 1e-6.
    pub fn end_slope_residual(&self, r0: f64) -> Option<f64> {
        let n = self.n;
        let mut a = [[0.0; 2]; 2];
        let mut b = [0.0; 2];
        for s in &self.plane_samples {
            let p = &s.point.0;
            let rad = p[0].hypot(p[1]);
            if rad > r0 {
                let f = [p[0], p[0] * rad.powi(-(n as i32))];
                for i in 0..2 {
                    b[i] += f[i] * p[n];
                    for j in 0..2 {
                        a[i][j] += f[i] * f[j];
                    }
                }
            }
        }
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        (det > 0.0).then(|| (b[0] * a[1][1] - b[1] * a[0][1]) / det)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn period_from_the_generator() {
        assert_eq!(raw_period(0.25), (2.0, 0.5));
        // no tilt: h_eps = t
        let p = Placement { angle: 0.0, scale: 0.5 };
        let (a, b) = p.apply(2.0, 0.5);
        assert_eq!((a, b), (1.0, 0.25));
    }

    #[test]
    fn straightening_levels_a_sloped_line() {
        let s: f64 = -2.5e-4;
        let p = Placement { angle: -s.atan(), scale: 1.0 };
        let (_, z) = p.apply(10.0, 10.0 * s);
        assert!(z.abs() < 1e-15);
        // the generator commutes with the placement
        let q = p.point(3, 0.3, 0.2, 0.1);
        let gq = p.point(3, -0.3, 0.2, -0.1);
        for (a, b) in generator(&q).0.iter().zip(&gq.0) {
            assert!((a - b).abs() < 1e-16);
        }
    }
}

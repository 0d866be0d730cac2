//! The lower end of the scaled neck as a vertical graph over the annulus
//! `r_eps / 2 <= |x| <= r_eps`.

use serde::{Deserialize, Serialize};

use super::solve::NeckSolution;
use crate::cylinder::{derivative_sups, CylinderField};
use crate::error::{GluerError, Result};
use crate::geometry::normal_graph::perturbed_point;
use crate::geometry::{Catenoid, ScaleParameters};
use crate::planar::interior_extension;
use crate::spectral::{BoundaryData, ThetaGrid};

/// Radii `r_eps/2 .. r_eps` (uniform, last = `r_eps`) times the theta nodes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnulusGrid {
    pub radii: Vec<f64>,
    #[serde(skip)]
    pub theta: Option<ThetaGrid>,
    pub nodes: Vec<f64>,
}

impl AnnulusGrid {
    pub fn new(r_eps: f64, nr: usize, theta: &ThetaGrid) -> Result<Self> {
        if nr < 5 {
            return Err(GluerError::GridTooCoarse { axis: "r", points: nr, required: 5 });
        }
        let radii = (0..nr).map(|i| r_eps * (0.5 + 0.5 * i as f64 / (nr - 1) as f64)).collect();
        Ok(AnnulusGrid { radii, theta: Some(theta.clone()), nodes: theta.nodes.clone() })
    }

    pub fn nr(&self) -> usize {
        self.radii.len()
    }

    pub fn nth(&self) -> usize {
        self.nodes.len()
    }

    pub fn dr(&self) -> f64 {
        self.radii[1] - self.radii[0]
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeckBoundaryGraph {
    pub grid: AnnulusGrid,
    pub u: Vec<f64>,
    pub u0: Vec<f64>,
    pub v_disc: Vec<f64>,
}

impl NeckBoundaryGraph {
    /// `u` and `d u / d r` at `|x| = r_eps`, one value per theta node.
    pub fn outer_trace(&self) -> (Vec<f64>, Vec<f64>) {
        outer_trace(&self.u, &self.grid)
    }

    /// Discrete C^2 norm of `v_disc(r_eps .)` on the unit annulus.
    pub fn discrepancy_norm(&self) -> f64 {
        scaled_c2_norm(&self.v_disc, &self.grid)
    }
}

/// Fourth-order one-sided radial derivative at the outer row.
pub fn outer_trace(f: &[f64], grid: &AnnulusGrid) -> (Vec<f64>, Vec<f64>) {
    let m = grid.nth();
    let nr = grid.nr();
    let dr = grid.dr();
    let at = |i: usize, k: usize| f[i * m + k];
    let l = nr - 1;
    let vals = (0..m).map(|k| at(l, k)).collect();
    let ders = (0..m)
        .map(|k| {
            (25.0 * at(l, k) - 48.0 * at(l - 1, k) + 36.0 * at(l - 2, k) - 16.0 * at(l - 3, k) + 3.0 * at(l - 4, k))
                / (12.0 * dr)
        })
        .collect();
    (vals, ders)
}

/// Sum of the sups of `f` and its first and second differences in
/// `(y, theta)` with `y = r / r_eps`.
pub fn scaled_c2_norm(f: &[f64], grid: &AnnulusGrid) -> f64 {
    let r_eps = *grid.radii.last().unwrap();
    let hth = grid.nodes.get(1).map_or(1.0, |b| b - grid.nodes[0]);
    derivative_sups(f, grid.nr(), grid.nth(), grid.dr() / r_eps, hth).iter().sum()
}

/// Cubic Lagrange interpolation of column `k` of `w` at `t`.
fn interp_column(w: &CylinderField, k: usize, t: f64) -> f64 {
    let g = &w.grid;
    let nt = g.nt();
    let t0 = g.t_nodes[0];
    let x = (t - t0) / g.ht;
    let i = (x.floor() as isize - 1).clamp(0, nt as isize - 4) as usize;
    let mut s = 0.0;
    for a in 0..4 {
        let mut l = 1.0;
        for b in 0..4 {
            if a != b {
                l *= (x - (i + b) as f64) / (a as f64 - b as f64);
            }
        }
        s += l * w.at(i + a, k);
    }
    s
}

/// Horizontal radius and height of the scaled immersion at `(t, theta_k)`.
fn scaled_point(cat: &Catenoid, scales: &ScaleParameters, w: &CylinderField, k: usize, t: f64) -> (f64, f64) {
    let th = w.grid.theta.nodes[k];
    let (p, _) = perturbed_point(cat, scales, t, th, interp_column(w, k, t));
    let c = scales.catenoid_scale();
    (c * p[0].hypot(p[1]), c * p[2])
}

/// Solves `rho(t) = r` on `[-t_eps, 0]` (or `[0, t_eps]` when `upper`) by
/// bisection then Newton.
fn invert_radius(
    cat: &Catenoid,
    scales: &ScaleParameters,
    w: &CylinderField,
    k: usize,
    r: f64,
    upper: bool,
) -> Result<f64> {
    let th = w.grid.theta.nodes[k];
    let tol = 1e-12 * scales.r_eps;
    let rho = |t: f64| scaled_point(cat, scales, w, k, t).0;
    let (mut a, mut b) = if upper { (scales.t_eps, 0.0) } else { (-scales.t_eps, 0.0) };
    let (lo, hi) = (a.min(b), a.max(b));
    let (fa, fb) = (rho(a) - r, rho(b) - r);
    if fa.abs() <= tol {
        return Ok(a);
    }
    if fa * fb > 0.0 {
        return Err(GluerError::FoldOver { theta: th, detail: format!("radius {r:e} is not attained on this half") });
    }
    while (b - a).abs() > 1e-3 * w.grid.ht {
        let mid = 0.5 * (a + b);
        if (rho(mid) - r) * fa > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    // Newton to the rounding floor; the interface derivatives amplify any slack
    let mut t = 0.5 * (a + b);
    for _ in 0..30 {
        let f = rho(t) - r;
        let s = 1e-7;
        let d = (rho(t + s) - rho(t - s)) / (2.0 * s);
        let next = (t - f / d).clamp(lo, hi);
        let step = (next - t).abs();
        t = next;
        if step <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
            break;
        }
    }
    let f = rho(t) - r;
    if f.abs() <= tol {
        Ok(t)
    } else {
        Err(GluerError::FoldOver { theta: th, detail: format!("Newton stalled with residual {f:e}") })
    }
}

/// `u0(x) = -eps^(1/(n-1)) d0 + eps/(n-2) |x|^(2-n) + w^i_h(x / r_eps)`.
pub fn model_graph(scales: &ScaleParameters, cat: &Catenoid, h: &BoundaryData, theta: &ThetaGrid, r: f64, th: f64) -> f64 {
    let n = scales.n.as_f64();
    -scales.catenoid_scale() * cat.d0() + scales.epsilon / (n - 2.0) * r.powf(2.0 - n)
        + interior_extension(h, theta, r / scales.r_eps, th).0
}

/// Re-expresses the lower end of the neck solution as a vertical graph.
pub fn boundary_graph(sol: &NeckSolution, nr: usize) -> Result<NeckBoundaryGraph> {
    let scales = &sol.scales;
    let cat = Catenoid::new(scales.n)?;
    let w = &sol.w_total;
    let theta = &w.grid.theta;
    let grid = AnnulusGrid::new(scales.r_eps, nr, theta)?;
    check_monotone(&cat, scales, w)?;
    let m = grid.nth();
    let mut u = vec![0.0; nr * m];
    let mut u0 = vec![0.0; nr * m];
    for (i, &r) in grid.radii.iter().enumerate() {
        for k in 0..m {
            let t = invert_radius(&cat, scales, w, k, r, false)?;
            u[i * m + k] = scaled_point(&cat, scales, w, k, t).1;
            u0[i * m + k] = model_graph(scales, &cat, &sol.h_perp, theta, r, theta.nodes[k]);
        }
    }
    let v_disc = u.iter().zip(&u0).map(|(a, b)| a - b).collect();
    Ok(NeckBoundaryGraph { grid, u, u0, v_disc })
}

/// Heights of the neck at horizontal radius `r` over each theta node, on
/// the lower or the upper half.
pub fn ring_heights(sol: &NeckSolution, r: f64, upper: bool) -> Result<Vec<f64>> {
    let scales = &sol.scales;
    let cat = Catenoid::new(scales.n)?;
    let w = &sol.w_total;
    (0..w.grid.nth())
        .map(|k| Ok(scaled_point(&cat, scales, w, k, invert_radius(&cat, scales, w, k, r, upper)?).1))
        .collect()
}

/// Fold-over guard: the horizontal radius must decrease along every column
/// of the lower half.
fn check_monotone(cat: &Catenoid, scales: &ScaleParameters, w: &CylinderField) -> Result<()> {
    let g = &w.grid;
    for k in 0..g.nth() {
        let mut last = f64::INFINITY;
        for (i, &t) in g.t_nodes.iter().enumerate() {
            if t > 0.0 {
                break;
            }
            let (p, _) = perturbed_point(cat, scales, t, g.theta.nodes[k], w.at(i, k));
            let r = p[0].hypot(p[1]);
            if r >= last {
                return Err(GluerError::FoldOver { theta: g.theta.nodes[k], detail: format!("radius not monotone at t = {t}") });
            }
            last = r;
        }
    }
    Ok(())
}

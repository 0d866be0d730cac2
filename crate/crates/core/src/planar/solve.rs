//! Picard iteration for the planar end `u = w_{eps,rho} + w_hat + v`, and
//! its discrepancy from the model near `x*`.

use serde::{Deserialize, Serialize};

use super::bipolar::{PlanarField, PlanarGrid};
use super::laplace::{check_weights, LaplaceSolver};
use super::model::{exterior_value, hat_value, model_value, EndParameters};
use super::nonlinear::{cartesian_derivatives, planar_weighted_norm, xi_from_derivatives};
use crate::cylinder::derivative_sups;
use crate::error::{GluerError, Result};
use crate::geometry::ScaleParameters;
use crate::neck::solve::boundary_norm;
use crate::spectral::{BoundaryData, ThetaGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarConfig {
    /// Cell count in `sigma`; the `tau` spacing follows.
    pub nsigma: usize,
    pub theta_nodes: usize,
    pub j_max: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub kappa: f64,
    pub mu: Option<f64>,
    pub nu: Option<f64>,
}

impl Default for PlanarConfig {
    fn default() -> Self {
        PlanarConfig { nsigma: 96, theta_nodes: 48, j_max: 12, tol: 1e-15, max_iter: 50, kappa: 10.0, mu: None, nu: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanarIterate {
    pub step: usize,
    pub correction: f64,
    pub norm: f64,
    pub ratio: Option<f64>,
    /// Set when the correction has stopped shrinking at the rounding floor;
    /// such steps carry no contraction information.
    pub floor: bool,
}

#[derive(Debug, Clone)]
pub struct PlanarSolution {
    pub scales: ScaleParameters,
    pub config: PlanarConfig,
    pub params: EndParameters,
    pub h_bar: BoundaryData,
    /// `w_{eps,rho} + w_hat + v` at the nodes.
    pub ubar: PlanarField,
    pub v: PlanarField,
    pub iteration_log: Vec<PlanarIterate>,
    pub first_iterate_norm: f64,
}

impl PlanarSolution {
    pub fn max_ratio(&self) -> f64 {
        self.iteration_log.iter().filter(|s| !s.floor).filter_map(|s| s.ratio).fold(0.0, f64::max)
    }
}

/// `eps r_eps^(2 - nu)`, the size of the first planar iterate.
pub fn planar_ball_scale(scales: &ScaleParameters, nu: f64) -> f64 {
    scales.epsilon * scales.r_eps.powf(2.0 - nu)
}

/// The extension operator on `D_{r_eps}`. Its collar lies inside the
/// excised balls, where the Dirichlet closure of the solver discards it, so
/// on the grid it is the identity.
pub fn extend_e_bar(f: &PlanarField) -> PlanarField {
    f.clone()
}

/// Grid, factored Laplacian and theta grid for one `(n, eps)`.
#[derive(Debug, Clone)]
pub struct PlanarContext {
    pub scales: ScaleParameters,
    pub config: PlanarConfig,
    pub grid: PlanarGrid,
    pub theta: ThetaGrid,
    pub mu: f64,
    pub nu: f64,
    solver: LaplaceSolver,
}

impl PlanarContext {
    pub fn new(scales: ScaleParameters, config: PlanarConfig) -> Result<Self> {
        if !(config.tol > 0.0) || config.max_iter == 0 {
            return Err(GluerError::arg("tol/max_iter", "need tol > 0 and at least one iteration"));
        }
        let n = scales.n.as_f64();
        let mid = (2.0 - n) / 2.0;
        let (mu, nu) = (config.mu.unwrap_or(mid), config.nu.unwrap_or(mid));
        check_weights(n, mu, nu)?;
        let grid = PlanarGrid::new(scales.n, scales.r_eps, config.nsigma)?;
        let theta = ThetaGrid::new(scales.n, config.theta_nodes, config.j_max)?;
        let solver = LaplaceSolver::new(&grid)?;
        Ok(PlanarContext { scales, config, grid, theta, mu, nu, solver })
    }

    fn field(&self, values: Vec<f64>) -> PlanarField {
        PlanarField { grid: self.grid, values, mu: self.mu, nu: self.nu }
    }

    /// Values and exact derivatives of `w_{eps,rho} + w_hat` at the nodes.
    pub fn base(&self, p: EndParameters, h_bar: &BoundaryData) -> Result<(PlanarField, Vec<[f64; 5]>)> {
        let g = &self.grid;
        let mut vals = Vec::with_capacity(g.len());
        let mut ders = Vec::with_capacity(g.len());
        for i in 0..g.ntau {
            for k in 0..g.nsigma {
                let (x, r) = g.node(i, k);
                let (a, da) = model_value(&self.scales, p, x, r);
                let (b, db) = hat_value(h_bar, &self.theta, self.scales.r_eps, x, r)?;
                vals.push(a + b);
                let mut d = da;
                for c in 0..5 {
                    d[c] += db[c];
                }
                ders.push(d);
            }
        }
        Ok((self.field(vals), ders))
    }

    /// `Gamma(E(Xi(w0 + v)))`.
    pub fn picard_map(&self, base: &[[f64; 5]], v: &PlanarField) -> Result<PlanarField> {
        let mut d = cartesian_derivatives(v);
        for (a, b) in d.iter_mut().zip(base) {
            for c in 0..5 {
                a[c] += b[c];
            }
        }
        let f = extend_e_bar(&xi_from_derivatives(v, &d));
        let mut w = self.solver.solve(&f)?;
        w.mu = self.mu;
        w.nu = self.nu;
        Ok(w)
    }

    pub fn solve(&self, p: EndParameters, h_bar: &BoundaryData) -> Result<PlanarSolution> {
        let s = &self.scales;
        let size = s.r_eps * p.rho.abs() + boundary_norm(h_bar, &self.theta);
        let bound = self.config.kappa * s.data_scale();
        if size > bound {
            return Err(GluerError::arg(
                "rho/h_bar",
                format!("r_eps |rho| + ||h_bar|| = {size:e} exceeds kappa eps r_eps^2 = {bound:e}"),
            ));
        }
        let (w0, base) = self.base(p, h_bar)?;
        let mut v = self.field(vec![0.0; self.grid.len()]);
        let mut log: Vec<PlanarIterate> = Vec::new();
        let mut prev: Option<f64> = None;
        let mut bad = 0;
        let mut radius = f64::INFINITY;
        let mut first = 0.0;
        for step in 1..=self.config.max_iter {
            let next = self.picard_map(&base, &v)?;
            if !next.is_finite() {
                return Err(GluerError::NonContraction { stage: "planar", ratios: ratios(&log) });
            }
            let corr = planar_weighted_norm(&next.sub(&v));
            let norm = planar_weighted_norm(&next);
            let ratio = prev.filter(|q| *q > 0.0).map(|q| corr / q);
            let floor = ratio.is_some_and(|r| r > 0.5) && corr < FLOOR * norm;
            log.push(PlanarIterate { step, correction: corr, norm, ratio, floor });
            if step == 1 {
                first = norm;
                radius = 2.0 * norm;
            } else if norm > radius * (1.0 + 1e-9) {
                return Err(GluerError::BallViolation { stage: "planar", norm, radius });
            }
            if !floor && ratio.is_some_and(|r| r >= 1.0) {
                bad += 1;
                if bad >= 2 {
                    return Err(GluerError::NonContraction { stage: "planar", ratios: ratios(&log) });
                }
            } else {
                bad = 0;
            }
            if !floor {
                v = next;
            }
            if floor || corr < self.config.tol || corr <= 64.0 * f64::EPSILON * norm {
                return Ok(PlanarSolution {
                    scales: *s,
                    config: self.config,
                    params: p,
                    h_bar: h_bar.clone(),
                    ubar: w0.add(&v),
                    v,
                    iteration_log: log,
                    first_iterate_norm: first,
                });
            }
            prev = Some(corr);
        }
        Err(GluerError::NotConverged {
            stage: "planar",
            iterations: self.config.max_iter,
            last: log.last().map_or(f64::NAN, |s| s.correction),
        })
    }
}

/// Relative correction below which a step that fails to halve it is taken
/// to have reached the rounding floor of the C^2 norm.
const FLOOR: f64 = 1e-6;

fn ratios(log: &[PlanarIterate]) -> Vec<f64> {
    log.iter().filter_map(|s| s.ratio).collect()
}

pub fn solve_planar(scales: &ScaleParameters, p: EndParameters, h_bar: &BoundaryData, config: &PlanarConfig) -> Result<PlanarSolution> {
    PlanarContext::new(*scales, *config)?.solve(p, h_bar)
}

/// `v_bar = u - u0` on `r_eps <= |y| <= 2 r_eps` about `x*`, with its
/// Cauchy trace at `|y| = r_eps` in the variable `s = |y| / r_eps`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanarDiscrepancy {
    pub radii: Vec<f64>,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub trace_value: BoundaryData,
    pub trace_deriv: BoundaryData,
    /// Discrete C^2 norm of `v_bar(x* + r_eps .)` on `1 <= s <= 2`.
    pub norm: f64,
}

/// Closed-form part of `v_bar` at `x* + y` and its `|y|`-derivative.
fn analytic_discrepancy(sol: &PlanarSolution, theta: &ThetaGrid, s_len: f64, th: f64) -> Result<(f64, f64)> {
    let sc = &sol.scales;
    let n = sc.n.as_f64();
    let eps = sc.epsilon;
    let rho = sol.params.rho;
    let (c, sn) = (th.cos(), th.sin());
    let (y1, yr) = (s_len * c, s_len * sn);
    let (x1, r) = (1.0 + y1, yr);
    let (m, dm) = model_value(sc, sol.params, x1, r);
    let (hv, dh) = hat_value(&sol.h_bar, theta, sc.r_eps, x1, r)?;
    let (e, de) = exterior_value(&sol.h_bar, theta, y1 / sc.r_eps, yr / sc.r_eps);
    let cn = n / (n - 2.0) * 2f64.powf(1.0 - n) * eps;
    let u0 = rho - cn + eps / (n - 2.0) * s_len.powf(2.0 - n) + rho * y1 + e;
    let du0 = -eps * s_len.powf(1.0 - n) + rho * c + (de[0] * c + de[1] * sn) / sc.r_eps;
    let du = (dm[0] + dh[0]) * c + (dm[1] + dh[1]) * sn;
    Ok((m + hv - u0, du - du0))
}

pub fn planar_discrepancy(sol: &PlanarSolution, theta: &ThetaGrid, nr: usize) -> Result<PlanarDiscrepancy> {
    if nr < 5 {
        return Err(GluerError::GridTooCoarse { axis: "r", points: nr, required: 5 });
    }
    let r_eps = sol.scales.r_eps;
    let g = &sol.v.grid;
    let m = theta.len();
    let radii: Vec<f64> = (0..nr).map(|i| r_eps * (1.0 + i as f64 / (nr - 1) as f64)).collect();
    let at = |s_len: f64, th: f64| -> Result<f64> {
        let v = sol.v.eval(1.0 + s_len * th.cos(), s_len * th.sin())?;
        Ok(analytic_discrepancy(sol, theta, s_len, th)?.0 + v)
    };
    let mut values = vec![0.0; nr * m];
    for (i, &rad) in radii.iter().enumerate() {
        for (k, &th) in theta.nodes.iter().enumerate() {
            values[i * m + k] = at(rad, th)?;
        }
    }
    // d/ds of v at the sphere, one-sided over half a tau cell per step
    let ds = 0.5 * g.htau();
    let mut tv = vec![0.0; m];
    let mut td = vec![0.0; m];
    for (k, &th) in theta.nodes.iter().enumerate() {
        let (a, da) = analytic_discrepancy(sol, theta, r_eps, th)?;
        let f: Vec<f64> = (0..5)
            .map(|q| sol.v.eval(1.0 + r_eps * (1.0 + q as f64 * ds) * th.cos(), r_eps * (1.0 + q as f64 * ds) * th.sin()))
            .collect::<Result<_>>()?;
        let dv = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * ds);
        tv[k] = a + f[0];
        td[k] = r_eps * da + dv;
    }
    let hth = theta.spacing();
    let norm = derivative_sups(&values, nr, m, 1.0 / (nr - 1) as f64, hth).iter().sum();
    Ok(PlanarDiscrepancy {
        radii,
        nodes: theta.nodes.clone(),
        values,
        trace_value: theta.analyze(&tv)?,
        trace_deriv: theta.analyze(&td)?,
        norm,
    })
}

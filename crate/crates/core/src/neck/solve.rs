//! Picard iteration for the perturbed neck `w = w~ + v`.

use serde::{Deserialize, Serialize};

use crate::cylinder::operator::apply_l;
use crate::cylinder::{
    extend_e_eps, shifted_poisson_extension, weighted_norm, CylinderField, CylinderGrid, GreenOperator,
    WeightedNormSpec,
};
use crate::error::{GluerError, Result};
use crate::geometry::normal_graph::{conjugated_residual, neck_grid};
use crate::geometry::{Catenoid, ScaleParameters};
use crate::spectral::{eigen_data, BoundaryData, ThetaGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeckConfig {
    /// Target `t`-spacing of the neck grid.
    pub ht: f64,
    pub theta_nodes: usize,
    pub j_max: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub kappa: f64,
    pub delta: Option<f64>,
}

impl Default for NeckConfig {
    fn default() -> Self {
        NeckConfig { ht: 0.04, theta_nodes: 48, j_max: 12, tol: 1e-10, max_iter: 50, kappa: 10.0, delta: None }
    }
}

impl NeckConfig {
    pub fn spec(&self, cat: &Catenoid) -> WeightedNormSpec {
        match self.delta {
            Some(delta) => WeightedNormSpec { delta },
            None => WeightedNormSpec::default_for(cat.n),
        }
    }
}

/// `h~ = eps^(-1/(n-1)) phi^((n-2)/2)(t_eps) h`.
pub fn rescale_factor(scales: &ScaleParameters) -> f64 {
    let n = scales.n.as_f64();
    scales.phi_at_t_eps().powf((n - 2.0) / 2.0) / scales.catenoid_scale()
}

pub fn rescale_boundary_data(h: &BoundaryData, scales: &ScaleParameters) -> BoundaryData {
    h.scaled(rescale_factor(scales))
}

/// Majorant of the C^2 norm on the sphere: `sum_j |h_j| (1 + lambda_j) max |Y_j|`.
pub fn boundary_norm(h: &BoundaryData, theta: &ThetaGrid) -> f64 {
    h.coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let (lam, _) = eigen_data(h.n, j);
            let ymax = theta.mode_values(j).iter().fold(0.0f64, |a, v| a.max(v.abs()));
            c.abs() * (1.0 + lam) * ymax
        })
        .sum()
}

/// `eps r_eps phi^(-1)(t_eps)`, the size of the first Picard iterate.
pub fn neck_ball_scale(scales: &ScaleParameters) -> f64 {
    scales.epsilon * scales.r_eps / scales.phi_at_t_eps()
}

/// `eps r_eps phi^(n/2)(t_eps)`, the admissible size of `h~`.
pub fn rescaled_data_scale(scales: &ScaleParameters) -> f64 {
    scales.epsilon * scales.r_eps * scales.phi_at_t_eps().powf(scales.n.as_f64() / 2.0)
}

/// Exponents in `eps` of `rescale_factor * eps r_eps^2` and of
/// `eps r_eps phi^(n/2)(t_eps)`; they agree for every `n`.
pub fn data_scale_exponents(n: f64) -> (f64, f64) {
    let r = 2.0 / (3.0 * n - 2.0);
    let p = -n / ((3.0 * n - 2.0) * (n - 1.0));
    let from_h = -1.0 / (n - 1.0) + p * (n - 2.0) / 2.0 + 1.0 + 2.0 * r;
    let lemma = 1.0 + r + p * n / 2.0;
    (from_h, lemma)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeckIterate {
    pub step: usize,
    pub correction: f64,
    pub norm: f64,
    pub ratio: Option<f64>,
    /// Set when the correction has stopped shrinking at the rounding floor;
    /// such steps carry no contraction information.
    pub floor: bool,
}

#[derive(Debug, Clone)]
pub struct NeckSolution {
    pub scales: ScaleParameters,
    pub config: NeckConfig,
    pub h_perp: BoundaryData,
    pub h_tilde: BoundaryData,
    pub w_tilde: CylinderField,
    pub w_total: CylinderField,
    pub v: CylinderField,
    pub iteration_log: Vec<NeckIterate>,
    /// `||v_1|| / (eps r_eps phi^(-1)(t_eps))`.
    pub c_kappa: f64,
    pub first_iterate_norm: f64,
}

impl NeckSolution {
    pub fn max_ratio(&self) -> f64 {
        self.iteration_log.iter().filter(|s| !s.floor).filter_map(|s| s.ratio).fold(0.0, f64::max)
    }
}

/// Everything that does not depend on `h`: grids, `G`, and `M(0)`.
#[derive(Debug, Clone)]
pub struct NeckContext {
    pub cat: Catenoid,
    pub scales: ScaleParameters,
    pub config: NeckConfig,
    pub grid: CylinderGrid,
    pub green: GreenOperator,
    m0: CylinderField,
}

impl NeckContext {
    pub fn new(scales: ScaleParameters, config: NeckConfig) -> Result<Self> {
        if !(config.tol > 0.0) || config.max_iter == 0 {
            return Err(GluerError::arg("tol/max_iter", "need tol > 0 and at least one iteration"));
        }
        let cat = Catenoid::new(scales.n)?;
        let theta = ThetaGrid::new(scales.n, config.theta_nodes, config.j_max)?;
        let grid = neck_grid(&scales, config.ht, theta)?;
        let big = extend_e_eps(&CylinderField::zeros(&grid)).grid;
        let green = GreenOperator::new(&cat, &big, config.spec(&cat))?;
        let m0 = conjugated_residual(&cat, &scales, &CylinderField::zeros(&grid))?;
        Ok(NeckContext { cat, scales, config, grid, green, m0 })
    }

    /// `M(w) - M(0)`, the conjugated mean curvature with the discretisation
    /// error of the bare catenoid removed.
    pub fn residual(&self, w: &CylinderField) -> Result<CylinderField> {
        Ok(conjugated_residual(&self.cat, &self.scales, w)?.sub(&self.m0))
    }

    /// One application of `A(v) = G E (L v - (M(w~ + v) - M(0)))` restricted to the neck.
    pub fn picard_map(&self, w_tilde: &CylinderField, v: &CylinderField) -> Result<CylinderField> {
        let f = apply_l(v, &self.cat)?.sub(&self.residual(&w_tilde.add(v))?);
        self.green.apply(&extend_e_eps(&f))?.restrict(&self.grid)
    }

    pub fn w_tilde(&self, h_tilde: &BoundaryData) -> Result<CylinderField> {
        // lower-boundary value h~(z) once the sign of n_eps there is accounted for
        let mut flipped = h_tilde.clone();
        for (j, c) in flipped.coeffs.iter_mut().enumerate() {
            if j % 2 == 0 {
                *c = -*c;
            }
        }
        shifted_poisson_extension(&flipped, self.scales.t_eps, &self.grid)
    }

    pub fn solve(&self, h_perp: &BoundaryData) -> Result<NeckSolution> {
        let h_tilde = rescale_boundary_data(h_perp, &self.scales);
        let bound = self.config.kappa * rescaled_data_scale(&self.scales);
        let size = boundary_norm(&h_tilde, &self.grid.theta);
        if size > bound {
            return Err(GluerError::arg(
                "h_perp",
                format!("rescaled data norm {size:e} exceeds kappa eps r_eps phi^(n/2)(t_eps) = {bound:e}"),
            ));
        }
        let w_tilde = self.w_tilde(&h_tilde)?;
        let spec = self.green.spec;
        let mut v = CylinderField::zeros(&self.grid);
        let mut log = Vec::new();
        let mut prev: Option<f64> = None;
        let mut bad = 0;
        let mut radius = f64::INFINITY;
        let mut first = 0.0;
        for step in 1..=self.config.max_iter {
            let next = self.picard_map(&w_tilde, &v)?;
            if !next.is_finite() {
                return Err(GluerError::NonContraction { stage: "neck", ratios: ratios(&log) });
            }
            let corr = weighted_norm(&next.sub(&v), spec);
            let norm = weighted_norm(&next, spec);
            let ratio = prev.filter(|p| *p > 0.0).map(|p| corr / p);
            let floor = ratio.is_some_and(|r| r > 0.5) && corr < FLOOR * norm;
            log.push(NeckIterate { step, correction: corr, norm, ratio, floor });
            if step == 1 {
                first = norm;
                radius = 2.0 * norm;
            } else if norm > radius * (1.0 + 1e-9) {
                return Err(GluerError::BallViolation { stage: "neck", norm, radius });
            }
            if !floor && ratio.is_some_and(|r| r >= 1.0) {
                bad += 1;
                if bad >= 2 {
                    return Err(GluerError::NonContraction { stage: "neck", ratios: ratios(&log) });
                }
            } else {
                bad = 0;
            }
            if !floor {
                v = next;
            }
            if floor || corr < self.config.tol || corr <= 64.0 * f64::EPSILON * norm {
                let w_total = w_tilde.add(&v);
                return Ok(NeckSolution {
                    scales: self.scales,
                    config: self.config,
                    h_perp: h_perp.clone(),
                    h_tilde,
                    w_tilde,
                    w_total,
                    v,
                    iteration_log: log,
                    c_kappa: first / neck_ball_scale(&self.scales),
                    first_iterate_norm: first,
                });
            }
            prev = Some(corr);
        }
        Err(GluerError::NotConverged {
            stage: "neck",
            iterations: self.config.max_iter,
            last: log.last().map_or(f64::NAN, |s| s.correction),
        })
    }
}

/// Relative correction below which a step that fails to halve it is taken
/// to have reached the rounding floor of the C^2 norm.
const FLOOR: f64 = 1e-6;

fn ratios(log: &[NeckIterate]) -> Vec<f64> {
    log.iter().filter_map(|s| s.ratio).collect()
}

/// Builds the context and solves in one go.
pub fn solve_neck(scales: &ScaleParameters, h_perp: &BoundaryData, config: &NeckConfig) -> Result<NeckSolution> {
    NeckContext::new(*scales, *config)?.solve(h_perp)
}

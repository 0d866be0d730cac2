//! Matching the neck to the planar end across `|y| = r_eps` about `x*`:
//! low modes fix `rho` and the vertical offset `t`, the rest goes through
//! the Dirichlet-to-Neumann map.

use serde::{Deserialize, Serialize};

use crate::error::{GluerError, Result};
use crate::geometry::{Catenoid, ScaleParameters};
use crate::neck::graph::outer_trace;
use crate::neck::solve::boundary_norm;
use crate::neck::{boundary_graph, NeckBoundaryGraph, NeckConfig, NeckContext, NeckSolution};
use crate::planar::{planar_discrepancy, EndParameters, PlanarConfig, PlanarContext, PlanarDiscrepancy, PlanarSolution};
use crate::spectral::{decompose_low_modes, BoundaryData, ThetaGrid};

/// Eigenvalue `-(n - 2 + 2j)` of `h -> d_r (w^e_h - w^i_h)` on mode `j`.
pub fn dtn_eigenvalue(n: f64, j: usize) -> f64 {
    -(n - 2.0 + 2.0 * j as f64)
}

pub fn dtn_apply(h: &BoundaryData) -> BoundaryData {
    let n = h.n.as_f64();
    let mut out = h.clone();
    out.coeffs.iter_mut().enumerate().for_each(|(j, c)| *c *= dtn_eigenvalue(n, j));
    out
}

pub fn dtn_invert(h: &BoundaryData) -> BoundaryData {
    let n = h.n.as_f64();
    let mut out = h.clone();
    out.coeffs.iter_mut().enumerate().for_each(|(j, c)| *c /= dtn_eigenvalue(n, j));
    out
}

/// `rho = -h1 Y_1(0) / r_eps` (so that `rho y1` cancels the `j = 1` part of
/// `h` on the sphere) and `t = eps^(1/(n-1)) d0 + rho - (n/(n-2)) 2^(1-n) eps + h0 Y_0`.
pub fn gluing_parameters(h: &BoundaryData, scales: &ScaleParameters, d0: f64, theta: &ThetaGrid) -> (f64, f64) {
    let n = scales.n.as_f64();
    let (h0, h1, _) = decompose_low_modes(h);
    let rho = -h1 * theta.eval_mode(1, 0.0) / scales.r_eps;
    let t = scales.catenoid_scale() * d0 + rho - n / (n - 2.0) * 2f64.powf(1.0 - n) * scales.epsilon + h0 * theta.eval_mode(0, 0.0);
    (rho, t)
}

/// Value and `s`-derivative jumps of `(w^i_h - w^e_hbar) - (v_bar - v)` at `s = 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CauchyMismatch {
    pub value_jump: BoundaryData,
    pub derivative_jump: BoundaryData,
}

impl CauchyMismatch {
    pub fn sup(&self) -> f64 {
        self.value_jump.sup_coeff().max(self.derivative_jump.sup_coeff())
    }
}

/// Mode coefficients of `v` and `dv/ds` at the outer edge of the neck annulus.
pub fn neck_trace(neck: &NeckBoundaryGraph, theta: &ThetaGrid, r_eps: f64) -> Result<(BoundaryData, BoundaryData)> {
    if neck.grid.nodes.len() != theta.len() || neck.grid.nodes.iter().zip(&theta.nodes).any(|(a, b)| (a - b).abs() > 1e-14) {
        return Err(GluerError::InterfaceMismatch("neck and planar theta nodes differ".into()));
    }
    let (v, dv) = outer_trace(&neck.v_disc, &neck.grid);
    let dv: Vec<f64> = dv.iter().map(|d| d * r_eps).collect();
    Ok((theta.analyze(&v)?, theta.analyze(&dv)?))
}

/// `v_bar - v` on the interface, as (value, derivative) coefficients.
fn interface_data(neck: (&BoundaryData, &BoundaryData), plan: &PlanarDiscrepancy) -> (BoundaryData, BoundaryData) {
    (plan.trace_value.add(&neck.0.scaled(-1.0)), plan.trace_deriv.add(&neck.1.scaled(-1.0)))
}

pub fn cauchy_mismatch(h: &BoundaryData, h_bar: &BoundaryData, neck: (&BoundaryData, &BoundaryData), plan: &PlanarDiscrepancy) -> CauchyMismatch {
    let n = h.n.as_f64();
    let (jv, jd) = interface_data(neck, plan);
    let mut value_jump = h.add(&h_bar.scaled(-1.0)).add(&jv.scaled(-1.0));
    let mut derivative_jump = value_jump.clone();
    for j in 0..h.coeffs.len() {
        let jf = j as f64;
        value_jump.coeffs[j] = h.coeffs[j] - h_bar.coeffs[j] - jv.coeffs[j];
        derivative_jump.coeffs[j] = jf * h.coeffs[j] - (2.0 - n - jf) * h_bar.coeffs[j] - jd.coeffs[j];
    }
    CauchyMismatch { value_jump, derivative_jump }
}

/// Solves `h - hbar = J_v`, `j h + (n - 2 + j) hbar = J_d` mode by mode.
pub fn model_update(jv: &BoundaryData, jd: &BoundaryData) -> (BoundaryData, BoundaryData) {
    let n = jv.n.as_f64();
    let mut rhs = jd.clone();
    for (j, c) in rhs.coeffs.iter_mut().enumerate() {
        *c -= j as f64 * jv.coeffs[j];
    }
    let h_bar = dtn_invert(&rhs).scaled(-1.0);
    debug_assert!(h_bar.coeffs.iter().enumerate().all(|(j, c)| c.is_finite() && dtn_eigenvalue(n, j) != 0.0));
    (jv.add(&h_bar), h_bar)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    pub neck: NeckConfig,
    pub planar: PlanarConfig,
    /// Radial rows of the interface annuli.
    pub nr: usize,
    /// Stop when the update is below `tol eps r_eps^2`.
    pub tol: f64,
    pub max_iter: usize,
    pub eps_max: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            neck: NeckConfig { tol: 1e-16, ..NeckConfig::default() },
            planar: PlanarConfig::default(),
            nr: 9,
            tol: 1e-9,
            max_iter: 30,
            eps_max: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterIterate {
    pub step: usize,
    /// `||(h, hbar)||` after the update.
    pub norm: f64,
    /// L^2 norm on the sphere of the change in `(h, hbar)`.
    pub update: f64,
    pub ratio: Option<f64>,
    pub neck_max_ratio: f64,
    pub planar_max_ratio: f64,
    /// The update stopped shrinking at the rounding floor.
    pub floor: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchState {
    pub scales: ScaleParameters,
    pub h: BoundaryData,
    pub h_bar: BoundaryData,
    pub rho: f64,
    pub t_offset: f64,
    pub iteration_log: Vec<OuterIterate>,
    /// `||S(0, 0)|| / (eps r_eps^2)`.
    pub c0: f64,
    /// Jumps at the returned `(h, hbar)`.
    pub mismatch: CauchyMismatch,
    /// First Picard iterate norms: the neck at the data `S(0, 0)` (zero data
    /// leaves the catenoid fixed), the planar piece at zero data.
    pub neck_first_iterate: f64,
    pub planar_first_iterate: f64,
}

impl MatchState {
    pub fn max_ratio(&self) -> f64 {
        self.iteration_log.iter().filter(|s| !s.floor).filter_map(|s| s.ratio).fold(0.0, f64::max)
    }

    pub fn norm(&self, theta: &ThetaGrid) -> f64 {
        pair_norm(&self.h, &self.h_bar, theta)
    }
}

pub fn pair_norm(h: &BoundaryData, h_bar: &BoundaryData, theta: &ThetaGrid) -> f64 {
    boundary_norm(h, theta) + boundary_norm(h_bar, theta)
}

/// Both sub-solvers with their grids built once.
pub struct Matcher {
    pub scales: ScaleParameters,
    pub config: MatchConfig,
    pub neck: NeckContext,
    pub planar: PlanarContext,
    pub d0: f64,
}

/// One evaluation of the outer map at `(h, hbar)`.
pub struct Evaluation {
    pub rho: f64,
    pub t: f64,
    pub neck_trace: (BoundaryData, BoundaryData),
    pub planar: PlanarDiscrepancy,
    pub neck_max_ratio: f64,
    pub planar_max_ratio: f64,
    pub neck_first_iterate: f64,
    pub planar_first_iterate: f64,
    pub neck_solution: NeckSolution,
    pub planar_solution: PlanarSolution,
}

/// The converged state together with the two pieces solved at it.
#[derive(Debug, Clone)]
pub struct MatchOutcome {
    pub state: MatchState,
    pub neck: NeckSolution,
    pub planar: PlanarSolution,
}

impl Matcher {
    pub fn new(scales: ScaleParameters, config: MatchConfig) -> Result<Self> {
        if scales.epsilon > config.eps_max {
            return Err(GluerError::arg("epsilon", format!("{} above eps_max = {}", scales.epsilon, config.eps_max)));
        }
        if config.neck.theta_nodes != config.planar.theta_nodes || config.neck.j_max != config.planar.j_max {
            return Err(GluerError::InterfaceMismatch("neck and planar theta grids differ".into()));
        }
        let neck = NeckContext::new(scales, config.neck)?;
        let planar = PlanarContext::new(scales, config.planar)?;
        let d0 = Catenoid::new(scales.n)?.d0();
        Ok(Matcher { scales, config, neck, planar, d0 })
    }

    pub fn theta(&self) -> &ThetaGrid {
        &self.planar.theta
    }

    pub fn evaluate(&self, h: &BoundaryData, h_bar: &BoundaryData) -> Result<Evaluation> {
        let (rho, t) = gluing_parameters(h, &self.scales, self.d0, self.theta());
        let (_, _, h_perp) = decompose_low_modes(h);
        let nsol = self.neck.solve(&h_perp)?;
        let graph = boundary_graph(&nsol, self.config.nr)?;
        let neck_trace = neck_trace(&graph, self.theta(), self.scales.r_eps)?;
        let psol = self.planar.solve(EndParameters { rho }, h_bar)?;
        let planar = planar_discrepancy(&psol, self.theta(), self.config.nr)?;
        Ok(Evaluation {
            rho,
            t,
            neck_trace,
            planar,
            neck_max_ratio: nsol.max_ratio(),
            planar_max_ratio: psol.max_ratio(),
            neck_first_iterate: nsol.first_iterate_norm,
            planar_first_iterate: psol.first_iterate_norm,
            neck_solution: nsol,
            planar_solution: psol,
        })
    }

    /// `S(h, hbar)`.
    pub fn outer_map(&self, e: &Evaluation) -> (BoundaryData, BoundaryData) {
        let (jv, jd) = interface_data((&e.neck_trace.0, &e.neck_trace.1), &e.planar);
        model_update(&jv, &jd)
    }

    pub fn set_inner_kappa(&mut self, kappa: f64) {
        self.config.neck.kappa = kappa;
        self.config.planar.kappa = kappa;
        self.neck.config.kappa = kappa;
        self.planar.config.kappa = kappa;
    }

    pub fn outer_fixed_point(self) -> Result<MatchState> {
        Ok(self.solve()?.state)
    }

    /// Iterates `(h, hbar) <- S(h, hbar)` from zero.
    pub fn solve(mut self) -> Result<MatchOutcome> {
        let theta = self.theta().clone();
        let ds = self.scales.data_scale();
        let zero = BoundaryData::zeros(self.scales.n, self.config.planar.j_max);
        let e0 = self.evaluate(&zero, &zero)?;
        let (mut h, mut h_bar) = self.outer_map(&e0);
        let c0 = pair_norm(&h, &h_bar, &theta) / ds;
        let kappa = 2.0 * c0;
        // the sub-problems are posed on the same ball as the outer map
        self.set_inner_kappa(kappa);
        let first = h.l2().hypot(h_bar.l2());
        let mut log = vec![OuterIterate {
            step: 1,
            norm: c0 * ds,
            update: first,
            ratio: None,
            neck_max_ratio: e0.neck_max_ratio,
            planar_max_ratio: e0.planar_max_ratio,
            floor: false,
        }];
        let mut prev = first;
        let mut neck_first = None;
        for step in 2..=self.config.max_iter + 1 {
            let e = self.evaluate(&h, &h_bar)?;
            let nf = *neck_first.get_or_insert(e.neck_first_iterate);
            let (nh, nhb) = self.outer_map(&e);
            let update = nh.add(&h.scaled(-1.0)).l2().hypot(nhb.add(&h_bar.scaled(-1.0)).l2());
            let floor = update / prev > 0.5 && update < 1e-6 * pair_norm(&h, &h_bar, &theta);
            let converged = floor || update < self.config.tol * ds;
            if converged {
                let mismatch = cauchy_mismatch(&h, &h_bar, (&e.neck_trace.0, &e.neck_trace.1), &e.planar);
                let norm = pair_norm(&h, &h_bar, &theta);
                log.push(OuterIterate {
                    step,
                    norm,
                    update,
                    ratio: Some(update / prev),
                    neck_max_ratio: e.neck_max_ratio,
                    planar_max_ratio: e.planar_max_ratio,
                    floor,
                });
                if norm > kappa * ds {
                    return Err(GluerError::BallViolation { stage: "outer", norm, radius: kappa * ds });
                }
                let state = MatchState {
                    scales: self.scales,
                    h,
                    h_bar,
                    rho: e.rho,
                    t_offset: e.t,
                    iteration_log: log,
                    c0,
                    mismatch,
                    neck_first_iterate: nf,
                    planar_first_iterate: e0.planar_first_iterate,
                };
                return Ok(MatchOutcome { state, neck: e.neck_solution, planar: e.planar_solution });
            }
            let ratio = update / prev;
            h = nh;
            h_bar = nhb;
            let norm = pair_norm(&h, &h_bar, &theta);
            log.push(OuterIterate {
                step,
                norm,
                update,
                ratio: Some(ratio),
                neck_max_ratio: e.neck_max_ratio,
                planar_max_ratio: e.planar_max_ratio,
                floor: false,
            });
            if step >= 3 && ratio >= 1.0 {
                return Err(GluerError::NonContraction { stage: "outer", ratios: log.iter().filter_map(|s| s.ratio).collect() });
            }
            prev = update;
        }
        Err(GluerError::NotConverged { stage: "outer", iterations: self.config.max_iter, last: prev })
    }
}

pub fn outer_fixed_point(scales: &ScaleParameters, config: &MatchConfig) -> Result<MatchState> {
    Matcher::new(*scales, *config)?.outer_fixed_point()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Dimension;

    fn dim(n: usize) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn dtn_table() {
        for n in 3..=5 {
            for j in 0..=12 {
                assert_eq!(dtn_eigenvalue(n as f64, j), -((n - 2 + 2 * j) as f64));
            }
        }
        assert_eq!(dtn_eigenvalue(3.0, 2), -5.0);
        let mut h = BoundaryData::zeros(dim(4), 12);
        for (j, c) in h.coeffs.iter_mut().enumerate() {
            *c = (j as f64 * 0.7).sin();
        }
        let back = dtn_invert(&dtn_apply(&h));
        for (a, b) in back.coeffs.iter().zip(&h.coeffs) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn dtn_matches_extension_derivatives() {
        use crate::planar::{exterior_extension, interior_extension};
        let th = ThetaGrid::with_defaults(dim(3)).unwrap();
        let h = BoundaryData::pure_mode(dim(3), 12, 3, 1.0);
        let x = 0.7;
        let d = exterior_extension(&h, &th, 1.0, x).1 - interior_extension(&h, &th, 1.0, x).1;
        assert!((d - dtn_eigenvalue(3.0, 3) * th.eval_mode(3, x)).abs() < 1e-13);
    }

    #[test]
    fn parameters_closed_form() {
        let s = ScaleParameters::new(dim(3), 1e-3).unwrap();
        let th = ThetaGrid::with_defaults(dim(3)).unwrap();
        let d0 = Catenoid::new(dim(3)).unwrap().d0();
        let (rho, t) = gluing_parameters(&BoundaryData::zeros(dim(3), 12), &s, d0, &th);
        assert_eq!(rho, 0.0);
        assert!((t - (1e-3f64.sqrt() * d0 - 0.75e-3)).abs() < 1e-15);
        let h = BoundaryData::pure_mode(dim(3), 12, 1, 1e-5);
        let (rho, _) = gluing_parameters(&h, &s, d0, &th);
        let (rho2, _) = gluing_parameters(&h.scaled(2.0), &s, d0, &th);
        assert!((rho2 - 2.0 * rho).abs() < 1e-18 && rho < 0.0);
        // rho y1 cancels h1 Y_1 on the sphere
        let x: f64 = 0.4;
        assert!((rho * s.r_eps * x.cos() + 1e-5 * th.eval_mode(1, x)).abs() < 1e-18);
    }

    #[test]
    fn constant_mismatch_is_absorbed_by_t() {
        // with v = v_bar = 0 the j = 0 jump is h0 - hbar0 whatever t is
        let n = dim(3);
        let zero = BoundaryData::zeros(n, 12);
        let plan = PlanarDiscrepancy { radii: vec![], nodes: vec![], values: vec![], trace_value: zero.clone(), trace_deriv: zero.clone(), norm: 0.0 };
        for h0 in [0.0, 1e-6, -3e-6] {
            let h = BoundaryData::pure_mode(n, 12, 0, h0);
            let m = cauchy_mismatch(&h, &h, (&zero, &zero), &plan);
            assert!(m.value_jump.coeffs[0].abs() < 1e-20);
        }
        let m = cauchy_mismatch(&zero, &zero, (&zero, &zero), &plan);
        assert_eq!(m.sup(), 0.0);
        let h = BoundaryData::pure_mode(n, 12, 2, 1e-6);
        assert!(cauchy_mismatch(&h, &zero, (&zero, &zero), &plan).sup() > 0.0);
    }

    #[test]
    fn model_update_zeroes_the_mismatch() {
        let n = dim(4);
        let mut jv = BoundaryData::zeros(n, 12);
        let mut jd = BoundaryData::zeros(n, 12);
        for j in 0..=12 {
            jv.coeffs[j] = 1e-6 * (j as f64 + 1.0).recip();
            jd.coeffs[j] = -2e-6 * (j as f64 * 0.3).cos();
        }
        let (h, hb) = model_update(&jv, &jd);
        let zero = BoundaryData::zeros(n, 12);
        let plan = PlanarDiscrepancy { radii: vec![], nodes: vec![], values: vec![], trace_value: jv, trace_deriv: jd, norm: 0.0 };
        assert!(cauchy_mismatch(&h, &hb, (&zero, &zero), &plan).sup() < 1e-20);
    }
}

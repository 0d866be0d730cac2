//! Mode-wise right inverse of `L` by variation of parameters.

use super::grid::{CylinderField, CylinderGrid, WeightedNormSpec};
use super::jacobi::JacobiFieldKind;
use crate::error::{GluerError, Result};
use crate::geometry::Catenoid;
use crate::ode::rk4_step;
use crate::spectral::eigen_data;

/// Abscissa beyond which `phi^(2-2n) < 1e-14`.
pub fn potential_cutoff(cat: &Catenoid) -> f64 {
    let k = cat.n.as_f64() - 1.0;
    // cosh(k t)^(-2) < 1e-14  <=  e^(k t) / 2 > 1e7
    (2e7f64).ln() / k
}

#[derive(Debug, Clone)]
enum ModeKernel {
    /// `u_R = uhat(t) e^(-delta t)`, `u_L(t) = u_R(-t)`.
    Decaying { delta: f64, uhat: Vec<f64>, wronskian: f64 },
    /// Jacobi-field basis, particular solution vanishing to first order at 0.
    Jacobi { u1: Vec<f64>, u2: Vec<f64>, wronskian: f64 },
}

#[derive(Debug, Clone)]
pub struct GreenOperator {
    pub grid: CylinderGrid,
    pub spec: WeightedNormSpec,
    kernels: Vec<ModeKernel>,
}

impl GreenOperator {
    pub fn new(cat: &Catenoid, grid: &CylinderGrid, spec: WeightedNormSpec) -> Result<Self> {
        spec.check_admissible(cat.n)?;
        if grid.nt() % 2 == 0 {
            return Err(GluerError::arg("grid", "t grid must have an odd node count (t = 0 is a node)"));
        }
        let kernels = (0..=grid.theta.j_max)
            .map(|j| build_kernel(cat, grid, j))
            .collect::<Result<Vec<_>>>()?;
        Ok(GreenOperator { grid: grid.clone(), spec, kernels })
    }

    /// Solves `L_j v = f` for one mode profile on the grid.
    pub fn solve_mode(&self, j: usize, f: &[f64]) -> Vec<f64> {
        let h = self.grid.ht;
        let nt = f.len();
        match &self.kernels[j] {
            ModeKernel::Decaying { delta, uhat, wronskian } => {
                let x = delta * h;
                let ex = (-x).exp();
                let (a0, a1) = exp_weights(x);
                // A_i = int_{t_0}^{t_i} e^{-delta (t_i - s)} uhat(-s) f(s) ds
                let mut a = vec![0.0; nt];
                for i in 1..nt {
                    let g0 = uhat[nt - i] * f[i - 1];
                    let g1 = uhat[nt - 1 - i] * f[i];
                    a[i] = ex * a[i - 1] + h * (a0 * g0 + a1 * g1);
                }
                // B_i = int_{t_i}^{t_end} e^{-delta (s - t_i)} uhat(s) f(s) ds
                let mut b = vec![0.0; nt];
                for i in (0..nt - 1).rev() {
                    let g0 = uhat[i + 1] * f[i + 1];
                    let g1 = uhat[i] * f[i];
                    b[i] = ex * b[i + 1] + h * (a0 * g0 + a1 * g1);
                }
                (0..nt).map(|i| (uhat[i] * a[i] + uhat[nt - 1 - i] * b[i]) / wronskian).collect()
            }
            ModeKernel::Jacobi { u1, u2, wronskian } => {
                let mid = nt / 2;
                let mut v = vec![0.0; nt];
                let (mut i1, mut i2) = (0.0, 0.0);
                for i in mid + 1..nt {
                    i1 += 0.5 * h * (u1[i - 1] * f[i - 1] + u1[i] * f[i]);
                    i2 += 0.5 * h * (u2[i - 1] * f[i - 1] + u2[i] * f[i]);
                    v[i] = (u2[i] * i1 - u1[i] * i2) / wronskian;
                }
                let (mut i1, mut i2) = (0.0, 0.0);
                for i in (0..mid).rev() {
                    i1 -= 0.5 * h * (u1[i + 1] * f[i + 1] + u1[i] * f[i]);
                    i2 -= 0.5 * h * (u2[i + 1] * f[i + 1] + u2[i] * f[i]);
                    v[i] = (u2[i] * i1 - u1[i] * i2) / wronskian;
                }
                v
            }
        }
    }

    /// Right inverse without the symmetry average.
    pub fn apply_unsymmetrized(&self, f: &CylinderField) -> Result<CylinderField> {
        self.check_grid(f)?;
        if !f.is_finite() {
            return Err(GluerError::arg("f", "non-finite values"));
        }
        let modes = f.to_modes();
        let sol: Vec<Vec<f64>> = modes.iter().enumerate().map(|(j, fj)| self.solve_mode(j, fj)).collect();
        Ok(CylinderField::from_modes(&self.grid, &sol))
    }

    /// `G(f)`: mode solves followed by the average over `(t, z) -> (-t, -z)`.
    pub fn apply(&self, f: &CylinderField) -> Result<CylinderField> {
        self.check_grid(f)?;
        if !f.is_finite() {
            return Err(GluerError::arg("f", "non-finite values"));
        }
        let modes = f.to_modes();
        let nt = self.grid.nt();
        let sol: Vec<Vec<f64>> = modes
            .iter()
            .enumerate()
            .map(|(j, fj)| {
                let v = self.solve_mode(j, fj);
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                (0..nt).map(|i| 0.5 * (v[i] + s * v[nt - 1 - i])).collect()
            })
            .collect();
        Ok(CylinderField::from_modes(&self.grid, &sol))
    }

    fn check_grid(&self, f: &CylinderField) -> Result<()> {
        if f.grid.nt() != self.grid.nt() || f.grid.nth() != self.grid.nth() {
            return Err(GluerError::InterfaceMismatch(format!(
                "field grid {}x{} differs from operator grid {}x{}",
                f.grid.nt(),
                f.grid.nth(),
                self.grid.nt(),
                self.grid.nth()
            )));
        }
        Ok(())
    }
}

/// Weights of `int_0^h e^(-delta u) g` for `g` linear between its end values.
fn exp_weights(x: f64) -> (f64, f64) {
    if x < 1e-3 {
        let a0 = 0.5 - x / 3.0 + x * x / 8.0;
        let a1 = 0.5 - x / 6.0 + x * x / 24.0;
        return (a0, a1);
    }
    let e = (-x).exp();
    let a0 = (1.0 - e * (1.0 + x)) / (x * x);
    let a1 = (1.0 - e) / x - a0;
    (a0, a1)
}

fn build_kernel(cat: &Catenoid, grid: &CylinderGrid, j: usize) -> Result<ModeKernel> {
    let nt = grid.nt();
    if j < 2 {
        let (k1, k2) = if j == 0 {
            (JacobiFieldKind::TranslateAxis, JacobiFieldKind::Dilate)
        } else {
            (JacobiFieldKind::TranslateOrthogonal, JacobiFieldKind::RotateAxis)
        };
        let u1: Vec<f64> = grid.t_nodes.iter().map(|&t| k1.profile(cat, t).0).collect();
        let u2: Vec<f64> = grid.t_nodes.iter().map(|&t| k2.profile(cat, t).0).collect();
        let (a, da) = k1.profile(cat, 0.0);
        let (b, db) = k2.profile(cat, 0.0);
        return Ok(ModeKernel::Jacobi { u1, u2, wronskian: a * db - da * b });
    }
    let (_, delta) = eigen_data(cat.n, j);
    let (uhat, duhat) = shoot_decaying(cat, grid, delta).map_err(|detail| GluerError::Shooting { mode: j, detail })?;
    let mid = nt / 2;
    let w = 2.0 * uhat[mid] * (duhat[mid] - delta * uhat[mid]);
    if !w.is_finite() || w.abs() < 1e-12 {
        return Err(GluerError::Shooting { mode: j, detail: format!("degenerate Wronskian {w:e}") });
    }
    // u_L u_R' - u_L' u_R at t = 0, with u_R = uhat e^{-delta t}
    Ok(ModeKernel::Decaying { delta, uhat, wronskian: w })
}

/// `uhat'' = 2 delta uhat' - V uhat`, `uhat = 1, uhat' = 0` far to the right,
/// integrated leftwards onto the grid nodes.
fn shoot_decaying(cat: &Catenoid, grid: &CylinderGrid, delta: f64) -> std::result::Result<(Vec<f64>, Vec<f64>), String> {
    let f = |t: f64, y: &[f64]| vec![y[1], 2.0 * delta * y[1] - cat.potential(t) * y[0]];
    let t_end = grid.half_length();
    let t_start = potential_cutoff(cat).max(t_end);
    let sub_h = 0.02 / delta.max(1.0);
    let mut y = vec![1.0, 0.0];
    let span = t_start - t_end;
    if span > 0.0 {
        let steps = (span / sub_h).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for s in 0..steps {
            y = rk4_step(&f, t_start - s as f64 * h, &y, -h);
        }
    }
    let nt = grid.nt();
    let mut uhat = vec![0.0; nt];
    let mut du = vec![0.0; nt];
    uhat[nt - 1] = y[0];
    du[nt - 1] = y[1];
    let per = (grid.ht / sub_h).ceil().max(1.0) as usize;
    for i in (0..nt - 1).rev() {
        let t0 = grid.t_nodes[i + 1];
        let h = (grid.t_nodes[i] - t0) / per as f64;
        for s in 0..per {
            y = rk4_step(&f, t0 + s as f64 * h, &y, h);
        }
        if !y[0].is_finite() || !y[1].is_finite() {
            return Err(format!("non-finite shooting value at t = {}", grid.t_nodes[i]));
        }
        uhat[i] = y[0];
        du[i] = y[1];
    }
    Ok((uhat, du))
}

/// Growth rate of the solution of `L_j v = 0` that behaves like `e^(delta_j t)`
/// at `-infinity`, fitted on `[t_max / 2, t_max]`.
pub fn mode_injectivity_check(cat: &Catenoid, j: usize, t_max: f64) -> Result<f64> {
    if !(t_max > 0.0) {
        return Err(GluerError::arg("t_max", "must be positive"));
    }
    let (_, delta) = eigen_data(cat.n, j);
    let c2 = delta * delta;
    let f = |t: f64, y: &[f64]| vec![y[1], (c2 - cat.potential(t)) * y[0]];
    let t0 = -potential_cutoff(cat).max(t_max);
    // small steps: errors committed near t = 0 feed the growing solution
    let h = 0.002 / delta.max(1.0);
    let steps = ((t_max - t0) / h).ceil() as usize;
    let h = (t_max - t0) / steps as f64;
    let mut y = vec![1.0, delta];
    let mut log_scale = delta * t0;
    let mut pts = Vec::new();
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        y = rk4_step(&f, t, &y, h);
        let m = y[0].abs().max(y[1].abs());
        if !(m > 0.0) || !m.is_finite() {
            return Err(GluerError::Shooting { mode: j, detail: format!("propagation failed at t = {}", t + h) });
        }
        y[0] /= m;
        y[1] /= m;
        log_scale += m.ln();
        let tn = t + h;
        if tn >= 0.5 * t_max {
            pts.push((tn, log_scale + y[0].abs().ln()));
        }
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

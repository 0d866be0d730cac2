//! Riemann's classical minimal surfaces in R^3: circles of radius `R(t)`
//! centred at `(a(t), 0, t)` with `(R')^2 + 1 = mu R^2 + R^4`, `a' = R^2`.

use serde::{Deserialize, Serialize};

use super::fd::{SampledSurface, P3};
use crate::error::{GluerError, Result};
use crate::ode::dopri5;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Riemann2DProfile {
    pub mu: f64,
    pub t_samples: Vec<f64>,
    #[serde(rename = "R")]
    pub r: Vec<f64>,
    pub a: Vec<f64>,
    pub dr: Vec<f64>,
}

impl Riemann2DProfile {
    /// Neck radius: smallest positive root of `mu R^2 + R^4 = 1`.
    pub fn neck_radius(mu: f64) -> f64 {
        ((-mu + (mu * mu + 4.0).sqrt()) / 2.0).sqrt()
    }

    /// Largest deviation of `(R')^2 + 1 - mu R^2 - R^4` over the samples.
    pub fn conservation_defect(&self) -> f64 {
        self.r
            .iter()
            .zip(&self.dr)
            .map(|(r, d)| (d * d + 1.0 - self.mu * r * r - r.powi(4)).abs())
            .fold(0.0, f64::max)
    }

    /// Samples the immersion `(a + R cos th, R sin th, t)` on a window of
    /// `theta`. Rows follow `t_samples`.
    pub fn surface(&self, theta: &[f64], dtheta: f64) -> SampledSurface {
        let mut points: Vec<P3> = Vec::with_capacity(self.t_samples.len() * theta.len());
        for i in 0..self.t_samples.len() {
            for &th in theta {
                points.push([self.a[i] + self.r[i] * th.cos(), self.r[i] * th.sin(), self.t_samples[i]]);
            }
        }
        SampledSurface {
            nu: self.t_samples.len(),
            nv: theta.len(),
            du: self.t_samples[1] - self.t_samples[0],
            dv: dtheta,
            points,
        }
    }
}

/// Integrates the second-order form `R'' = mu R + 2 R^3`, `a' = R^2` from the
/// neck `R(0) = R_min, R'(0) = 0, a(0) = 0` and mirrors to `[-t_span, t_span]`
/// (`R` even, `a` odd). `samples` nodes are returned on the nonnegative half.
pub fn riemann_2d_baseline(mu: f64, t_span: f64, samples: usize) -> Result<Riemann2DProfile> {
    if !(t_span > 0.0) || !mu.is_finite() {
        return Err(GluerError::arg("t_span", "must be positive with finite mu"));
    }
    if samples < 3 {
        return Err(GluerError::arg("samples", "need at least 3"));
    }
    let r0 = Riemann2DProfile::neck_radius(mu);
    let f = |_t: f64, y: &[f64]| vec![y[1], mu * y[0] + 2.0 * y[0].powi(3), y[0] * y[0]];
    let h = t_span / (samples - 1) as f64;
    let mut half = vec![[r0, 0.0, 0.0]];
    let mut y = vec![r0, 0.0, 0.0];
    for i in 1..samples {
        let t0 = (i - 1) as f64 * h;
        y = dopri5(&f, t0, t0 + h, &y, 1e-13, 1e-15).map_err(|e| GluerError::AdmissibleRegion {
            t: t0,
            detail: format!("{e}; neck radius {r0}, roots of mu R^2 + R^4 = 1 at R^2 = {}", r0 * r0),
        })?;
        let defect = y[1] * y[1] + 1.0 - mu * y[0] * y[0] - y[0].powi(4);
        if !y.iter().all(|v| v.is_finite()) || y[0] < r0 * (1.0 - 1e-9) || y[0] > 1e6 || defect.abs() > 1e-6 {
            return Err(GluerError::AdmissibleRegion {
                t: t0 + h,
                detail: format!(
                    "R = {}, R' = {}, conserved defect {defect:e}; trajectory must stay where mu R^2 + R^4 >= 1 (R >= {r0})",
                    y[0], y[1]
                ),
            });
        }
        half.push([y[0], y[1], y[2]]);
    }
    let m = samples;
    let mut t_samples = Vec::with_capacity(2 * m - 1);
    let mut r = Vec::with_capacity(2 * m - 1);
    let mut a = Vec::with_capacity(2 * m - 1);
    let mut dr = Vec::with_capacity(2 * m - 1);
    for i in (1..m).rev() {
        t_samples.push(-(i as f64) * h);
        r.push(half[i][0]);
        dr.push(-half[i][1]);
        a.push(-half[i][2]);
    }
    for (i, s) in half.iter().enumerate() {
        t_samples.push(i as f64 * h);
        r.push(s[0]);
        dr.push(s[1]);
        a.push(s[2]);
    }
    Ok(Riemann2DProfile { mu, t_samples, r, a, dr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fd::mean_curvature;

    #[test]
    fn conservation_for_mu_zero() {
        let p = riemann_2d_baseline(0.0, 1.0, 201).unwrap();
        assert_eq!(p.r[200], 1.0);
        assert!(p.conservation_defect() < 1e-8);
    }

    #[test]
    fn translation_is_increasing() {
        for &mu in &[-1.0, 0.0, 1.0, 2.5] {
            let p = riemann_2d_baseline(mu, 0.6, 61).unwrap();
            let rmin = Riemann2DProfile::neck_radius(mu);
            for i in 1..p.a.len() {
                assert!(p.a[i] > p.a[i - 1]);
                assert!(p.r[i] >= rmin * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn blow_up_is_reported() {
        assert!(matches!(
            riemann_2d_baseline(0.0, 2.0, 201),
            Err(GluerError::AdmissibleRegion { .. })
        ));
    }

    #[test]
    fn surface_is_minimal_to_second_order() {
        for &mu in &[0.0, 1.0] {
            let sup = |m: usize| {
                let p = riemann_2d_baseline(mu, 0.5, m + 1).unwrap();
                let nv = 2 * m + 1;
                let dth = 1.0 / m as f64;
                let th: Vec<f64> = (0..nv).map(|j| j as f64 * dth).collect();
                mean_curvature(&p.surface(&th, dth), 0, None).unwrap().interior_sup()
            };
            let (e1, e2) = (sup(20), sup(40));
            let order = (e1 / e2).log2();
            assert!((order - 2.0).abs() < 0.2, "mu={mu} e1={e1:e} e2={e2:e}");
        }
    }
}

//! Level sets of the end graph about `x*` and their deviation from spheres.

use crate::error::{GluerError, Result};
use crate::geometry::Dimension;
use crate::planar::PlanarSolution;

#[derive(Debug, Clone, Copy)]
pub enum LevelSetMode<'a> {
    Model,
    Solved(&'a PlanarSolution),
}

/// Point on the ray from `x* = e1` at angle `phi` in the meridian half plane
/// where `u = c`, by bracketing outward from `s_min` and bisecting.
fn crossing(u: &dyn Fn(f64, f64) -> Result<f64>, c: f64, phi: f64, s_min: f64) -> Result<(f64, f64)> {
    let (cs, sn) = (phi.cos(), phi.sin());
    let f = |s: f64| u(1.0 + s * cs, s * sn).map(|v| v - c);
    let mut a = s_min;
    if f(a)? <= 0.0 {
        return Err(GluerError::EmptyLevelSet { level: c });
    }
    let mut b = 2.0 * a;
    while f(b)? > 0.0 {
        a = b;
        b *= 2.0;
        if b > 1e6 {
            return Err(GluerError::EmptyLevelSet { level: c });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if f(mid)? > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let s = 0.5 * (a + b);
    Ok((1.0 + s * cs, s * sn))
}

/// Least-squares sphere `|x - a e1| = R` through meridian points, and the
/// largest relative radial deviation from it.
pub fn axial_sphere_deviation(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    // x1^2 + r^2 = 2 a x1 + k is linear in (a, k)
    let (mut sxx, mut sx, mut s1, mut sxy, mut sy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, r) in pts {
        let y = x * x + r * r;
        sxx += 4.0 * x * x;
        sx += 2.0 * x;
        s1 += 1.0;
        sxy += 2.0 * x * y;
        sy += y;
    }
    let det = sxx * s1 - sx * sx;
    let a = (sxy * s1 - sx * sy) / det;
    let k = (sxx * sy - sx * sxy) / det;
    let rad = (k + a * a).sqrt();
    let dev = pts.iter().fold(0.0f64, |m, &(x, r)| m.max(((x - a).hypot(r) - rad).abs() / rad));
    (a, rad, dev)
}

/// Extracts `u = u(x* + 3 e1)` on `rays` cell-centred rays and fits a sphere.
fn asphericity_of(u: &dyn Fn(f64, f64) -> Result<f64>, s_min: f64, rays: usize) -> Result<f64> {
    if rays < 3 {
        return Err(GluerError::arg("rays", "need at least 3"));
    }
    let c = u(4.0, 0.0)?;
    let pts = (0..rays)
        .map(|j| crossing(u, c, std::f64::consts::PI * (j as f64 + 0.5) / rays as f64, s_min))
        .collect::<Result<Vec<_>>>()?;
    Ok(axial_sphere_deviation(&pts).2)
}

/// Asphericity of the model `(eps/(n-2)) (|x-x*|^(2-n) - |x+x*|^(2-n))` or
/// of the computed end graph minus its asymptotic slope.
pub fn level_set_asphericity(n: Dimension, eps: f64, mode: LevelSetMode, rays: usize) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(GluerError::arg("eps", "must be positive"));
    }
    match mode {
        LevelSetMode::Model => {
            let nf = n.as_f64();
            let u = move |x: f64, r: f64| {
                Ok(eps / (nf - 2.0) * ((x - 1.0).hypot(r).powf(2.0 - nf) - (x + 1.0).hypot(r).powf(2.0 - nf)))
            };
            asphericity_of(&u, 1e-6, rays)
        }
        LevelSetMode::Solved(sol) => {
            if sol.scales.n != n {
                return Err(GluerError::arg("n", "does not match the planar solution"));
            }
            // level sets of the straightened end
            let slope = sol.params.rho - 2f64.powf(1.0 - n.as_f64()) * eps;
            let u = |x: f64, r: f64| sol.ubar.eval(x, r).map(|v| v - slope * x);
            asphericity_of(&u, sol.scales.r_eps * (1.0 + 1e-9), rays)
        }
    }
}

/// The same for `eps (log|x+x*| - log|x-x*|)` in the plane.
pub fn circle_analogue_asphericity(eps: f64, rays: usize) -> Result<f64> {
    let u = move |x: f64, r: f64| Ok(eps * ((x + 1.0).hypot(r).ln() - (x - 1.0).hypot(r).ln()));
    asphericity_of(&u, 1e-6, rays)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apollonius_circles() {
        for eps in [1e-2, 1.0] {
            let d = circle_analogue_asphericity(eps, 64).unwrap();
            assert!(d < 1e-10, "{d}");
        }
    }

    #[test]
    fn model_is_not_spherical_and_eps_free() {
        let n = Dimension::new(3).unwrap();
        let a = level_set_asphericity(n, 1e-3, LevelSetMode::Model, 64).unwrap();
        let b = level_set_asphericity(n, 1e-1, LevelSetMode::Model, 64).unwrap();
        let fine = level_set_asphericity(n, 1e-3, LevelSetMode::Model, 128).unwrap();
        assert!(a > 1e-3, "{a}");
        assert!((a - b).abs() < 1e-10 * a);
        assert!((a - fine).abs() < 0.05 * a, "{a} {fine}");
    }

    #[test]
    fn fit_recovers_a_circle() {
        let pts: Vec<(f64, f64)> = (0..10).map(|j| {
            let p = 0.3 * j as f64;
            (2.0 + 1.5 * p.cos(), 1.5 * p.sin())
        }).collect();
        let (a, r, d) = axial_sphere_deviation(&pts);
        assert!((a - 2.0).abs() < 1e-13 && (r - 1.5).abs() < 1e-13 && d < 1e-13);
    }
}

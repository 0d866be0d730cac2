//! Bipolar grid on the meridian half-plane `(x^1, r')` of the two-puncture
//! domain. The excised spheres about `+-x*` are the lines `tau = +-tau0`;
//! the point at infinity is the corner `(tau, sigma) = (0, 0)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GluerError, Result};
use crate::geometry::Dimension;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarGrid {
    pub n: Dimension,
    pub r_eps: f64,
    /// Focal distance `sqrt(1 - r_eps^2)`.
    pub a: f64,
    pub tau0: f64,
    /// Node count in `tau` (odd, both ends on the excised spheres).
    pub ntau: usize,
    /// Cell-centred node count in `sigma` on `(0, pi)`.
    pub nsigma: usize,
}

impl PlanarGrid {
    pub fn new(n: Dimension, r_eps: f64, nsigma: usize) -> Result<Self> {
        if !(r_eps > 0.0 && r_eps < 0.5) {
            return Err(GluerError::arg("r_eps", format!("{r_eps} not in (0, 1/2)")));
        }
        if nsigma < 8 {
            return Err(GluerError::GridTooCoarse { axis: "sigma", points: nsigma, required: 8 });
        }
        let a = (1.0 - r_eps * r_eps).sqrt();
        let tau0 = (1.0 / r_eps).acosh();
        let hs = std::f64::consts::PI / nsigma as f64;
        let half = (tau0 / hs).ceil() as usize;
        Ok(PlanarGrid { n, r_eps, a, tau0, ntau: 2 * half + 1, nsigma })
    }

    pub fn len(&self) -> usize {
        self.ntau * self.nsigma
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn htau(&self) -> f64 {
        2.0 * self.tau0 / (self.ntau - 1) as f64
    }

    pub fn hsigma(&self) -> f64 {
        std::f64::consts::PI / self.nsigma as f64
    }

    pub fn tau(&self, i: usize) -> f64 {
        -self.tau0 + i as f64 * self.htau()
    }

    pub fn sigma(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.hsigma()
    }

    /// `(x^1, r')` of a bipolar point.
    pub fn to_cartesian(&self, tau: f64, sigma: f64) -> (f64, f64) {
        let d = tau.cosh() - sigma.cos();
        (self.a * tau.sinh() / d, self.a * sigma.sin() / d)
    }

    pub fn node(&self, i: usize, k: usize) -> (f64, f64) {
        self.to_cartesian(self.tau(i), self.sigma(k))
    }

    pub fn to_bipolar(&self, x1: f64, r: f64) -> (f64, f64) {
        let a = self.a;
        let num = (x1 + a).powi(2) + r * r;
        let den = (x1 - a).powi(2) + r * r;
        (0.5 * (num / den).ln(), (2.0 * a * r).atan2(x1 * x1 + r * r - a * a))
    }

    /// Conformal factor `|dZ/d omega| = a / (cosh tau - cos sigma)`.
    pub fn scale_factor(&self, tau: f64, sigma: f64) -> f64 {
        self.a / (tau.cosh() - sigma.cos())
    }

    /// `F'(omega)` and `F''(omega) / F'(omega)` for `Z = i a cot(omega / 2)`,
    /// `omega = sigma + i tau`.
    pub fn map_derivatives(&self, tau: f64, sigma: f64) -> (Complex64, Complex64) {
        let half = Complex64::new(sigma, tau) * 0.5;
        let s = half.sin();
        let fp = Complex64::new(0.0, -0.5 * self.a) / (s * s);
        (fp, -half.cos() / s)
    }

    /// `r'^(n-2)`, the axisymmetric volume weight.
    pub fn volume_weight(&self, tau: f64, sigma: f64) -> f64 {
        self.to_cartesian(tau, sigma).1.powi(self.n.get() as i32 - 2)
    }
}

/// Nodal values on a [`PlanarGrid`] (row-major in `tau`) with the weight
/// exponents at infinity (`mu`) and at the punctures (`nu`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanarField {
    pub grid: PlanarGrid,
    pub values: Vec<f64>,
    pub mu: f64,
    pub nu: f64,
}

impl PlanarField {
    pub fn zeros(grid: &PlanarGrid) -> Self {
        let d = (2.0 - grid.n.as_f64()) / 2.0;
        PlanarField { grid: *grid, values: vec![0.0; grid.len()], mu: d, nu: d }
    }

    pub fn from_fn(grid: &PlanarGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = PlanarField::zeros(grid);
        for i in 0..grid.ntau {
            for k in 0..grid.nsigma {
                let (x, r) = grid.node(i, k);
                out.values[i * grid.nsigma + k] = f(x, r);
            }
        }
        out
    }

    pub fn at(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.grid.nsigma + k]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        PlanarField { values, ..self.clone() }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn scaled(&self, s: f64) -> Self {
        PlanarField { values: self.values.iter().map(|v| v * s).collect(), ..self.clone() }
    }

    /// `sup |w(x) + w(-x)|`; zero for odd fields.
    pub fn oddness_defect(&self) -> f64 {
        let g = &self.grid;
        let mut worst: f64 = 0.0;
        for i in 0..g.ntau {
            for k in 0..g.nsigma {
                worst = worst.max((self.at(i, k) + self.at(g.ntau - 1 - i, k)).abs());
            }
        }
        worst
    }

    /// Bicubic Lagrange interpolation in `(tau, sigma)` at a Cartesian point.
    pub fn eval(&self, x1: f64, r: f64) -> Result<f64> {
        let g = &self.grid;
        let (tau, sigma) = g.to_bipolar(x1, r);
        if tau.abs() > g.tau0 * (1.0 + 1e-12) {
            return Err(GluerError::InsideExcisedBall { x1, r });
        }
        let xt = (tau + g.tau0) / g.htau();
        let it = (xt.floor() as isize - 1).clamp(0, g.ntau as isize - 4) as usize;
        let xs = sigma / g.hsigma() - 0.5;
        let is = xs.floor() as isize - 1;
        let ns = g.nsigma as isize;
        let mut s = 0.0;
        for p in 0..4 {
            let lt = lagrange(xt - it as f64, p);
            let mut row = 0.0;
            for q in 0..4 {
                let mut k = is + q as isize;
                // even reflection across the axis at sigma = 0 and sigma = pi
                if k < 0 {
                    k = -k - 1;
                } else if k >= ns {
                    k = 2 * ns - 1 - k;
                }
                row += lagrange(xs - is as f64, q) * self.at(it + p, k as usize);
            }
            s += lt * row;
        }
        Ok(s)
    }
}

/// Cubic Lagrange basis on nodes `0..4` evaluated at `x`.
fn lagrange(x: f64, p: usize) -> f64 {
    let mut l = 1.0;
    for b in 0..4 {
        if b != p {
            l *= (x - b as f64) / (p as f64 - b as f64);
        }
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> PlanarGrid {
        PlanarGrid::new(Dimension::new(3).unwrap(), 0.1, 48).unwrap()
    }

    #[test]
    fn excised_spheres_are_coordinate_lines() {
        let g = grid();
        for k in 0..g.nsigma {
            let (x, r) = g.node(g.ntau - 1, k);
            assert!((((x - 1.0).powi(2) + r * r).sqrt() - g.r_eps).abs() < 1e-14);
            let (x, r) = g.node(0, k);
            assert!((((x + 1.0).powi(2) + r * r).sqrt() - g.r_eps).abs() < 1e-14);
        }
    }

    #[test]
    fn inverse_map_round_trip() {
        let g = grid();
        for &(t, s) in &[(0.3, 0.2), (-1.7, 2.9), (2.5, 1.0)] {
            let (x, r) = g.to_cartesian(t, s);
            let (t2, s2) = g.to_bipolar(x, r);
            assert!((t - t2).abs() < 1e-12 && (s - s2).abs() < 1e-12);
        }
    }

    #[test]
    fn map_derivative_matches_differences() {
        let g = grid();
        let (t, s) = (0.4, 1.3);
        let (fp, _) = g.map_derivatives(t, s);
        let h = 1e-6;
        let (x1, r1) = g.to_cartesian(t, s + h);
        let (x0, r0) = g.to_cartesian(t, s - h);
        let d = Complex64::new(x1 - x0, r1 - r0) / (2.0 * h);
        assert!((d - fp).norm() < 1e-8);
        assert!((fp.norm() - g.scale_factor(t, s)).abs() < 1e-12);
    }

    #[test]
    fn interpolation_is_fourth_order() {
        let f = |x: f64, r: f64| (0.3 * x).sin() * (1.0 + r * r).recip();
        let err = |ns: usize| {
            let g = PlanarGrid::new(Dimension::new(3).unwrap(), 0.1, ns).unwrap();
            let w = PlanarField::from_fn(&g, f);
            [(0.4, 0.3), (1.15, 0.05), (-2.0, 1.0)]
                .iter()
                .map(|&(x, r)| (w.eval(x, r).unwrap() - f(x, r)).abs())
                .fold(0.0, f64::max)
        };
        let p = (err(48) / err(96)).log2();
        assert!(p > 3.5, "{p}");
    }

    #[test]
    fn inside_ball_rejected() {
        let w = PlanarField::zeros(&grid());
        assert!(matches!(w.eval(1.0, 0.01), Err(GluerError::InsideExcisedBall { .. })));
    }
}

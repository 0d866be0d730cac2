//! Axisymmetric Laplacian `r'^(2-n) div(r'^(n-2) grad)` in bipolar
//! coordinates (finite volumes, zero flux through the axis) and its right
//! inverse with homogeneous Dirichlet data on the excised spheres.

use super::bipolar::{PlanarField, PlanarGrid};
use crate::error::{GluerError, Result};
use crate::linalg::BandedSpd;
use crate::quadrature::composite_gauss;

/// Face weights `r'^(n-2)` across `tau`-faces (`i + 1/2`, averaged over the
/// cell in `sigma`) and `sigma`-faces (`k - 1/2`, zero on the axis).
struct Faces {
    tau: Vec<f64>,
    sigma: Vec<f64>,
    /// Cell average in `sigma` of `g^2 r'^(n-2)`. Averages rather than nodal
    /// values keep the cells next to the axis consistent for n > 3.
    mass: Vec<f64>,
}

fn faces(g: &PlanarGrid) -> Faces {
    let (nt, ns) = (g.ntau, g.nsigma);
    let (ht, hs) = (g.htau(), g.hsigma());
    let mut tau = vec![0.0; (nt - 1) * ns];
    for i in 0..nt - 1 {
        for k in 0..ns {
            let (t, s) = (g.tau(i) + 0.5 * ht, g.sigma(k));
            tau[i * ns + k] = composite_gauss(|x| g.volume_weight(t, x), s - 0.5 * hs, s + 0.5 * hs, hs, 6) / hs;
        }
    }
    let mut sigma = vec![0.0; nt * (ns + 1)];
    for i in 0..nt {
        for k in 1..ns {
            sigma[i * (ns + 1) + k] = g.volume_weight(g.tau(i), k as f64 * hs);
        }
    }
    let mut mass = vec![0.0; nt * ns];
    for i in 0..nt {
        for k in 0..ns {
            let (t, s) = (g.tau(i), g.sigma(k));
            let m = |x: f64| g.scale_factor(t, x).powi(2) * g.volume_weight(t, x);
            mass[i * ns + k] = composite_gauss(m, s - 0.5 * hs, s + 0.5 * hs, hs, 6) / hs;
        }
    }
    Faces { tau, sigma, mass }
}

/// Discrete Laplacian at the interior `tau` rows; boundary rows are zero.
pub fn apply_laplacian(w: &PlanarField) -> PlanarField {
    let g = &w.grid;
    let f = faces(g);
    let (nt, ns) = (g.ntau, g.nsigma);
    let (ht2, hs2) = (g.htau().powi(2), g.hsigma().powi(2));
    let mut out = PlanarField { values: vec![0.0; g.len()], ..w.clone() };
    for i in 1..nt - 1 {
        for k in 0..ns {
            let c = w.at(i, k);
            let mut s = (f.tau[i * ns + k] * (w.at(i + 1, k) - c) - f.tau[(i - 1) * ns + k] * (c - w.at(i - 1, k))) / ht2;
            let up = f.sigma[i * (ns + 1) + k + 1];
            let dn = f.sigma[i * (ns + 1) + k];
            if k + 1 < ns {
                s += up * (w.at(i, k + 1) - c) / hs2;
            }
            if k > 0 {
                s -= dn * (c - w.at(i, k - 1)) / hs2;
            }
            out.values[i * ns + k] = s / f.mass[i * ns + k];
        }
    }
    out
}

/// Factored `-Delta` on the interior rows, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct LaplaceSolver {
    pub grid: PlanarGrid,
    matrix: BandedSpd,
    mass: Vec<f64>,
}

impl LaplaceSolver {
    pub fn new(g: &PlanarGrid) -> Result<Self> {
        let f = faces(g);
        let (nt, ns) = (g.ntau, g.nsigma);
        let (ht2, hs2) = (g.htau().powi(2), g.hsigma().powi(2));
        let m = (nt - 2) * ns;
        let mut a = BandedSpd::zeros(m, ns);
        let idx = |i: usize, k: usize| (i - 1) * ns + k;
        for i in 1..nt - 1 {
            for k in 0..ns {
                let row = idx(i, k);
                let e = f.tau[i * ns + k] / ht2;
                let wv = f.tau[(i - 1) * ns + k] / ht2;
                let up = f.sigma[i * (ns + 1) + k + 1] / hs2;
                let dn = f.sigma[i * (ns + 1) + k] / hs2;
                a.add(row, row, e + wv + if k + 1 < ns { up } else { 0.0 } + if k > 0 { dn } else { 0.0 });
                if i + 1 < nt - 1 {
                    a.add(row, idx(i + 1, k), -e);
                }
                if k + 1 < ns {
                    a.add(row, idx(i, k + 1), -up);
                }
            }
        }
        a.factor()?;
        Ok(LaplaceSolver { grid: *g, matrix: a, mass: f.mass })
    }

    /// Solves `Delta w = f` at the interior rows with `w = 0` on the spheres.
    pub fn solve(&self, f: &PlanarField) -> Result<PlanarField> {
        let g = &self.grid;
        if f.grid != *g {
            return Err(GluerError::InterfaceMismatch("planar field on a different grid".into()));
        }
        if !f.is_finite() {
            return Err(GluerError::arg("f", "non-finite values"));
        }
        let ns = g.nsigma;
        let rhs: Vec<f64> = (ns..(g.ntau - 1) * ns).map(|p| -self.mass[p] * f.values[p]).collect();
        let x = self.matrix.solve(&rhs)?;
        let mut out = PlanarField { values: vec![0.0; g.len()], ..f.clone() };
        out.values[ns..(g.ntau - 1) * ns].copy_from_slice(&x);
        Ok(out)
    }
}

/// Checks `mu, nu` in `(2 - n, 0)`.
pub fn check_weights(n: f64, mu: f64, nu: f64) -> Result<()> {
    for (name, v) in [("mu", mu), ("nu", nu)] {
        if !(v > 2.0 - n && v < 0.0) {
            return Err(GluerError::WeightOutOfRange { name, value: v, lo: 2.0 - n, hi: 0.0 });
        }
    }
    Ok(())
}

/// `Gamma(f)`: one factorisation, one solve.
pub fn laplace_right_inverse(f: &PlanarField, mu: f64, nu: f64) -> Result<PlanarField> {
    check_weights(f.grid.n.as_f64(), mu, nu)?;
    let mut w = LaplaceSolver::new(&f.grid)?.solve(f)?;
    w.mu = mu;
    w.nu = nu;
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Dimension;

    fn grid(n: usize, ns: usize) -> PlanarGrid {
        PlanarGrid::new(Dimension::new(n).unwrap(), 0.1, ns).unwrap()
    }

    /// Sup over nodes with `|x| < 3` at distance `> 2 r_eps` from both punctures.
    fn bulk_sup(w: &PlanarField) -> f64 {
        let g = &w.grid;
        let mut s: f64 = 0.0;
        for i in 1..g.ntau - 1 {
            for k in 0..g.nsigma {
                let (x, r) = g.node(i, k);
                let d = ((x - 1.0).powi(2) + r * r).sqrt().min(((x + 1.0).powi(2) + r * r).sqrt());
                if x.hypot(r) < 3.0 && d > 2.0 * g.r_eps {
                    s = s.max(w.at(i, k).abs());
                }
            }
        }
        s
    }

    #[test]
    fn harmonic_functions_are_annihilated_at_second_order() {
        for n in [3, 4] {
            let nf = n as f64;
            // odd dipole-type harmonic function plus a point source
            let f = |x: f64, r: f64| {
                let q = |c: f64| ((x - c).powi(2) + r * r).powf((2.0 - nf) / 2.0);
                q(1.0) - q(-1.0) + 0.3 * x
            };
            let e = |ns| bulk_sup(&apply_laplacian(&PlanarField::from_fn(&grid(n, ns), f)));
            let p = (e(48) / e(96)).log2();
            assert!((p - 2.0).abs() < 0.2, "n={n} order {p}");
        }
    }

    #[test]
    fn zero_data_zero_solution() {
        let g = grid(3, 32);
        let w = laplace_right_inverse(&PlanarField::zeros(&g), -0.5, -0.5).unwrap();
        assert_eq!(w.sup(), 0.0);
    }

    #[test]
    fn forward_apply_recovers_data() {
        let g = grid(3, 48);
        let bump = |x: f64, r: f64| (-(x - 0.3).powi(2) - r * r).exp() * x;
        let f = apply_laplacian(&PlanarField::from_fn(&g, bump));
        let w = laplace_right_inverse(&f, -0.5, -0.5).unwrap();
        let back = apply_laplacian(&w);
        let mut worst: f64 = 0.0;
        for p in g.nsigma..(g.ntau - 1) * g.nsigma {
            worst = worst.max((back.values[p] - f.values[p]).abs());
        }
        assert!(worst < 1e-9 * f.sup(), "{worst}");
    }

    #[test]
    fn odd_data_gives_odd_solution() {
        let g = grid(4, 40);
        let f = PlanarField::from_fn(&g, |x, r| x * (-x * x - r * r).exp());
        let w = laplace_right_inverse(&f, -1.0, -1.0).unwrap();
        assert!(w.oddness_defect() < 1e-12 * w.sup());
    }

    #[test]
    fn weights_checked() {
        let g = grid(3, 16);
        assert!(laplace_right_inverse(&PlanarField::zeros(&g), 0.5, -0.5).is_err());
        assert!(laplace_right_inverse(&PlanarField::zeros(&g), -0.5, -1.5).is_err());
    }
}

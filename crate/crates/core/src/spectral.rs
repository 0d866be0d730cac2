//! Axisymmetric harmonics on S^(n-1): functions of the polar angle `theta`
//! measured from `e_1`, expanded in Gegenbauer polynomials of `cos theta`.

use serde::{Deserialize, Serialize};

use crate::error::{GluerError, Result};
use crate::geometry::Dimension;
use crate::quadrature::composite_gauss;

pub const DEFAULT_J_MAX: usize = 12;

/// `(lambda_j, delta_j) = (j (n - 2 + j), (n - 2) / 2 + j)`.
pub fn eigen_data(n: Dimension, j: usize) -> (f64, f64) {
    let nf = n.as_f64();
    let jf = j as f64;
    (jf * (nf - 2.0 + jf), (nf - 2.0) / 2.0 + jf)
}

/// Mode coefficients of an axisymmetric function on the sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub n: Dimension,
    pub coeffs: Vec<f64>,
    /// Invariance under the block rotations fixing `e_1`; always true for
    /// data stored in this form.
    pub symmetric: bool,
}

impl BoundaryData {
    pub fn zeros(n: Dimension, j_max: usize) -> Self {
        BoundaryData { n, coeffs: vec![0.0; j_max + 1], symmetric: true }
    }

    pub fn pure_mode(n: Dimension, j_max: usize, j: usize, amplitude: f64) -> Self {
        let mut b = Self::zeros(n, j_max);
        b.coeffs[j] = amplitude;
        b
    }

    pub fn j_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Euclidean norm of the coefficients (the L^2 norm of the function).
    pub fn l2(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn sup_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut b = self.clone();
        b.coeffs.iter_mut().for_each(|c| *c *= s);
        b
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut b = self.clone();
        for (c, o) in b.coeffs.iter_mut().zip(&other.coeffs) {
            *c += o;
        }
        b
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }
}

/// Splits `h = h0 Y_0 + h1 Y_1 + h_perp`.
pub fn decompose_low_modes(h: &BoundaryData) -> (f64, f64, BoundaryData) {
    let mut perp = h.clone();
    let h0 = h.coeffs.first().copied().unwrap_or(0.0);
    let h1 = h.coeffs.get(1).copied().unwrap_or(0.0);
    for c in perp.coeffs.iter_mut().take(2) {
        *c = 0.0;
    }
    (h0, h1, perp)
}

/// Cell-centred nodes `theta_k = (k + 1/2) pi / M` with interpolatory
/// weights for `int_0^pi f sin^(n-2) theta d theta`, exact on cosine
/// polynomials of degree below `M`.
#[derive(Debug, Clone)]
pub struct ThetaGrid {
    pub n: Dimension,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub j_max: usize,
    norms: Vec<f64>,
    modes: Vec<Vec<f64>>,
}

impl ThetaGrid {
    pub fn new(n: Dimension, nodes: usize, j_max: usize) -> Result<Self> {
        if j_max > nodes / 2 {
            return Err(GluerError::Aliasing { j_max, nodes });
        }
        if nodes < 4 {
            return Err(GluerError::GridTooCoarse { axis: "theta", points: nodes, required: 4 });
        }
        let m = nodes;
        let pw = n.as_f64() - 2.0;
        let th: Vec<f64> = (0..m).map(|k| (k as f64 + 0.5) * std::f64::consts::PI / m as f64).collect();
        let moments: Vec<f64> = (0..m)
            .map(|q| {
                composite_gauss(
                    |x| (q as f64 * x).cos() * x.sin().powf(pw),
                    0.0,
                    std::f64::consts::PI,
                    std::f64::consts::PI / 32.0,
                    24,
                )
            })
            .collect();
        let weights: Vec<f64> = th
            .iter()
            .map(|&t| {
                let mut s = 0.5 * moments[0];
                for (q, mq) in moments.iter().enumerate().skip(1) {
                    s += (q as f64 * t).cos() * mq;
                }
                2.0 / m as f64 * s
            })
            .collect();
        let mut grid = ThetaGrid { n, nodes: th, weights, j_max, norms: Vec::new(), modes: Vec::new() };
        let raw: Vec<Vec<f64>> = (0..=j_max)
            .map(|j| grid.nodes.iter().map(|t| gegenbauer(j, grid.alpha(), t.cos())).collect())
            .collect();
        grid.norms = raw
            .iter()
            .map(|v| v.iter().zip(&grid.weights).map(|(x, w)| w * x * x).sum::<f64>().sqrt())
            .collect();
        grid.modes = raw
            .iter()
            .zip(&grid.norms)
            .map(|(v, nm)| v.iter().map(|x| x / nm).collect())
            .collect();
        Ok(grid)
    }

    pub fn with_defaults(n: Dimension) -> Result<Self> {
        Self::new(n, 4 * DEFAULT_J_MAX, DEFAULT_J_MAX)
    }

    fn alpha(&self) -> f64 {
        (self.n.as_f64() - 2.0) / 2.0
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        std::f64::consts::PI / self.nodes.len() as f64
    }

    /// Normalised degree-`j` mode at the nodes.
    pub fn mode_values(&self, j: usize) -> &[f64] {
        &self.modes[j]
    }

    /// Normalised degree-`j` mode at an arbitrary angle.
    pub fn eval_mode(&self, j: usize, theta: f64) -> f64 {
        gegenbauer(j, self.alpha(), theta.cos()) / self.norms[j]
    }

    /// Derivative in `theta` of the normalised mode.
    pub fn eval_mode_dtheta(&self, j: usize, theta: f64) -> f64 {
        if j == 0 {
            return 0.0;
        }
        // d/dx C_j^a = 2 a C_(j-1)^(a+1)
        let a = self.alpha();
        -theta.sin() * 2.0 * a * gegenbauer(j - 1, a + 1.0, theta.cos()) / self.norms[j]
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    pub fn analyze(&self, values: &[f64]) -> Result<BoundaryData> {
        if values.len() != self.nodes.len() {
            return Err(GluerError::arg("values", format!("expected {} samples", self.nodes.len())));
        }
        let coeffs = self
            .modes
            .iter()
            .map(|y| y.iter().zip(values).zip(&self.weights).map(|((y, v), w)| y * v * w).sum())
            .collect();
        Ok(BoundaryData { n: self.n, coeffs, symmetric: true })
    }

    pub fn synthesize(&self, h: &BoundaryData) -> Result<Vec<f64>> {
        if h.j_max() > self.j_max {
            return Err(GluerError::Aliasing { j_max: h.j_max(), nodes: self.nodes.len() });
        }
        let mut out = vec![0.0; self.nodes.len()];
        for (c, y) in h.coeffs.iter().zip(&self.modes) {
            for (o, yk) in out.iter_mut().zip(y) {
                *o += c * yk;
            }
        }
        Ok(out)
    }

    /// Evaluates the expansion at an arbitrary angle.
    pub fn synthesize_at(&self, h: &BoundaryData, theta: f64) -> f64 {
        h.coeffs.iter().enumerate().map(|(j, c)| c * self.eval_mode(j, theta)).sum()
    }
}

/// `C_j^a(x)` by the three-term recurrence.
pub fn gegenbauer(j: usize, a: f64, x: f64) -> f64 {
    if j == 0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    let mut p1 = 2.0 * a * x;
    for k in 1..j {
        let kf = k as f64;
        let p2 = (2.0 * x * (kf + a) * p1 - (kf + 2.0 * a - 1.0) * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dim(n: usize) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn eigen_values() {
        assert_eq!(eigen_data(dim(5), 0), (0.0, 1.5));
        assert_eq!(eigen_data(dim(3), 1), (2.0, 1.5));
        assert_eq!(eigen_data(dim(4), 2), (8.0, 3.0));
    }

    #[test]
    fn weights_positive_and_total() {
        for n in 3..=7 {
            let g = ThetaGrid::with_defaults(dim(n)).unwrap();
            assert!(g.weights.iter().all(|w| *w > 0.0));
            let total: f64 = g.weights.iter().sum();
            let exact = composite_gauss(|x| x.sin().powi(n as i32 - 2), 0.0, std::f64::consts::PI, 0.05, 20);
            assert!((total - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn gram_matrix_is_identity() {
        for n in 3..=6 {
            let g = ThetaGrid::new(dim(n), 64, 12).unwrap();
            for j in 0..=12 {
                for k in 0..=12 {
                    let ip: f64 = (0..64).map(|i| g.weights[i] * g.modes[j][i] * g.modes[k][i]).sum();
                    let e = if j == k { 1.0 } else { 0.0 };
                    assert!((ip - e).abs() < 1e-10, "n={n} j={j} k={k} ip={ip}");
                }
            }
        }
    }

    #[test]
    fn low_modes_have_expected_shape() {
        let g = ThetaGrid::with_defaults(dim(4)).unwrap();
        let y0 = g.mode_values(0);
        assert!(y0.iter().all(|v| (v - y0[0]).abs() < 1e-15));
        let total: f64 = g.weights.iter().sum();
        assert!((y0[0] - total.powf(-0.5)).abs() < 1e-14);
        let y1 = g.mode_values(1);
        let c = y1[0] / g.nodes[0].cos();
        for (v, t) in y1.iter().zip(&g.nodes) {
            assert!((v - c * t.cos()).abs() < 1e-13);
        }
        assert!(c > 0.0);
    }

    #[test]
    fn analyze_pure_functions() {
        let g = ThetaGrid::with_defaults(dim(3)).unwrap();
        let one = vec![1.0; g.len()];
        let h = g.analyze(&one).unwrap();
        assert!(h.coeffs[1..].iter().all(|c| c.abs() < 1e-13));
        let cosv: Vec<f64> = g.nodes.iter().map(|t| t.cos()).collect();
        let h = g.analyze(&cosv).unwrap();
        for (j, c) in h.coeffs.iter().enumerate() {
            if j != 1 {
                assert!(c.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn aliasing_guard() {
        assert!(matches!(ThetaGrid::new(dim(3), 20, 12), Err(GluerError::Aliasing { .. })));
    }

    #[test]
    fn laplace_beltrami_eigenvalue() {
        // (sin^(n-2))^-1 (sin^(n-2) u')' on a fine uniform grid
        for n in 3..=5 {
            let g = ThetaGrid::new(dim(n), 16, 6).unwrap();
            let err = |m: usize| {
                let h = 2.0 / m as f64;
                let mut worst: f64 = 0.0;
                for j in 0..=6 {
                    let (lam, _) = eigen_data(dim(n), j);
                    for k in 1..m {
                        let t = 0.5 + k as f64 * h;
                        let u = |s: f64| g.eval_mode(j, s);
                        let d2 = (u(t + h) - 2.0 * u(t) + u(t - h)) / (h * h);
                        let d1 = (u(t + h) - u(t - h)) / (2.0 * h);
                        let lb = d2 + (n as f64 - 2.0) * t.cos() / t.sin() * d1;
                        worst = worst.max((lb + lam * u(t)).abs());
                    }
                }
                worst
            };
            let order = (err(200) / err(400)).log2();
            assert!((order - 2.0).abs() < 0.1, "n={n} order={order}");
        }
    }

    #[test]
    fn mode_derivative() {
        let g = ThetaGrid::with_defaults(dim(5)).unwrap();
        for j in 0..=8 {
            let t = 0.9;
            let fd = (g.eval_mode(j, t + 1e-6) - g.eval_mode(j, t - 1e-6)) / 2e-6;
            assert!((fd - g.eval_mode_dtheta(j, t)).abs() < 1e-6 * (1.0 + fd.abs()));
        }
    }

    proptest! {
        #[test]
        fn round_trip(c in proptest::collection::vec(-1.0f64..1.0, 13), n in 3usize..7) {
            let g = ThetaGrid::new(dim(n), 64, 12).unwrap();
            let h = BoundaryData { n: dim(n), coeffs: c.clone(), symmetric: true };
            let back = g.analyze(&g.synthesize(&h).unwrap()).unwrap();
            for (a, b) in back.coeffs.iter().zip(&c) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }

        #[test]
        fn recomposition(c in proptest::collection::vec(-1.0f64..1.0, 13)) {
            let g = ThetaGrid::with_defaults(dim(3)).unwrap();
            let h = BoundaryData { n: dim(3), coeffs: c, symmetric: true };
            let (h0, h1, perp) = decompose_low_modes(&h);
            let full = g.synthesize(&h).unwrap();
            let rest = g.synthesize(&perp).unwrap();
            for k in 0..g.len() {
                let v = h0 * g.mode_values(0)[k] + h1 * g.mode_values(1)[k] + rest[k];
                prop_assert!((v - full[k]).abs() < 1e-12);
            }
            prop_assert_eq!(perp.coeffs[0], 0.0);
            prop_assert_eq!(perp.coeffs[1], 0.0);
        }
    }
}

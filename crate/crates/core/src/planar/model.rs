//! Closed-form pieces of the planar end: the model `w_{eps,rho}`, exterior
//! harmonic extensions and the two-puncture combination `w_hat`, each with
//! exact meridian derivatives `(w1, wr, w11, w1r, wrr)`.

use serde::{Deserialize, Serialize};

use super::bipolar::{PlanarField, PlanarGrid};
use crate::error::{GluerError, Result};
use crate::geometry::normal_graph::fit_slope;
use crate::geometry::ScaleParameters;
use crate::spectral::{gegenbauer, BoundaryData, ThetaGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndParameters {
    pub rho: f64,
}

/// Value and derivatives of `(eps/(n-2)) |x - c e1|^(2-n)`.
fn point_source(n: f64, eps: f64, c: f64, x1: f64, r: f64) -> (f64, [f64; 5]) {
    let y = x1 - c;
    let d2 = y * y + r * r;
    let d = d2.sqrt();
    let dn = d.powf(-n);
    let dn2 = dn / d2;
    (
        eps / (n - 2.0) * d.powf(2.0 - n),
        [-eps * y * dn, -eps * r * dn, eps * (n * y * y * dn2 - dn), eps * n * y * r * dn2, eps * (n * r * r * dn2 - dn)],
    )
}

/// `w_{eps,rho}(x) = (rho - 2^(1-n) eps) x1 + (eps/(n-2)) (|x-x*|^(2-n) - |x+x*|^(2-n))`.
pub fn model_value(scales: &ScaleParameters, p: EndParameters, x1: f64, r: f64) -> (f64, [f64; 5]) {
    let n = scales.n.as_f64();
    let eps = scales.epsilon;
    let slope = p.rho - 2f64.powf(1.0 - n) * eps;
    let (a, da) = point_source(n, eps, 1.0, x1, r);
    let (b, db) = point_source(n, eps, -1.0, x1, r);
    let mut d = [0.0; 5];
    for c in 0..5 {
        d[c] = da[c] - db[c];
    }
    d[0] += slope;
    (slope * x1 + a - b, d)
}

pub fn model_function(scales: &ScaleParameters, p: EndParameters, grid: &PlanarGrid) -> PlanarField {
    PlanarField::from_fn(grid, |x, r| model_value(scales, p, x, r).0)
}

/// Value and derivatives of `sum_j h_j |y|^(2-n-j) Y_j(y / |y|)` at
/// `(y1, r)`, `r` the distance to the axis.
pub fn exterior_value(h: &BoundaryData, theta: &ThetaGrid, y1: f64, r: f64) -> (f64, [f64; 5]) {
    let n = h.n.as_f64();
    let alpha = (n - 2.0) / 2.0;
    let rho = y1.hypot(r);
    let (c, s) = (y1 / rho, r / rho);
    // first and second derivatives of rho and c = cos(theta) in (y1, r)
    let rd = [c, s];
    let rdd = [s * s / rho, -c * s / rho, c * c / rho];
    let cd = [s * s / rho, -c * s / rho];
    let r2 = rho * rho;
    let cdd = [-3.0 * c * s * s / r2, s * (3.0 * c * c - 1.0) / r2, c * (3.0 * s * s - 1.0) / r2];
    let mut v = 0.0;
    let mut d = [0.0; 5];
    for (j, &hj) in h.coeffs.iter().enumerate() {
        if hj == 0.0 {
            continue;
        }
        // Y_j = G(c) / norm with G = C_j^alpha
        let scale = hj * theta.eval_mode(j, 0.0) / gegenbauer(j, alpha, 1.0);
        let g0 = gegenbauer(j, alpha, c);
        let g1 = if j >= 1 { 2.0 * alpha * gegenbauer(j - 1, alpha + 1.0, c) } else { 0.0 };
        let g2 = if j >= 2 { 4.0 * alpha * (alpha + 1.0) * gegenbauer(j - 2, alpha + 2.0, c) } else { 0.0 };
        let p = 2.0 - n - j as f64;
        let rp = rho.powf(p);
        let f_r = p * rp / rho * g0;
        let f_c = rp * g1;
        let f_rr = p * (p - 1.0) * rp / r2 * g0;
        let f_rc = p * rp / rho * g1;
        let f_cc = rp * g2;
        v += scale * rp * g0;
        d[0] += scale * (f_r * rd[0] + f_c * cd[0]);
        d[1] += scale * (f_r * rd[1] + f_c * cd[1]);
        for (slot, (a, b)) in [(2, (0, 0)), (3, (0, 1)), (4, (1, 1))] {
            let second = f_rr * rd[a] * rd[b]
                + f_rc * (rd[a] * cd[b] + rd[b] * cd[a])
                + f_cc * cd[a] * cd[b]
                + f_r * rdd[slot - 2]
                + f_c * cdd[slot - 2];
            d[slot] += scale * second;
        }
    }
    (v, d)
}

/// Exterior extension with its `|x|^(2-n)` coefficient split off.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExteriorExtension {
    pub source: BoundaryData,
    pub a_h: f64,
    /// Fitted log-slope of `|w_h - a_h |x|^(2-n)|` along the axis for
    /// `|x|` in 8..64; `None` when the remainder vanishes.
    pub remainder_decay: Option<f64>,
}

impl ExteriorExtension {
    pub fn new(h: &BoundaryData, theta: &ThetaGrid) -> Self {
        let n = h.n.as_f64();
        let a_h = h.coeffs.first().copied().unwrap_or(0.0) * theta.eval_mode(0, 0.0);
        let radii = [8.0, 16.0, 32.0, 64.0];
        let rem: Vec<f64> = radii
            .iter()
            .map(|&x: &f64| {
                // sample off-axis so that no zonal mode vanishes identically
                let (y1, r) = (x * 0.8, x * 0.6);
                (exterior_value(h, theta, y1, r).0 - a_h * x.powf(2.0 - n)).abs()
            })
            .collect();
        let remainder_decay = if rem.iter().all(|v| *v > 1e-300) { Some(fit_slope(&radii, &rem)) } else { None };
        ExteriorExtension { source: h.clone(), a_h, remainder_decay }
    }
}

/// `w_hat(x) = w_h((x - x*)/r_eps) - w_h(-(x + x*)/r_eps)` with derivatives.
pub fn hat_value(h: &BoundaryData, theta: &ThetaGrid, r_eps: f64, x1: f64, r: f64) -> Result<(f64, [f64; 5])> {
    let (ya, yb) = ((x1 - 1.0) / r_eps, -(x1 + 1.0) / r_eps);
    let rr = r / r_eps;
    let tol = 1.0 - 1e-12;
    if ya.hypot(rr) < tol || yb.hypot(rr) < tol {
        return Err(GluerError::InsideExcisedBall { x1, r });
    }
    let (a, da) = exterior_value(h, theta, ya, rr);
    let (b, db) = exterior_value(h, theta, yb, rr);
    let (s1, s2) = (1.0 / r_eps, 1.0 / (r_eps * r_eps));
    // the second term is reflected in x1
    Ok((
        a - b,
        [
            s1 * (da[0] + db[0]),
            s1 * (da[1] - db[1]),
            s2 * (da[2] - db[2]),
            s2 * (da[3] + db[3]),
            s2 * (da[4] - db[4]),
        ],
    ))
}

pub fn hat_extension(h_bar: &BoundaryData, scales: &ScaleParameters, grid: &PlanarGrid, theta: &ThetaGrid) -> Result<PlanarField> {
    let mut out = PlanarField::zeros(grid);
    for i in 0..grid.ntau {
        for k in 0..grid.nsigma {
            let (x, r) = grid.node(i, k);
            out.values[i * grid.nsigma + k] = hat_value(h_bar, theta, scales.r_eps, x, r)?.0;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Dimension;
    use crate::planar::exterior_extension;

    fn dim(n: usize) -> Dimension {
        Dimension::new(n).unwrap()
    }

    fn scales(n: usize, eps: f64) -> ScaleParameters {
        ScaleParameters::new(dim(n), eps).unwrap()
    }

    /// Central differences of `f` at `(x, r)` against the reported derivatives.
    fn check_derivatives(f: impl Fn(f64, f64) -> (f64, [f64; 5]), x: f64, r: f64) {
        let h = 1e-4;
        let v = |a: f64, b: f64| f(a, b).0;
        let (_, d) = f(x, r);
        let fd = [
            (v(x + h, r) - v(x - h, r)) / (2.0 * h),
            (v(x, r + h) - v(x, r - h)) / (2.0 * h),
            (v(x + h, r) - 2.0 * v(x, r) + v(x - h, r)) / (h * h),
            (v(x + h, r + h) - v(x + h, r - h) - v(x - h, r + h) + v(x - h, r - h)) / (4.0 * h * h),
            (v(x, r + h) - 2.0 * v(x, r) + v(x, r - h)) / (h * h),
        ];
        let scale = d.iter().fold(1e-12f64, |m, a| m.max(a.abs()));
        for c in 0..5 {
            assert!((d[c] - fd[c]).abs() < 1e-5 * scale, "component {c}: {} vs {}", d[c], fd[c]);
        }
    }

    #[test]
    fn model_vanishes_at_origin() {
        let s = scales(3, 1e-3);
        assert_eq!(model_value(&s, EndParameters { rho: 0.2 }, 0.0, 0.0).0, 0.0);
    }

    #[test]
    fn model_at_twice_x_star() {
        let s = scales(3, 1e-3);
        let v = model_value(&s, EndParameters { rho: 0.0 }, 2.0, 0.0).0;
        assert!((v - 1e-3 / 6.0).abs() < 1e-16, "{v}");
    }

    #[test]
    fn model_is_odd_on_the_grid() {
        let s = scales(4, 1e-3);
        let g = PlanarGrid::new(dim(4), s.r_eps, 32).unwrap();
        let w = model_function(&s, EndParameters { rho: 0.01 }, &g);
        assert!(w.oddness_defect() < 1e-13 * w.sup().max(1.0), "{}", w.oddness_defect());
    }

    #[test]
    fn model_derivatives_match_differences() {
        let s = scales(3, 1e-2);
        for &(x, r) in &[(0.3, 0.7), (1.4, 0.2), (-2.0, 1.5)] {
            check_derivatives(|a, b| model_value(&s, EndParameters { rho: 0.1 }, a, b), x, r);
        }
    }

    #[test]
    fn exterior_matches_mode_sum_and_derivatives() {
        for n in [3, 5] {
            let th = ThetaGrid::with_defaults(dim(n)).unwrap();
            let mut h = BoundaryData::zeros(dim(n), 12);
            h.coeffs[0] = 0.3;
            h.coeffs[1] = -0.2;
            h.coeffs[4] = 0.1;
            h.coeffs[7] = 0.05;
            for &(y1, r) in &[(1.2, 0.4), (-0.5, 1.1), (0.0, 2.0)] {
                let rho: f64 = f64::hypot(y1, r);
                let want = exterior_extension(&h, &th, rho, (y1 / rho).acos()).0;
                assert!((exterior_value(&h, &th, y1, r).0 - want).abs() < 1e-13);
                check_derivatives(|a, b| exterior_value(&h, &th, a, b), y1, r);
            }
        }
    }

    #[test]
    fn pure_j0_is_the_fundamental_solution() {
        let th = ThetaGrid::with_defaults(dim(3)).unwrap();
        let y0 = th.eval_mode(0, 0.0);
        let h = BoundaryData::pure_mode(dim(3), 12, 0, 1.0 / y0);
        let e = ExteriorExtension::new(&h, &th);
        assert!((e.a_h - 1.0).abs() < 1e-14);
        assert!(e.remainder_decay.is_none());
        assert!((exterior_value(&h, &th, 2.0, 0.0).0 - 0.5).abs() < 1e-14);
    }

    #[test]
    fn exterior_remainder_decays_faster() {
        let n = 4;
        let th = ThetaGrid::with_defaults(dim(n)).unwrap();
        let mut h = BoundaryData::zeros(dim(n), 12);
        h.coeffs[0] = 1.0;
        h.coeffs[1] = 0.5;
        let e = ExteriorExtension::new(&h, &th);
        assert!((e.remainder_decay.unwrap() - (1.0 - n as f64)).abs() < 0.01);
    }

    #[test]
    fn hat_extension_basics() {
        let s = scales(3, 1e-3);
        let th = ThetaGrid::with_defaults(dim(3)).unwrap();
        let g = PlanarGrid::new(dim(3), s.r_eps, 32).unwrap();
        assert_eq!(hat_extension(&BoundaryData::zeros(dim(3), 12), &s, &g, &th).unwrap().sup(), 0.0);
        let one = BoundaryData::pure_mode(dim(3), 12, 0, 1.0 / th.eval_mode(0, 0.0));
        assert!(hat_value(&one, &th, s.r_eps, 0.0, 0.0).unwrap().0.abs() < 1e-16);
        assert!(hat_value(&one, &th, s.r_eps, 1.0, 0.5 * s.r_eps).is_err());
        let mut h = one.clone();
        h.coeffs[3] = 0.4;
        let w = hat_extension(&h, &s, &g, &th).unwrap();
        assert!(w.oddness_defect() < 1e-14 * w.sup());
        for &(x, r) in &[(1.3, 0.1), (-0.8, 0.3), (0.2, 2.0)] {
            check_derivatives(|a, b| hat_value(&h, &th, s.r_eps, a, b).unwrap(), x, r);
        }
    }

    #[test]
    fn hat_extension_decays_like_a_dipole() {
        let n = 3;
        let s = scales(n, 1e-3);
        let th = ThetaGrid::with_defaults(dim(n)).unwrap();
        let mut h = BoundaryData::zeros(dim(n), 12);
        h.coeffs[0] = 1.0;
        h.coeffs[2] = 1.0;
        let radii = [20.0, 40.0, 80.0];
        let vals: Vec<f64> = radii.iter().map(|&x| hat_value(&h, &th, s.r_eps, x * 0.6, x * 0.8).unwrap().0.abs()).collect();
        let p = fit_slope(&radii, &vals);
        assert!((p - (1.0 - n as f64)).abs() < 0.05, "{p}");
        let c = vals[2] * radii[2].powf(n as f64 - 1.0) / s.r_eps.powf(n as f64 - 2.0);
        assert!(c < 10.0, "{c}");
    }
}

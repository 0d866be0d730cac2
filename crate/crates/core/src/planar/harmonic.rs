//! Interior and exterior harmonic extensions of sphere data, mode by mode.

use crate::spectral::{BoundaryData, ThetaGrid};

/// `w^i_h(rho z) = sum_j h_j rho^j Y_j(z)` and its `rho`-derivative.
pub fn interior_extension(h: &BoundaryData, theta: &ThetaGrid, rho: f64, th: f64) -> (f64, f64) {
    let mut v = 0.0;
    let mut dv = 0.0;
    for (j, &c) in h.coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let y = theta.eval_mode(j, th);
        let jf = j as f64;
        v += c * rho.powi(j as i32) * y;
        if j > 0 {
            dv += c * jf * rho.powi(j as i32 - 1) * y;
        }
    }
    (v, dv)
}

/// `w^e_h(rho z) = sum_j h_j rho^(2-n-j) Y_j(z)` and its `rho`-derivative.
pub fn exterior_extension(h: &BoundaryData, theta: &ThetaGrid, rho: f64, th: f64) -> (f64, f64) {
    let n = h.n.as_f64();
    let mut v = 0.0;
    let mut dv = 0.0;
    for (j, &c) in h.coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let y = theta.eval_mode(j, th);
        let p = 2.0 - n - j as f64;
        v += c * rho.powf(p) * y;
        dv += c * p * rho.powf(p - 1.0) * y;
    }
    (v, dv)
}

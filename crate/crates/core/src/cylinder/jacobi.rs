use serde::{Deserialize, Serialize};

use super::grid::{CylinderField, CylinderGrid};
use crate::geometry::Catenoid;

/// The four geometric families of Jacobi fields of the conjugate operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobiFieldKind {
    TranslateAxis,
    Dilate,
    TranslateOrthogonal,
    RotateAxis,
}

impl JacobiFieldKind {
    pub const ALL: [JacobiFieldKind; 4] = [
        JacobiFieldKind::TranslateAxis,
        JacobiFieldKind::Dilate,
        JacobiFieldKind::TranslateOrthogonal,
        JacobiFieldKind::RotateAxis,
    ];

    /// Spherical degree: 0 for the axial families, 1 for the others.
    pub fn degree(self) -> usize {
        match self {
            JacobiFieldKind::TranslateAxis | JacobiFieldKind::Dilate => 0,
            _ => 1,
        }
    }

    /// Radial profile and its `t`-derivative; the field is this times
    /// `1` (degree 0) or `cos theta` (degree 1).
    pub fn profile(self, cat: &Catenoid, t: f64) -> (f64, f64) {
        let n = cat.n.as_f64();
        let p = (n - 4.0) / 2.0;
        let phi = cat.phi(t);
        let dphi = cat.dphi(t);
        let d2phi = cat.d2phi(t);
        let psi = cat.psi(t);
        let dpsi = cat.dpsi(t);
        let d2psi = cat.d2psi(t);
        let pw = cat.phi_pow(t, p);
        let dpw = p * cat.phi_pow(t, p - 1.0) * dphi;
        match self {
            JacobiFieldKind::TranslateAxis => (pw * dphi, dpw * dphi + pw * d2phi),
            JacobiFieldKind::Dilate => {
                let g = phi * dpsi - psi * dphi;
                let dg = phi * d2psi - psi * d2phi;
                (pw * g, dpw * g + pw * dg)
            }
            JacobiFieldKind::TranslateOrthogonal => {
                let v = cat.phi_pow(t, -n / 2.0);
                (v, -n / 2.0 * v * dphi / phi)
            }
            JacobiFieldKind::RotateAxis => {
                let g = psi * dpsi + phi * dphi;
                let dg = dpsi * dpsi + psi * d2psi + dphi * dphi + phi * d2phi;
                (pw * g, dpw * g + pw * dg)
            }
        }
    }
}

/// Samples the field on the grid (degree-1 families use `e = e_1`).
pub fn jacobi_field(kind: JacobiFieldKind, cat: &Catenoid, grid: &CylinderGrid) -> CylinderField {
    let deg = kind.degree();
    CylinderField::from_fn(grid, |t, th| {
        let (v, _) = kind.profile(cat, t);
        if deg == 0 {
            v
        } else {
            v * th.cos()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Dimension;

    #[test]
    fn values_at_waist() {
        for n in 3..=6 {
            let cat = Catenoid::new(Dimension::new(n).unwrap()).unwrap();
            assert_eq!(JacobiFieldKind::TranslateAxis.profile(&cat, 0.0).0, 0.0);
            assert!((JacobiFieldKind::Dilate.profile(&cat, 0.0).0 - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let cat = Catenoid::new(Dimension::new(4).unwrap()).unwrap();
        for kind in JacobiFieldKind::ALL {
            for &t in &[-1.5, -0.2, 0.4, 2.0] {
                let h = 1e-5;
                let fd = (kind.profile(&cat, t + h).0 - kind.profile(&cat, t - h).0) / (2.0 * h);
                let d = kind.profile(&cat, t).1;
                assert!((fd - d).abs() < 1e-6 * (1.0 + d.abs()), "{kind:?} t={t}");
            }
        }
    }

    #[test]
    fn wronskians_are_constant() {
        // (Phi^{0,-}, Phi^{0,+}) -> -(n - 1); (Phi^{1,-}, Phi^{1,+}) -> n
        for n in 3..=5 {
            let cat = Catenoid::new(Dimension::new(n).unwrap()).unwrap();
            for &t in &[0.0, 0.7, -1.9] {
                let (a, da) = JacobiFieldKind::TranslateAxis.profile(&cat, t);
                let (b, db) = JacobiFieldKind::Dilate.profile(&cat, t);
                assert!((a * db - da * b + (n as f64 - 1.0)).abs() < 1e-9, "n={n} t={t}");
                let (a, da) = JacobiFieldKind::TranslateOrthogonal.profile(&cat, t);
                let (b, db) = JacobiFieldKind::RotateAxis.profile(&cat, t);
                assert!((a * db - da * b - n as f64).abs() < 1e-9, "n={n} t={t}");
            }
        }
    }
}

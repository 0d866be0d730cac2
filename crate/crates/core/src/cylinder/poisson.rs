use super::grid::{CylinderField, CylinderGrid};
use crate::error::{GluerError, Result};
use crate::spectral::{eigen_data, BoundaryData};

const LOW_MODE_TOL: f64 = 1e-14;

fn check_low_modes(h: &BoundaryData) -> Result<()> {
    let h0 = h.coeffs.first().copied().unwrap_or(0.0);
    let h1 = h.coeffs.get(1).copied().unwrap_or(0.0);
    let scale = h.sup_coeff().max(1e-300);
    if h0.abs() > LOW_MODE_TOL * scale || h1.abs() > LOW_MODE_TOL * scale {
        return Err(GluerError::LowModesPresent { h0, h1 });
    }
    Ok(())
}

/// Mode profile `e^(-delta_j s)` of the decaying extension.
pub fn poisson_mode(h: &BoundaryData, j: usize, s: f64) -> f64 {
    let (_, dj) = eigen_data(h.n, j);
    h.coeffs[j] * (-dj * s).exp()
}

/// `w_h(t, theta) = sum_{j >= 2} e^(-delta_j t) h_j Y_j(theta)` on the grid
/// nodes with `t >= 0`.
pub fn poisson_extension(h: &BoundaryData, grid: &CylinderGrid) -> Result<CylinderField> {
    check_low_modes(h)?;
    if h.j_max() > grid.theta.j_max {
        return Err(GluerError::Aliasing { j_max: h.j_max(), nodes: grid.nth() });
    }
    let modes: Vec<Vec<f64>> = (0..=h.j_max())
        .map(|j| grid.t_nodes.iter().map(|&t| if j < 2 { 0.0 } else { poisson_mode(h, j, t) }).collect())
        .collect();
    Ok(CylinderField::from_modes(grid, &modes))
}

/// Two-sided shifted extension on `[-t_eps, t_eps]`:
/// `w_h(t_eps - t, z) + w_h(t_eps + t, -z)`.
pub fn shifted_poisson_extension(h: &BoundaryData, t_eps: f64, grid: &CylinderGrid) -> Result<CylinderField> {
    check_low_modes(h)?;
    let modes: Vec<Vec<f64>> = (0..=h.j_max())
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            grid.t_nodes
                .iter()
                .map(|&t| {
                    if j < 2 {
                        0.0
                    } else {
                        poisson_mode(h, j, t_eps - t) + sign * poisson_mode(h, j, t_eps + t)
                    }
                })
                .collect()
        })
        .collect();
    Ok(CylinderField::from_modes(grid, &modes))
}

/// Fitted slope of `log sup_theta |w|` against `t` over the second half of
/// the nonnegative nodes.
pub fn decay_rate(w: &CylinderField) -> f64 {
    let g = &w.grid;
    let pts: Vec<(f64, f64)> = g
        .t_nodes
        .iter()
        .enumerate()
        .filter(|(_, &t)| t >= 0.5 * g.half_length())
        .map(|(i, &t)| (t, w.row(i).iter().fold(0.0f64, |a, v| a.max(v.abs())).ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cylinder::operator::{apply_delta0, interior_sup};
    use crate::geometry::Dimension;
    use crate::spectral::ThetaGrid;

    fn grid(n: usize) -> CylinderGrid {
        let th = ThetaGrid::with_defaults(Dimension::new(n).unwrap()).unwrap();
        CylinderGrid::new(4.0, 161, th).unwrap()
    }

    #[test]
    fn low_modes_rejected() {
        let d = Dimension::new(3).unwrap();
        let h = BoundaryData::pure_mode(d, 12, 1, 1.0);
        assert!(matches!(poisson_extension(&h, &grid(3)), Err(GluerError::LowModesPresent { .. })));
    }

    #[test]
    fn zero_data() {
        let d = Dimension::new(3).unwrap();
        let w = poisson_extension(&BoundaryData::zeros(d, 12), &grid(3)).unwrap();
        assert_eq!(w.sup(), 0.0);
    }

    #[test]
    fn decay_rates_match_indicial_roots() {
        for n in 3..=5 {
            let d = Dimension::new(n).unwrap();
            for j in 2..=4 {
                let h = BoundaryData::pure_mode(d, 12, j, 1.0);
                let w = poisson_extension(&h, &grid(n)).unwrap();
                let (_, dj) = eigen_data(d, j);
                let r = decay_rate(&w);
                assert!((r + dj).abs() < 0.01 * dj, "n={n} j={j} rate={r}");
            }
        }
    }

    #[test]
    fn extension_is_harmonic() {
        let d = Dimension::new(4).unwrap();
        let mut h = BoundaryData::zeros(d, 12);
        h.coeffs[2] = 0.3;
        h.coeffs[3] = -0.1;
        h.coeffs[5] = 0.05;
        let th = ThetaGrid::with_defaults(d).unwrap();
        let err = |nt: usize| {
            let g = CylinderGrid::new(1.0, nt, th.clone()).unwrap();
            interior_sup(&apply_delta0(&poisson_extension(&h, &g).unwrap()).unwrap())
        };
        let (e1, e2) = (err(161), err(321));
        assert!(((e1 / e2).log2() - 2.0).abs() < 0.1, "{e1:e} {e2:e}");
    }

    #[test]
    fn shifted_extension_is_symmetric() {
        let d = Dimension::new(3).unwrap();
        let mut h = BoundaryData::zeros(d, 12);
        h.coeffs[2] = 1.0;
        h.coeffs[3] = 0.5;
        let th = ThetaGrid::with_defaults(d).unwrap();
        let g = CylinderGrid::new(2.0, 81, th).unwrap();
        let w = shifted_poisson_extension(&h, 2.0, &g).unwrap();
        assert!(w.symmetry_defect() < 1e-13 * w.sup());
    }
}

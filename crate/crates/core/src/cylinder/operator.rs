use super::grid::CylinderField;
use crate::error::{GluerError, Result};
use crate::geometry::Catenoid;
use crate::spectral::eigen_data;

/// `Delta_0 w = w_tt + Delta_S w - ((n-2)/2)^2 w`: spherical part through the
/// mode transform, `t`-part by centred differences (one-sided at the ends).
pub fn apply_delta0(w: &CylinderField) -> Result<CylinderField> {
    let g = &w.grid;
    let nt = g.nt();
    if nt < 5 {
        return Err(GluerError::GridTooCoarse { axis: "t", points: nt, required: 5 });
    }
    let n = g.n();
    let m = g.nth();
    let c = (n.as_f64() - 2.0) / 2.0;
    let modes = w.to_modes();
    let lap_modes: Vec<Vec<f64>> = modes
        .iter()
        .enumerate()
        .map(|(j, cj)| {
            let (lam, _) = eigen_data(n, j);
            cj.iter().map(|v| -lam * v).collect()
        })
        .collect();
    let mut out = CylinderField::from_modes(g, &lap_modes);
    let h2 = g.ht * g.ht;
    for i in 0..nt {
        for k in 0..m {
            let f = |r: usize| w.values[r * m + k];
            let d2 = if i == 0 {
                (2.0 * f(0) - 5.0 * f(1) + 4.0 * f(2) - f(3)) / h2
            } else if i == nt - 1 {
                (2.0 * f(i) - 5.0 * f(i - 1) + 4.0 * f(i - 2) - f(i - 3)) / h2
            } else {
                (f(i + 1) - 2.0 * f(i) + f(i - 1)) / h2
            };
            out.values[i * m + k] += d2 - c * c * f(i);
        }
    }
    Ok(out)
}

/// Conjugate Jacobi operator `L = Delta_0 + n(3n-2)/4 phi^(2-2n)`.
pub fn apply_l(w: &CylinderField, cat: &Catenoid) -> Result<CylinderField> {
    let mut out = apply_delta0(w)?;
    let m = w.grid.nth();
    for (i, &t) in w.grid.t_nodes.iter().enumerate() {
        let v = cat.potential(t);
        for k in 0..m {
            out.values[i * m + k] += v * w.values[i * m + k];
        }
    }
    Ok(out)
}

/// Sup over rows that used centred stencils only.
pub fn interior_sup(f: &CylinderField) -> f64 {
    let m = f.grid.nth();
    let nt = f.grid.nt();
    f.values[m..(nt - 1) * m].iter().fold(0.0, |a, v| a.max(v.abs()))
}

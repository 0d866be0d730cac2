use super::grid::{CylinderField, CylinderGrid};
use crate::geometry::profile::smoothstep;

/// Number of extra nodes per side covering the unit collar.
pub fn collar_nodes(grid: &CylinderGrid) -> usize {
    (1.0 / grid.ht - 1e-9).ceil() as usize + 1
}

/// Extends `f` from `[-t_eps, t_eps]` to the real line (truncated one node
/// past the unit collar): identity inside, the end values damped by the
/// cutoff `1 - smoothstep(|t| - t_eps)` in the collar, zero beyond.
pub fn extend_e_eps(f: &CylinderField) -> CylinderField {
    let g = &f.grid;
    let extra = collar_nodes(g);
    let big = g.extended(extra);
    let m = g.nth();
    let nt = g.nt();
    let t_eps = g.half_length();
    let mut out = CylinderField::zeros(&big);
    for (i, &t) in big.t_nodes.iter().enumerate() {
        let row = if i < extra {
            let c = 1.0 - smoothstep(-t - t_eps);
            f.row(0).iter().map(|v| c * v).collect::<Vec<_>>()
        } else if i >= extra + nt {
            let c = 1.0 - smoothstep(t - t_eps);
            f.row(nt - 1).iter().map(|v| c * v).collect()
        } else {
            f.row(i - extra).to_vec()
        };
        out.values[i * m..(i + 1) * m].copy_from_slice(&row);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cylinder::grid::{weighted_norm, WeightedNormSpec};
    use crate::geometry::{Dimension, ScaleParameters};
    use crate::spectral::ThetaGrid;

    fn grid(t_eps: f64) -> CylinderGrid {
        let th = ThetaGrid::with_defaults(Dimension::new(3).unwrap()).unwrap();
        CylinderGrid::with_spacing(t_eps, 0.05, th).unwrap()
    }

    #[test]
    fn constant_is_damped_to_zero() {
        let g = grid(2.0);
        let e = extend_e_eps(&CylinderField::from_fn(&g, |_, _| 1.0));
        for (i, &t) in e.grid.t_nodes.iter().enumerate() {
            for v in e.row(i) {
                assert!(*v <= 1.0 && *v >= 0.0);
                if t.abs() >= 3.0 - 1e-12 {
                    assert_eq!(*v, 0.0);
                }
            }
        }
    }

    #[test]
    fn identity_on_the_original_domain() {
        let g = grid(2.0);
        let f = CylinderField::from_fn(&g, |t, th| if t.abs() <= 1.0 { (1.0 - t * t).powi(3) * th.cos() } else { 0.0 });
        let e = extend_e_eps(&f);
        assert_eq!(e.restrict(&g).unwrap().values, f.values);
        assert!(e.values.iter().zip(e.grid.t_nodes.iter().flat_map(|t| std::iter::repeat(*t).take(g.nth())))
            .all(|(v, t)| t.abs() <= 2.0 + 1e-12 || *v == 0.0));
    }

    #[test]
    fn weighted_norm_ratio_is_uniform_in_eps() {
        let n = Dimension::new(3).unwrap();
        let spec = WeightedNormSpec::default_for(n);
        let ratios: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&eps| {
                let s = ScaleParameters::new(n, eps).unwrap();
                let g = grid(s.t_eps);
                let f = CylinderField::from_fn(&g, |t, th| t.cosh().powf(spec.delta) * (1.0 + 0.3 * th.cos()));
                let e = extend_e_eps(&f);
                weighted_norm(&e, spec) / weighted_norm(&f, spec)
            })
            .collect();
        let spread = ratios.iter().cloned().fold(0.0, f64::max) / ratios.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 1.2, "{ratios:?}");
    }
}

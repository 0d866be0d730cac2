use serde::{Deserialize, Serialize};

use crate::error::{GluerError, Result};
use crate::geometry::Dimension;
use crate::spectral::{BoundaryData, ThetaGrid};

/// Uniform symmetric grid in `t` times the cell-centred `theta` grid.
#[derive(Debug, Clone)]
pub struct CylinderGrid {
    pub t_nodes: Vec<f64>,
    pub ht: f64,
    pub theta: ThetaGrid,
}

impl CylinderGrid {
    /// `nt` nodes on `[-half_length, half_length]`, mirror-exact.
    pub fn new(half_length: f64, nt: usize, theta: ThetaGrid) -> Result<Self> {
        if nt < 5 {
            return Err(GluerError::GridTooCoarse { axis: "t", points: nt, required: 5 });
        }
        if !(half_length > 0.0) {
            return Err(GluerError::arg("half_length", "must be positive"));
        }
        let ht = 2.0 * half_length / (nt - 1) as f64;
        let t_nodes = (0..nt)
            .map(|i| {
                let j = nt - 1 - i;
                if i < j {
                    -half_length + i as f64 * ht
                } else if i > j {
                    half_length - j as f64 * ht
                } else {
                    0.0
                }
            })
            .collect();
        Ok(CylinderGrid { t_nodes, ht, theta })
    }

    /// Grid on `[-half_length, half_length]` with spacing at most `h`, odd node count.
    pub fn with_spacing(half_length: f64, h: f64, theta: ThetaGrid) -> Result<Self> {
        let half = (half_length / h).ceil().max(2.0) as usize;
        Self::new(half_length, 2 * half + 1, theta)
    }

    /// Same spacing and `theta` grid, `extra` more nodes on each side.
    pub fn extended(&self, extra: usize) -> Self {
        let nt = self.nt() + 2 * extra;
        let half = self.half_length() + extra as f64 * self.ht;
        let mut g = CylinderGrid::new(half, nt, self.theta.clone()).expect("extension of a valid grid");
        g.ht = self.ht;
        g
    }

    pub fn nt(&self) -> usize {
        self.t_nodes.len()
    }

    pub fn nth(&self) -> usize {
        self.theta.len()
    }

    pub fn half_length(&self) -> f64 {
        *self.t_nodes.last().unwrap()
    }

    pub fn n(&self) -> Dimension {
        self.theta.n
    }
}

/// Scalar field on a cylinder grid, row-major `values[i * ntheta + k]`.
#[derive(Debug, Clone)]
pub struct CylinderField {
    pub values: Vec<f64>,
    pub grid: CylinderGrid,
}

impl CylinderField {
    pub fn zeros(grid: &CylinderGrid) -> Self {
        CylinderField { values: vec![0.0; grid.nt() * grid.nth()], grid: grid.clone() }
    }

    pub fn from_fn(grid: &CylinderGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.nt() * grid.nth());
        for &t in &grid.t_nodes {
            for &th in &grid.theta.nodes {
                values.push(f(t, th));
            }
        }
        CylinderField { values, grid: grid.clone() }
    }

    /// `sum_j c_j(t) Y_j(theta)` from per-mode profiles.
    pub fn from_modes(grid: &CylinderGrid, modes: &[Vec<f64>]) -> Self {
        let mut out = Self::zeros(grid);
        let m = grid.nth();
        for (j, c) in modes.iter().enumerate() {
            let y = grid.theta.mode_values(j);
            for i in 0..grid.nt() {
                if c[i] != 0.0 {
                    for k in 0..m {
                        out.values[i * m + k] += c[i] * y[k];
                    }
                }
            }
        }
        out
    }

    /// Per-mode profiles `c_j(t)` for `j = 0..=j_max`.
    pub fn to_modes(&self) -> Vec<Vec<f64>> {
        let m = self.grid.nth();
        let nt = self.grid.nt();
        let jm = self.grid.theta.j_max;
        let mut out = vec![vec![0.0; nt]; jm + 1];
        for i in 0..nt {
            let b = self.grid.theta.analyze(&self.values[i * m..(i + 1) * m]).expect("row length");
            for j in 0..=jm {
                out[j][i] = b.coeffs[j];
            }
        }
        out
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.grid.nth();
        &self.values[i * m..(i + 1) * m]
    }

    pub fn at(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.grid.nth() + k]
    }

    /// Mode coefficients of the row at index `i`.
    pub fn row_data(&self, i: usize) -> BoundaryData {
        self.grid.theta.analyze(self.row(i)).expect("row length")
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, s: f64) -> Self {
        CylinderField { values: self.values.iter().map(|v| v * s).collect(), grid: self.grid.clone() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        CylinderField { values, grid: self.grid.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-1.0))
    }

    /// Largest violation of `w(-t, pi - theta) = w(t, theta)`.
    pub fn symmetry_defect(&self) -> f64 {
        let nt = self.grid.nt();
        let m = self.grid.nth();
        let mut worst: f64 = 0.0;
        for i in 0..nt {
            for k in 0..m {
                worst = worst.max((self.at(i, k) - self.at(nt - 1 - i, m - 1 - k)).abs());
            }
        }
        worst
    }

    /// Averages with the image under `(t, theta) -> (-t, pi - theta)`.
    pub fn symmetrized(&self) -> Self {
        let nt = self.grid.nt();
        let m = self.grid.nth();
        let mut out = self.clone();
        for i in 0..nt {
            for k in 0..m {
                out.values[i * m + k] = 0.5 * (self.at(i, k) + self.at(nt - 1 - i, m - 1 - k));
            }
        }
        out
    }

    /// Restriction to the central `nt` rows of this (extended) grid.
    pub fn restrict(&self, target: &CylinderGrid) -> Result<Self> {
        let extra = self.grid.nt().checked_sub(target.nt()).ok_or_else(|| {
            GluerError::InterfaceMismatch("target grid is longer than the source".into())
        })?;
        if extra % 2 != 0 || target.nth() != self.grid.nth() {
            return Err(GluerError::InterfaceMismatch("grids are not nested".into()));
        }
        let off = extra / 2;
        let m = self.grid.nth();
        let values = self.values[off * m..(off + target.nt()) * m].to_vec();
        Ok(CylinderField { values, grid: target.clone() })
    }
}

/// Weight exponent for `(cosh t)^(-delta)`-weighted norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormSpec {
    pub delta: f64,
}

impl WeightedNormSpec {
    /// Midpoint of the admissible window `(n/2, (n+2)/2)`.
    pub fn default_for(n: Dimension) -> Self {
        WeightedNormSpec { delta: (n.as_f64() + 1.0) / 2.0 }
    }

    pub fn check_admissible(&self, n: Dimension) -> Result<()> {
        let lo = n.as_f64() / 2.0;
        let hi = (n.as_f64() + 2.0) / 2.0;
        if !(self.delta > lo && self.delta < hi) {
            return Err(GluerError::WeightOutOfRange { name: "delta", value: self.delta, lo, hi });
        }
        Ok(())
    }
}

/// Discrete stand-in for the weighted C^2 norm: sup of `u = (cosh t)^(-delta) w`
/// plus sups of its first and second differences in `t` and `theta`.
pub fn weighted_norm(w: &CylinderField, spec: WeightedNormSpec) -> f64 {
    let g = &w.grid;
    let weight: Vec<f64> = g.t_nodes.iter().map(|t| (-spec.delta * log_cosh(*t)).exp()).collect();
    let u: Vec<f64> = w.values.iter().enumerate().map(|(idx, v)| v * weight[idx / g.nth()]).collect();
    derivative_sups(&u, g.nt(), g.nth(), g.ht, g.theta.spacing()).iter().sum()
}

/// Sups of `|u|, |u_t|, |u_th|, |u_tt|, |u_tth|, |u_thth|` with one-sided
/// differences at the `t` ends and even reflection at the poles.
pub fn derivative_sups(u: &[f64], nt: usize, m: usize, ht: f64, hth: f64) -> [f64; 6] {
    let at = |i: usize, k: isize| {
        let kk = if k < 0 {
            (-k - 1) as usize
        } else if k as usize >= m {
            2 * m - 1 - k as usize
        } else {
            k as usize
        };
        u[i * m + kk]
    };
    let dt = |i: usize, k: isize| {
        if i == 0 {
            (-3.0 * at(0, k) + 4.0 * at(1, k) - at(2, k)) / (2.0 * ht)
        } else if i == nt - 1 {
            (3.0 * at(i, k) - 4.0 * at(i - 1, k) + at(i - 2, k)) / (2.0 * ht)
        } else {
            (at(i + 1, k) - at(i - 1, k)) / (2.0 * ht)
        }
    };
    let mut s = [0.0f64; 6];
    for i in 0..nt {
        for k in 0..m as isize {
            let v = at(i, k);
            let d2t = if i == 0 {
                (2.0 * at(0, k) - 5.0 * at(1, k) + 4.0 * at(2, k) - at(3, k)) / (ht * ht)
            } else if i == nt - 1 {
                (2.0 * at(i, k) - 5.0 * at(i - 1, k) + 4.0 * at(i - 2, k) - at(i - 3, k)) / (ht * ht)
            } else {
                (at(i + 1, k) - 2.0 * v + at(i - 1, k)) / (ht * ht)
            };
            let dth = (at(i, k + 1) - at(i, k - 1)) / (2.0 * hth);
            let d2th = (at(i, k + 1) - 2.0 * v + at(i, k - 1)) / (hth * hth);
            let dtth = (dt(i, k + 1) - dt(i, k - 1)) / (2.0 * hth);
            let vals = [v, dt(i, k), dth, d2t, dtth, d2th];
            for (a, b) in s.iter_mut().zip(vals) {
                *a = a.max(b.abs());
            }
        }
    }
    s
}

pub(crate) fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> CylinderGrid {
        let th = ThetaGrid::with_defaults(Dimension::new(n).unwrap()).unwrap();
        CylinderGrid::new(2.0, 41, th).unwrap()
    }

    #[test]
    fn symmetric_nodes() {
        let g = grid(3);
        for i in 0..g.nt() {
            assert_eq!(g.t_nodes[i], -g.t_nodes[g.nt() - 1 - i]);
        }
        assert_eq!(g.t_nodes[20], 0.0);
        let e = g.extended(5);
        assert_eq!(e.nt(), 51);
        assert!((e.ht - g.ht).abs() < 1e-15);
        assert!((e.t_nodes[5] - g.t_nodes[0]).abs() < 1e-14);
    }

    #[test]
    fn norm_of_weight_is_one() {
        let g = grid(3);
        let spec = WeightedNormSpec { delta: 2.0 };
        let w = CylinderField::from_fn(&g, |t, _| t.cosh().powf(2.0));
        assert!((weighted_norm(&w, spec) - 1.0).abs() < 1e-9);
        assert_eq!(weighted_norm(&CylinderField::zeros(&g), spec), 0.0);
    }

    #[test]
    fn norm_is_homogeneous() {
        let g = grid(4);
        let spec = WeightedNormSpec::default_for(Dimension::new(4).unwrap());
        let w = CylinderField::from_fn(&g, |t, th| (t * 1.3).sin() * th.cos() + t * t);
        let a = weighted_norm(&w, spec);
        assert!((weighted_norm(&w.scaled(2.0), spec) - 2.0 * a).abs() < 1e-12 * a);
    }

    #[test]
    fn admissible_window() {
        let n = Dimension::new(3).unwrap();
        assert!(WeightedNormSpec::default_for(n).check_admissible(n).is_ok());
        assert!(WeightedNormSpec { delta: 1.5 }.check_admissible(n).is_err());
        assert!(WeightedNormSpec { delta: 2.5 }.check_admissible(n).is_err());
    }

    #[test]
    fn mode_round_trip_and_symmetry() {
        let g = grid(3);
        let w = CylinderField::from_fn(&g, |t, th| t.sin() * th.cos() + (t * t) * (3.0 * th.cos().powi(2) - 1.0));
        let back = CylinderField::from_modes(&g, &w.to_modes());
        for (a, b) in back.values.iter().zip(&w.values) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(w.symmetry_defect() < 1e-14);
        let asym = CylinderField::from_fn(&g, |t, _| t);
        assert!(asym.symmetry_defect() > 1.0);
        assert!(asym.symmetrized().sup() < 1e-14);
    }
}

//! Finite-difference mean curvature of an axisymmetric hypersurface given by
//! its profile surface in the half-space (a, b, c), b = orbit radius.

use crate::error::{GluerError, Result};

pub type P3 = [f64; 3];

/// A sampled two-parameter immersion, row-major with index `i * nv + j`.
#[derive(Debug, Clone)]
pub struct SampledSurface {
    pub nu: usize,
    pub nv: usize,
    pub du: f64,
    pub dv: f64,
    pub points: Vec<P3>,
}

#[derive(Debug, Clone)]
pub struct CurvatureField {
    pub nu: usize,
    pub nv: usize,
    /// Sum of principal curvatures, oriented by the reference field.
    pub h: Vec<f64>,
    pub normals: Vec<P3>,
    /// True where only centered stencils were used.
    pub interior: Vec<bool>,
}

impl CurvatureField {
    pub fn interior_sup(&self) -> f64 {
        self.h
            .iter()
            .zip(&self.interior)
            .filter(|(_, &m)| m)
            .fold(0.0, |acc, (v, _)| acc.max(v.abs()))
    }
}

fn dot(a: P3, b: P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: P3, b: P3) -> P3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn comb(c: &[f64], p: &[P3], scale: f64) -> P3 {
    let mut out = [0.0; 3];
    for (ci, pi) in c.iter().zip(p) {
        for k in 0..3 {
            out[k] += ci * pi[k];
        }
    }
    [out[0] * scale, out[1] * scale, out[2] * scale]
}

/// First and second derivative stencils at index `i` of `m` samples.
/// Returns (offset list, first-derivative weights, second-derivative weights, centered).
fn stencil(i: usize, m: usize) -> (Vec<isize>, [f64; 4], [f64; 4], bool) {
    if i > 0 && i + 1 < m {
        (vec![-1, 0, 1], [-0.5, 0.0, 0.5, 0.0], [1.0, -2.0, 1.0, 0.0], true)
    } else if i == 0 {
        (vec![0, 1, 2, 3], [-1.5, 2.0, -0.5, 0.0], [2.0, -5.0, 4.0, -1.0], false)
    } else {
        (vec![0, -1, -2, -3], [1.5, -2.0, 0.5, 0.0], [2.0, -5.0, 4.0, -1.0], false)
    }
}

/// Mean curvature (trace of the second fundamental form) of the hypersurface
/// obtained by rotating the profile surface about `b = 0` through an
/// `orbit_dim`-sphere. With `orbit_dim = 0` this is a surface in R^3.
///
/// `reference`, if given, orients the normal (N . ref > 0).
pub fn mean_curvature(s: &SampledSurface, orbit_dim: usize, reference: Option<&[P3]>) -> Result<CurvatureField> {
    if s.nu < 5 {
        return Err(GluerError::GridTooCoarse { axis: "u", points: s.nu, required: 5 });
    }
    if s.nv < 5 {
        return Err(GluerError::GridTooCoarse { axis: "v", points: s.nv, required: 5 });
    }
    if s.points.len() != s.nu * s.nv {
        return Err(GluerError::arg("points", "length does not match nu * nv"));
    }
    let (nu, nv) = (s.nu, s.nv);
    let at = |i: isize, j: isize| s.points[i as usize * nv + j as usize];
    let mut h = vec![0.0; nu * nv];
    let mut normals = vec![[0.0; 3]; nu * nv];
    let mut interior = vec![false; nu * nv];
    for i in 0..nu {
        let (ou, d1u, d2u, cu) = stencil(i, nu);
        for j in 0..nv {
            let (ov, d1v, d2v, cv) = stencil(j, nv);
            let ii = i as isize;
            let jj = j as isize;
            let pu: Vec<P3> = ou.iter().map(|&o| at(ii + o, jj)).collect();
            let pv: Vec<P3> = ov.iter().map(|&o| at(ii, jj + o)).collect();
            let xu = comb(&d1u[..pu.len()], &pu, 1.0 / s.du);
            let xv = comb(&d1v[..pv.len()], &pv, 1.0 / s.dv);
            let xuu = comb(&d2u[..pu.len()], &pu, 1.0 / (s.du * s.du));
            let xvv = comb(&d2v[..pv.len()], &pv, 1.0 / (s.dv * s.dv));
            // mixed derivative: tensor product of first-derivative stencils
            let mut xuv = [0.0; 3];
            for (a, &oa) in ou.iter().enumerate() {
                if d1u[a] == 0.0 {
                    continue;
                }
                for (b, &ob) in ov.iter().enumerate() {
                    if d1v[b] == 0.0 {
                        continue;
                    }
                    let p = at(ii + oa, jj + ob);
                    let w = d1u[a] * d1v[b] / (s.du * s.dv);
                    for k in 0..3 {
                        xuv[k] += w * p[k];
                    }
                }
            }
            let mut nrm = cross(xu, xv);
            let len = dot(nrm, nrm).sqrt();
            if !(len > 0.0) {
                return Err(GluerError::arg("points", format!("degenerate immersion at ({i}, {j})")));
            }
            nrm = [nrm[0] / len, nrm[1] / len, nrm[2] / len];
            if let Some(r) = reference {
                if dot(nrm, r[i * nv + j]) < 0.0 {
                    nrm = [-nrm[0], -nrm[1], -nrm[2]];
                }
            }
            let e_ = dot(xu, xu);
            let f_ = dot(xu, xv);
            let g_ = dot(xv, xv);
            let l = dot(xuu, nrm);
            let m = dot(xuv, nrm);
            let nn = dot(xvv, nrm);
            let mut hv = (l * g_ - 2.0 * m * f_ + nn * e_) / (e_ * g_ - f_ * f_);
            if orbit_dim > 0 {
                let b = at(ii, jj)[1];
                hv -= orbit_dim as f64 * nrm[1] / b;
            }
            h[i * nv + j] = hv;
            normals[i * nv + j] = nrm;
            interior[i * nv + j] = cu && cv;
        }
    }
    Ok(CurvatureField { nu, nv, h, normals, interior })
}

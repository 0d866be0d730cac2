//! Mean curvature of the perturbed neck `X + phi^((2-n)/2) w n_eps`, in the
//! meridian coordinates `(x^1, |x'|, x^(n+1))` with `x' = (x^2, .., x^n)`.

use super::fd::{mean_curvature, SampledSurface, P3};
use super::profile::{Catenoid, ScaleParameters};
use crate::cylinder::{CylinderField, CylinderGrid};
use crate::error::{GluerError, Result};

/// Point of the perturbed immersion and the transverse field at `(t, theta)`.
pub fn perturbed_point(cat: &Catenoid, scales: &ScaleParameters, t: f64, theta: f64, w: f64) -> (P3, P3) {
    let n = cat.n.as_f64();
    let phi = cat.phi(t);
    let a = cat.phi_pow(t, 1.0 - n);
    let chi = scales.cutoff(t);
    let s = if t >= 0.0 { 1.0 } else { -1.0 };
    let (c, sn) = (theta.cos(), theta.sin());
    let ne = [-chi * a * c, -chi * a * sn, chi * cat.dlog_phi(t) + s * (1.0 - chi)];
    let amp = cat.phi_pow(t, (2.0 - n) / 2.0) * w;
    let p = [phi * c + amp * ne[0], phi * sn + amp * ne[1], cat.psi(t) + amp * ne[2]];
    (p, ne)
}

/// Samples the immersion with one reflected ghost column beyond each pole.
fn sample(cat: &Catenoid, scales: &ScaleParameters, w: &CylinderField) -> (SampledSurface, Vec<P3>) {
    let g = &w.grid;
    let m = g.nth();
    let nv = m + 2;
    let mut points = Vec::with_capacity(g.nt() * nv);
    let mut refs = Vec::with_capacity(g.nt() * nv);
    let mirror = |p: P3| [p[0], -p[1], p[2]];
    for (i, &t) in g.t_nodes.iter().enumerate() {
        let row: Vec<(P3, P3)> = (0..m)
            .map(|k| perturbed_point(cat, scales, t, g.theta.nodes[k], w.at(i, k)))
            .collect();
        points.push(mirror(row[0].0));
        refs.push(mirror(row[0].1));
        for (p, r) in &row {
            points.push(*p);
            refs.push(*r);
        }
        points.push(mirror(row[m - 1].0));
        refs.push(mirror(row[m - 1].1));
    }
    (SampledSurface { nu: g.nt(), nv, du: g.ht, dv: g.theta.spacing(), points }, refs)
}

/// Mean curvature (sum of principal curvatures, oriented by `n_eps`) at the
/// grid nodes. Rows `t = +-t_max` use one-sided stencils.
pub fn mean_curvature_normal_graph(cat: &Catenoid, scales: &ScaleParameters, w: &CylinderField) -> Result<CylinderField> {
    let g = &w.grid;
    if g.nt() < 5 || g.nth() < 5 {
        return Err(GluerError::GridTooCoarse { axis: "t/theta", points: g.nt().min(g.nth()), required: 5 });
    }
    if g.half_length() > scales.t_eps * (1.0 + 1e-12) {
        return Err(GluerError::OutOfDomain { t: g.half_length(), t_eps: scales.t_eps });
    }
    let (surf, refs) = sample(cat, scales, w);
    let h = mean_curvature(&surf, cat.n.get() - 2, Some(&refs))?;
    let m = g.nth();
    let mut out = CylinderField::zeros(g);
    for i in 0..g.nt() {
        for k in 0..m {
            out.values[i * m + k] = h.h[i * (m + 2) + k + 1];
        }
    }
    Ok(out)
}

/// `phi^((n+2)/2) H`, whose linearisation at `w = 0` is `L` where `n_eps = n`.
pub fn conjugated_residual(cat: &Catenoid, scales: &ScaleParameters, w: &CylinderField) -> Result<CylinderField> {
    let mut h = mean_curvature_normal_graph(cat, scales, w)?;
    let m = w.grid.nth();
    let p = (cat.n.as_f64() + 2.0) / 2.0;
    for (i, &t) in w.grid.t_nodes.iter().enumerate() {
        let f = cat.phi_pow(t, p);
        for k in 0..m {
            h.values[i * m + k] *= f;
        }
    }
    Ok(h)
}

/// Sup-norms over interior rows of `M(s w) - M(0) - s D` and of the same
/// minus `s^2 Q`, where `D` and `Q` are Richardson-extrapolated central
/// differences of `s -> M(s w)` at step `sigma`.
#[derive(Debug, Clone)]
pub struct Remainders {
    pub quadratic: Vec<f64>,
    pub cubic: Vec<f64>,
}

pub fn nonlinear_remainders(
    cat: &Catenoid,
    scales: &ScaleParameters,
    w: &CylinderField,
    amplitudes: &[f64],
    sigma: f64,
) -> Result<Remainders> {
    let m = |s: f64| conjugated_residual(cat, scales, &w.scaled(s));
    let m0 = m(0.0)?;
    let diffs = |sg: f64| -> Result<(CylinderField, CylinderField)> {
        let p = m(sg)?;
        let q = m(-sg)?;
        let d1 = p.sub(&q).scaled(0.5 / sg);
        let d2 = p.add(&q).sub(&m0.scaled(2.0)).scaled(0.5 / (sg * sg));
        Ok((d1, d2))
    };
    let (a1, a2) = diffs(sigma)?;
    let (b1, b2) = diffs(0.5 * sigma)?;
    let d1 = b1.scaled(4.0 / 3.0).sub(&a1.scaled(1.0 / 3.0));
    let d2 = b2.scaled(4.0 / 3.0).sub(&a2.scaled(1.0 / 3.0));
    let mut quadratic = Vec::new();
    let mut cubic = Vec::new();
    for &s in amplitudes {
        let r2 = m(s)?.sub(&m0).sub(&d1.scaled(s));
        let r3 = r2.sub(&d2.scaled(s * s));
        quadratic.push(crate::cylinder::interior_sup(&r2));
        cubic.push(crate::cylinder::interior_sup(&r3));
    }
    Ok(Remainders { quadratic, cubic })
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Neck grid on `[-t_eps, t_eps]` with spacing at most `ht`.
pub fn neck_grid(scales: &ScaleParameters, ht: f64, theta: crate::spectral::ThetaGrid) -> Result<CylinderGrid> {
    CylinderGrid::with_spacing(scales.t_eps, ht, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cylinder::operator::{apply_l, interior_sup};
    use crate::cylinder::{jacobi_field, JacobiFieldKind};
    use crate::geometry::Dimension;
    use crate::spectral::ThetaGrid;

    fn setup(n: usize) -> (Catenoid, ScaleParameters) {
        let d = Dimension::new(n).unwrap();
        (Catenoid::new(d).unwrap(), ScaleParameters::new(d, 1e-4).unwrap())
    }

    #[test]
    fn catenoid_is_minimal_to_second_order() {
        for n in [3, 4] {
            let (cat, s) = setup(n);
            let err = |ht: f64, m: usize| {
                let th = ThetaGrid::new(cat.n, m, 12).unwrap();
                let g = neck_grid(&s, ht, th).unwrap();
                let h = mean_curvature_normal_graph(&cat, &s, &CylinderField::zeros(&g)).unwrap();
                interior_sup(&h)
            };
            let (e1, e2) = (err(0.08, 32), err(0.04, 64));
            let p = (e1 / e2).log2();
            assert!((p - 2.0).abs() < 0.2, "n={n} {e1:e} {e2:e}");
        }
    }

    #[test]
    fn linearisation_is_l_in_the_core() {
        // Delta_s [phi^((n+2)/2) H(s w)] at s = 0 against L w, away from the collar
        let (cat, s) = setup(3);
        let th = ThetaGrid::new(cat.n, 64, 12).unwrap();
        let g = neck_grid(&s, 0.02, th.clone()).unwrap();
        let w = CylinderField::from_fn(&g, |t, x| (-t * t).exp() * (1.0 + th.eval_mode(2, x)));
        let sig = 1e-4;
        let p = conjugated_residual(&cat, &s, &w.scaled(sig)).unwrap();
        let q = conjugated_residual(&cat, &s, &w.scaled(-sig)).unwrap();
        let lin = p.sub(&q).scaled(0.5 / sig);
        let lw = apply_l(&w, &cat).unwrap();
        let core = s.t_eps - 2.0 * s.collar_width();
        let m = g.nth();
        let mut worst: f64 = 0.0;
        for (i, &t) in g.t_nodes.iter().enumerate() {
            if t.abs() < core {
                for k in 0..m {
                    worst = worst.max((lin.values[i * m + k] - lw.values[i * m + k]).abs());
                }
            }
        }
        assert!(worst < 2e-2 * lw.sup(), "{worst} vs {}", lw.sup());
    }

    #[test]
    fn jacobi_perturbation_is_quadratic() {
        let (cat, s) = setup(3);
        let th = ThetaGrid::new(cat.n, 48, 12).unwrap();
        let g = neck_grid(&s, 0.03, th).unwrap();
        let phi = jacobi_field(JacobiFieldKind::TranslateOrthogonal, &cat, &g);
        let r = nonlinear_remainders(&cat, &s, &phi, &[1e-2, 1e-3, 1e-4], 1e-3).unwrap();
        let slope = fit_slope(&[1e-2, 1e-3, 1e-4], &r.quadratic);
        assert!((slope - 2.0).abs() < 0.1, "{:?}", r.quadratic);
    }

    #[test]
    fn generic_bump_has_cubic_remainder() {
        let (cat, s) = setup(3);
        let th = ThetaGrid::new(cat.n, 48, 12).unwrap();
        let g = neck_grid(&s, 0.03, th.clone()).unwrap();
        let w = CylinderField::from_fn(&g, |t, x| (-t * t).exp() * (1.0 + th.eval_mode(2, x) + 0.5 * th.eval_mode(3, x)));
        let small = [1e-2, 1e-3, 1e-4];
        let p2 = fit_slope(&small, &nonlinear_remainders(&cat, &s, &w, &small, 1e-3).unwrap().quadratic);
        let amps = [4e-2, 2e-2, 1e-2];
        let p3 = fit_slope(&amps, &nonlinear_remainders(&cat, &s, &w, &amps, 1e-3).unwrap().cubic);
        assert!((p2 - 2.0).abs() < 0.1, "{p2}");
        assert!((p3 - 3.0).abs() < 0.15, "{p3}");
    }
}

//! Cartesian derivatives of bipolar grid fields, the graph nonlinearity
//! `Xi`, and the weighted norm on the two-puncture domain.

use num_complex::Complex64;

use super::bipolar::PlanarField;
use crate::geometry::graph::xi;

/// Meridian derivatives `(w1, wr, w11, w1r, wrr)` at every node, by second
/// order differences in `(tau, sigma)` and the conformal chain rule.
pub fn cartesian_derivatives(w: &PlanarField) -> Vec<[f64; 5]> {
    let g = &w.grid;
    let (nt, ns) = (g.ntau, g.nsigma);
    let (ht, hs) = (g.htau(), g.hsigma());
    let at = |i: usize, k: isize| {
        let kk = if k < 0 {
            (-k - 1) as usize
        } else if k as usize >= ns {
            2 * ns - 1 - k as usize
        } else {
            k as usize
        };
        w.at(i, kk)
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
    let mut out = vec![[0.0; 5]; nt * ns];
    for i in 0..nt {
        for k in 0..ns {
            let kk = k as isize;
            let c = at(i, kk);
            let vt = dt(i, kk);
            let vs = (at(i, kk + 1) - at(i, kk - 1)) / (2.0 * hs);
            let vss = (at(i, kk + 1) - 2.0 * c + at(i, kk - 1)) / (hs * hs);
            let vtt = if i == 0 {
                (2.0 * at(0, kk) - 5.0 * at(1, kk) + 4.0 * at(2, kk) - at(3, kk)) / (ht * ht)
            } else if i == nt - 1 {
                (2.0 * at(i, kk) - 5.0 * at(i - 1, kk) + 4.0 * at(i - 2, kk) - at(i - 3, kk)) / (ht * ht)
            } else {
                (at(i + 1, kk) - 2.0 * c + at(i - 1, kk)) / (ht * ht)
            };
            let vts = (dt(i, kk + 1) - dt(i, kk - 1)) / (2.0 * hs);
            let (tau, sigma) = (g.tau(i), g.sigma(k));
            out[i * ns + k] = chain_rule(g.map_derivatives(tau, sigma), [vt, vs, vtt, vss, vts]);
        }
    }
    out
}

/// `(v_tau, v_sigma, v_tautau, v_sigmasigma, v_tausigma)` to `(w1, wr, w11, w1r, wrr)`.
fn chain_rule((fp, ratio): (Complex64, Complex64), [vt, vs, vtt, vss, vts]: [f64; 5]) -> [f64; 5] {
    let dw = Complex64::new(0.5 * vs, -0.5 * vt);
    let dww = Complex64::new(0.25 * (vss - vtt), -0.5 * vts);
    let dz = 2.0 * dw / fp;
    let d2 = 4.0 * (dww - ratio * dw) / (fp * fp);
    let lap2 = (vss + vtt) / fp.norm_sqr();
    [dz.re, -dz.im, 0.5 * (d2.re + lap2), -0.5 * d2.im, 0.5 * (lap2 - d2.re)]
}

/// `Xi(w)` at every node from precomputed derivatives.
pub fn xi_from_derivatives(template: &PlanarField, d: &[[f64; 5]]) -> PlanarField {
    PlanarField { values: d.iter().map(|v| xi(*v)).collect(), ..template.clone() }
}

pub fn xi_nonlinearity(w: &PlanarField) -> PlanarField {
    xi_from_derivatives(w, &cartesian_derivatives(w))
}

/// Local length scale and weight at `(x1, r)`: `(d, d^(-nu))` within 1/2 of
/// a puncture, `(|x|, |x|^(-mu))` beyond `|x| = 2`, `(1, 1)` in between.
pub fn local_scale(x1: f64, r: f64, mu: f64, nu: f64) -> (f64, f64) {
    let d = ((x1 - 1.0).hypot(r)).min((x1 + 1.0).hypot(r));
    let rad = x1.hypot(r);
    if d < 0.5 {
        (d, d.powf(-nu))
    } else if rad > 2.0 {
        (rad, rad.powf(-mu))
    } else {
        (1.0, 1.0)
    }
}

/// Discrete `C^2_{mu, nu}` norm: sup of `weight (|w| + l |grad w| + l^2 |D^2 w|)`.
pub fn planar_weighted_norm(w: &PlanarField) -> f64 {
    let g = &w.grid;
    let d = cartesian_derivatives(w);
    let n = g.n.as_f64();
    let mut s: f64 = 0.0;
    for i in 0..g.ntau {
        for k in 0..g.nsigma {
            let (x, r) = g.node(i, k);
            let (l, wt) = local_scale(x, r, w.mu, w.nu);
            let [w1, wr, w11, w1r, wrr] = d[i * g.nsigma + k];
            let grad = w1.hypot(wr);
            let mut hess = w11.abs().max(w1r.abs()).max(wrr.abs());
            if n > 2.0 && r > 0.0 {
                hess = hess.max((wr / r).abs());
            }
            s = s.max(wt * (w.at(i, k).abs() + l * grad + l * l * hess));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Dimension;
    use crate::planar::bipolar::PlanarGrid;

    fn grid(ns: usize) -> PlanarGrid {
        PlanarGrid::new(Dimension::new(3).unwrap(), 0.1, ns).unwrap()
    }

    #[test]
    fn derivatives_of_a_polynomial() {
        let f = |x: f64, r: f64| x * x * r * r + 0.5 * x * r * r - 0.2 * x;
        let exact = |x: f64, r: f64| {
            [2.0 * x * r * r + 0.5 * r * r - 0.2, 2.0 * x * x * r + x * r, 2.0 * r * r, 4.0 * x * r + r, 2.0 * x * x + x]
        };
        let err = |ns: usize| {
            let g = grid(ns);
            let d = cartesian_derivatives(&PlanarField::from_fn(&g, f));
            let mut e: f64 = 0.0;
            for i in 1..g.ntau - 1 {
                for k in 0..g.nsigma {
                    let (x, r) = g.node(i, k);
                    if x.hypot(r) < 2.0 && (x - 1.0).hypot(r).min((x + 1.0).hypot(r)) > 0.3 {
                        let ex = exact(x, r);
                        for c in 0..5 {
                            e = e.max((d[i * g.nsigma + k][c] - ex[c]).abs());
                        }
                    }
                }
            }
            e
        };
        let (e1, e2) = (err(48), err(96));
        assert!(e2 < 0.1, "{e2}");
        assert!(((e1 / e2).log2() - 2.0).abs() < 0.3, "{e1} {e2}");
    }

    #[test]
    fn affine_xi_vanishes_under_refinement() {
        let bulk = |ns: usize| {
            let g = grid(ns);
            let x = xi_nonlinearity(&PlanarField::from_fn(&g, |x, _| 0.3 * x + 1.0));
            let mut s: f64 = 0.0;
            for i in 0..g.ntau {
                for k in 0..g.nsigma {
                    let (x1, r) = g.node(i, k);
                    if x1.hypot(r) < 3.0 {
                        s = s.max(x.at(i, k).abs());
                    }
                }
            }
            s
        };
        let (e1, e2) = (bulk(48), bulk(96));
        assert!(e2 < 1e-3 && e1 / e2 > 3.0, "{e1} {e2}");
    }

    #[test]
    fn xi_is_cubic() {
        let g = grid(48);
        let w = PlanarField::from_fn(&g, |x, r| x * r * (-(x * x + r * r)).exp());
        let s = [1e-1, 1e-2, 1e-3];
        let sups: Vec<f64> = s.iter().map(|a| xi_nonlinearity(&w.scaled(*a)).sup()).collect();
        let p = crate::geometry::normal_graph::fit_slope(&s, &sups);
        assert!((p - 3.0).abs() < 0.1, "{p}");
    }

    #[test]
    fn weights_by_region() {
        let (l, w) = local_scale(1.1, 0.0, -0.5, -0.5);
        assert!((l - 0.1).abs() < 1e-15 && (w - 0.1f64.sqrt()).abs() < 1e-15);
        assert_eq!(local_scale(0.0, 1.0, -0.5, -0.5), (1.0, 1.0));
        let (l, w) = local_scale(0.0, 4.0, -0.5, -0.5);
        assert!((l - 4.0).abs() < 1e-15 && (w - 2.0).abs() < 1e-15);
    }
}

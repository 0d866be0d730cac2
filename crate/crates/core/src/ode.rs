//! Small explicit integrators: an adaptive Dormand-Prince 5(4) pair and a
//! fixed-step RK4 used by the shooting code.

use crate::error::{GluerError, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t1` with error control.
pub fn dopri5<F>(f: &F, t0: f64, t1: f64, y0: &[f64], rtol: f64, atol: f64) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let dim = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y);
    }
    let dir = span.signum();
    let mut h = dir * (span.abs() / 100.0).min(1e-2);
    let mut k = vec![vec![0.0; dim]; 7];
    let mut steps = 0usize;
    while (t1 - t) * dir > 0.0 {
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        k[0] = f(t, &y);
        for s in 1..7 {
            let mut ys = y.clone();
            for (r, ksr) in k.iter().enumerate().take(s) {
                let a = A[s][r];
                if a != 0.0 {
                    for d in 0..dim {
                        ys[d] += h * a * ksr[d];
                    }
                }
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut y5 = y.clone();
        let mut err = 0.0f64;
        for d in 0..dim {
            let mut s5 = 0.0;
            let mut s4 = 0.0;
            for s in 0..7 {
                s5 += B5[s] * k[s][d];
                s4 += B4[s] * k[s][d];
            }
            y5[d] += h * s5;
            let sc = atol + rtol * y[d].abs().max(y5[d].abs());
            err = err.max((h * (s5 - s4)).abs() / sc);
        }
        if !err.is_finite() || y5.iter().any(|v| !v.is_finite()) {
            h *= 0.25;
        } else if err <= 1.0 {
            t += h;
            y = y5;
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
        steps += 1;
        let tiny = 1e-14 * span.abs();
        if steps > 2_000_000 || (h.abs() < tiny && (t1 - t).abs() > tiny) {
            return Err(GluerError::Solver(format!("adaptive integrator stalled at t = {t}")));
        }
    }
    Ok(y)
}

/// One classical RK4 step.
pub fn rk4_step<F>(f: &F, t: f64, y: &[f64], h: f64) -> Vec<f64>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let n = y.len();
    let k1 = f(t, y);
    let y2: Vec<f64> = (0..n).map(|i| y[i] + 0.5 * h * k1[i]).collect();
    let k2 = f(t + 0.5 * h, &y2);
    let y3: Vec<f64> = (0..n).map(|i| y[i] + 0.5 * h * k2[i]).collect();
    let k3 = f(t + 0.5 * h, &y3);
    let y4: Vec<f64> = (0..n).map(|i| y[i] + h * k3[i]).collect();
    let k4 = f(t + h, &y4);
    (0..n)
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

use serde::{Deserialize, Serialize};

use super::profile::{Catenoid, ScaleParameters};
use crate::error::{GluerError, Result};

/// A point or vector of R^(n+1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbientPoint(pub Vec<f64>);

impl AmbientPoint {
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub point: AmbientPoint,
    pub normal: AmbientPoint,
    pub transverse: AmbientPoint,
}

/// Catenoid point `X = (phi z, psi)`, unit normal `(-phi^(1-n) z, d ln phi)`
/// and the blended transverse field `chi n + sign(t) (1 - chi) e_(n+1)`.
pub fn catenoid_frame(cat: &Catenoid, scales: &ScaleParameters, t: f64, z: &[f64]) -> Result<Frame> {
    let n = cat.n.get();
    if z.len() != n {
        return Err(GluerError::arg("z", format!("expected {n} components, got {}", z.len())));
    }
    let zn = z.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (zn - 1.0).abs() > 1e-12 {
        return Err(GluerError::arg("z", format!("not a unit vector (|z| = {zn})")));
    }
    if t.abs() > scales.t_eps {
        return Err(GluerError::OutOfDomain { t, t_eps: scales.t_eps });
    }
    let phi = cat.phi(t);
    let a = cat.phi_pow(t, 1.0 - n as f64);
    let b = cat.dlog_phi(t);

    let mut point = Vec::with_capacity(n + 1);
    point.extend(z.iter().map(|zi| phi * zi));
    point.push(cat.psi(t));

    let mut normal = Vec::with_capacity(n + 1);
    normal.extend(z.iter().map(|zi| -a * zi));
    normal.push(b);

    let chi = scales.cutoff(t);
    let s = if t >= 0.0 { 1.0 } else { -1.0 };
    let mut transverse: Vec<f64> = normal.iter().map(|c| chi * c).collect();
    transverse[n] += s * (1.0 - chi);

    Ok(Frame {
        point: AmbientPoint(point),
        normal: AmbientPoint(normal),
        transverse: AmbientPoint(transverse),
    })
}

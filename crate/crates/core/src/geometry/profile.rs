//! The n-catenoid profile `phi(t) = cosh((n-1) t)^(1/(n-1))`, its height
//! function `psi(t) = int_0^t phi^(2-n)`, and the gluing scales.

use serde::{Deserialize, Serialize};

use crate::error::{GluerError, Result};
use crate::quadrature::{adaptive_simpson, composite_gauss};

/// Hypersurface dimension; the ambient space is R^(n+1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(GluerError::InvalidDimension(n));
        }
        Ok(Dimension(n))
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }
}

/// Closed-form catenoid profile for a fixed dimension.
///
/// Evaluates `phi` and its derivatives exactly; `psi` is computed by
/// panel Gauss-Legendre quadrature of `phi^(2-n)`.
#[derive(Debug, Clone, Copy)]
pub struct Catenoid {
    pub n: Dimension,
    d0: f64,
}

impl Catenoid {
    pub fn new(n: Dimension) -> Result<Self> {
        let d0 = asymptotic_height(n)?;
        Ok(Catenoid { n, d0 })
    }

    fn k(&self) -> f64 {
        self.n.as_f64() - 1.0
    }

    pub fn phi(&self, t: f64) -> f64 {
        let k = self.k();
        log_cosh(k * t).mul_add(1.0 / k, 0.0).exp()
    }

    /// `ln phi(t)`, stable for large |t|.
    pub fn ln_phi(&self, t: f64) -> f64 {
        let k = self.k();
        log_cosh(k * t) / k
    }

    pub fn dphi(&self, t: f64) -> f64 {
        self.phi(t) * (self.k() * t).tanh()
    }

    pub fn d2phi(&self, t: f64) -> f64 {
        let k = self.k();
        let th = (k * t).tanh();
        self.phi(t) * (th * th + k * (1.0 - th * th))
    }

    /// `phi^p` evaluated through logarithms.
    pub fn phi_pow(&self, t: f64, p: f64) -> f64 {
        (p * self.ln_phi(t)).exp()
    }

    pub fn psi(&self, t: f64) -> f64 {
        let n = self.n.as_f64();
        let sign = t.signum();
        let a = t.abs();
        sign * composite_gauss(|s| self.phi_pow(s, 2.0 - n), 0.0, a, 0.125, 16)
    }

    pub fn dpsi(&self, t: f64) -> f64 {
        self.phi_pow(t, 2.0 - self.n.as_f64())
    }

    pub fn d2psi(&self, t: f64) -> f64 {
        let n = self.n.as_f64();
        (2.0 - n) * self.phi_pow(t, 1.0 - n) * self.dphi(t)
    }

    /// `d0 = lim_{t -> inf} psi(t)`.
    pub fn d0(&self) -> f64 {
        self.d0
    }

    /// `ln phi` and `d/dt ln phi = tanh((n-1) t)`.
    pub fn dlog_phi(&self, t: f64) -> f64 {
        (self.k() * t).tanh()
    }

    /// Potential `n(3n-2)/4 phi^(2-2n)` of the conjugated Jacobi operator.
    pub fn potential(&self, t: f64) -> f64 {
        let n = self.n.as_f64();
        n * (3.0 * n - 2.0) / 4.0 * self.phi_pow(t, 2.0 - 2.0 * n)
    }
}

fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `d0 = int_0^inf phi^(2-n) ds` by adaptive Simpson on `[0, T]` plus the
/// analytic integral of the bound `2^((n-2)/(n-1)) e^{-(n-2) s}` beyond `T`.
pub fn asymptotic_height(n: Dimension) -> Result<f64> {
    let nf = n.as_f64();
    let k = nf - 1.0;
    let a = (nf - 2.0) / k;
    let prefactor = 2f64.powf(a);
    // tail of the bound: prefactor e^{-(n-2)T} / (n-2) < 1e-12
    let tail_target: f64 = 1e-12;
    let cut = ((prefactor / ((nf - 2.0) * tail_target)).ln() / (nf - 2.0)).max(1.0);
    let integrand = |s: f64| (-a * log_cosh(k * s)).exp();
    let body = adaptive_simpson(&integrand, 0.0, cut, 1e-14, 50).map_err(|e| {
        GluerError::Quadrature(format!(
            "d0 body integral on [0, {cut:.3}] failed ({e}); tail estimate beyond cut = {:e}",
            prefactor * (-(nf - 2.0) * cut).exp() / (nf - 2.0)
        ))
    })?;
    let tail = prefactor * (-(nf - 2.0) * cut).exp() / (nf - 2.0);
    Ok(body + tail)
}

/// Sampled catenoid profile on a symmetric grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatenoidProfile {
    pub n: Dimension,
    pub t_samples: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub d0: f64,
}

/// Samples the profile on `grid_size` uniform points of `[-t_max, t_max]`.
pub fn build_profile(n: Dimension, t_max: f64, grid_size: usize) -> Result<CatenoidProfile> {
    if !(t_max > 0.0) {
        return Err(GluerError::arg("t_max", "must be positive"));
    }
    if grid_size < 16 {
        return Err(GluerError::arg("grid_size", "must be at least 16"));
    }
    let cat = Catenoid::new(n)?;
    let h = 2.0 * t_max / (grid_size - 1) as f64;
    let t_samples: Vec<f64> = (0..grid_size)
        .map(|i| {
            let j = grid_size - 1 - i;
            // mirror-exact nodes
            if i <= j {
                -t_max + i as f64 * h
            } else {
                t_max - j as f64 * h
            }
        })
        .collect();
    let phi: Vec<f64> = t_samples.iter().map(|&t| cat.phi(t)).collect();
    let dphi: Vec<f64> = t_samples.iter().map(|&t| cat.dphi(t)).collect();

    // cumulative psi on the nonnegative half, mirrored for exact oddness
    let nf = n.as_f64();
    let mut psi = vec![0.0; grid_size];
    let mid = (grid_size - 1) / 2;
    let start = if grid_size % 2 == 1 { mid } else { mid + 1 };
    let mut acc = if grid_size % 2 == 1 {
        0.0
    } else {
        composite_gauss(|s| cat.phi_pow(s, 2.0 - nf), 0.0, t_samples[start], 0.125, 16)
    };
    psi[start] = acc;
    for i in start + 1..grid_size {
        acc += composite_gauss(|s| cat.phi_pow(s, 2.0 - nf), t_samples[i - 1], t_samples[i], 0.125, 16);
        psi[i] = acc;
    }
    for i in 0..grid_size {
        let j = grid_size - 1 - i;
        if i < j {
            psi[i] = -psi[j];
        }
    }
    Ok(CatenoidProfile {
        n,
        t_samples,
        phi,
        psi,
        dphi,
        d0: cat.d0(),
    })
}

/// Gluing scales: `phi^(n-1)(t_eps) = eps^(-n/(3n-2))`, `r_eps = eps^(2/(3n-2))`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct ScaleParameters {
    pub n: Dimension,
    pub epsilon: f64,
    pub t_eps: f64,
    pub r_eps: f64,
}

impl ScaleParameters {
    pub fn new(n: Dimension, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(GluerError::arg("epsilon", format!("{epsilon} not in (0, 1)")));
        }
        let nf = n.as_f64();
        let k = nf - 1.0;
        // phi^(n-1)(t) = cosh((n-1) t), monotone on t >= 0
        let target = epsilon.powf(-nf / (3.0 * nf - 2.0));
        let f = |t: f64| (k * t).cosh();
        let mut lo = 0.0;
        let mut hi = 1.0;
        while f(hi) < target {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * hi.max(1e-300) * 1e-3 {
                break;
            }
        }
        let t_eps = 0.5 * (lo + hi);
        let r_eps = epsilon.powf(2.0 / (3.0 * nf - 2.0));
        Ok(ScaleParameters {
            n,
            epsilon,
            t_eps,
            r_eps,
        })
    }

    /// `eps^(1/(n-1))`, the catenoid scaling factor.
    pub fn catenoid_scale(&self) -> f64 {
        self.epsilon.powf(1.0 / (self.n.as_f64() - 1.0))
    }

    /// `phi(t_eps) = eps^(-n/((3n-2)(n-1)))`.
    pub fn phi_at_t_eps(&self) -> f64 {
        let nf = self.n.as_f64();
        self.epsilon.powf(-nf / ((3.0 * nf - 2.0) * (nf - 1.0)))
    }

    /// Width of the collar where the transverse field is blended from the
    /// normal to the vertical; 1 when the neck is long enough, shrunk to
    /// `t_eps / 3` for short necks so the blend stays inside `(0, t_eps)`.
    pub fn collar_width(&self) -> f64 {
        (self.t_eps / 3.0).min(1.0)
    }

    /// Cutoff `chi_eps(t)`: 1 for `|t| <= t_eps - 2w`, 0 for `|t| >= t_eps - w`.
    pub fn cutoff(&self, t: f64) -> f64 {
        let w = self.collar_width();
        let a = self.t_eps - 2.0 * w;
        1.0 - smoothstep((t.abs() - a) / w)
    }

    /// `eps r_eps^2`, the natural size of boundary data.
    pub fn data_scale(&self) -> f64 {
        self.epsilon * self.r_eps * self.r_eps
    }
}

/// Quintic smoothstep: 0 for x <= 0, 1 for x >= 1, C^2.
pub fn smoothstep(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x * x * x * (x * (6.0 * x - 15.0) + 10.0)
    }
}

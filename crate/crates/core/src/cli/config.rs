//! Run configuration: JSON file, then flags, then validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{GluerError, Result};
use crate::geometry::Dimension;
use crate::matcher::MatchConfig;
use crate::neck::NeckConfig;
use crate::planar::PlanarConfig;
use crate::spectral::ThetaGrid;

pub const DEFAULT_N: usize = 3;
pub const DEFAULT_EPSILON: f64 = 1e-3;
pub const DEFAULT_J_MAX: usize = 12;
pub const DEFAULT_CYLINDER_HT: f64 = 0.04;
pub const DEFAULT_PLANAR_NSIGMA: usize = 96;
pub const DEFAULT_THETA_NODES: usize = 48;
pub const DEFAULT_OUTER_TOL: f64 = 1e-9;
pub const DEFAULT_MU: [f64; 2] = [0.0, 1.0];
pub const DEFAULT_OUT_DIR: &str = "riemann-gluer-out";
pub const OUT_ENV: &str = "RIEMANN_GLUER_OUT";
const EPS_MAX: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Epsilon {
    One(f64),
    Sweep(Vec<f64>),
}

/// Every field optional; names as they appear in the file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub n: Option<usize>,
    pub epsilon: Option<Epsilon>,
    #[serde(rename = "J_max")]
    pub j_max: Option<usize>,
    pub cylinder_ht: Option<f64>,
    pub planar_nsigma: Option<usize>,
    pub theta_nodes: Option<usize>,
    pub inner_tol: Option<f64>,
    pub outer_tol: Option<f64>,
    #[serde(rename = "R_out")]
    pub r_out: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub mu: Option<Vec<f64>>,
    pub parallel: Option<bool>,
}

impl ConfigLayer {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| GluerError::Io { path: path.to_path_buf(), source })?;
        serde_json::from_str(&text).map_err(|e| GluerError::Config { field: path.display().to_string(), reason: e.to_string() })
    }

    /// `other` wins where set.
    pub fn overridden_by(self, other: ConfigLayer) -> Self {
        ConfigLayer {
            n: other.n.or(self.n),
            epsilon: other.epsilon.or(self.epsilon),
            j_max: other.j_max.or(self.j_max),
            cylinder_ht: other.cylinder_ht.or(self.cylinder_ht),
            planar_nsigma: other.planar_nsigma.or(self.planar_nsigma),
            theta_nodes: other.theta_nodes.or(self.theta_nodes),
            inner_tol: other.inner_tol.or(self.inner_tol),
            outer_tol: other.outer_tol.or(self.outer_tol),
            r_out: other.r_out.or(self.r_out),
            out_dir: other.out_dir.or(self.out_dir),
            mu: other.mu.or(self.mu),
            parallel: other.parallel.or(self.parallel),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: usize,
    pub epsilon: Vec<f64>,
    #[serde(rename = "J_max")]
    pub j_max: usize,
    pub cylinder_ht: f64,
    pub planar_nsigma: usize,
    pub theta_nodes: usize,
    /// Overrides both inner Picard tolerances when set.
    pub inner_tol: Option<f64>,
    pub outer_tol: f64,
    /// Accepted for compatibility; the planar grid reaches infinity.
    #[serde(rename = "R_out")]
    pub r_out: Option<f64>,
    pub out_dir: PathBuf,
    pub mu: Vec<f64>,
    pub parallel: bool,
}

fn bad(field: &str, reason: impl Into<String>) -> GluerError {
    GluerError::Config { field: field.into(), reason: reason.into() }
}

fn positive_below(field: &str, v: f64, max: f64) -> Result<()> {
    if v > 0.0 && v <= max {
        Ok(())
    } else {
        Err(bad(field, format!("{v} outside (0, {max}]")))
    }
}

impl RunConfig {
    /// Fills defaults and checks ranges. `env_out` is the value of the
    /// out-dir environment fallback.
    pub fn resolve(layer: ConfigLayer, env_out: Option<PathBuf>) -> Result<Self> {
        let n = layer.n.unwrap_or(DEFAULT_N);
        if n < 3 {
            return Err(bad("n", format!("n = {n} is not supported; the two-dimensional case is the `baseline2d` subcommand")));
        }
        if n > 8 {
            return Err(bad("n", format!("n = {n} outside 3..=8")));
        }
        let epsilon = match layer.epsilon {
            None => vec![DEFAULT_EPSILON],
            Some(Epsilon::One(e)) => vec![e],
            Some(Epsilon::Sweep(v)) => v,
        };
        if epsilon.is_empty() {
            return Err(bad("epsilon", "empty sweep"));
        }
        for &e in &epsilon {
            positive_below("epsilon", e, EPS_MAX)?;
        }
        let j_max = layer.j_max.unwrap_or(DEFAULT_J_MAX);
        if !(2..=32).contains(&j_max) {
            return Err(bad("J_max", format!("{j_max} outside 2..=32")));
        }
        let cylinder_ht = layer.cylinder_ht.unwrap_or(DEFAULT_CYLINDER_HT);
        positive_below("cylinder_ht", cylinder_ht, 0.25)?;
        let planar_nsigma = layer.planar_nsigma.unwrap_or(DEFAULT_PLANAR_NSIGMA);
        if planar_nsigma < 16 || planar_nsigma > 1024 || planar_nsigma % 2 != 0 {
            return Err(bad("planar_nsigma", format!("{planar_nsigma} must be even in 16..=1024")));
        }
        let theta_nodes = layer.theta_nodes.unwrap_or(DEFAULT_THETA_NODES);
        if theta_nodes % 2 != 0 || theta_nodes > 512 {
            return Err(bad("theta_nodes", format!("{theta_nodes} must be even and at most 512")));
        }
        let d = Dimension::new(n).map_err(|e| bad("n", e.to_string()))?;
        ThetaGrid::new(d, theta_nodes, j_max).map_err(|e| bad("theta_nodes", e.to_string()))?;
        ThetaGrid::new(d, theta_nodes / 2, j_max).map_err(|_| bad("theta_nodes", "half of it must still resolve J_max (coarse residual check)"))?;
        if let Some(t) = layer.inner_tol {
            positive_below("inner_tol", t, 1e-6)?;
        }
        let outer_tol = layer.outer_tol.unwrap_or(DEFAULT_OUTER_TOL);
        positive_below("outer_tol", outer_tol, 1e-3)?;
        if let Some(r) = layer.r_out {
            if !(r > 2.0) || !r.is_finite() {
                return Err(bad("R_out", format!("{r} must be finite and above 2")));
            }
        }
        let mu = layer.mu.unwrap_or_else(|| DEFAULT_MU.to_vec());
        if mu.is_empty() || mu.iter().any(|m| !m.is_finite() || m.abs() > 10.0) {
            return Err(bad("mu", "need finite values in [-10, 10]"));
        }
        let out_dir = layer.out_dir.or(env_out).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        Ok(RunConfig {
            n,
            epsilon,
            j_max,
            cylinder_ht,
            planar_nsigma,
            theta_nodes,
            inner_tol: layer.inner_tol,
            outer_tol,
            r_out: layer.r_out,
            out_dir,
            mu,
            parallel: layer.parallel.unwrap_or(false),
        })
    }

    pub fn dimension(&self) -> Dimension {
        Dimension::new(self.n).expect("validated")
    }

    pub fn match_config(&self) -> MatchConfig {
        let base = MatchConfig::default();
        MatchConfig {
            neck: NeckConfig {
                ht: self.cylinder_ht,
                theta_nodes: self.theta_nodes,
                j_max: self.j_max,
                tol: self.inner_tol.unwrap_or(base.neck.tol),
                ..base.neck
            },
            planar: PlanarConfig {
                nsigma: self.planar_nsigma,
                theta_nodes: self.theta_nodes,
                j_max: self.j_max,
                tol: self.inner_tol.unwrap_or(base.planar.tol),
                ..base.planar
            },
            tol: self.outer_tol,
            ..base
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::resolve(ConfigLayer::default(), None).unwrap();
        assert_eq!((c.n, c.epsilon.clone(), c.j_max), (3, vec![1e-3], 12));
        assert_eq!(c.out_dir, PathBuf::from(DEFAULT_OUT_DIR));
        assert_eq!(c.match_config(), MatchConfig::default());
    }

    #[test]
    fn file_keys_and_sweeps() {
        let l: ConfigLayer = serde_json::from_str(r#"{"n": 4, "epsilon": [1e-2, 1e-3], "J_max": 10, "R_out": 50}"#).unwrap();
        let c = RunConfig::resolve(l, None).unwrap();
        assert_eq!((c.n, c.epsilon.len(), c.j_max, c.r_out), (4, 2, 10, Some(50.0)));
        let l: ConfigLayer = serde_json::from_str(r#"{"epsilon": 1e-2}"#).unwrap();
        assert_eq!(l.epsilon, Some(Epsilon::One(1e-2)));
        assert!(serde_json::from_str::<ConfigLayer>(r#"{"j_max": 10}"#).is_err());
    }

    #[test]
    fn flags_win_and_env_is_last() {
        let file = ConfigLayer { n: Some(4), out_dir: Some("a".into()), ..Default::default() };
        let flags = ConfigLayer { n: Some(5), ..Default::default() };
        let c = RunConfig::resolve(file.overridden_by(flags), Some("b".into())).unwrap();
        assert_eq!((c.n, c.out_dir), (5, PathBuf::from("a")));
        let c = RunConfig::resolve(ConfigLayer::default(), Some("b".into())).unwrap();
        assert_eq!(c.out_dir, PathBuf::from("b"));
    }

    #[test]
    fn range_errors_name_the_field() {
        let field = |l: ConfigLayer| match RunConfig::resolve(l, None) {
            Err(GluerError::Config { field, reason }) => (field, reason),
            other => panic!("{other:?}"),
        };
        let (f, r) = field(ConfigLayer { n: Some(2), ..Default::default() });
        assert_eq!(f, "n");
        assert!(r.contains("baseline2d"));
        assert_eq!(field(ConfigLayer { epsilon: Some(Epsilon::One(0.2)), ..Default::default() }).0, "epsilon");
        assert_eq!(field(ConfigLayer { theta_nodes: Some(20), ..Default::default() }).0, "theta_nodes");
        assert_eq!(field(ConfigLayer { r_out: Some(1.0), ..Default::default() }).0, "R_out");
    }
}

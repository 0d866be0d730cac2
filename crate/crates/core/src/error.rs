use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, GluerError>;

#[derive(Debug, Error)]
pub enum GluerError {
    #[error("dimension n = {0} is not supported here (need n >= 3; use the baseline2d entry point for n = 2)")]
    InvalidDimension(usize),

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("t = {t} lies outside the truncated neck [-{t_eps}, {t_eps}]")]
    OutOfDomain { t: f64, t_eps: f64 },

    #[error("grid too coarse: {axis} has {points} points, need at least {required}")]
    GridTooCoarse {
        axis: &'static str,
        points: usize,
        required: usize,
    },

    #[error("2D Riemann trajectory left the admissible region at t = {t}: {detail}")]
    AdmissibleRegion { t: f64, detail: String },

    #[error("truncation J_max = {j_max} aliases on a grid of {nodes} nodes (need J_max <= nodes / 2)")]
    Aliasing { j_max: usize, nodes: usize },

    #[error("boundary data has nonzero low modes (h0 = {h0:e}, h1 = {h1:e}); expected data orthogonal to E0 and E1")]
    LowModesPresent { h0: f64, h1: f64 },

    #[error("weight {name} = {value} outside admissible window ({lo}, {hi})")]
    WeightOutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("shooting for mode j = {mode} failed: {detail}")]
    Shooting { mode: usize, detail: String },

    #[error("{stage}: iteration is not contracting (ratios {ratios:?})")]
    NonContraction { stage: &'static str, ratios: Vec<f64> },

    #[error("{stage}: iteration did not converge in {iterations} steps (last correction {last:e})")]
    NotConverged {
        stage: &'static str,
        iterations: usize,
        last: f64,
    },

    #[error("{stage}: iterate left the admissible ball (norm {norm:e} > radius {radius:e})")]
    BallViolation {
        stage: &'static str,
        norm: f64,
        radius: f64,
    },

    #[error("vertical graph re-expression failed at theta = {theta}: {detail}")]
    FoldOver { theta: f64, detail: String },

    #[error("linear solver failure: {0}")]
    Solver(String),

    #[error("point ({x1}, {r}) lies inside an excised ball")]
    InsideExcisedBall { x1: f64, r: f64 },

    #[error("interface grids do not match: {0}")]
    InterfaceMismatch(String),

    #[error("period height h_eps = {0:e} is not positive")]
    NonPositivePeriod(f64),

    #[error("level set u = {level:e} is empty along the sampled rays")]
    EmptyLevelSet { level: f64 },

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialization(#[from] serde_json::Error),

    #[error("configuration error in `{field}`: {reason}")]
    Config { field: String, reason: String },
}

impl GluerError {
    pub(crate) fn arg(name: &'static str, reason: impl Into<String>) -> Self {
        GluerError::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}

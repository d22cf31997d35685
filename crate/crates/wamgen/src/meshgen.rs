//! Mesh construction from sample-count rules.
//!
//! Each builder turns a count rule (near-isometry oversampling, induced
//! sampling, or covering-based space filling) into a concrete seeded mesh.
//! The rule constants are recorded on the mesh so a dump regenerates
//! bit-identically from `(space, rule, seed)`.

use crate::covering::WeightedCovering;
use crate::measures::{self, MeasureError, SampleDiagnostics};
use crate::spaces::{FunctionSpace, KernelProfile};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum MeshError {
    #[error("level has dimension 1; count rules need log N > 0")]
    LevelTooSmall,
    #[error("constant function not in span (projection residual {residual:.3e})")]
    ConstantNotInSpan { residual: f64 },
    #[error("covering built for level {covering:?} but space has level {space}")]
    CoveringMismatch { covering: Option<usize>, space: usize },
    #[error("covering size {size} below space dimension {dim}")]
    CoveringTooSmall { size: usize, dim: usize },
    #[error("parameter out of range: {0}")]
    BadParameter(&'static str),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Sampling strategy behind a mesh.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Strategy {
    /// i.i.d. draws from the base measure with coherence-scaled counts.
    MuWam,
    /// i.i.d. draws from the induced measure with near-optimal counts.
    MuVWam,
    /// Uniform draws with covering-based counts.
    UniformAm,
    /// Gradient-weighted draws with weighted-covering counts.
    NuAm,
    /// Externally supplied points.
    Manual,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::MuWam => "mu-wam",
            Strategy::MuVWam => "muv-wam",
            Strategy::UniformAm => "uniform-am",
            Strategy::NuAm => "nu-am",
            Strategy::Manual => "manual",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mu-wam" | "mu" => Some(Strategy::MuWam),
            "muv-wam" | "muv" => Some(Strategy::MuVWam),
            "uniform-am" | "uniform" => Some(Strategy::UniformAm),
            "nu-am" | "nu" => Some(Strategy::NuAm),
            "manual" => Some(Strategy::Manual),
            _ => None,
        }
    }
}

/// The formula and constants a mesh was built with.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshRule {
    pub formula: String,
    pub constants: BTreeMap<String, f64>,
}

impl MeshRule {
    fn new(formula: &str) -> Self {
        Self {
            formula: formula.to_string(),
            constants: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.constants.insert(key.to_string(), value);
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.constants.get(key).copied()
    }
}

/// A tagged random mesh.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub points: Vec<Vec<f64>>,
    pub strategy: Strategy,
    pub level: usize,
    pub m: usize,
    pub rule: MeshRule,
    pub seed: u64,
    pub diagnostics: SampleDiagnostics,
}

impl Mesh {
    pub fn manual(points: Vec<Vec<f64>>, level: usize) -> Self {
        let m = points.len();
        Self {
            points,
            strategy: Strategy::Manual,
            level,
            m,
            rule: MeshRule::new("manual"),
            seed: 0,
            diagnostics: SampleDiagnostics {
                proposals: m as u64,
                accepts: m as u64,
            },
        }
    }
}

/// Smallest integer `M >= 2` with `M / ln M >= 3 (1 + r) kappa / delta^2`.
/// Seeded at `ceil(c ln c)` (which always undershoots) and scanned upward.
pub fn wls_sample_count(kappa: f64, delta: f64, r: f64) -> usize {
    assert!(delta > 0.0 && delta < 1.0, "delta in (0,1)");
    assert!(r > 0.0, "r positive");
    assert!(kappa >= 1.0, "coherence at least 1");
    let c = 3.0 * (1.0 + r) / (delta * delta) * kappa;
    let mut m = if c > 1.0 {
        ((c * c.ln()).ceil() as usize).max(2)
    } else {
        2
    };
    while (m as f64) / (m as f64).ln() < c {
        m += 1;
    }
    m
}

fn checked_level(space: &FunctionSpace) -> Result<(usize, f64), MeshError> {
    let n = space.dim();
    if n < 2 {
        return Err(MeshError::LevelTooSmall);
    }
    Ok((n, (n as f64).ln()))
}

/// Volume-ratio constant for axis-aligned boxes: a ball centered anywhere in
/// the box keeps at least its orthant fraction inside, so `alpha = 2^{-d}`
/// for radii up to the shortest edge.
pub fn box_volume_ratio_alpha(dim: usize) -> f64 {
    0.5f64.powi(dim as i32)
}

/// Mesh of `ceil(25 q* K log N)` base-measure draws. `k_mu` enters as the
/// raw grid maximum; its Lipschitz-inflated companion is recorded in the
/// rule for reference.
pub fn build_mu_mesh(
    space: &FunctionSpace,
    profile: &KernelProfile,
    q_star: f64,
    seed: u64,
) -> Result<Mesh, MeshError> {
    if q_star < 1.0 {
        return Err(MeshError::BadParameter("q_star must be at least 1"));
    }
    let (n, log_n) = checked_level(space)?;
    let m = (25.0 * q_star * profile.k_mu() * log_n).ceil() as usize;
    let samples = measures::sample_mu(space, m, seed)?;
    let rule = MeshRule::new("M = ceil(25 q* K log N)")
        .with("q_star", q_star)
        .with("k_mu", profile.k_mu())
        .with("k_mu_upper", profile.k_mu_upper())
        .with("n_dim", n as f64);
    Ok(Mesh {
        points: samples.points,
        strategy: Strategy::MuWam,
        level: space.level(),
        m,
        rule,
        seed,
        diagnostics: samples.diagnostics,
    })
}

/// Mesh of `ceil(25 N log N)` induced-measure draws. Requires the constant
/// function in the span so sup-norm bounds transfer back to the unweighted
/// space.
pub fn build_muv_mesh(
    space: &FunctionSpace,
    profile: &KernelProfile,
    seed: u64,
) -> Result<Mesh, MeshError> {
    let (n, log_n) = checked_level(space)?;
    let residual = space.constant_projection_residual();
    if residual > 1e-8 {
        return Err(MeshError::ConstantNotInSpan { residual });
    }
    let m = (25.0 * n as f64 * log_n).ceil() as usize;
    let samples = measures::sample_induced(space, profile, m, seed)?;
    let rule = MeshRule::new("M = ceil(25 N log N)").with("n_dim", n as f64);
    Ok(Mesh {
        points: samples.points,
        strategy: Strategy::MuVWam,
        level: space.level(),
        m,
        rule,
        seed,
        diagnostics: samples.diagnostics,
    })
}

/// Induced-measure mesh at the near-isometry count
/// `M / log M >= 3 (1 + r) N / delta^2`.
pub fn build_muv_mesh_wls(
    space: &FunctionSpace,
    profile: &KernelProfile,
    delta: f64,
    r: f64,
    seed: u64,
) -> Result<Mesh, MeshError> {
    let (n, _) = checked_level(space)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(MeshError::BadParameter("delta must lie in (0,1)"));
    }
    if r <= 0.0 {
        return Err(MeshError::BadParameter("r must be positive"));
    }
    let m = wls_sample_count(n as f64, delta, r);
    let samples = measures::sample_induced(space, profile, m, seed)?;
    let rule = MeshRule::new("M/log M >= 3(1+r) N / delta^2")
        .with("delta", delta)
        .with("r", r)
        .with("n_dim", n as f64);
    Ok(Mesh {
        points: samples.points,
        strategy: Strategy::MuVWam,
        level: space.level(),
        m,
        rule,
        seed,
        diagnostics: samples.diagnostics,
    })
}

/// Uniform mesh with covering-scaled count
/// `M = ceil(alpha^{-1} (r+1) |cover| log |cover|)`.
pub fn build_uniform_am_mesh(
    space: &FunctionSpace,
    profile: &KernelProfile,
    k: f64,
    r: f64,
    covering_size: usize,
    seed: u64,
) -> Result<Mesh, MeshError> {
    if k <= 2.0 {
        return Err(MeshError::BadParameter("k must exceed 2"));
    }
    if r <= 1.0 {
        return Err(MeshError::BadParameter("r must exceed 1"));
    }
    if covering_size < space.dim() {
        return Err(MeshError::CoveringTooSmall {
            size: covering_size,
            dim: space.dim(),
        });
    }
    let d = space.domain().dim();
    let alpha = box_volume_ratio_alpha(d);
    let s = covering_size as f64;
    let m = ((r + 1.0) * s * s.ln() / alpha).ceil() as usize;
    let mut rng = crate::rng::seeded_rng(seed);
    use rand::Rng;
    let bounds = space.domain().bounds().to_vec();
    let points: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            bounds
                .iter()
                .map(|&(lo, hi)| lo + (hi - lo) * rng.gen::<f64>())
                .collect()
        })
        .collect();
    let r0 = 1.0 / (k * profile.r_min().max(1e-300));
    let rule = MeshRule::new("M = ceil(alpha^-1 (r+1) |cover| log |cover|)")
        .with("k", k)
        .with("r", r)
        .with("alpha", alpha)
        .with("covering_size", s)
        .with("r0", r0);
    Ok(Mesh {
        points,
        strategy: Strategy::UniformAm,
        level: space.level(),
        m,
        rule,
        seed,
        diagnostics: SampleDiagnostics {
            proposals: m as u64,
            accepts: m as u64,
        },
    })
}

/// Gradient-weighted mesh with weighted-covering count
/// `M = ceil(alpha^{-1} (r+1) G |cover| log |cover|)`.
pub fn build_nu_am_mesh(
    space: &FunctionSpace,
    profile: &KernelProfile,
    k: f64,
    r: f64,
    covering: &WeightedCovering,
    seed: u64,
) -> Result<Mesh, MeshError> {
    if k <= 2.0 {
        return Err(MeshError::BadParameter("k must exceed 2"));
    }
    if r <= 1.0 {
        return Err(MeshError::BadParameter("r must exceed 1"));
    }
    if covering.level != Some(space.level()) {
        return Err(MeshError::CoveringMismatch {
            covering: covering.level,
            space: space.level(),
        });
    }
    if covering.len() < space.dim() {
        return Err(MeshError::CoveringTooSmall {
            size: covering.len(),
            dim: space.dim(),
        });
    }
    let d = space.domain().dim();
    let alpha = box_volume_ratio_alpha(d);
    let s = covering.len() as f64;
    let m = ((r + 1.0) * covering.g * s * s.ln() / alpha).ceil() as usize;
    let samples = measures::sample_nu(space, profile, m, seed)?;
    let r0 = 1.0 / (k * profile.r_min().max(1e-300));
    let rule = MeshRule::new("M = ceil(alpha^-1 (r+1) G |cover| log |cover|)")
        .with("k", k)
        .with("r", r)
        .with("alpha", alpha)
        .with("g", covering.g)
        .with("covering_size", s)
        .with("epsilon", covering.epsilon)
        .with("r0", r0);
    Ok(Mesh {
        points: samples.points,
        strategy: Strategy::NuAm,
        level: space.level(),
        m,
        rule,
        seed,
        diagnostics: samples.diagnostics,
    })
}

//! Seeded i.i.d. samplers for the three measures used when building meshes:
//! the base measure of a space, its Christoffel-induced measure, and the
//! gradient-weighted measure.
//!
//! All samplers are deterministic functions of `(space, seed, count)` and
//! draw coordinates in a fixed order, so meshes regenerate bit-identically.
//! Rejection steps never accept past their envelope: when an observed density
//! ratio exceeds the safety-inflated envelope the sampler stops with an error
//! carrying the offending location and a refreshed envelope suggestion.

use crate::rng::seeded_rng;
use crate::spaces::{FunctionSpace, JacobiRecurrence, KernelProfile};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Multiplier applied to every grid-estimated supremum used as a rejection
/// envelope.
pub const ENVELOPE_SAFETY: f64 = 1.05;

/// Per-axis resolution of the tabulated inverse CDF.
pub const CDF_RESOLUTION: usize = 1 << 14;

/// Proposal window for the acceptance-rate guard of the gradient-weighted
/// sampler.
const EFFICIENCY_WINDOW: u64 = 100_000;
const EFFICIENCY_FLOOR: f64 = 1e-4;

#[derive(Error, Debug)]
pub enum MeasureError {
    #[error("family does not define a samplable base measure")]
    UnsupportedFamily,
    #[error(
        "rejection envelope violated at {location:?}: ratio {observed_ratio:.6} (suggest envelope x{suggested_factor:.6})"
    )]
    EnvelopeViolation {
        location: Vec<f64>,
        observed_ratio: f64,
        suggested_factor: f64,
    },
    #[error("acceptance rate {rate:.2e} below {floor:.0e} after {proposals} proposals")]
    LowAcceptance { proposals: u64, rate: f64, floor: f64 },
    #[error("gradient weight nearly vanishes: min {min_r:.3e} vs max {max_r:.3e}")]
    GradientWeightVanishes { min_r: f64, max_r: f64 },
}

/// Rejection bookkeeping for one sampling run. `proposals` counts full point
/// proposals; inverse-CDF draws count as accepted proposals.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SampleDiagnostics {
    pub proposals: u64,
    pub accepts: u64,
}

impl SampleDiagnostics {
    pub fn rate(&self) -> f64 {
        if self.proposals == 0 {
            1.0
        } else {
            self.accepts as f64 / self.proposals as f64
        }
    }
}

/// Points plus the diagnostics of the run that produced them.
#[derive(Clone, Debug)]
pub struct Samples {
    pub points: Vec<Vec<f64>>,
    pub diagnostics: SampleDiagnostics,
}

/// Tabulated CDF of a univariate Jacobi weight on one domain axis, with
/// linear interpolation between table cells. Masses are accumulated from
/// four sub-midpoints per cell so integrable endpoint singularities
/// contribute accurately.
#[derive(Clone, Debug)]
pub struct CdfTable {
    lo: f64,
    hi: f64,
    cdf: Vec<f64>,
}

impl CdfTable {
    pub fn build(recurrence: &JacobiRecurrence, lo: f64, hi: f64) -> Self {
        let cells = CDF_RESOLUTION;
        let mut cdf = Vec::with_capacity(cells + 1);
        cdf.push(0.0);
        let width = 2.0 / cells as f64;
        let mut acc = 0.0;
        for c in 0..cells {
            let left = -1.0 + c as f64 * width;
            let mut mass = 0.0;
            for s in 0..4 {
                let t = left + (s as f64 + 0.5) * width / 4.0;
                mass += recurrence.weight_density(t);
            }
            acc += mass * width / 4.0;
            cdf.push(acc);
        }
        let total = acc;
        for v in cdf.iter_mut() {
            *v /= total;
        }
        Self { lo, hi, cdf }
    }

    /// Inverse CDF with linear interpolation.
    pub fn invert(&self, u: f64) -> f64 {
        let cells = self.cdf.len() - 1;
        let u = u.clamp(0.0, 1.0);
        let idx = match self
            .cdf
            .binary_search_by(|probe| probe.partial_cmp(&u).unwrap())
        {
            Ok(i) => i.min(cells - 1),
            Err(i) => i.saturating_sub(1).min(cells - 1),
        };
        let width = 2.0 / cells as f64;
        let left = -1.0 + idx as f64 * width;
        let span = self.cdf[idx + 1] - self.cdf[idx];
        let frac = if span > 0.0 { (u - self.cdf[idx]) / span } else { 0.5 };
        let t = left + frac.clamp(0.0, 1.0) * width;
        self.lo + (t + 1.0) * 0.5 * (self.hi - self.lo)
    }

    /// CDF value at a point of the axis.
    pub fn cdf_at(&self, x: f64) -> f64 {
        let cells = self.cdf.len() - 1;
        let t = ((2.0 * x - self.lo - self.hi) / (self.hi - self.lo)).clamp(-1.0, 1.0);
        let pos = (t + 1.0) / 2.0 * cells as f64;
        let idx = (pos.floor() as usize).min(cells - 1);
        let frac = pos - idx as f64;
        self.cdf[idx] + frac * (self.cdf[idx + 1] - self.cdf[idx])
    }
}

enum AxisDraw {
    Uniform,
    Table(Vec<CdfTable>),
}

/// Sampler for the base measure of a space: the tensor Jacobi probability
/// measure for polynomial families (per-axis inverse CDF), the uniform
/// measure for exponentials.
pub struct BaseSampler {
    bounds: Vec<(f64, f64)>,
    axes: AxisDraw,
}

impl BaseSampler {
    pub fn new(space: &FunctionSpace) -> Result<Self, MeasureError> {
        let bounds = space.domain().bounds().to_vec();
        if space.base_measure_is_uniform() {
            return Ok(Self {
                bounds,
                axes: AxisDraw::Uniform,
            });
        }
        let Some((alpha, beta)) = space.jacobi_params() else {
            return Err(MeasureError::UnsupportedFamily);
        };
        let recurrence = JacobiRecurrence::new(alpha, beta, 1);
        let tables = bounds
            .iter()
            .map(|&(lo, hi)| CdfTable::build(&recurrence, lo, hi))
            .collect();
        Ok(Self {
            bounds,
            axes: AxisDraw::Table(tables),
        })
    }

    /// Draws one point, consuming one uniform variate per axis in axis order.
    pub fn draw_into(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        match &self.axes {
            AxisDraw::Uniform => {
                for (j, x) in out.iter_mut().enumerate() {
                    let (lo, hi) = self.bounds[j];
                    *x = lo + (hi - lo) * rng.gen::<f64>();
                }
            }
            AxisDraw::Table(tables) => {
                for (table, x) in tables.iter().zip(out.iter_mut()) {
                    *x = table.invert(rng.gen::<f64>());
                }
            }
        }
    }

    /// CDF of one axis marginal; exact for the uniform case, tabulated
    /// otherwise. Used for cell masses in goodness-of-fit checks.
    pub fn axis_cdf(&self, j: usize, x: f64) -> f64 {
        match &self.axes {
            AxisDraw::Uniform => {
                let (lo, hi) = self.bounds[j];
                ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
            }
            AxisDraw::Table(tables) => tables[j].cdf_at(x),
        }
    }
}

/// i.i.d. draws from the base measure.
pub fn sample_mu(space: &FunctionSpace, count: usize, seed: u64) -> Result<Samples, MeasureError> {
    let sampler = BaseSampler::new(space)?;
    let mut rng = seeded_rng(seed);
    let d = space.domain().dim();
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let mut x = vec![0.0; d];
        sampler.draw_into(&mut rng, &mut x);
        points.push(x);
    }
    Ok(Samples {
        points,
        diagnostics: SampleDiagnostics {
            proposals: count as u64,
            accepts: count as u64,
        },
    })
}

/// i.i.d. draws from the induced measure `K(x,x)/N dmu`, via the mixture
/// decomposition: pick a basis component uniformly, then draw from
/// `|v_i|^2 dmu` by rejection against the base measure with the component's
/// safety-inflated envelope.
pub fn sample_induced(
    space: &FunctionSpace,
    profile: &KernelProfile,
    count: usize,
    seed: u64,
) -> Result<Samples, MeasureError> {
    let sampler = BaseSampler::new(space)?;
    let envelopes: Vec<f64> = profile
        .component_sup_sq()
        .iter()
        .map(|&s| s * ENVELOPE_SAFETY)
        .collect();
    let n = space.dim();
    let d = space.domain().dim();
    let mut rng = seeded_rng(seed);
    let mut buf = space.make_buffer();
    let mut points = Vec::with_capacity(count);
    let mut diagnostics = SampleDiagnostics::default();
    while points.len() < count {
        let component = rng.gen_range(0..n);
        loop {
            let mut x = vec![0.0; d];
            sampler.draw_into(&mut rng, &mut x);
            diagnostics.proposals += 1;
            space
                .eval_into(&x, &mut buf, false)
                .expect("proposal in domain");
            let density = buf.component_abs_sq(component);
            let ratio = density / envelopes[component];
            if ratio > 1.0 {
                return Err(MeasureError::EnvelopeViolation {
                    location: x,
                    observed_ratio: ratio,
                    suggested_factor: ENVELOPE_SAFETY * ratio,
                });
            }
            if rng.gen::<f64>() <= ratio {
                diagnostics.accepts += 1;
                points.push(x);
                break;
            }
        }
    }
    Ok(Samples {
        points,
        diagnostics,
    })
}

/// i.i.d. draws from the gradient-weighted measure with density proportional
/// to `R(x)^d` over the box, by rejection against the uniform measure.
pub fn sample_nu(
    space: &FunctionSpace,
    profile: &KernelProfile,
    count: usize,
    seed: u64,
) -> Result<Samples, MeasureError> {
    if profile.r_mu() <= 0.0 || profile.r_min() < 1e-12 * profile.r_mu() {
        return Err(MeasureError::GradientWeightVanishes {
            min_r: profile.r_min(),
            max_r: profile.r_mu(),
        });
    }
    let d = space.domain().dim();
    let bounds = space.domain().bounds().to_vec();
    let envelope = profile.r_mu().powi(d as i32) * ENVELOPE_SAFETY;
    let mut rng = seeded_rng(seed);
    let mut buf = space.make_buffer();
    let mut points = Vec::with_capacity(count);
    let mut diagnostics = SampleDiagnostics::default();
    while points.len() < count {
        let mut x = vec![0.0; d];
        for (j, xj) in x.iter_mut().enumerate() {
            let (lo, hi) = bounds[j];
            *xj = lo + (hi - lo) * rng.gen::<f64>();
        }
        diagnostics.proposals += 1;
        space
            .eval_into(&x, &mut buf, true)
            .expect("proposal in domain");
        let density = buf.grad_norm_sq().sqrt().powi(d as i32);
        let ratio = density / envelope;
        if ratio > 1.0 {
            return Err(MeasureError::EnvelopeViolation {
                location: x,
                observed_ratio: ratio,
                suggested_factor: ENVELOPE_SAFETY * ratio,
            });
        }
        if rng.gen::<f64>() <= ratio {
            diagnostics.accepts += 1;
            points.push(x);
        }
        if diagnostics.proposals >= EFFICIENCY_WINDOW {
            let rate = diagnostics.rate();
            if rate < EFFICIENCY_FLOOR {
                return Err(MeasureError::LowAcceptance {
                    proposals: diagnostics.proposals,
                    rate,
                    floor: EFFICIENCY_FLOOR,
                });
            }
        }
    }
    Ok(Samples {
        points,
        diagnostics,
    })
}

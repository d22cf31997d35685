//! Kernel diagonal / Christoffel / gradient profiles over tensor grids.
//!
//! The profile tabulates `K(x,x)` and `R(x)` on a uniform tensor grid whose
//! spacing targets `h * R <= lipschitz_target`, iterated once from a coarse
//! pass. Because that target is unreachable for strongly growing gradient
//! norms in several dimensions, the grid is capped at `max_points` and the
//! achieved `h` is kept with the profile; grid maxima are lower estimates of
//! the true suprema and the `(1 + h R)` factors are the matching upper
//! companions.

use super::{EvalBuffer, FunctionSpace, SpaceError};
use rayon::prelude::*;

/// Resolution policy for profile grids.
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    /// Target bound on `h * R_sup`.
    pub lipschitz_target: f64,
    /// Hard cap on the total number of grid points.
    pub max_points: usize,
    /// Per-axis size of the coarse bootstrap grid.
    pub coarse_per_axis: usize,
    /// Lower bound on per-axis points of the refined grid.
    pub min_per_axis: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            lipschitz_target: 0.05,
            max_points: 2_000_000,
            coarse_per_axis: 17,
            min_per_axis: 9,
        }
    }
}

impl GridSpec {
    /// Spec with a smaller point budget, for sweeps over many levels.
    pub fn budget(max_points: usize) -> Self {
        Self {
            max_points,
            ..Self::default()
        }
    }
}

/// A uniform tensor grid over a box, endpoints included.
#[derive(Clone, Debug)]
pub struct TensorGrid {
    axes: Vec<Vec<f64>>,
}

impl TensorGrid {
    pub fn uniform(domain: &super::Domain, per_axis: &[usize]) -> Self {
        assert_eq!(per_axis.len(), domain.dim());
        let axes = domain
            .bounds()
            .iter()
            .zip(per_axis)
            .map(|(&(lo, hi), &count)| {
                let count = count.max(2);
                (0..count)
                    .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
                    .collect()
            })
            .collect();
        Self { axes }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    /// Largest per-axis spacing.
    pub fn max_spacing(&self) -> f64 {
        self.axes
            .iter()
            .map(|a| {
                a.windows(2)
                    .map(|w| w[1] - w[0])
                    .fold(0.0_f64, f64::max)
            })
            .fold(0.0_f64, f64::max)
    }

    /// Decodes the flattened C-order index into a point.
    pub fn point(&self, mut flat: usize) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; d];
        for j in (0..d).rev() {
            let n = self.axes[j].len();
            out[j] = self.axes[j][flat % n];
            flat /= n;
        }
        out
    }

    /// Trapezoid weight of the flattened grid point for integrating over the
    /// box with respect to the Lebesgue measure.
    pub fn trapezoid_weight(&self, mut flat: usize) -> f64 {
        let d = self.dim();
        let mut w = 1.0;
        for j in (0..d).rev() {
            let n = self.axes[j].len();
            let idx = flat % n;
            flat /= n;
            let spacing = (self.axes[j][n - 1] - self.axes[j][0]) / (n - 1) as f64;
            let edge = if idx == 0 || idx == n - 1 { 0.5 } else { 1.0 };
            w *= spacing * edge;
        }
        w
    }
}

/// Tabulated kernel and gradient data for one space.
#[derive(Clone, Debug)]
pub struct KernelProfile {
    grid: TensorGrid,
    kernel_diag: Vec<f64>,
    grad_norm: Vec<f64>,
    k_mu: f64,
    r_mu: f64,
    r_min: f64,
    h: f64,
    component_sup_sq: Vec<f64>,
    integral_r_pow_d: f64,
    space_dim: usize,
    level: usize,
}

impl KernelProfile {
    pub fn grid(&self) -> &TensorGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.kernel_diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernel_diag.is_empty()
    }

    pub fn kernel_diag(&self) -> &[f64] {
        &self.kernel_diag
    }

    pub fn grad_norm(&self) -> &[f64] {
        &self.grad_norm
    }

    /// Christoffel function `N / K(x,x)` at a grid point.
    pub fn christoffel(&self, idx: usize) -> f64 {
        self.space_dim as f64 / self.kernel_diag[idx]
    }

    /// Grid maximum of the kernel diagonal (lower estimate of the supremum).
    pub fn k_mu(&self) -> f64 {
        self.k_mu
    }

    /// Grid maximum of `R` (lower estimate of the supremum).
    pub fn r_mu(&self) -> f64 {
        self.r_mu
    }

    /// Grid minimum of `R`.
    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    /// Achieved grid spacing.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Lipschitz inflation factor pairing grid maxima with upper estimates.
    pub fn lipschitz_inflation(&self) -> f64 {
        1.0 + self.h * self.r_mu
    }

    pub fn k_mu_upper(&self) -> f64 {
        self.k_mu * self.lipschitz_inflation()
    }

    pub fn r_mu_upper(&self) -> f64 {
        self.r_mu * self.lipschitz_inflation()
    }

    /// Per-component grid suprema of `|v_i(x)|^2`.
    pub fn component_sup_sq(&self) -> &[f64] {
        &self.component_sup_sq
    }

    /// Trapezoid estimate of `integral_D R(x)^d dx`.
    pub fn integral_r_pow_d(&self) -> f64 {
        self.integral_r_pow_d
    }

    pub fn space_dim(&self) -> usize {
        self.space_dim
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Sanity checks tying the profile to the space it was built from:
    /// nonnegative kernel entries, grid max at least `N` minus the Lipschitz
    /// slack, and the pointwise Christoffel identity.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.space_dim as f64;
        if self.kernel_diag.iter().any(|&k| k < 0.0) {
            return Err("negative kernel diagonal".into());
        }
        let slack = 2.0 * self.h * self.r_mu * self.k_mu.sqrt() + 1e-9;
        if self.k_mu < n - slack {
            return Err(format!(
                "kernel grid max {} under dimension {} beyond slack {}",
                self.k_mu, n, slack
            ));
        }
        for idx in [0, self.len() / 2, self.len() - 1] {
            let id = self.christoffel(idx) * self.kernel_diag[idx];
            if (id - n).abs() > 1e-9 * n {
                return Err(format!("christoffel identity broke at {idx}: {id}"));
            }
        }
        Ok(())
    }
}

/// Builds the kernel profile: a coarse pass estimates `R_sup`, then the grid
/// is refined toward `h * R <= lipschitz_target` under the point cap.
pub fn kernel_profile(
    space: &FunctionSpace,
    spec: &GridSpec,
) -> Result<KernelProfile, SpaceError> {
    let domain = space.domain();
    let d = domain.dim();
    let coarse = TensorGrid::uniform(domain, &vec![spec.coarse_per_axis.max(3); d]);
    let coarse_eval = evaluate_on_grid(space, &coarse);
    let r_estimate = coarse_eval.r_max.max(1e-12);

    let cap_per_axis = (spec.max_points as f64).powf(1.0 / d as f64).floor() as usize;
    let per_axis: Vec<usize> = (0..d)
        .map(|j| {
            let wanted = (domain.side(j) * r_estimate / spec.lipschitz_target).ceil() as usize + 1;
            wanted.clamp(spec.min_per_axis, cap_per_axis.max(spec.min_per_axis))
        })
        .collect();
    let grid = TensorGrid::uniform(domain, &per_axis);
    if grid.is_empty() {
        return Err(SpaceError::EmptyGrid);
    }
    let eval = evaluate_on_grid(space, &grid);
    Ok(KernelProfile {
        h: grid.max_spacing(),
        grid,
        kernel_diag: eval.kernel_diag,
        grad_norm: eval.grad_norm,
        k_mu: eval.k_max,
        r_mu: eval.r_max,
        r_min: eval.r_min,
        component_sup_sq: eval.component_sup_sq,
        integral_r_pow_d: eval.integral_r_pow_d,
        space_dim: space.dim(),
        level: space.level(),
    })
}

struct GridEval {
    kernel_diag: Vec<f64>,
    grad_norm: Vec<f64>,
    k_max: f64,
    r_max: f64,
    r_min: f64,
    component_sup_sq: Vec<f64>,
    integral_r_pow_d: f64,
}

/// Fixed chunk size keeps parallel reduction order independent of the worker
/// count, so profiles are bitwise reproducible.
const CHUNK: usize = 4096;

fn evaluate_on_grid(space: &FunctionSpace, grid: &TensorGrid) -> GridEval {
    let total = grid.len();
    let n = space.dim();
    let d = grid.dim();
    let chunk_ids: Vec<usize> = (0..total.div_ceil(CHUNK)).collect();

    struct Partial {
        start: usize,
        kernel: Vec<f64>,
        grad: Vec<f64>,
        k_max: f64,
        r_max: f64,
        r_min: f64,
        comp_sup: Vec<f64>,
        integral: f64,
    }

    let mut partials: Vec<Partial> = chunk_ids
        .par_iter()
        .map(|&c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(total);
            let mut buf: EvalBuffer = space.make_buffer();
            let mut kernel = Vec::with_capacity(end - start);
            let mut grad = Vec::with_capacity(end - start);
            let mut comp_sup = vec![0.0_f64; n];
            let mut k_max = 0.0_f64;
            let mut r_max = 0.0_f64;
            let mut r_min = f64::INFINITY;
            let mut integral = 0.0;
            for flat in start..end {
                let x = grid.point(flat);
                space.eval_into(&x, &mut buf, true).expect("grid point in domain");
                let k = buf.kernel_diag();
                let r = buf.grad_norm_sq().sqrt();
                kernel.push(k);
                grad.push(r);
                k_max = k_max.max(k);
                r_max = r_max.max(r);
                r_min = r_min.min(r);
                for i in 0..n {
                    comp_sup[i] = comp_sup[i].max(buf.component_abs_sq(i));
                }
                integral += grid.trapezoid_weight(flat) * r.powi(d as i32);
            }
            Partial {
                start,
                kernel,
                grad,
                k_max,
                r_max,
                r_min,
                comp_sup,
                integral,
            }
        })
        .collect();
    partials.sort_by_key(|p| p.start);

    let mut out = GridEval {
        kernel_diag: Vec::with_capacity(total),
        grad_norm: Vec::with_capacity(total),
        k_max: 0.0,
        r_max: 0.0,
        r_min: f64::INFINITY,
        component_sup_sq: vec![0.0; n],
        integral_r_pow_d: 0.0,
    };
    for p in partials {
        out.kernel_diag.extend_from_slice(&p.kernel);
        out.grad_norm.extend_from_slice(&p.grad);
        out.k_max = out.k_max.max(p.k_max);
        out.r_max = out.r_max.max(p.r_max);
        out.r_min = out.r_min.min(p.r_min);
        for i in 0..n {
            out.component_sup_sq[i] = out.component_sup_sq[i].max(p.comp_sup[i]);
        }
        out.integral_r_pow_d += p.integral;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Domain;

    #[test]
    fn exponential_kernel_is_flat() {
        let space = FunctionSpace::exponential_cube(1, 2).unwrap();
        let profile = kernel_profile(&space, &GridSpec::budget(10_000)).unwrap();
        let n = space.dim() as f64;
        for (&k, idx) in profile.kernel_diag().iter().zip(0..) {
            assert!((k - n).abs() < 1e-10, "idx {idx}");
            assert!((profile.christoffel(idx) - 1.0).abs() < 1e-10);
        }
        profile.validate().unwrap();
    }

    #[test]
    fn chebyshev_coherence_bound() {
        for d in 1..=2usize {
            for level in 1..=5usize {
                let space =
                    FunctionSpace::tensor_chebyshev(Domain::sym_box(d), level).unwrap();
                let profile = kernel_profile(&space, &GridSpec::budget(40_000)).unwrap();
                let bound = space.dim() as f64 * 2f64.powi(d as i32);
                assert!(
                    profile.k_mu() <= bound + 1e-8,
                    "d={d} level={level}: {} > {bound}",
                    profile.k_mu()
                );
                profile.validate().unwrap();
            }
        }
    }

    #[test]
    fn weighted_space_kernel_identity() {
        // sum_i |sqrt(lambda) v_i|^2 = lambda K = N pointwise.
        let space = FunctionSpace::tensor_chebyshev(Domain::sym_box(2), 4).unwrap();
        let profile = kernel_profile(&space, &GridSpec::budget(20_000)).unwrap();
        let n = space.dim() as f64;
        for idx in 0..profile.len() {
            let weighted = profile.christoffel(idx) * profile.kernel_diag()[idx];
            assert!((weighted - n).abs() <= 1e-10 * n);
        }
    }

    #[test]
    fn monotone_hierarchy() {
        let mut last_k = 0.0;
        let mut last_r = 0.0;
        for level in 1..=6 {
            let space = FunctionSpace::tensor_chebyshev(Domain::sym_box(1), level).unwrap();
            let profile = kernel_profile(&space, &GridSpec::budget(4_000)).unwrap();
            assert!(profile.k_mu() >= last_k - 1e-12);
            assert!(profile.r_mu() >= last_r - 1e-12);
            last_k = profile.k_mu();
            last_r = profile.r_mu();
        }
    }

    #[test]
    fn exponential_r_constant_with_tau_factor() {
        // R^2 = (2 pi)^2 sum ||f||^2 for the exponential family.
        let space = FunctionSpace::exponential_cube(1, 2).unwrap();
        let profile = kernel_profile(&space, &GridSpec::budget(4_000)).unwrap();
        let sum_f_sq: f64 = space
            .frequencies()
            .unwrap()
            .iter()
            .map(|f| f.iter().map(|&v| (v * v) as f64).sum::<f64>())
            .sum();
        let expected = (std::f64::consts::TAU * std::f64::consts::TAU * sum_f_sq).sqrt();
        assert!((profile.r_mu() - expected).abs() < 1e-9 * expected);
        assert!((profile.r_min() - expected).abs() < 1e-9 * expected);
    }
}

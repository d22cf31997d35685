//! Mesh certification: Gramian near-isometry, discrete/continuum norm
//! equivalence, LP-based sup-norm comparability, and alternant conditioning.

mod lp;

pub use lp::{LpOutcome, SupRatioLp};

use crate::linalg;
use crate::meshgen::{Mesh, Strategy};
use crate::rng::seeded_rng;
use crate::spaces::{Domain, FunctionSpace, KernelProfile, SpaceError, TensorGrid};
use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

/// Angles used to relax the complex unit-disk constraint to a polygon.
const POLYGON_ANGLES: usize = 16;

#[derive(Error, Debug)]
pub enum VerifyError {
    #[error("design matrix needs at least as many points ({m}) as basis functions ({n})")]
    ShapeMismatch { m: usize, n: usize },
    #[error("alternant check needs exactly {expected} points, got {got}")]
    WrongAlternantSize { expected: usize, got: usize },
    #[error("simplex failed to converge")]
    LpStalled,
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Basis values at a point list, scaled and optionally Christoffel-weighted,
/// as used by the near-isometry checks.
enum Design {
    Real(Array2<f64>),
    Complex(Array2<Complex64>),
}

fn build_design(
    space: &FunctionSpace,
    points: &[Vec<f64>],
    weighted: bool,
    normalized: bool,
) -> Design {
    let m = points.len();
    let n = space.dim();
    let scale = if normalized { 1.0 / (m as f64).sqrt() } else { 1.0 };
    let mut buf = space.make_buffer();
    if space.is_real() {
        let mut a = Array2::zeros((m, n));
        for (row, x) in points.iter().enumerate() {
            space.eval_into(x, &mut buf, false).expect("mesh point");
            let w = if weighted {
                (n as f64 / buf.kernel_diag()).sqrt()
            } else {
                1.0
            };
            for i in 0..n {
                a[[row, i]] = scale * w * buf.re[i];
            }
        }
        Design::Real(a)
    } else {
        let mut a = Array2::from_elem((m, n), Complex64::new(0.0, 0.0));
        for (row, x) in points.iter().enumerate() {
            space.eval_into(x, &mut buf, false).expect("mesh point");
            let w = if weighted {
                (n as f64 / buf.kernel_diag()).sqrt()
            } else {
                1.0
            };
            for i in 0..n {
                a[[row, i]] = Complex64::new(scale * w * buf.re[i], scale * w * buf.im[i]);
            }
        }
        Design::Complex(a)
    }
}

fn design_singular_values(design: &Design) -> Vec<f64> {
    match design {
        Design::Real(a) => linalg::singular_values(a),
        Design::Complex(a) => linalg::complex_singular_values(a),
    }
}

/// Spectral deviation of the (weighted) empirical Gramian from the identity,
/// through the singular values of the design matrix.
pub fn gram_deviation(
    space: &FunctionSpace,
    points: &[Vec<f64>],
    weighted: bool,
) -> Result<f64, VerifyError> {
    let (m, n) = (points.len(), space.dim());
    if m < n {
        return Err(VerifyError::ShapeMismatch { m, n });
    }
    let design = build_design(space, points, weighted, true);
    Ok(deviation_from_singular_values(&design_singular_values(
        &design,
    )))
}

/// `max |sigma^2 - 1|`, including the implicit zero singular values of a
/// rank-deficient design.
fn deviation_from_singular_values(sigmas: &[f64]) -> f64 {
    sigmas
        .iter()
        .map(|s| (s * s - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Deviation of `a^T a` from the identity for an explicit real matrix.
pub fn gram_deviation_matrix(a: &Array2<f64>) -> f64 {
    deviation_from_singular_values(&linalg::singular_values(a))
}

/// Two-sided discrete/continuum norm-equivalence check over random unit
/// coefficient vectors, with the singular-value extremes as the oracle.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct L2Equivalence {
    pub worst_low: f64,
    pub worst_high: f64,
    pub eig_low: f64,
    pub eig_high: f64,
    pub pass: bool,
}

pub fn l2_equivalence_check(
    space: &FunctionSpace,
    points: &[Vec<f64>],
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<L2Equivalence, VerifyError> {
    let (m, n) = (points.len(), space.dim());
    if m < n {
        return Err(VerifyError::ShapeMismatch { m, n });
    }
    let weighted = false;
    let design = build_design(space, points, weighted, true);
    let sigmas = design_singular_values(&design);
    let eig_high = sigmas.first().map(|s| s * s).unwrap_or(0.0);
    let eig_low = sigmas.last().map(|s| s * s).unwrap_or(0.0);

    let mut rng = seeded_rng(seed);
    let mut worst_low = f64::INFINITY;
    let mut worst_high = 0.0_f64;
    for _ in 0..trials {
        let ratio = match &design {
            Design::Real(a) => {
                let mut c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
                for v in c.iter_mut() {
                    *v /= norm;
                }
                let mut acc = 0.0;
                for row in 0..m {
                    let mut s = 0.0;
                    for i in 0..n {
                        s += a[[row, i]] * c[i];
                    }
                    acc += s * s;
                }
                acc
            }
            Design::Complex(a) => {
                let mut c: Vec<Complex64> = (0..n)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                let norm = c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
                for v in c.iter_mut() {
                    *v /= norm;
                }
                let mut acc = 0.0;
                for row in 0..m {
                    let mut s = Complex64::new(0.0, 0.0);
                    for i in 0..n {
                        s += a[[row, i]] * c[i];
                    }
                    acc += s.norm_sqr();
                }
                acc
            }
        };
        worst_low = worst_low.min(ratio);
        worst_high = worst_high.max(ratio);
    }
    // ratios are ||v||^2_{2,A} for unit ||v||_{2,mu}; the sandwich requires
    // them within [1 - delta, 1 + delta]
    let pass = worst_low >= 1.0 - delta - 1e-12 && worst_high <= 1.0 + delta + 1e-12;
    Ok(L2Equivalence {
        worst_low,
        worst_high,
        eig_low,
        eig_high,
        pass,
    })
}

/// Smallest/largest singular values of the square alternant at exactly `N`
/// points, and whether it counts as nonsingular.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AlternantReport {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub nonsingular: bool,
}

pub fn alternant_check(
    space: &FunctionSpace,
    points: &[Vec<f64>],
) -> Result<AlternantReport, VerifyError> {
    let n = space.dim();
    if points.len() != n {
        return Err(VerifyError::WrongAlternantSize {
            expected: n,
            got: points.len(),
        });
    }
    let design = build_design(space, points, false, false);
    let sigmas = design_singular_values(&design);
    let sigma_max = sigmas.first().copied().unwrap_or(0.0);
    let sigma_min = sigmas.last().copied().unwrap_or(0.0);
    Ok(AlternantReport {
        sigma_min,
        sigma_max,
        nonsingular: sigma_min > 1e-12 * sigma_max,
    })
}

/// Result of the LP sweep for the discrete-to-continuum sup-norm ratio.
#[derive(Clone, Debug, Serialize)]
pub struct SupRatio {
    /// Grid maximum of the per-point extremal ratio (a lower estimate of
    /// the true constant; pair with the Lipschitz inflation for an upper
    /// companion).
    pub c_hat: f64,
    /// Grid point attaining the maximum.
    pub argmax: Vec<f64>,
    /// `K sup * sqrt(N) / sigma_min` fallback bound from the leading square
    /// alternant.
    pub cheap_bound: f64,
    pub alternant_sigma_min: f64,
    /// Polygonal relaxation factor for complex spaces (`sec(pi/16)`).
    pub polygon_inflation: Option<f64>,
    /// Null direction certifying an unbounded ratio, when the mesh fails to
    /// determine the space.
    pub certificate: Option<Vec<f64>>,
}

/// Default evaluation grid for sup-norm estimates, sized by dimension.
pub fn default_eval_grid(domain: &Domain) -> TensorGrid {
    let per_axis = match domain.dim() {
        1 => 257,
        2 => 33,
        _ => 9,
    };
    TensorGrid::uniform(domain, &vec![per_axis; domain.dim()])
}

/// Computes the sup-ratio constant over an evaluation grid by solving one
/// LP per grid point (warm-started along the sweep).
pub fn sup_ratio_constant(
    space: &FunctionSpace,
    profile: &KernelProfile,
    mesh_points: &[Vec<f64>],
    grid: &TensorGrid,
) -> Result<SupRatio, VerifyError> {
    let n = space.dim();
    let m = mesh_points.len();
    if m < n {
        return Err(VerifyError::ShapeMismatch { m, n });
    }
    let design = build_design(space, mesh_points, false, false);

    // Rank pre-check; a deficient mesh cannot bound any norm.
    let sigmas = design_singular_values(&design);
    let sigma_max = sigmas.first().copied().unwrap_or(0.0);
    if sigmas.last().copied().unwrap_or(0.0) <= 1e-12 * sigma_max {
        let certificate = match &design {
            Design::Real(a) => linalg::smallest_singular_pair(a).1,
            Design::Complex(a) => {
                // real stacking of the null direction
                let (mt, nt) = a.dim();
                let mut stacked = Array2::zeros((2 * mt, 2 * nt));
                for r in 0..mt {
                    for c in 0..nt {
                        let z = a[[r, c]];
                        stacked[[r, c]] = z.re;
                        stacked[[r, c + nt]] = -z.im;
                        stacked[[r + mt, c]] = z.im;
                        stacked[[r + mt, c + nt]] = z.re;
                    }
                }
                linalg::smallest_singular_pair(&stacked).1
            }
        };
        let alternant = alternant_check(space, &mesh_points[..n])?;
        return Ok(SupRatio {
            c_hat: f64::INFINITY,
            argmax: vec![],
            cheap_bound: f64::INFINITY,
            alternant_sigma_min: alternant.sigma_min,
            polygon_inflation: space_polygon_inflation(space),
            certificate: Some(certificate),
        });
    }

    let alternant = alternant_check(space, &mesh_points[..n])?;
    let cheap_bound = if alternant.nonsingular {
        profile.k_mu() * (n as f64).sqrt() / alternant.sigma_min
    } else {
        f64::INFINITY
    };

    let mut buf = space.make_buffer();
    let mut c_hat = 0.0_f64;
    let mut argmax = vec![];
    match design {
        Design::Real(a) => {
            let mut solver = SupRatioLp::new(a);
            for flat in 0..grid.len() {
                let x = grid.point(flat);
                space.eval_into(&x, &mut buf, false)?;
                match solver.solve(&buf.re) {
                    LpOutcome::Optimal(v) => {
                        if v > c_hat {
                            c_hat = v;
                            argmax = x;
                        }
                    }
                    LpOutcome::Infeasible | LpOutcome::Stalled => {
                        return Err(VerifyError::LpStalled)
                    }
                }
            }
        }
        Design::Complex(a) => {
            // Polygonal relaxation: half-plane constraints at 8 rotations of
            // each mesh row; their negatives come with the mirrored columns,
            // giving the 16-gon. Objectives use the same 8 rotations (the
            // opposite directions have equal value by symmetry).
            let (mt, nt) = a.dim();
            let half = POLYGON_ANGLES / 2;
            let mut rows = Array2::zeros((half * mt, 2 * nt));
            for (k, angle) in polygon_angles().take(half).enumerate() {
                let rot = Complex64::from_polar(1.0, -angle);
                for r in 0..mt {
                    for c in 0..nt {
                        let z = rot * a[[r, c]];
                        rows[[k * mt + r, c]] = z.re;
                        rows[[k * mt + r, c + nt]] = -z.im;
                    }
                }
            }
            let mut solver = SupRatioLp::new(rows);
            let mut w = vec![0.0; 2 * nt];
            for flat in 0..grid.len() {
                let x = grid.point(flat);
                space.eval_into(&x, &mut buf, false)?;
                let vals: Vec<Complex64> = (0..nt)
                    .map(|i| Complex64::new(buf.re[i], buf.im[i]))
                    .collect();
                for angle in polygon_angles().take(half) {
                    let rot = Complex64::from_polar(1.0, -angle);
                    for (i, v) in vals.iter().enumerate() {
                        let z = rot * v;
                        w[i] = z.re;
                        w[i + nt] = -z.im;
                    }
                    match solver.solve(&w) {
                        LpOutcome::Optimal(v) => {
                            if v > c_hat {
                                c_hat = v;
                                argmax = x.clone();
                            }
                        }
                        LpOutcome::Infeasible | LpOutcome::Stalled => {
                            return Err(VerifyError::LpStalled)
                        }
                    }
                }
            }
        }
    }
    Ok(SupRatio {
        c_hat,
        argmax,
        cheap_bound,
        alternant_sigma_min: alternant.sigma_min,
        polygon_inflation: space_polygon_inflation(space),
        certificate: None,
    })
}

fn polygon_angles() -> impl Iterator<Item = f64> {
    (0..POLYGON_ANGLES).map(|k| 2.0 * PI * k as f64 / POLYGON_ANGLES as f64)
}

fn space_polygon_inflation(space: &FunctionSpace) -> Option<f64> {
    if space.is_real() {
        None
    } else {
        Some(1.0 / (PI / POLYGON_ANGLES as f64).cos())
    }
}

/// Empirical probability that every draw of an `m`-point uniform mesh on
/// `[0,1]` misses the support of the indicator of `[0, 1/2]`, i.e. that the
/// discrete sup norm of that indicator vanishes. Expected `(1/2)^m`.
pub fn haar_failure_rate(m: usize, trials: usize, seed: u64) -> f64 {
    let mut rng = seeded_rng(seed);
    let indicator = |x: f64| -> f64 {
        if x <= 0.5 {
            1.0
        } else {
            0.0
        }
    };
    let mut failures = 0usize;
    for _ in 0..trials {
        let mut sup = 0.0_f64;
        for _ in 0..m {
            let x: f64 = rng.gen();
            sup = sup.max(indicator(x).abs());
        }
        if sup == 0.0 {
            failures += 1;
        }
    }
    failures as f64 / trials as f64
}

/// Sup-norm transfer check in the Christoffel-weighted space: for random
/// unit coefficients, the weighted function's grid sup must stay within
/// `sqrt(N / (1 - delta))` of its mesh sup.
pub fn weighted_sup_check(
    space: &FunctionSpace,
    mesh_points: &[Vec<f64>],
    grid: &TensorGrid,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Option<(bool, f64)> {
    if !space.is_real() {
        return None;
    }
    let n = space.dim();
    let weighted_values = |points: usize, at: &dyn Fn(usize) -> Vec<f64>| -> Array2<f64> {
        let mut out = Array2::zeros((points, n));
        let mut b = space.make_buffer();
        for row in 0..points {
            let x = at(row);
            space.eval_into(&x, &mut b, false).expect("point");
            let lambda = (n as f64 / b.kernel_diag()).sqrt();
            for i in 0..n {
                out[[row, i]] = lambda * b.re[i];
            }
        }
        out
    };
    let grid_vals = weighted_values(grid.len(), &|row| grid.point(row));
    let mesh_vals = weighted_values(mesh_points.len(), &|row| mesh_points[row].clone());
    let bound = (n as f64 / (1.0 - delta)).sqrt();
    let mut rng = seeded_rng(seed);
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let mut c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in c.iter_mut() {
            *v /= norm;
        }
        let sup_at = |vals: &Array2<f64>| -> f64 {
            let mut sup = 0.0_f64;
            for row in 0..vals.nrows() {
                let mut s = 0.0;
                for i in 0..n {
                    s += vals[[row, i]] * c[i];
                }
                sup = sup.max(s.abs());
            }
            sup
        };
        let ratio = sup_at(&grid_vals) / sup_at(&mesh_vals).max(1e-300);
        worst = worst.max(ratio);
    }
    Some((worst <= bound + 1e-9, worst))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PassFlags {
    pub gram: bool,
    pub equivalence: bool,
    pub sup_ratio: bool,
    pub alternant: bool,
}

impl PassFlags {
    pub fn all(&self) -> bool {
        self.gram && self.equivalence && self.sup_ratio && self.alternant
    }
}

/// Full certification record for one mesh.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub strategy: String,
    pub level: usize,
    pub n_dim: usize,
    pub m: usize,
    pub weighted: bool,
    pub delta_target: f64,
    pub gram_deviation: f64,
    pub sigma_min_design: f64,
    pub c_hat: f64,
    /// Upper companion of `c_hat` under the profile's Lipschitz inflation.
    pub c_hat_upper: f64,
    /// Norm-equivalence chain bound for the strategy.
    pub c_bound_l2: f64,
    /// Covering-based bound `k / (k - 2)` for space-filling strategies.
    pub c_bound_am: Option<f64>,
    pub cheap_bound: f64,
    pub alternant_sigma_min: f64,
    pub lipschitz_inflation: f64,
    pub equivalence: L2Equivalence,
    pub weighted_sup_ok: Option<bool>,
    pub passes: PassFlags,
    pub config_hash: Option<String>,
}

/// Certifies a mesh against its space: near-isometry, norm equivalence,
/// sup-norm ratio, alternant conditioning.
pub fn verify_mesh(
    space: &FunctionSpace,
    profile: &KernelProfile,
    mesh: &Mesh,
    delta: f64,
    grid: Option<&TensorGrid>,
    seed: u64,
) -> Result<VerificationReport, VerifyError> {
    let default_grid;
    let grid = match grid {
        Some(g) => g,
        None => {
            default_grid = default_eval_grid(space.domain());
            &default_grid
        }
    };
    let weighted = mesh.strategy == Strategy::MuVWam;
    let n = space.dim();

    let design = build_design(space, &mesh.points, weighted, true);
    let sigmas = design_singular_values(&design);
    let gram_dev = deviation_from_singular_values(&sigmas);
    let sigma_min_design = sigmas.last().copied().unwrap_or(0.0);

    let equivalence = l2_equivalence_check(space, &mesh.points, delta, 64, seed)?;
    let sup = sup_ratio_constant(space, profile, &mesh.points, grid)?;
    let alternant_ok = sup.alternant_sigma_min > 0.0;

    let inflation = profile.lipschitz_inflation();
    let c_bound_l2 = match mesh.strategy {
        Strategy::MuVWam => (n as f64).sqrt() * (profile.k_mu() / (1.0 - delta)).sqrt(),
        _ => (profile.k_mu() / (1.0 - delta)).sqrt(),
    };
    let c_bound_am = match mesh.strategy {
        Strategy::UniformAm | Strategy::NuAm => {
            mesh.rule.get("k").map(|k| k / (k - 2.0))
        }
        _ => None,
    };
    let sup_pass = match mesh.strategy {
        Strategy::UniformAm | Strategy::NuAm => {
            c_bound_am.map_or(sup.c_hat.is_finite(), |b| sup.c_hat <= b + 1e-9)
        }
        Strategy::Manual => sup.c_hat.is_finite(),
        _ => {
            // WAM chain bound applies on the near-isometry event.
            if gram_dev <= delta {
                sup.c_hat <= inflation * c_bound_l2 + 1e-9
            } else {
                sup.c_hat.is_finite()
            }
        }
    };
    let weighted_sup_ok = if weighted && gram_dev <= delta {
        weighted_sup_check(space, &mesh.points, grid, delta, 100, seed ^ 0x5eed).map(|(ok, _)| ok)
    } else {
        None
    };

    let passes = PassFlags {
        gram: gram_dev <= delta,
        equivalence: equivalence.pass,
        sup_ratio: sup_pass,
        alternant: alternant_ok,
    };
    Ok(VerificationReport {
        strategy: mesh.strategy.name().to_string(),
        level: mesh.level,
        n_dim: n,
        m: mesh.m,
        weighted,
        delta_target: delta,
        gram_deviation: gram_dev,
        sigma_min_design,
        c_hat: sup.c_hat,
        c_hat_upper: sup.c_hat * inflation,
        c_bound_l2,
        c_bound_am,
        cheap_bound: sup.cheap_bound,
        alternant_sigma_min: sup.alternant_sigma_min,
        lipschitz_inflation: inflation,
        equivalence,
        weighted_sup_ok,
        passes,
        config_hash: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshgen;
    use crate::spaces::{kernel_profile, GridSpec};
    use ndarray::array;

    fn cheb(dim: usize, level: usize) -> (FunctionSpace, KernelProfile) {
        let space = FunctionSpace::tensor_chebyshev(Domain::sym_box(dim), level).unwrap();
        let profile = kernel_profile(&space, &GridSpec::budget(8_000)).unwrap();
        (space, profile)
    }

    #[test]
    fn orthogonal_rows_have_zero_deviation() {
        // rows of a rotation matrix scaled by sqrt(M=2)^-1 * sqrt(2) = 1
        let theta: f64 = 0.7;
        let a = array![
            [theta.cos(), theta.sin()],
            [-theta.sin(), theta.cos()]
        ];
        assert!(gram_deviation_matrix(&a) < 1e-12);
    }

    #[test]
    fn repeated_point_rank_one_gramian() {
        let (space, _) = cheb(1, 2);
        let x = vec![0.3];
        let points: Vec<Vec<f64>> = (0..8).map(|_| x.clone()).collect();
        let dev = gram_deviation(&space, &points, false).unwrap();
        // rank-one Gramian: eigenvalues {K(x,x), 0, ..., 0}
        let mut buf = space.make_buffer();
        let k = space.kernel_diag_at(&x, &mut buf);
        let expected = (k - 1.0).abs().max(1.0);
        assert!((dev - expected).abs() < 1e-9, "dev {dev} expected {expected}");
        assert!(dev >= 1.0);
    }

    #[test]
    fn shape_error_when_undersampled() {
        let (space, _) = cheb(1, 3);
        let err = gram_deviation(&space, &[vec![0.1], vec![0.2]], false);
        assert!(matches!(err, Err(VerifyError::ShapeMismatch { .. })));
    }

    #[test]
    fn equivalence_extremes_match_eigen_oracle() {
        let (space, profile) = cheb(1, 3);
        let mesh = meshgen::build_muv_mesh(&space, &profile, 5).unwrap();
        let eq = l2_equivalence_check(&space, &mesh.points, 0.5, 200, 6).unwrap();
        assert!(eq.worst_low >= eq.eig_low - 1e-9);
        assert!(eq.worst_high <= eq.eig_high + 1e-9);
        // eigen extremes themselves obey the sandwich when deviation does
        let dev = gram_deviation(&space, &mesh.points, false).unwrap();
        assert!(eq.eig_high <= 1.0 + dev + 1e-9);
        assert!(eq.eig_low >= 1.0 - dev - 1e-9);
        // the discrete norm ratio evaluated at the smallest right-singular
        // vector reproduces the eigen extreme
        let Design::Real(a) = build_design(&space, &mesh.points, false, true) else {
            panic!("real family")
        };
        let (sigma_min, c) = crate::linalg::smallest_singular_pair(&a);
        let ratio: f64 = (0..a.nrows())
            .map(|row| {
                let s: f64 = (0..a.ncols()).map(|i| a[[row, i]] * c[i]).sum();
                s * s
            })
            .sum();
        assert!((ratio - sigma_min * sigma_min).abs() < 1e-8);
        assert!((ratio - eq.eig_low).abs() < 1e-8);
    }

    #[test]
    fn zero_deviation_means_unit_ratios() {
        // identity design: l2 ratios are exactly 1
        let a: Array2<f64> = Array2::eye(3);
        assert!(gram_deviation_matrix(&a) < 1e-14);
    }

    #[test]
    fn alternant_cases() {
        let (space, _) = cheb(1, 1);
        // {1, sqrt(3) x} at {0, 1}: matrix [[1, 0], [1, sqrt(3)]]
        let report = alternant_check(&space, &[vec![0.0], vec![1.0]]).unwrap();
        let gram_vals = [
            ((5.0 + 13.0_f64.sqrt()) / 2.0).sqrt(),
            ((5.0 - 13.0_f64.sqrt()) / 2.0).sqrt(),
        ];
        // space is Chebyshev {1, sqrt(2) x}; adjust oracle for sqrt(2)
        let s2 = 2.0_f64.sqrt();
        let m = array![[1.0, 0.0], [1.0, s2]];
        let sv = crate::linalg::singular_values(&m);
        assert!((report.sigma_max - sv[0]).abs() < 1e-10);
        assert!((report.sigma_min - sv[1]).abs() < 1e-10);
        assert!(report.nonsingular);
        let _ = gram_vals;

        let repeated = alternant_check(&space, &[vec![0.4], vec![0.4]]).unwrap();
        assert!(repeated.sigma_min < 1e-12);
        assert!(!repeated.nonsingular);
    }

    #[test]
    fn random_alternants_nonsingular() {
        let (space, _) = cheb(1, 3);
        for trial in 0..1000 {
            let pts = crate::measures::sample_mu(&space, space.dim(), trial).unwrap();
            let rep = alternant_check(&space, &pts.points).unwrap();
            assert!(rep.nonsingular, "trial {trial}");
        }
    }

    #[test]
    fn sup_ratio_mesh_covering_grid() {
        // mesh containing the whole evaluation grid: ratio 1
        let (space, profile) = cheb(1, 2);
        let grid = TensorGrid::uniform(space.domain(), &[33]);
        let mesh_points: Vec<Vec<f64>> = (0..grid.len()).map(|i| grid.point(i)).collect();
        let sup = sup_ratio_constant(&space, &profile, &mesh_points, &grid).unwrap();
        assert!((sup.c_hat - 1.0).abs() < 1e-7, "{}", sup.c_hat);
        assert!(sup.c_hat <= sup.cheap_bound + 1e-8);
    }

    #[test]
    fn sup_ratio_interval_endpoints() {
        // affine space {1, sqrt(2) x} (Chebyshev level 1), mesh {-1, 1}:
        // extremes of affine functions sit at interval endpoints, C = 1.
        let (space, profile) = cheb(1, 1);
        let grid = TensorGrid::uniform(space.domain(), &[101]);
        let sup =
            sup_ratio_constant(&space, &profile, &[vec![-1.0], vec![1.0]], &grid).unwrap();
        assert!((sup.c_hat - 1.0).abs() < 1e-7, "{}", sup.c_hat);

        // mesh {-1/2, 1/2}: affine extrapolation doubles at the endpoints
        let sup =
            sup_ratio_constant(&space, &profile, &[vec![-0.5], vec![0.5]], &grid).unwrap();
        assert!((sup.c_hat - 2.0).abs() < 1e-7, "{}", sup.c_hat);
        assert_eq!(sup.argmax.len(), 1);
        assert!(sup.argmax[0].abs() > 0.99);
    }

    #[test]
    fn sup_ratio_brute_force_oracle() {
        // dense direction search over the coefficient circle
        let (space, profile) = cheb(1, 2);
        let grid = TensorGrid::uniform(space.domain(), &[81]);
        let mesh: Vec<Vec<f64>> = vec![vec![-0.9], vec![-0.2], vec![0.5], vec![0.95]];
        let sup = sup_ratio_constant(&space, &profile, &mesh, &grid).unwrap();

        let n = space.dim();
        let mut brute = 0.0_f64;
        let mut buf = space.make_buffer();
        // coefficient sphere in R^3 scanned with two angles
        let steps = 100;
        for a in 0..steps {
            for b in 0..steps {
                let phi = PI * a as f64 / steps as f64;
                let psi = 2.0 * PI * b as f64 / steps as f64;
                let c = [phi.sin() * psi.cos(), phi.sin() * psi.sin(), phi.cos()];
                let eval = |x: f64, buf: &mut crate::spaces::EvalBuffer| -> f64 {
                    space.eval_into(&[x], buf, false).unwrap();
                    (0..n).map(|i| c[i] * buf.re[i]).sum::<f64>()
                };
                let mesh_sup = mesh
                    .iter()
                    .map(|p| eval(p[0], &mut buf).abs())
                    .fold(0.0_f64, f64::max);
                let grid_sup = (0..grid.len())
                    .map(|g| eval(grid.point(g)[0], &mut buf).abs())
                    .fold(0.0_f64, f64::max);
                brute = brute.max(grid_sup / mesh_sup);
            }
        }
        assert!(
            (sup.c_hat - brute).abs() <= 0.01 * brute,
            "lp {} brute {brute}",
            sup.c_hat
        );
        // the cheap alternant bound dominates
        assert!(sup.c_hat <= sup.cheap_bound + 1e-8);
    }

    #[test]
    fn sup_ratio_complex_space() {
        let space = FunctionSpace::exponential_cube(1, 1).unwrap();
        let profile = kernel_profile(&space, &GridSpec::budget(2_000)).unwrap();
        let grid = TensorGrid::uniform(space.domain(), &[41]);
        // generous mesh: the grid itself
        let mesh: Vec<Vec<f64>> = (0..41).map(|i| vec![i as f64 / 40.0]).collect();
        let sup = sup_ratio_constant(&space, &profile, &mesh, &grid).unwrap();
        let inflation = sup.polygon_inflation.unwrap();
        assert!((inflation - 1.0 / (PI / 16.0).cos()).abs() < 1e-12);
        // C lies within the polygonal bracket of 1
        assert!(sup.c_hat >= (PI / 16.0).cos() - 1e-6);
        assert!(sup.c_hat <= inflation + 1e-6);
    }

    #[test]
    fn sup_ratio_unbounded_certificate() {
        let (space, profile) = cheb(1, 2); // N = 3
        // three copies of one point cannot determine the space
        let mesh = vec![vec![0.2]; 3];
        let grid = TensorGrid::uniform(space.domain(), &[17]);
        let sup = sup_ratio_constant(&space, &profile, &mesh, &grid).unwrap();
        assert!(sup.c_hat.is_infinite());
        assert!(sup.certificate.is_some());
    }

    #[test]
    fn haar_rates() {
        let rate = haar_failure_rate(1, 100_000, 2);
        assert!((rate - 0.5).abs() < 3.0 * (0.25f64 / 100_000.0).sqrt());
        let rate = haar_failure_rate(3, 100_000, 3);
        let sigma = (0.125 * 0.875 / 100_000.0_f64).sqrt();
        assert!((rate - 0.125).abs() < 3.0 * sigma, "rate {rate}");
        let rate = haar_failure_rate(20, 10_000, 4);
        assert_eq!(rate, 0.0);
    }

    #[test]
    fn verify_full_mesh_report() {
        let (space, profile) = cheb(1, 3);
        let mesh = meshgen::build_muv_mesh(&space, &profile, 12).unwrap();
        let report = verify_mesh(&space, &profile, &mesh, 0.5, None, 99).unwrap();
        assert!(report.gram_deviation < 0.5, "{}", report.gram_deviation);
        assert!(report.passes.all(), "{:?}", report.passes);
        assert!(report.c_hat >= 1.0 - 1e-9);
        assert!(report.c_hat <= report.lipschitz_inflation * report.c_bound_l2);
        assert_eq!(report.weighted_sup_ok, Some(true));
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"gram_deviation\""));
    }
}


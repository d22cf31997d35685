//! Orthonormal hierarchical function spaces on box domains.
//!
//! A [`FunctionSpace`] owns an orthonormal basis of one of three families:
//! tensor-product Jacobi polynomials (Chebyshev as the `alpha = beta = -1/2`
//! special case), complex exponentials on the unit cube, or custom functions
//! orthonormalized against a supplied quadrature. All families provide
//! pointwise values and gradients, the kernel diagonal
//! `K(x,x) = sum_i |v_i(x)|^2`, and the Christoffel function `N / K(x,x)`.

mod custom;
mod index;
mod jacobi;
mod profile;

pub use custom::{orthonormalize_custom, CustomBasis, RawFn, RawGradFn};
pub use index::{Domain, IndexSet, MultiIndex};
pub use jacobi::JacobiRecurrence;
pub use profile::{kernel_profile, GridSpec, KernelProfile, TensorGrid};

use ndarray::{Array2, Array3};
use num_complex::Complex64;
use std::f64::consts::TAU;
use thiserror::Error;

/// Gramian tolerance every constructed basis must meet under its reference
/// quadrature.
pub const ORTHONORMALITY_TOL: f64 = 1e-8;

#[derive(Error, Debug)]
pub enum SpaceError {
    #[error("index set is empty")]
    EmptyIndexSet,
    #[error("multi-indices have mixed dimensions")]
    MixedIndexDimension,
    #[error("duplicate multi-index in explicit index set")]
    DuplicateIndex,
    #[error("domain has no axes")]
    EmptyDomain,
    #[error("invalid axis bounds: lower {lo} must be below upper {hi}")]
    BadBounds { lo: f64, hi: f64 },
    #[error("domain dimension {domain} does not match index dimension {index}")]
    DimensionMismatch { domain: usize, index: usize },
    #[error("complex exponentials require the unit cube domain")]
    ExponentialDomain,
    #[error("frequency list is empty")]
    EmptyFrequencies,
    #[error("duplicate frequency in explicit list")]
    DuplicateFrequency,
    #[error("point {index} lies outside the domain")]
    OutsideDomain { index: usize },
    #[error("family does not provide gradients")]
    GradientUnsupported,
    #[error("numerical rank deficiency while orthonormalizing function {index}")]
    RankDeficient { index: usize },
    #[error("quadrature nodes/weights mismatch raw function count or dimension")]
    BadQuadrature,
    #[error("evaluation grid is empty")]
    EmptyGrid,
}

/// Which basis family a space uses. Jacobi and Chebyshev share the same
/// machinery; the tag is kept for reporting and config round-trips.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FamilyKind {
    Jacobi,
    Chebyshev,
    Exponential,
    Custom,
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::Jacobi => "jacobi",
            FamilyKind::Chebyshev => "chebyshev",
            FamilyKind::Exponential => "exponential",
            FamilyKind::Custom => "custom",
        }
    }
}

#[derive(Clone, Debug)]
enum Family {
    Poly {
        chebyshev: bool,
        recurrence: JacobiRecurrence,
        indices: IndexSet,
    },
    Exponential {
        frequencies: Vec<Vec<i64>>,
        level: usize,
    },
    Custom {
        basis: CustomBasis,
        level: usize,
    },
}

/// An orthonormal function space over a box domain.
#[derive(Clone, Debug)]
pub struct FunctionSpace {
    family: Family,
    domain: Domain,
}

/// Dense basis evaluations at a list of points; complex for the exponential
/// family, real otherwise.
pub enum BasisMatrix {
    Real(Array2<f64>),
    Complex(Array2<Complex64>),
}

/// Basis gradients at a list of points, indexed `(point, basis, axis)`.
pub enum GradTensor {
    Real(Array3<f64>),
    Complex(Array3<Complex64>),
}

/// Nodes and weights of a discrete inner product on the domain.
#[derive(Clone, Debug)]
pub struct Quadrature {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

/// Reusable per-point evaluation scratch. `im`/`grad_im` stay empty for real
/// families.
#[derive(Clone, Debug, Default)]
pub struct EvalBuffer {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub grad_re: Vec<f64>,
    pub grad_im: Vec<f64>,
    axis_vals: Vec<f64>,
    axis_ders: Vec<f64>,
    raw_vals: Vec<f64>,
    raw_grads: Vec<f64>,
}

impl EvalBuffer {
    /// `K(x,x)` from the last evaluation.
    pub fn kernel_diag(&self) -> f64 {
        let re: f64 = self.re.iter().map(|v| v * v).sum();
        let im: f64 = self.im.iter().map(|v| v * v).sum();
        re + im
    }

    /// `R(x)^2 = sum_i ||grad v_i(x)||^2` from the last gradient evaluation.
    pub fn grad_norm_sq(&self) -> f64 {
        let re: f64 = self.grad_re.iter().map(|v| v * v).sum();
        let im: f64 = self.grad_im.iter().map(|v| v * v).sum();
        re + im
    }

    /// `|v_i(x)|^2` for one component from the last evaluation.
    pub fn component_abs_sq(&self, i: usize) -> f64 {
        let re = self.re[i];
        let im = if self.im.is_empty() { 0.0 } else { self.im[i] };
        re * re + im * im
    }
}

impl FunctionSpace {
    /// Tensor-product Jacobi polynomials of total degree `level` on `domain`.
    pub fn tensor_jacobi(
        domain: Domain,
        alpha: f64,
        beta: f64,
        level: usize,
    ) -> Result<Self, SpaceError> {
        let indices = IndexSet::total_degree(level, domain.dim());
        Self::poly_with_indices(domain, alpha, beta, false, indices)
    }

    /// Tensor-product Chebyshev polynomials of total degree `level`.
    pub fn tensor_chebyshev(domain: Domain, level: usize) -> Result<Self, SpaceError> {
        let indices = IndexSet::total_degree(level, domain.dim());
        Self::poly_with_indices(domain, -0.5, -0.5, true, indices)
    }

    /// Polynomial space over an explicit index set.
    pub fn jacobi_with_indices(
        domain: Domain,
        alpha: f64,
        beta: f64,
        indices: IndexSet,
    ) -> Result<Self, SpaceError> {
        let chebyshev = alpha == -0.5 && beta == -0.5;
        Self::poly_with_indices(domain, alpha, beta, chebyshev, indices)
    }

    fn poly_with_indices(
        domain: Domain,
        alpha: f64,
        beta: f64,
        chebyshev: bool,
        indices: IndexSet,
    ) -> Result<Self, SpaceError> {
        if domain.dim() != indices.dim() {
            return Err(SpaceError::DimensionMismatch {
                domain: domain.dim(),
                index: indices.dim(),
            });
        }
        let recurrence = JacobiRecurrence::new(alpha, beta, indices.max_entry() as usize + 1);
        Ok(Self {
            family: Family::Poly {
                chebyshev,
                recurrence,
                indices,
            },
            domain,
        })
    }

    /// Complex exponentials with frequency set `{-level..level}^d` on the
    /// unit cube, ordered by max-norm grade so levels nest as prefixes.
    pub fn exponential_cube(dim: usize, level: usize) -> Result<Self, SpaceError> {
        let frequencies = cube_frequencies(dim, level as i64);
        Self::exponential(Domain::unit_cube(dim), frequencies, level)
    }

    /// Complex exponentials with an explicit frequency list on the unit cube.
    pub fn exponential(
        domain: Domain,
        frequencies: Vec<Vec<i64>>,
        level: usize,
    ) -> Result<Self, SpaceError> {
        if frequencies.is_empty() {
            return Err(SpaceError::EmptyFrequencies);
        }
        let d = domain.dim();
        if frequencies.iter().any(|f| f.len() != d) {
            return Err(SpaceError::MixedIndexDimension);
        }
        if domain
            .bounds()
            .iter()
            .any(|&(lo, hi)| lo != 0.0 || hi != 1.0)
        {
            return Err(SpaceError::ExponentialDomain);
        }
        let mut sorted = frequencies;
        sorted.sort_by(|a, b| freq_cmp(a, b));
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(SpaceError::DuplicateFrequency);
        }
        Ok(Self {
            family: Family::Exponential {
                frequencies: sorted,
                level,
            },
            domain,
        })
    }

    /// Space backed by a pre-orthonormalized custom basis.
    pub(crate) fn from_custom(basis: CustomBasis, domain: Domain, level: usize) -> Self {
        Self {
            family: Family::Custom { basis, level },
            domain,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.family {
            Family::Poly { indices, .. } => indices.len(),
            Family::Exponential { frequencies, .. } => frequencies.len(),
            Family::Custom { basis, .. } => basis.len(),
        }
    }

    pub fn level(&self) -> usize {
        match &self.family {
            Family::Poly { indices, .. } => indices.level(),
            Family::Exponential { level, .. } => *level,
            Family::Custom { level, .. } => *level,
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn family_kind(&self) -> FamilyKind {
        match &self.family {
            Family::Poly { chebyshev, .. } => {
                if *chebyshev {
                    FamilyKind::Chebyshev
                } else {
                    FamilyKind::Jacobi
                }
            }
            Family::Exponential { .. } => FamilyKind::Exponential,
            Family::Custom { .. } => FamilyKind::Custom,
        }
    }

    pub fn is_real(&self) -> bool {
        !matches!(self.family, Family::Exponential { .. })
    }

    /// Jacobi weight exponents when the space is polynomial.
    pub fn jacobi_params(&self) -> Option<(f64, f64)> {
        match &self.family {
            Family::Poly { recurrence, .. } => Some((recurrence.alpha(), recurrence.beta())),
            _ => None,
        }
    }

    pub fn index_set(&self) -> Option<&IndexSet> {
        match &self.family {
            Family::Poly { indices, .. } => Some(indices),
            _ => None,
        }
    }

    pub fn frequencies(&self) -> Option<&[Vec<i64>]> {
        match &self.family {
            Family::Exponential { frequencies, .. } => Some(frequencies),
            _ => None,
        }
    }

    /// Whether the base measure is uniform on the domain box.
    pub fn base_measure_is_uniform(&self) -> bool {
        match &self.family {
            Family::Exponential { .. } => true,
            Family::Poly { recurrence, .. } => {
                recurrence.alpha() == 0.0 && recurrence.beta() == 0.0
            }
            Family::Custom { .. } => false,
        }
    }

    pub fn make_buffer(&self) -> EvalBuffer {
        let n = self.dim();
        let d = self.domain.dim();
        let mut buf = EvalBuffer {
            re: vec![0.0; n],
            ..Default::default()
        };
        match &self.family {
            Family::Poly { indices, .. } => {
                let depth = indices.max_entry() as usize + 1;
                buf.axis_vals = vec![0.0; d * depth];
                buf.axis_ders = vec![0.0; d * depth];
                buf.grad_re = vec![0.0; n * d];
            }
            Family::Exponential { .. } => {
                buf.im = vec![0.0; n];
                buf.grad_re = vec![0.0; n * d];
                buf.grad_im = vec![0.0; n * d];
            }
            Family::Custom { basis, .. } => {
                buf.raw_vals = vec![0.0; basis.len()];
                buf.raw_grads = vec![0.0; basis.len() * d];
                buf.grad_re = vec![0.0; n * d];
            }
        }
        buf
    }

    /// Evaluates every basis function (and optionally every gradient) at one
    /// point. The caller guarantees `x` lies in the domain; the public
    /// [`FunctionSpace::eval_basis`] / [`FunctionSpace::eval_grad`] wrappers
    /// do the membership checks.
    pub fn eval_into(
        &self,
        x: &[f64],
        buf: &mut EvalBuffer,
        want_grad: bool,
    ) -> Result<(), SpaceError> {
        let d = self.domain.dim();
        debug_assert_eq!(x.len(), d);
        match &self.family {
            Family::Poly {
                recurrence,
                indices,
                ..
            } => {
                let depth = indices.max_entry() as usize + 1;
                for j in 0..d {
                    let t = self.domain.to_reference(j, x[j]);
                    let vals = &mut buf.axis_vals[j * depth..(j + 1) * depth];
                    if want_grad {
                        let ders = &mut buf.axis_ders[j * depth..(j + 1) * depth];
                        recurrence.eval_into(t, vals, Some(ders));
                    } else {
                        recurrence.eval_into(t, vals, None);
                    }
                }
                for (i, ix) in indices.iter().enumerate() {
                    let mut val = 1.0;
                    for j in 0..d {
                        val *= buf.axis_vals[j * depth + ix.entry(j) as usize];
                    }
                    buf.re[i] = val;
                    if want_grad {
                        for q in 0..d {
                            let mut g = buf.axis_ders[q * depth + ix.entry(q) as usize]
                                * self.domain.reference_scale(q);
                            for j in 0..d {
                                if j != q {
                                    g *= buf.axis_vals[j * depth + ix.entry(j) as usize];
                                }
                            }
                            buf.grad_re[i * d + q] = g;
                        }
                    }
                }
            }
            Family::Exponential { frequencies, .. } => {
                for (i, f) in frequencies.iter().enumerate() {
                    let phase: f64 = TAU * f.iter().zip(x).map(|(&fj, &xj)| fj as f64 * xj).sum::<f64>();
                    let (s, c) = phase.sin_cos();
                    buf.re[i] = c;
                    buf.im[i] = s;
                    if want_grad {
                        for q in 0..d {
                            let fq = TAU * f[q] as f64;
                            buf.grad_re[i * d + q] = -fq * s;
                            buf.grad_im[i * d + q] = fq * c;
                        }
                    }
                }
            }
            Family::Custom { basis, .. } => {
                basis.eval_into(
                    x,
                    &mut buf.raw_vals,
                    &mut buf.raw_grads,
                    &mut buf.re,
                    &mut buf.grad_re,
                    want_grad,
                )?;
            }
        }
        Ok(())
    }

    /// Basis values at a list of points; errors when a point leaves the
    /// domain.
    pub fn eval_basis(&self, points: &[Vec<f64>]) -> Result<BasisMatrix, SpaceError> {
        self.check_points(points)?;
        let n = self.dim();
        let mut buf = self.make_buffer();
        if self.is_real() {
            let mut out = Array2::zeros((points.len(), n));
            for (m, x) in points.iter().enumerate() {
                self.eval_into(x, &mut buf, false)?;
                for i in 0..n {
                    out[[m, i]] = buf.re[i];
                }
            }
            Ok(BasisMatrix::Real(out))
        } else {
            let mut out = Array2::from_elem((points.len(), n), Complex64::new(0.0, 0.0));
            for (m, x) in points.iter().enumerate() {
                self.eval_into(x, &mut buf, false)?;
                for i in 0..n {
                    out[[m, i]] = Complex64::new(buf.re[i], buf.im[i]);
                }
            }
            Ok(BasisMatrix::Complex(out))
        }
    }

    /// Basis gradients at a list of points, `(point, basis, axis)`.
    pub fn eval_grad(&self, points: &[Vec<f64>]) -> Result<GradTensor, SpaceError> {
        self.check_points(points)?;
        let n = self.dim();
        let d = self.domain.dim();
        let mut buf = self.make_buffer();
        if self.is_real() {
            let mut out = Array3::zeros((points.len(), n, d));
            for (m, x) in points.iter().enumerate() {
                self.eval_into(x, &mut buf, true)?;
                for i in 0..n {
                    for q in 0..d {
                        out[[m, i, q]] = buf.grad_re[i * d + q];
                    }
                }
            }
            Ok(GradTensor::Real(out))
        } else {
            let mut out = Array3::from_elem((points.len(), n, d), Complex64::new(0.0, 0.0));
            for (m, x) in points.iter().enumerate() {
                self.eval_into(x, &mut buf, true)?;
                for i in 0..n {
                    for q in 0..d {
                        out[[m, i, q]] =
                            Complex64::new(buf.grad_re[i * d + q], buf.grad_im[i * d + q]);
                    }
                }
            }
            Ok(GradTensor::Complex(out))
        }
    }

    fn check_points(&self, points: &[Vec<f64>]) -> Result<(), SpaceError> {
        for (index, x) in points.iter().enumerate() {
            if !self.domain.contains(x) {
                return Err(SpaceError::OutsideDomain { index });
            }
        }
        Ok(())
    }

    /// `K(x,x)` at one in-domain point.
    pub fn kernel_diag_at(&self, x: &[f64], buf: &mut EvalBuffer) -> f64 {
        self.eval_into(x, buf, false).expect("in-domain point");
        buf.kernel_diag()
    }

    /// `R(x)` at one in-domain point.
    pub fn grad_norm_at(&self, x: &[f64], buf: &mut EvalBuffer) -> Result<f64, SpaceError> {
        self.eval_into(x, buf, true)?;
        Ok(buf.grad_norm_sq().sqrt())
    }

    /// The discrete inner product under which the basis is orthonormal:
    /// tensor Gauss-Jacobi for polynomial families, tensor midpoint for
    /// exponentials (exact by aliasing), the stored quadrature for custom
    /// bases.
    pub fn reference_quadrature(&self) -> Quadrature {
        match &self.family {
            Family::Poly {
                recurrence,
                indices,
                ..
            } => {
                let q = indices.max_entry() as usize + 2;
                let (t, w) = recurrence.gauss(q);
                tensor_quadrature(&self.domain, &t, &w)
            }
            Family::Exponential { frequencies, .. } => {
                let fmax = frequencies
                    .iter()
                    .flat_map(|f| f.iter().map(|v| v.unsigned_abs()))
                    .max()
                    .unwrap_or(0) as usize;
                let m = (2 * fmax + 1).max(3);
                let t: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
                let w = vec![1.0 / m as f64; m];
                let reference: Vec<f64> = t.iter().map(|&x| 2.0 * x - 1.0).collect();
                tensor_quadrature(&self.domain, &reference, &w)
            }
            Family::Custom { basis, .. } => basis.quadrature().clone(),
        }
    }

    /// Max-entry deviation of the quadrature Gramian from the identity.
    pub fn gramian_max_deviation(&self) -> f64 {
        let quad = self.reference_quadrature();
        let n = self.dim();
        let mut buf = self.make_buffer();
        let mut gram_re = Array2::<f64>::zeros((n, n));
        let mut gram_im = Array2::<f64>::zeros((n, n));
        for (node, &w) in quad.nodes.iter().zip(quad.weights.iter()) {
            self.eval_into(node, &mut buf, false).expect("quadrature node");
            for i in 0..n {
                for j in 0..n {
                    let (are, aim) = (buf.re[i], buf.im.get(i).copied().unwrap_or(0.0));
                    let (bre, bim) = (buf.re[j], buf.im.get(j).copied().unwrap_or(0.0));
                    // v_i conj(v_j)
                    gram_re[[i, j]] += w * (are * bre + aim * bim);
                    gram_im[[i, j]] += w * (aim * bre - are * bim);
                }
            }
        }
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                let e = ((gram_re[[i, j]] - target).powi(2) + gram_im[[i, j]].powi(2)).sqrt();
                dev = dev.max(e);
            }
        }
        dev
    }

    /// Residual of projecting the constant function onto the space under the
    /// reference quadrature; near zero exactly when `1` lies in the span.
    /// Evaluated pointwise on the nodes to stay forward-stable.
    pub fn constant_projection_residual(&self) -> f64 {
        let quad = self.reference_quadrature();
        let n = self.dim();
        let mut buf = self.make_buffer();
        let mut coef_re = vec![0.0; n];
        let mut coef_im = vec![0.0; n];
        for (node, &w) in quad.nodes.iter().zip(quad.weights.iter()) {
            self.eval_into(node, &mut buf, false).expect("quadrature node");
            for i in 0..n {
                coef_re[i] += w * buf.re[i];
                coef_im[i] -= w * buf.im.get(i).copied().unwrap_or(0.0);
            }
        }
        let mut residual_sq = 0.0;
        for (node, &w) in quad.nodes.iter().zip(quad.weights.iter()) {
            self.eval_into(node, &mut buf, false).expect("quadrature node");
            let mut proj_re = 0.0;
            let mut proj_im = 0.0;
            for i in 0..n {
                let vim = buf.im.get(i).copied().unwrap_or(0.0);
                proj_re += coef_re[i] * buf.re[i] - coef_im[i] * vim;
                proj_im += coef_re[i] * vim + coef_im[i] * buf.re[i];
            }
            residual_sq += w * ((1.0 - proj_re).powi(2) + proj_im.powi(2));
        }
        residual_sq.max(0.0).sqrt()
    }
}

fn tensor_quadrature(domain: &Domain, reference_nodes: &[f64], weights_1d: &[f64]) -> Quadrature {
    let d = domain.dim();
    let q = reference_nodes.len();
    let total = q.pow(d as u32);
    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let mut node = vec![0.0; d];
        let mut w = 1.0;
        for j in (0..d).rev() {
            let idx = rem % q;
            rem /= q;
            node[j] = domain.from_reference(j, reference_nodes[idx]);
            w *= weights_1d[idx];
        }
        nodes.push(node);
        weights.push(w);
    }
    Quadrature { nodes, weights }
}

fn cube_frequencies(dim: usize, level: i64) -> Vec<Vec<i64>> {
    let side = 2 * level + 1;
    let total = (side as usize).pow(dim as u32);
    let mut out = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat as i64;
        let mut f = vec![0i64; dim];
        for j in (0..dim).rev() {
            f[j] = rem % side - level;
            rem /= side;
        }
        out.push(f);
    }
    out.sort_by(|a, b| freq_cmp(a, b));
    out
}

fn freq_cmp(a: &[i64], b: &[i64]) -> std::cmp::Ordering {
    let ga = a.iter().map(|v| v.abs()).max().unwrap_or(0);
    let gb = b.iter().map(|v| v.abs()).max().unwrap_or(0);
    ga.cmp(&gb).then_with(|| a.cmp(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_t1_value() {
        let space = FunctionSpace::tensor_chebyshev(Domain::sym_box(1), 1).unwrap();
        match space.eval_basis(&[vec![1.0]]).unwrap() {
            BasisMatrix::Real(m) => {
                assert!((m[[0, 0]] - 1.0).abs() < 1e-14);
                assert!((m[[0, 1]] - 2.0_f64.sqrt()).abs() < 1e-14);
            }
            _ => panic!("real family"),
        }
    }

    #[test]
    fn constant_basis_element_everywhere_one() {
        let space = FunctionSpace::tensor_jacobi(Domain::sym_box(2), 1.0, 2.0, 3).unwrap();
        match space.eval_basis(&[vec![0.3, -0.7]]).unwrap() {
            BasisMatrix::Real(m) => assert!((m[[0, 0]] - 1.0).abs() < 1e-13),
            _ => panic!("real family"),
        }
    }

    #[test]
    fn exponential_at_origin_is_one() {
        let space = FunctionSpace::exponential_cube(2, 1).unwrap();
        match space.eval_basis(&[vec![0.0, 0.0]]).unwrap() {
            BasisMatrix::Complex(m) => {
                for i in 0..space.dim() {
                    assert!((m[[0, i]] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
                }
            }
            _ => panic!("complex family"),
        }
    }

    #[test]
    fn exponential_gradient_norm() {
        // f = (1, 0): ||grad v|| = 2 pi everywhere.
        let space =
            FunctionSpace::exponential(Domain::unit_cube(2), vec![vec![1, 0]], 1).unwrap();
        match space.eval_grad(&[vec![0.3, 0.9]]).unwrap() {
            GradTensor::Complex(g) => {
                let norm: f64 = (0..2).map(|q| g[[0, 0, q]].norm_sqr()).sum::<f64>().sqrt();
                assert!((norm - TAU).abs() < 1e-12);
            }
            _ => panic!("complex family"),
        }
    }

    #[test]
    fn linear_gradient_constant() {
        // orthonormal T_1 = sqrt(2) x has derivative sqrt(2) everywhere.
        let space = FunctionSpace::tensor_chebyshev(Domain::sym_box(1), 1).unwrap();
        match space.eval_grad(&[vec![-0.4], vec![0.8]]).unwrap() {
            GradTensor::Real(g) => {
                for m in 0..2 {
                    assert!((g[[m, 0, 0]]).abs() < 1e-14);
                    assert!((g[[m, 1, 0]] - 2.0_f64.sqrt()).abs() < 1e-13);
                }
            }
            _ => panic!("real family"),
        }
    }

    #[test]
    fn outside_domain_rejected() {
        let space = FunctionSpace::tensor_chebyshev(Domain::sym_box(1), 2).unwrap();
        let err = space.eval_basis(&[vec![1.5]]);
        assert!(matches!(err, Err(SpaceError::OutsideDomain { index: 0 })));
    }

    #[test]
    fn orthonormality_across_families() {
        let cases: Vec<FunctionSpace> = vec![
            FunctionSpace::tensor_chebyshev(Domain::sym_box(1), 8).unwrap(),
            FunctionSpace::tensor_chebyshev(Domain::sym_box(2), 5).unwrap(),
            FunctionSpace::tensor_chebyshev(Domain::sym_box(3), 4).unwrap(),
            FunctionSpace::tensor_jacobi(Domain::sym_box(2), 0.0, 0.0, 6).unwrap(),
            FunctionSpace::tensor_jacobi(Domain::sym_box(1), 1.0, 3.0, 8).unwrap(),
            FunctionSpace::tensor_jacobi(
                Domain::new(vec![(0.0, 2.0), (-3.0, 1.0)]).unwrap(),
                0.5,
                0.0,
                4,
            )
            .unwrap(),
            FunctionSpace::exponential_cube(1, 8).unwrap(),
            FunctionSpace::exponential_cube(2, 3).unwrap(),
            FunctionSpace::exponential_cube(3, 1).unwrap(),
        ];
        for space in cases {
            let dev = space.gramian_max_deviation();
            assert!(
                dev <= ORTHONORMALITY_TOL,
                "family {:?} level {} deviation {dev}",
                space.family_kind(),
                space.level()
            );
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        use rand::Rng;
        let spaces = vec![
            FunctionSpace::tensor_chebyshev(Domain::sym_box(2), 4).unwrap(),
            FunctionSpace::tensor_jacobi(Domain::sym_box(1), 2.0, 0.0, 6).unwrap(),
            FunctionSpace::exponential_cube(2, 2).unwrap(),
        ];
        let mut rng = crate::rng::seeded_rng(7);
        let step = 1e-5;
        for space in spaces {
            let d = space.domain().dim();
            let mut buf = space.make_buffer();
            let mut plus = space.make_buffer();
            let mut minus = space.make_buffer();
            for _ in 0..100 {
                let x: Vec<f64> = (0..d)
                    .map(|j| {
                        let (lo, hi) = space.domain().bounds()[j];
                        rng.gen_range(lo + 0.01 * (hi - lo)..hi - 0.01 * (hi - lo))
                    })
                    .collect();
                space.eval_into(&x, &mut buf, true).unwrap();
                for q in 0..d {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[q] += step;
                    xm[q] -= step;
                    space.eval_into(&xp, &mut plus, false).unwrap();
                    space.eval_into(&xm, &mut minus, false).unwrap();
                    for i in 0..space.dim() {
                        let fd_re = (plus.re[i] - minus.re[i]) / (2.0 * step);
                        let got_re = buf.grad_re[i * d + q];
                        let scale = 1.0_f64.max(got_re.abs());
                        assert!(
                            (fd_re - got_re).abs() / scale < 1e-4,
                            "re mismatch {:?} i={i} q={q}",
                            space.family_kind()
                        );
                        if !buf.im.is_empty() {
                            let fd_im = (plus.im[i] - minus.im[i]) / (2.0 * step);
                            let got_im = buf.grad_im[i * d + q];
                            let scale = 1.0_f64.max(got_im.abs());
                            assert!((fd_im - got_im).abs() / scale < 1e-4);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn exponential_prefix_hierarchy() {
        let small = FunctionSpace::exponential_cube(2, 1).unwrap();
        let large = FunctionSpace::exponential_cube(2, 2).unwrap();
        let fs = small.frequencies().unwrap();
        let fl = large.frequencies().unwrap();
        assert_eq!(&fl[..fs.len()], fs);
    }

    #[test]
    fn constant_projection() {
        let space = FunctionSpace::tensor_chebyshev(Domain::sym_box(2), 3).unwrap();
        assert!(space.constant_projection_residual() < 1e-10);
        let no_const =
            FunctionSpace::exponential(Domain::unit_cube(1), vec![vec![1], vec![2]], 1).unwrap();
        assert!(no_const.constant_projection_residual() > 0.9);
    }
}

//! Quadrature-orthonormalized custom bases.
//!
//! Raw functions are orthonormalized by modified Gram-Schmidt (with one
//! reorthogonalization pass) against a user-supplied quadrature, producing a
//! triangular change of basis that is then applied at evaluation time.

use super::{Domain, FunctionSpace, Quadrature, SpaceError};
use ndarray::Array2;
use std::fmt;
use std::sync::Arc;

pub type RawFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type RawGradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Relative rank tolerance for declaring a raw function dependent.
const RANK_TOL: f64 = 1e-10;

#[derive(Clone)]
pub struct CustomBasis {
    raws: Vec<RawFn>,
    grads: Option<Vec<RawGradFn>>,
    /// Column `j` expands orthonormal `v_j` in the raw functions.
    coeff: Array2<f64>,
    quadrature: Quadrature,
}

impl fmt::Debug for CustomBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomBasis")
            .field("len", &self.raws.len())
            .field("has_grads", &self.grads.is_some())
            .finish()
    }
}

impl CustomBasis {
    pub fn len(&self) -> usize {
        self.raws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raws.is_empty()
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.quadrature
    }

    /// Orthonormalizing coefficients (raw index x basis index).
    pub fn coefficients(&self) -> &Array2<f64> {
        &self.coeff
    }

    pub(super) fn eval_into(
        &self,
        x: &[f64],
        raw_vals: &mut [f64],
        raw_grads: &mut [f64],
        out: &mut [f64],
        out_grad: &mut [f64],
        want_grad: bool,
    ) -> Result<(), SpaceError> {
        let k = self.raws.len();
        let d = x.len();
        for (i, f) in self.raws.iter().enumerate() {
            raw_vals[i] = f(x);
        }
        if want_grad {
            let Some(grads) = &self.grads else {
                return Err(SpaceError::GradientUnsupported);
            };
            for (i, g) in grads.iter().enumerate() {
                let gi = g(x);
                raw_grads[i * d..(i + 1) * d].copy_from_slice(&gi);
            }
        }
        for j in 0..k {
            let mut v = 0.0;
            for i in 0..k {
                v += self.coeff[[i, j]] * raw_vals[i];
            }
            out[j] = v;
            if want_grad {
                for q in 0..d {
                    let mut g = 0.0;
                    for i in 0..k {
                        g += self.coeff[[i, j]] * raw_grads[i * d + q];
                    }
                    out_grad[j * d + q] = g;
                }
            }
        }
        Ok(())
    }
}

/// Builds a [`FunctionSpace`] from raw functions by orthonormalizing them
/// under `quadrature`. Gradient closures are optional; without them the
/// space rejects gradient evaluation.
pub fn orthonormalize_custom(
    domain: Domain,
    raws: Vec<RawFn>,
    grads: Option<Vec<RawGradFn>>,
    quadrature: Quadrature,
    level: usize,
) -> Result<FunctionSpace, SpaceError> {
    if raws.is_empty()
        || quadrature.nodes.len() != quadrature.weights.len()
        || quadrature.nodes.is_empty()
        || quadrature.nodes[0].len() != domain.dim()
        || grads.as_ref().is_some_and(|g| g.len() != raws.len())
    {
        return Err(SpaceError::BadQuadrature);
    }
    let k = raws.len();
    let m = quadrature.nodes.len();
    // Raw values on the quadrature nodes, one column per function.
    let mut phi = Array2::zeros((m, k));
    for (row, node) in quadrature.nodes.iter().enumerate() {
        for (col, f) in raws.iter().enumerate() {
            phi[[row, col]] = f(node);
        }
    }
    let w = &quadrature.weights;
    let dot = |a: &Array2<f64>, ca: usize, cb: usize| -> f64 {
        (0..m).map(|r| w[r] * a[[r, ca]] * a[[r, cb]]).sum()
    };

    // Modified Gram-Schmidt with immediate updates; `r` collects the
    // triangular factor so the transform extends off the nodes.
    let mut r = Array2::<f64>::zeros((k, k));
    let mut scale = 0.0_f64;
    for j in 0..k {
        let max_remaining = (j..k)
            .map(|i| dot(&phi, i, i).sqrt())
            .fold(0.0_f64, f64::max);
        scale = scale.max(max_remaining);
        let norm = dot(&phi, j, j).sqrt();
        if norm <= RANK_TOL * scale || scale == 0.0 {
            return Err(SpaceError::RankDeficient { index: j });
        }
        r[[j, j]] = norm;
        for row in 0..m {
            phi[[row, j]] /= norm;
        }
        for i in (j + 1)..k {
            // two projection passes per column
            let c1 = dot(&phi, j, i);
            for row in 0..m {
                let correction = c1 * phi[[row, j]];
                phi[[row, i]] -= correction;
            }
            let c2 = dot(&phi, j, i);
            for row in 0..m {
                let correction = c2 * phi[[row, j]];
                phi[[row, i]] -= correction;
            }
            r[[j, i]] = c1 + c2;
        }
    }

    // coeff = r^{-1} by back-substitution, column by column.
    let mut coeff = Array2::<f64>::zeros((k, k));
    for j in 0..k {
        coeff[[j, j]] = 1.0 / r[[j, j]];
        for i in (0..j).rev() {
            let mut s = 0.0;
            for t in (i + 1)..=j {
                s += r[[i, t]] * coeff[[t, j]];
            }
            coeff[[i, j]] = -s / r[[i, i]];
        }
    }

    let basis = CustomBasis {
        raws,
        grads,
        coeff,
        quadrature,
    };
    Ok(FunctionSpace::from_custom(basis, domain, level))
}

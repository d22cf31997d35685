//! Univariate orthonormal Jacobi polynomials and Gauss quadrature.
//!
//! All polynomials are orthonormal with respect to the *probability* measure
//! proportional to `(1-t)^alpha (1+t)^beta` on `[-1, 1]`, so `p_0 = 1` and
//! the three-term recurrence carries unit total mass. Chebyshev is the
//! special case `alpha = beta = -1/2` (giving `p_k = sqrt(2) T_k` for
//! `k >= 1`), Legendre is `alpha = beta = 0` (giving `p_1 = sqrt(3) t`).

use crate::linalg;
use ndarray::Array2;

/// Recurrence coefficients for orthonormal Jacobi polynomials up to a fixed
/// degree:
///
/// `sqrt(b[k+1]) p_{k+1}(t) = (t - a[k]) p_k(t) - sqrt(b[k]) p_{k-1}(t)`
#[derive(Clone, Debug)]
pub struct JacobiRecurrence {
    alpha: f64,
    beta: f64,
    a: Vec<f64>,
    sqrt_b: Vec<f64>,
}

impl JacobiRecurrence {
    /// Coefficients valid for evaluating degrees `0..=max_degree`.
    /// Requires `alpha, beta > -1` for integrability.
    pub fn new(alpha: f64, beta: f64, max_degree: usize) -> Self {
        assert!(alpha > -1.0 && beta > -1.0, "jacobi exponents must exceed -1");
        let m = max_degree + 1;
        let mut a = vec![0.0; m];
        let mut sqrt_b = vec![0.0; m + 1];
        let s = alpha + beta;
        for (k, ak) in a.iter_mut().enumerate() {
            *ak = if k == 0 {
                (beta - alpha) / (s + 2.0)
            } else {
                let kk = k as f64;
                (beta * beta - alpha * alpha) / ((2.0 * kk + s) * (2.0 * kk + s + 2.0))
            };
        }
        // b[0] is never used in the recurrence (p_{-1} = 0); keep it zero.
        for k in 1..=m {
            let kk = k as f64;
            let b = if k == 1 {
                4.0 * (alpha + 1.0) * (beta + 1.0) / ((s + 2.0) * (s + 2.0) * (s + 3.0))
            } else {
                4.0 * kk * (kk + alpha) * (kk + beta) * (kk + s)
                    / ((2.0 * kk + s) * (2.0 * kk + s) * (2.0 * kk + s + 1.0) * (2.0 * kk + s - 1.0))
            };
            sqrt_b[k] = b.sqrt();
        }
        Self { alpha, beta, a, sqrt_b }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn max_degree(&self) -> usize {
        self.a.len() - 1
    }

    /// Evaluates `p_0..=p_deg` at `t`, and optionally the derivatives.
    /// `vals` (and `ders` if given) must have length `deg + 1`.
    pub fn eval_into(&self, t: f64, vals: &mut [f64], mut ders: Option<&mut [f64]>) {
        let deg = vals.len() - 1;
        assert!(deg <= self.max_degree(), "degree beyond tabulated recurrence");
        vals[0] = 1.0;
        if let Some(d) = ders.as_deref_mut() {
            d[0] = 0.0;
        }
        if deg == 0 {
            return;
        }
        vals[1] = (t - self.a[0]) / self.sqrt_b[1];
        if let Some(d) = ders.as_deref_mut() {
            d[1] = 1.0 / self.sqrt_b[1];
        }
        for k in 1..deg {
            let next = ((t - self.a[k]) * vals[k] - self.sqrt_b[k] * vals[k - 1]) / self.sqrt_b[k + 1];
            vals[k + 1] = next;
            if let Some(d) = ders.as_deref_mut() {
                d[k + 1] =
                    (vals[k] + (t - self.a[k]) * d[k] - self.sqrt_b[k] * d[k - 1]) / self.sqrt_b[k + 1];
            }
        }
    }

    /// Gauss nodes and weights (`q` points) for the underlying probability
    /// measure, from the symmetric tridiagonal recurrence matrix. Exact for
    /// polynomials of degree `2q - 1`.
    pub fn gauss(&self, q: usize) -> (Vec<f64>, Vec<f64>) {
        assert!(q >= 1);
        let full = Self::new(self.alpha, self.beta, q);
        let mut j = Array2::zeros((q, q));
        for i in 0..q {
            j[[i, i]] = full.a[i];
            if i + 1 < q {
                j[[i, i + 1]] = full.sqrt_b[i + 1];
                j[[i + 1, i]] = full.sqrt_b[i + 1];
            }
        }
        let (nodes, vecs) = linalg::sym_eig(&j);
        let weights = (0..q).map(|i| vecs[[0, i]] * vecs[[0, i]]).collect();
        (nodes, weights)
    }

    /// Unnormalized weight density `(1-t)^alpha (1+t)^beta` at an interior
    /// point. Used for the tabulated samplers.
    pub fn weight_density(&self, t: f64) -> f64 {
        (1.0 - t).powf(self.alpha) * (1.0 + t).powf(self.beta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_first_degrees() {
        let rec = JacobiRecurrence::new(0.0, 0.0, 3);
        let mut v = vec![0.0; 4];
        let mut d = vec![0.0; 4];
        rec.eval_into(0.5, &mut v, Some(&mut d));
        assert!((v[0] - 1.0).abs() < 1e-14);
        assert!((v[1] - 3.0_f64.sqrt() * 0.5).abs() < 1e-14);
        // orthonormal P2 = sqrt(5)/2 (3t^2 - 1)
        assert!((v[2] - 5.0_f64.sqrt() / 2.0 * (3.0 * 0.25 - 1.0)).abs() < 1e-13);
        assert!((d[1] - 3.0_f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn chebyshev_matches_cos_formula() {
        let rec = JacobiRecurrence::new(-0.5, -0.5, 8);
        let mut v = vec![0.0; 9];
        for &t in &[-0.9, -0.3, 0.0, 0.4, 1.0] {
            rec.eval_into(t, &mut v, None);
            for k in 1..=8 {
                let expected = 2.0_f64.sqrt() * (k as f64 * t.acos()).cos();
                assert!(
                    (v[k] - expected).abs() < 1e-10,
                    "k={k} t={t} got {} want {expected}",
                    v[k]
                );
            }
        }
    }

    #[test]
    fn gauss_chebyshev_nodes() {
        // Chebyshev-Gauss nodes: cos((2i+1) pi / (2q)), equal weights 1/q
        // under the probability normalization.
        let rec = JacobiRecurrence::new(-0.5, -0.5, 1);
        let q = 6;
        let (nodes, weights) = rec.gauss(q);
        for (i, (x, w)) in nodes.iter().zip(weights.iter()).enumerate() {
            let expect = (std::f64::consts::PI * (2.0 * (q - 1 - i) as f64 + 1.0) / (2.0 * q as f64)).cos();
            assert!((x - expect).abs() < 1e-11, "node {i}");
            assert!((w - 1.0 / q as f64).abs() < 1e-11, "weight {i}");
        }
    }

    #[test]
    fn gauss_integrates_orthonormality() {
        for &(alpha, beta) in &[(0.0, 0.0), (-0.5, -0.5), (1.0, 2.0)] {
            let deg = 6;
            let rec = JacobiRecurrence::new(alpha, beta, deg);
            let (nodes, weights) = rec.gauss(deg + 1);
            let mut gram = vec![vec![0.0; deg + 1]; deg + 1];
            let mut v = vec![0.0; deg + 1];
            for (&t, &w) in nodes.iter().zip(weights.iter()) {
                rec.eval_into(t, &mut v, None);
                for i in 0..=deg {
                    for j in 0..=deg {
                        gram[i][j] += w * v[i] * v[j];
                    }
                }
            }
            for i in 0..=deg {
                for j in 0..=deg {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (gram[i][j] - want).abs() < 1e-10,
                        "alpha={alpha} beta={beta} ({i},{j}) -> {}",
                        gram[i][j]
                    );
                }
            }
        }
    }
}

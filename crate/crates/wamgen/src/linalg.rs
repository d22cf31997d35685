//! Dense linear algebra kernels used across the crate.
//!
//! Everything here targets the desk scale of this project (a few hundred
//! rows/columns at most), so the implementations favor exactness and
//! determinism over asymptotic speed: cyclic Jacobi iterations for symmetric
//! eigenproblems, one-sided Jacobi for singular values, and Gaussian
//! elimination with partial pivoting for the occasional solve.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

/// Eigenvalues and eigenvectors of a real symmetric matrix, eigenvalues
/// ascending. Cyclic Jacobi; converges to machine precision for the sizes
/// used here.
pub fn sym_eig(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "sym_eig needs a square matrix");
    let mut m = a.clone();
    let mut v: Array2<f64> = Array2::eye(n);
    if n <= 1 {
        let vals = if n == 1 { vec![m[[0, 0]]] } else { vec![] };
        return (vals, v);
    }
    let max_sweeps = 64;
    for _ in 0..max_sweeps {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[[p, q]] * m[[p, q]];
            }
        }
        if off.sqrt() <= 1e-300_f64.max(1e-15 * frob(&m)) {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[i, i]].partial_cmp(&m[[j, j]]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| m[[i, i]]).collect();
    let mut vecs = Array2::zeros((n, n));
    for (new_col, &old_col) in order.iter().enumerate() {
        for k in 0..n {
            vecs[[k, new_col]] = v[[k, old_col]];
        }
    }
    (vals, vecs)
}

/// Eigenvalues only, ascending.
pub fn sym_eigvals(a: &Array2<f64>) -> Vec<f64> {
    sym_eig(a).0
}

fn frob(a: &Array2<f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Singular values of a real matrix, descending. One-sided Jacobi on the
/// columns; the matrix is transposed first if it is wide.
pub fn singular_values(a: &Array2<f64>) -> Vec<f64> {
    let (vals, _) = one_sided_jacobi(a, false);
    vals
}

/// Smallest singular value together with the corresponding right-singular
/// vector of a square or tall `a` (unit norm). Useful as a certificate when
/// a point set fails to determine a space.
pub fn smallest_singular_pair(a: &Array2<f64>) -> (f64, Vec<f64>) {
    assert!(a.nrows() >= a.ncols(), "needs a square or tall matrix");
    let (vals, v) = one_sided_jacobi(a, true);
    let v = v.expect("vectors requested");
    let sigma = *vals.last().expect("nonempty matrix");
    let k = vals.len() - 1;
    (sigma, v.column(k).to_vec())
}

/// One-sided Jacobi SVD. Returns singular values (descending) and, when
/// `want_vectors`, the right-singular vectors of the tall orientation as
/// columns. Wide inputs are transposed internally; in that case the returned
/// vectors are the *left* singular vectors of the original matrix.
fn one_sided_jacobi(a: &Array2<f64>, want_vectors: bool) -> (Vec<f64>, Option<Array2<f64>>) {
    let work = if a.nrows() >= a.ncols() {
        a.clone()
    } else {
        a.t().to_owned()
    };
    let m = work.nrows();
    let n = work.ncols();
    if n == 0 {
        return (vec![], want_vectors.then(|| Array2::zeros((0, 0))));
    }
    let mut u = work;
    let mut v: Array2<f64> = Array2::eye(n);
    let eps = 1e-15;
    let max_sweeps = 60;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for k in 0..m {
                    let up = u[[k, p]];
                    let uq = u[[k, q]];
                    alpha += up * up;
                    beta += uq * uq;
                    gamma += up * uq;
                }
                if gamma.abs() <= eps * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..m {
                    let up = u[[k, p]];
                    let uq = u[[k, q]];
                    u[[k, p]] = c * up - s * uq;
                    u[[k, q]] = s * up + c * uq;
                }
                for k in 0..n {
                    let vp = v[[k, p]];
                    let vq = v[[k, q]];
                    v[[k, p]] = c * vp - s * vq;
                    v[[k, q]] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigmas: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|k| u[[k, j]] * u[[k, j]]).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigmas[j].partial_cmp(&sigmas[i]).unwrap());
    sigmas = order.iter().map(|&i| sigmas[i]).collect();
    let vecs = want_vectors.then(|| {
        let mut out = Array2::zeros((n, n));
        for (new_col, &old_col) in order.iter().enumerate() {
            for k in 0..n {
                out[[k, new_col]] = v[[k, old_col]];
            }
        }
        out
    });
    (sigmas, vecs)
}

/// Singular values of a complex matrix through the real embedding
/// `[[re, -im], [im, re]]`, whose spectrum duplicates each singular value.
/// The returned list is deduplicated back to the complex ones (descending).
pub fn complex_singular_values(a: &Array2<Complex64>) -> Vec<f64> {
    let embedded = embed_complex(a);
    let vals = singular_values(&embedded);
    // Values come in pairs; take every other one.
    vals.into_iter().step_by(2).collect()
}

fn embed_complex(a: &Array2<Complex64>) -> Array2<f64> {
    let (m, n) = a.dim();
    let mut out = Array2::zeros((2 * m, 2 * n));
    for i in 0..m {
        for j in 0..n {
            let z = a[[i, j]];
            out[[i, j]] = z.re;
            out[[i, j + n]] = -z.im;
            out[[i + m, j]] = z.im;
            out[[i + m, j + n]] = z.re;
        }
    }
    out
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when the pivot collapses (singular to working precision).
pub fn solve(a: &Array2<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    assert_eq!(n, b.len());
    let mut m = a.clone();
    let mut x: Vec<f64> = b.to_vec();
    for col in 0..n {
        let mut piv = col;
        let mut best = m[[col, col]].abs();
        for r in (col + 1)..n {
            let v = m[[r, col]].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best < 1e-300 {
            return None;
        }
        if piv != col {
            for c in 0..n {
                let tmp = m[[col, c]];
                m[[col, c]] = m[[piv, c]];
                m[[piv, c]] = tmp;
            }
            x.swap(col, piv);
        }
        let d = m[[col, col]];
        for r in (col + 1)..n {
            let f = m[[r, col]] / d;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                m[[r, c]] -= f * m[[col, c]];
            }
            x[r] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for c in (col + 1)..n {
            s -= m[[col, c]] * x[c];
        }
        x[col] = s / m[[col, col]];
    }
    Some(x)
}

/// Inverse via column-by-column solves. `None` if singular.
pub fn invert(a: &Array2<f64>) -> Option<Array2<f64>> {
    let n = a.nrows();
    let mut out = Array2::zeros((n, n));
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = solve(a, &e)?;
        for i in 0..n {
            out[[i, j]] = col[i];
        }
    }
    Some(out)
}

/// `a^T a` for a tall real matrix.
pub fn gram(a: &Array2<f64>) -> Array2<f64> {
    let (m, n) = a.dim();
    let mut g = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            for k in 0..m {
                s += a[[k, i]] * a[[k, j]];
            }
            g[[i, j]] = s;
            g[[j, i]] = s;
        }
    }
    g
}

/// Matrix-vector product returning a fresh vector.
pub fn mat_vec(a: &Array2<f64>, x: &[f64]) -> Array1<f64> {
    let (m, n) = a.dim();
    assert_eq!(n, x.len());
    let mut out = Array1::zeros(m);
    for i in 0..m {
        let mut s = 0.0;
        for j in 0..n {
            s += a[[i, j]] * x[j];
        }
        out[i] = s;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn eig_of_diagonal_is_sorted() {
        let a = array![[3.0, 0.0], [0.0, -1.0]];
        let (vals, _) = sym_eig(&a);
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eig_reconstructs_matrix() {
        let a = array![[2.0, 1.0, 0.5], [1.0, 3.0, -0.25], [0.5, -0.25, 1.5]];
        let (vals, vecs) = sym_eig(&a);
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += vecs[[i, k]] * vals[k] * vecs[[j, k]];
                }
                assert!((s - a[[i, j]]).abs() < 1e-10, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn svd_known_two_by_two() {
        // [[1,0],[1,sqrt(3)]]: gram eigenvalues (5 +- sqrt(13)) / 2.
        let a = array![[1.0, 0.0], [1.0, 3.0_f64.sqrt()]];
        let s = singular_values(&a);
        let hi = ((5.0 + 13.0_f64.sqrt()) / 2.0).sqrt();
        let lo = ((5.0 - 13.0_f64.sqrt()) / 2.0).sqrt();
        assert!((s[0] - hi).abs() < 1e-12);
        assert!((s[1] - lo).abs() < 1e-12);
    }

    #[test]
    fn svd_rank_deficient() {
        let a = array![[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]];
        let (sigma, dir) = smallest_singular_pair(&a);
        assert!(sigma < 1e-12);
        // Null direction proportional to (2, -1)/sqrt(5).
        let ratio = dir[0] / dir[1];
        assert!((ratio + 2.0).abs() < 1e-8);
    }

    #[test]
    fn complex_svd_matches_modulus() {
        // Diagonal complex matrix: singular values are the moduli.
        let mut a = Array2::from_elem((2, 2), Complex64::new(0.0, 0.0));
        a[[0, 0]] = Complex64::new(3.0, 4.0);
        a[[1, 1]] = Complex64::new(0.0, 2.0);
        let s = complex_singular_values(&a);
        assert!((s[0] - 5.0).abs() < 1e-12);
        assert!((s[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn solve_round_trip() {
        let a = array![[4.0, 1.0], [2.0, 3.0]];
        let x = solve(&a, &[6.0, 8.0]).unwrap();
        assert!((4.0 * x[0] + x[1] - 6.0).abs() < 1e-12);
        assert!((2.0 * x[0] + 3.0 * x[1] - 8.0).abs() < 1e-12);
        assert!(solve(&array![[1.0, 2.0], [2.0, 4.0]], &[1.0, 2.0]).is_none());
    }

    proptest! {
        #[test]
        fn svd_values_match_gram_eigenvalues(seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = rng.gen_range(2..7usize);
            let n = rng.gen_range(1..=m);
            let a = Array2::from_shape_fn((m, n), |_| rng.gen_range(-2.0..2.0));
            let svals = singular_values(&a);
            let mut evals = sym_eigvals(&gram(&a));
            evals.reverse();
            for (s, e) in svals.iter().zip(evals.iter()) {
                prop_assert!((s * s - e).abs() < 1e-8 * (1.0 + e.abs()));
            }
        }
    }
}

//! Dense revised simplex for the sup-ratio subproblem.
//!
//! The extremal value of `v(x)` subject to `|v| <= 1` on a mesh equals, by
//! duality, the minimum l1 norm of a signed combination of mesh rows
//! reproducing the objective vector:
//!
//! `min sum lambda  s.t.  [rows^T, -rows^T] lambda = w,  lambda >= 0`.
//!
//! Because every column appears with both signs, any spanning subset of
//! rows yields a feasible basis outright: solve `B y = w` and flip the sign
//! of the columns where `y` is negative. That removes the usual phase-1 and
//! makes warm starts across nearby objectives an `O(N^2)` repair, so a grid
//! sweep costs a handful of pivots per point. Accuracy is set by the pivot
//! tolerances, well below the 1e-6 relative target at these sizes.

use crate::linalg;
use ndarray::Array2;

const FEAS_TOL: f64 = 1e-9;
const PRICE_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;
const REFACTOR_EVERY: usize = 64;
const MAX_ITERS: usize = 50_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal(f64),
    /// The rows do not span the coefficient space.
    Infeasible,
    Stalled,
}

/// Signed column access into the mirrored `[rows^T, -rows^T]` matrix,
/// stored flat for tight pricing loops.
struct ColumnSource {
    flat: Vec<f64>,
    n: usize,
    m: usize,
}

impl ColumnSource {
    fn from_rows(rows: &Array2<f64>) -> Self {
        let (m, n) = rows.dim();
        let mut flat = Vec::with_capacity(m * n);
        for r in 0..m {
            for c in 0..n {
                flat.push(rows[[r, c]]);
            }
        }
        Self { flat, n, m }
    }

    fn nrows(&self) -> usize {
        self.m
    }

    fn row(&self, row: usize) -> &[f64] {
        &self.flat[row * self.n..(row + 1) * self.n]
    }

    fn dot_row(&self, row: usize, y: &[f64]) -> f64 {
        self.row(row)
            .iter()
            .zip(y)
            .map(|(a, b)| a * b)
            .sum()
    }

    fn copy_signed(&self, row: usize, sign: f64, out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(self.row(row)) {
            *o = sign * v;
        }
    }
}

/// A basic column: a mesh row with a sign.
#[derive(Clone, Copy, PartialEq, Debug)]
struct BasisCol {
    row: usize,
    sign: f64,
}

pub struct SupRatioLp {
    source: ColumnSource,
    n: usize,
    basis: Vec<BasisCol>,
    /// Row-major `n x n` basis inverse.
    b_inv: Vec<f64>,
    x: Vec<f64>,
    pivots_since_refactor: usize,
    /// Candidate entering rows kept across solves (partial pricing).
    pool: Vec<usize>,
    /// Simplex iterations across all solves on this instance.
    pub total_iterations: usize,
    /// Full pricing passes across all solves on this instance.
    pub full_passes: usize,
}

impl SupRatioLp {
    pub fn new(rows: Array2<f64>) -> Self {
        let n = rows.ncols();
        Self {
            source: ColumnSource::from_rows(&rows),
            n,
            basis: Vec::new(),
            b_inv: vec![0.0; n * n],
            x: vec![0.0; n],
            pivots_since_refactor: 0,
            pool: Vec::new(),
            total_iterations: 0,
            full_passes: 0,
        }
    }

    /// Minimum l1 value reproducing `w`. Consecutive calls reuse the final
    /// basis of the previous solve: after a sign repair it stays feasible
    /// for the new right-hand side.
    pub fn solve(&mut self, w: &[f64]) -> LpOutcome {
        assert_eq!(w.len(), self.n);
        if self.basis.is_empty() {
            if !self.seed_spanning_basis() {
                return LpOutcome::Infeasible;
            }
            if !self.refactor_basis() {
                return LpOutcome::Infeasible;
            }
        }
        self.reset_solution(w);
        self.run_simplex(w)
    }

    /// Greedy Gram-Schmidt selection of spanning rows.
    fn seed_spanning_basis(&mut self) -> bool {
        let n = self.n;
        let m = self.source.nrows();
        let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut picked = Vec::with_capacity(n);
        for row in 0..m {
            if picked.len() == n {
                break;
            }
            let mut v: Vec<f64> = self.source.row(row).to_vec();
            let norm0: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            for q in &ortho {
                let dot: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= dot * qi;
                }
            }
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 * norm0.max(1e-300) {
                for x in v.iter_mut() {
                    *x /= norm;
                }
                ortho.push(v);
                picked.push(row);
            }
        }
        if picked.len() < n {
            return false;
        }
        self.basis = picked.into_iter().map(|row| BasisCol { row, sign: 1.0 }).collect();
        true
    }

    /// Rebuilds `b_inv` from the basis columns.
    fn refactor_basis(&mut self) -> bool {
        let n = self.n;
        let mut bmat = Array2::zeros((n, n));
        for (k, b) in self.basis.iter().enumerate() {
            let row = self.source.row(b.row);
            for i in 0..n {
                bmat[[i, k]] = b.sign * row[i];
            }
        }
        match linalg::invert(&bmat) {
            Some(inv) => {
                for k in 0..n {
                    for i in 0..n {
                        self.b_inv[k * n + i] = inv[[k, i]];
                    }
                }
                self.pivots_since_refactor = 0;
                true
            }
            None => false,
        }
    }

    /// Feasibility repair for a new right-hand side: compute the basic
    /// solution and flip the sign of columns carrying negative mass.
    fn reset_solution(&mut self, w: &[f64]) {
        let n = self.n;
        let mut x = vec![0.0; n];
        for k in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                s += self.b_inv[k * n + i] * w[i];
            }
            x[k] = s;
        }
        for k in 0..n {
            if x[k] < 0.0 {
                x[k] = -x[k];
                self.basis[k].sign = -self.basis[k].sign;
                for v in &mut self.b_inv[k * n..(k + 1) * n] {
                    *v = -*v;
                }
            }
        }
        self.x = x;
    }

    fn objective(&self) -> f64 {
        self.x.iter().map(|&v| v.max(0.0)).sum()
    }

    /// Simplex multipliers at the current (optimal) basis. For the l1
    /// problem these solve the companion maximization
    /// `max w^T c  s.t.  |row_j c| <= 1`.
    pub fn dual_solution(&self) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for k in 0..n {
            let row = &self.b_inv[k * n..(k + 1) * n];
            for i in 0..n {
                y[i] += row[i];
            }
        }
        y
    }

    /// Mesh rows referenced by the current basis (active constraints of the
    /// companion maximization).
    pub fn active_rows(&self) -> Vec<usize> {
        self.basis.iter().map(|b| b.row).collect()
    }

    fn run_simplex(&mut self, w: &[f64]) -> LpOutcome {
        let m = self.source.nrows();
        let n = self.n;
        let mut degenerate_streak = 0usize;
        let mut col_buf = vec![0.0; n];
        // Partial pricing: most pivots pick the entering column from a pool
        // refreshed by occasional full passes; optimality is only declared
        // after a clean full pass. The pool persists across solves since
        // attractive rows stay attractive for nearby objectives.
        for _ in 0..MAX_ITERS {
            self.total_iterations += 1;
            // All basic columns cost 1, so the prices are the row sums of
            // b_inv and the reduced cost of a signed column is 1 -+ t_row.
            let y = self.dual_solution();
            let bland = degenerate_streak > 1000;
            let mut enter: Option<(usize, f64, f64)> = None; // (row, sign, reduced)
            if !bland {
                for &row in &self.pool {
                    let t = self.source.dot_row(row, &y);
                    let r = 1.0 - t.abs();
                    if r < -PRICE_TOL && enter.map_or(true, |(_, _, best)| r < best) {
                        enter = Some((row, if t > 0.0 { 1.0 } else { -1.0 }, r));
                    }
                }
            }
            if enter.is_none() {
                // Full pass; also rebuild the pool from the most attractive
                // rows seen.
                self.full_passes += 1;
                let mut scored: Vec<(f64, usize)> = Vec::new();
                for row in 0..m {
                    let t = self.source.dot_row(row, &y);
                    let r = 1.0 - t.abs();
                    if r < -PRICE_TOL {
                        if bland {
                            enter = Some((row, if t > 0.0 { 1.0 } else { -1.0 }, r));
                            break;
                        }
                        if enter.map_or(true, |(_, _, best)| r < best) {
                            enter = Some((row, if t > 0.0 { 1.0 } else { -1.0 }, r));
                        }
                        scored.push((r, row));
                    }
                }
                if !bland {
                    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                    scored.truncate(256);
                    self.pool = scored.into_iter().map(|(_, row)| row).collect();
                }
            }
            let Some((row, sign, reduced)) = enter else {
                return LpOutcome::Optimal(self.objective());
            };
            self.source.copy_signed(row, sign, &mut col_buf);
            let mut d = self.apply_b_inv(&col_buf);

            // Long-step ratio test: walk the breakpoints where basic
            // variables hit zero, letting them flip to their mirrored
            // columns (slope gains 2 d_k per crossing) until the
            // directional derivative turns nonnegative, and pivot only at
            // the stopping breakpoint.
            let mut breakpoints: Vec<(f64, usize)> = d
                .iter()
                .enumerate()
                .filter(|(_, &dk)| dk > PIVOT_TOL)
                .map(|(k, &dk)| (self.x[k] / dk, k))
                .collect();
            if breakpoints.is_empty() {
                // The objective is bounded below by zero; no ratio row
                // means a numerical dead end.
                return LpOutcome::Stalled;
            }
            breakpoints.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let mut slope = reduced;
            let mut stop = breakpoints.len() - 1;
            for (i, &(_, k)) in breakpoints.iter().enumerate() {
                slope += 2.0 * d[k];
                if slope >= 0.0 {
                    stop = i;
                    break;
                }
            }
            let (theta, slot) = breakpoints[stop];
            // Flip every column crossed strictly before the pivot.
            for &(_, k) in &breakpoints[..stop] {
                self.x[k] = theta * d[k] - self.x[k];
                if self.x[k] < 0.0 && self.x[k] > -FEAS_TOL {
                    self.x[k] = 0.0;
                }
                self.basis[k].sign = -self.basis[k].sign;
                for v in &mut self.b_inv[k * n..(k + 1) * n] {
                    *v = -*v;
                }
                d[k] = -d[k];
            }
            if theta <= 1e-12 {
                degenerate_streak += 1;
            } else {
                degenerate_streak = 0;
            }
            let flipped_end = stop;
            // Remaining basic updates follow the ordinary pivot formula.
            for k in 0..n {
                if k != slot && !breakpoints[..flipped_end].iter().any(|&(_, bk)| bk == k) {
                    self.x[k] -= theta * d[k];
                    if self.x[k] < 0.0 && self.x[k] > -FEAS_TOL {
                        self.x[k] = 0.0;
                    }
                }
            }
            self.x[slot] = theta;
            self.basis[slot] = BasisCol { row, sign };
            self.update_b_inv(slot, &d);
            if self.pivots_since_refactor >= REFACTOR_EVERY {
                if !self.refactor_basis() {
                    return LpOutcome::Stalled;
                }
                self.reset_solution(w);
            }
        }
        LpOutcome::Stalled
    }

    fn update_b_inv(&mut self, slot: usize, d: &[f64]) {
        let n = self.n;
        let piv = d[slot];
        for v in &mut self.b_inv[slot * n..(slot + 1) * n] {
            *v /= piv;
        }
        for k in 0..n {
            if k != slot && d[k] != 0.0 {
                let f = d[k];
                for i in 0..n {
                    let delta = f * self.b_inv[slot * n + i];
                    self.b_inv[k * n + i] -= delta;
                }
            }
        }
        self.pivots_since_refactor += 1;
    }

    fn apply_b_inv(&self, col: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut d = vec![0.0; n];
        for k in 0..n {
            let row = &self.b_inv[k * n..(k + 1) * n];
            let mut s = 0.0;
            for i in 0..n {
                s += row[i] * col[i];
            }
            d[k] = s;
        }
        d
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn interval_endpoints_give_unit_ratio() {
        // mesh {-1, 1} for the basis {1, sqrt(3) x}: the extremal value at
        // x = 1 under |v(+-1)| <= 1 is exactly 1.
        let s3 = 3.0_f64.sqrt();
        let rows = array![[1.0, -s3], [1.0, s3]];
        let mut lp = SupRatioLp::new(rows);
        let w = vec![1.0, s3];
        match lp.solve(&w) {
            LpOutcome::Optimal(v) => assert!((v - 1.0).abs() < 1e-9, "{v}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn affine_extrapolation_factor_two() {
        // mesh {-1/2, 1/2}: the extremal affine function at x = 1 doubles.
        let s3 = 3.0_f64.sqrt();
        let rows = array![[1.0, -s3 / 2.0], [1.0, s3 / 2.0]];
        let mut lp = SupRatioLp::new(rows);
        match lp.solve(&[1.0, s3]) {
            LpOutcome::Optimal(v) => assert!((v - 2.0).abs() < 1e-9, "{v}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn warm_solves_match_fresh_solves() {
        use rand::Rng;
        let mut rng = crate::rng::seeded_rng(3);
        let m = 40;
        let n = 4;
        let rows = Array2::from_shape_fn((m, n), |_| rng.gen_range(-1.0..1.0f64));
        let mut reused = SupRatioLp::new(rows.clone());
        for trial in 0..200 {
            let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let a = reused.solve(&w);
            let mut fresh = SupRatioLp::new(rows.clone());
            let b = fresh.solve(&w);
            match (a, b) {
                (LpOutcome::Optimal(a), LpOutcome::Optimal(b)) => {
                    assert!(
                        (a - b).abs() <= 1e-7 * (1.0 + b.abs()),
                        "trial {trial}: warm {a} fresh {b}"
                    );
                }
                other => panic!("trial {trial}: {other:?}"),
            }
        }
    }

    #[test]
    fn dual_solution_solves_companion_problem() {
        use rand::Rng;
        let mut rng = crate::rng::seeded_rng(19);
        let rows = Array2::from_shape_fn((12, 3), |_| rng.gen_range(-1.0..1.0f64));
        let mut lp = SupRatioLp::new(rows.clone());
        let w = vec![0.3, -1.1, 0.4];
        let LpOutcome::Optimal(value) = lp.solve(&w) else {
            panic!("optimal expected")
        };
        let c = lp.dual_solution();
        // feasible for the companion max and attains the same value
        for r in 0..rows.nrows() {
            let s: f64 = (0..3).map(|j| rows[[r, j]] * c[j]).sum();
            assert!(s.abs() <= 1.0 + 1e-7, "row {r}: {s}");
        }
        let attained: f64 = w.iter().zip(&c).map(|(a, b)| a * b).sum();
        assert!((attained - value).abs() <= 1e-7 * (1.0 + value));
    }

    #[test]
    fn rank_deficient_rows_are_infeasible() {
        // rows live in the x-axis; they cannot span the plane.
        let rows = array![[1.0, 0.0], [-2.0, 0.0]];
        let mut lp = SupRatioLp::new(rows);
        assert_eq!(lp.solve(&[0.0, 1.0]), LpOutcome::Infeasible);
    }

    #[test]
    fn l1_minimum_against_brute_force() {
        // Small dense instance: compare with exhaustive vertex search over
        // all column pairs (n = 2, so optimal bases are pairs).
        use rand::Rng;
        let mut rng = crate::rng::seeded_rng(11);
        for _ in 0..25 {
            let m = 6;
            let rows = Array2::from_shape_fn((m, 2), |_| rng.gen_range(-1.0..1.0f64));
            let w = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let mut lp = SupRatioLp::new(rows.clone());
            let got = match lp.solve(&w) {
                LpOutcome::Optimal(v) => v,
                other => panic!("{other:?}"),
            };
            let mut best = f64::INFINITY;
            let cols: Vec<[f64; 2]> = (0..2 * m)
                .map(|j| {
                    let (r, s) = if j < m { (j, 1.0) } else { (j - m, -1.0) };
                    [s * rows[[r, 0]], s * rows[[r, 1]]]
                })
                .collect();
            for a in 0..cols.len() {
                for b in 0..cols.len() {
                    let det = cols[a][0] * cols[b][1] - cols[a][1] * cols[b][0];
                    if det.abs() < 1e-12 {
                        continue;
                    }
                    let la = (w[0] * cols[b][1] - w[1] * cols[b][0]) / det;
                    let lb = (cols[a][0] * w[1] - cols[a][1] * w[0]) / det;
                    if la >= -1e-12 && lb >= -1e-12 {
                        best = best.min(la.max(0.0) + lb.max(0.0));
                    }
                }
            }
            assert!(
                (got - best).abs() <= 1e-7 * (1.0 + best),
                "lp {got} brute {best}"
            );
        }
    }
}

//! Linear solvers for the per-step saddle-point systems.
//!
//! Solvers implement [`LinearSolver`]. Every solve ends with an independent
//! residual check: a solution whose relative residual exceeds the tolerance
//! is never returned as a success.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::SolveError;
use crate::sparse::{dot, norm2, CsrMatrix};

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSolveReport {
    /// Krylov iterations, or refinement sweeps for a direct solver.
    pub iterations: usize,
    /// `‖b − Ax‖₂`, recomputed after the solve.
    pub residual_norm: f64,
    /// `‖b − Ax‖₂ / ‖b‖₂` (zero when `b = 0`).
    pub relative_residual: f64,
    /// Seconds spent in the solve, when a clock is available.
    pub wall_time: Option<f64>,
}

pub trait LinearSolver {
    /// Solves `Ax = b` to relative residual `tolerance()`.
    fn solve(&mut self, a: &CsrMatrix, b: &[f64]) -> Result<(Vec<f64>, LinearSolveReport), SolveError>;

    fn tolerance(&self) -> f64;
}

impl<S: LinearSolver + ?Sized> LinearSolver for alloc::boxed::Box<S> {
    fn solve(&mut self, a: &CsrMatrix, b: &[f64]) -> Result<(Vec<f64>, LinearSolveReport), SolveError> {
        (**self).solve(a, b)
    }

    fn tolerance(&self) -> f64 {
        (**self).tolerance()
    }
}

/// `(‖b − Ax‖, ‖b − Ax‖/‖b‖)`.
pub fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> (f64, f64) {
    let ax = a.mul_vec(x);
    let r: f64 = libm::sqrt(ax.iter().zip(b).map(|(p, q)| (q - p) * (q - p)).sum());
    let nb = norm2(b);
    (r, if nb > 0.0 { r / nb } else { r })
}

pub fn check_dimensions(a: &CsrMatrix, b: &[f64]) -> Result<(), SolveError> {
    if a.nrows() != a.ncols() {
        return Err(SolveError::DimensionMismatch(format!("matrix is {}×{}", a.nrows(), a.ncols())));
    }
    if b.len() != a.nrows() {
        return Err(SolveError::DimensionMismatch(format!(
            "rhs has length {}, matrix has {} rows",
            b.len(),
            a.nrows()
        )));
    }
    Ok(())
}

/// Zero-fill incomplete LU factorization. Rows without a stored diagonal get
/// one (value zero before elimination), which lets saddle-point rows pick up
/// a Schur-complement-like pivot from the elimination of the velocity block.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    lu: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Self, SolveError> {
        let n = a.nrows();
        let rows: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                let mut r = a.row(i).0.to_vec();
                r.push(i);
                r
            })
            .collect();
        let mut lu = CsrMatrix::from_row_pattern(n, rows);
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                lu.add_at(i, j, v);
            }
        }
        let diag: Vec<usize> = (0..n).map(|i| lu.position(i, i).expect("diagonal inserted")).collect();
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        let rp = lu.row_ptr().to_vec();
        let ci = lu.col_idx().to_vec();
        let vals = lu.values_mut();
        for i in 0..n {
            for kk in rp[i]..diag[i] {
                let k = ci[kk];
                let pivot = vals[diag[k]];
                let lik = vals[kk] / pivot;
                vals[kk] = lik;
                if lik == 0.0 {
                    continue;
                }
                // row_i[j] -= l_ik · row_k[j] for j > k present in both rows
                let mut p = kk + 1;
                for q in diag[k] + 1..rp[k + 1] {
                    let j = ci[q];
                    while p < rp[i + 1] && ci[p] < j {
                        p += 1;
                    }
                    if p == rp[i + 1] {
                        break;
                    }
                    if ci[p] == j {
                        vals[p] -= lik * vals[q];
                    }
                }
            }
            let d = vals[diag[i]];
            if !d.is_finite() {
                return Err(SolveError::Breakdown { reason: format!("non-finite pivot in row {i}"), best_residual: 1.0 });
            }
            if d.abs() < 1e-14 * scale {
                vals[diag[i]] = if d < 0.0 { -1e-8 * scale } else { 1e-8 * scale };
            }
        }
        Ok(Self { lu, diag })
    }

    /// `x ← (LU)⁻¹ x`.
    pub fn apply(&self, x: &mut [f64]) {
        let n = x.len();
        let rp = self.lu.row_ptr();
        let ci = self.lu.col_idx();
        let v = self.lu.values();
        for i in 0..n {
            let mut s = x[i];
            for k in rp[i]..self.diag[i] {
                s -= v[k] * x[ci[k]];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in self.diag[i] + 1..rp[i + 1] {
                s -= v[k] * x[ci[k]];
            }
            x[i] = s / v[self.diag[i]];
        }
    }
}

/// Restarted GMRES, right-preconditioned with ILU(0).
#[derive(Debug, Clone)]
pub struct GmresIlu {
    pub tol: f64,
    pub max_iter: usize,
    pub restart: usize,
}

impl Default for GmresIlu {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iter: 5000, restart: 100 }
    }
}

impl GmresIlu {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        Self { tol, max_iter, ..Self::default() }
    }
}

impl LinearSolver for GmresIlu {
    fn tolerance(&self) -> f64 {
        self.tol
    }

    fn solve(&mut self, a: &CsrMatrix, b: &[f64]) -> Result<(Vec<f64>, LinearSolveReport), SolveError> {
        check_dimensions(a, b)?;
        let n = b.len();
        let nb = norm2(b);
        if nb == 0.0 {
            let report = LinearSolveReport { iterations: 0, residual_norm: 0.0, relative_residual: 0.0, wall_time: None };
            return Ok((vec![0.0; n], report));
        }
        let ilu = Ilu0::new(a)?;
        let m = self.restart.max(1);
        let mut x = vec![0.0; n];
        let mut iterations = 0;
        let mut best = f64::INFINITY;
        let mut r = vec![0.0; n];
        while iterations < self.max_iter {
            a.mul_vec_into(&x, &mut r);
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri = bi - *ri;
            }
            let beta = norm2(&r);
            best = best.min(beta / nb);
            if beta <= self.tol * nb {
                break;
            }
            let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
            basis.push(r.iter().map(|v| v / beta).collect());
            let mut h = vec![vec![0.0; m]; m + 1];
            let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
            let mut g = vec![0.0; m + 1];
            g[0] = beta;
            let mut k_used = 0;
            for j in 0..m {
                if iterations >= self.max_iter {
                    break;
                }
                iterations += 1;
                let mut z = basis[j].clone();
                ilu.apply(&mut z);
                let mut w = a.mul_vec(&z);
                for i in 0..=j {
                    let hij = dot(&w, &basis[i]);
                    h[i][j] = hij;
                    for (wk, vk) in w.iter_mut().zip(&basis[i]) {
                        *wk -= hij * vk;
                    }
                }
                let hn = norm2(&w);
                h[j + 1][j] = hn;
                for i in 0..j {
                    let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                    h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                    h[i][j] = t;
                }
                let rr = libm::hypot(h[j][j], h[j + 1][j]);
                if rr == 0.0 {
                    return Err(SolveError::Breakdown {
                        reason: "zero Hessenberg column".to_string(),
                        best_residual: best,
                    });
                }
                cs[j] = h[j][j] / rr;
                sn[j] = h[j + 1][j] / rr;
                h[j][j] = rr;
                h[j + 1][j] = 0.0;
                g[j + 1] = -sn[j] * g[j];
                g[j] *= cs[j];
                k_used = j + 1;
                if g[j + 1].abs() <= 0.1 * self.tol * nb || hn == 0.0 {
                    break;
                }
                basis.push(w.iter().map(|v| v / hn).collect());
            }
            let mut y = vec![0.0; k_used];
            for i in (0..k_used).rev() {
                let mut s = g[i];
                for l in i + 1..k_used {
                    s -= h[i][l] * y[l];
                }
                y[i] = s / h[i][i];
            }
            let mut update = vec![0.0; n];
            for (yi, vi) in y.iter().zip(&basis) {
                for (u, v) in update.iter_mut().zip(vi) {
                    *u += yi * v;
                }
            }
            ilu.apply(&mut update);
            for (xi, u) in x.iter_mut().zip(&update) {
                *xi += u;
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(SolveError::Breakdown { reason: "non-finite iterate".to_string(), best_residual: best });
            }
        }
        let (res, rel) = residual(a, &x, b);
        best = best.min(rel);
        if rel > self.tol {
            return Err(SolveError::NotConverged { iterations, best_residual: best });
        }
        Ok((x, LinearSolveReport { iterations, residual_norm: res, relative_residual: rel, wall_time: None }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_body_force, scalar_mass, scalar_stiffness, SaddleLayout};
    use crate::mesh::build_square_mesh;
    use crate::space::TaylorHoodSpace;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn identity_returns_rhs() {
        let a = CsrMatrix::identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.5, 7.0];
        let (x, rep) = GmresIlu::default().solve(&a, &b).unwrap();
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-14);
        }
        assert!(rep.relative_residual <= 1e-10);
    }

    #[test]
    fn two_by_two() {
        let a = CsrMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let (x, _) = GmresIlu::default().solve(&a, &[3.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_spd() {
        let mut rng = StdRng::seed_from_u64(7);
        let n = 50;
        let g: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                d[i][j] = (0..n).map(|k| g[k][i] * g[k][j]).sum::<f64>() + if i == j { 1.0 } else { 0.0 };
            }
        }
        let a = CsrMatrix::from_dense(&d);
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (x, rep) = GmresIlu::default().solve(&a, &b).unwrap();
        let (_, rel) = residual(&a, &x, &b);
        assert!(rel <= 1e-10);
        assert_eq!(rel, rep.relative_residual);
    }

    #[test]
    fn dimension_mismatch() {
        let a = CsrMatrix::identity(3);
        assert!(matches!(GmresIlu::default().solve(&a, &[1.0]), Err(SolveError::DimensionMismatch(_))));
    }

    #[test]
    fn non_convergence_reports_best_residual() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 2.0, 0.0], vec![3.0, 1.0, 5.0], vec![0.0, 4.0, 1.0]]);
        let mut s = GmresIlu { tol: 1e-30, max_iter: 1, restart: 1 };
        let err = s.solve(&a, &[1.0, 1.0, 1.0]).unwrap_err();
        assert!(err.best_residual().unwrap() > 0.0);
    }

    #[test]
    fn saddle_point_system() {
        let space = TaylorHoodSpace::new(build_square_mesh(5).unwrap());
        let layout = SaddleLayout::new(&space);
        let mut block = scalar_mass(space.velocity(), space.mesh());
        block.axpy_same_pattern(0.1, &scalar_stiffness(space.velocity(), space.mesh()));
        let a = layout.build(&block);
        let f = assemble_body_force(&space, |x, y, _| [y, -x * x], 0.0);
        let b = layout.rhs(&f);
        let (x, rep) = GmresIlu::default().solve(&a, &b).unwrap();
        assert!(rep.relative_residual <= 1e-10);
        let (w, p, _) = layout.split(&x);
        let mean: f64 = crate::assembly::assemble_pressure_mean(&space).iter().zip(p).map(|(m, p)| m * p).sum();
        assert!(mean.abs() < 1e-9);
        for (v, &m) in w.iter().zip(space.dirichlet_mask()) {
            if m {
                assert!(v.abs() < 1e-12);
            }
        }
    }
}

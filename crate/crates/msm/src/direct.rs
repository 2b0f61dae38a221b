//! Sparse direct solver (fill-reducing ordering + LU with partial pivoting)
//! backed by `faer`, with iterative refinement and a residual check.
//!
//! A trailing row and column that are much denser than the rest (the
//! pressure-mean constraint of a saddle system) would make the column
//! ordering treat every column they touch as coupled. Such a border is
//! split off: the interior block plus a rank-one diagonal shift is
//! factored alone and the border is recovered from a 2×2 system.

use std::time::Instant;

use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Conj, MatMut};
use msm_core::linsolve::{check_dimensions, residual, LinearSolveReport, LinearSolver, DEFAULT_TOL};
use msm_core::sparse::dot;
use msm_core::{CsrMatrix, SolveError};

/// Refinement sweeps stop once the relative residual falls below this.
const REFINE_TARGET: f64 = 1e-15;
const MAX_REFINE: usize = 3;
/// A trailing row and column are a dense border when both hold more than
/// `BORDER_FACTOR·√n` entries.
const BORDER_FACTOR: f64 = 4.0;

#[derive(Debug, Clone)]
enum Plan {
    Plain(SymbolicLu<usize>),
    Bordered {
        /// Zero-valued interior block `A[..m, ..m]` with `(pivot, pivot)` added.
        template: CsrMatrix,
        pivot: usize,
        symbolic: SymbolicLu<usize>,
    },
}

/// Sparse LU solver. The symbolic analysis is cached and reused while the
/// sparsity pattern stays the same, which is the case for every step of a
/// simulation.
#[derive(Debug, Clone)]
pub struct DirectSolver {
    pub tol: f64,
    cache: Option<(Vec<usize>, Vec<usize>, Plan)>,
}

impl Default for DirectSolver {
    fn default() -> Self {
        Self::new(DEFAULT_TOL)
    }
}

fn breakdown(what: &str, e: impl std::fmt::Debug) -> SolveError {
    SolveError::Breakdown { reason: format!("{what}: {e:?}"), best_residual: 1.0 }
}

// CSR storage of A is the CSC storage of Aᵀ
fn transposed_pattern(a: &CsrMatrix) -> SymbolicSparseColMatRef<'_, usize> {
    SymbolicSparseColMatRef::new_checked(a.ncols(), a.nrows(), a.row_ptr(), None, a.col_idx())
}

fn symbolic_lu(a: &CsrMatrix) -> Result<SymbolicLu<usize>, SolveError> {
    SymbolicLu::try_new(transposed_pattern(a)).map_err(|e| breakdown("symbolic factorization", e))
}

fn numeric_lu(symbolic: SymbolicLu<usize>, a: &CsrMatrix) -> Result<Lu<usize, f64>, SolveError> {
    let at = SparseColMatRef::new(transposed_pattern(a), a.values());
    Lu::try_new_with_symbolic(symbolic, at).map_err(|e| breakdown("numeric factorization", e))
}

fn lu_solve(lu: &Lu<usize, f64>, rhs: &mut [f64]) {
    let n = rhs.len();
    let mat = MatMut::from_column_major_slice_mut(rhs, n, 1);
    // the factorization is of Aᵀ, so A x = b is its transpose solve
    lu.solve_transpose_in_place_with_conj(Conj::No, mat);
}

/// Pivot row for the diagonal shift, if `a` has a dense trailing border.
fn dense_border(a: &CsrMatrix) -> Option<usize> {
    let n = a.nrows();
    if n < 3 || a.ncols() != n {
        return None;
    }
    let m = n - 1;
    let limit = BORDER_FACTOR * (n as f64).sqrt();
    let last_row = a.row(m).0.iter().filter(|&&j| j < m).count();
    let last_col: Vec<usize> = (0..m).filter(|&i| a.position(i, m).is_some()).collect();
    if (last_row as f64) <= limit || (last_col.len() as f64) <= limit {
        return None;
    }
    last_col.first().copied()
}

fn bordered_template(a: &CsrMatrix, pivot: usize) -> CsrMatrix {
    let m = a.nrows() - 1;
    let rows = (0..m)
        .map(|i| {
            let mut cols: Vec<usize> = a.row(i).0.iter().copied().filter(|&j| j < m).collect();
            if i == pivot && !cols.contains(&pivot) {
                cols.push(pivot);
            }
            cols
        })
        .collect();
    CsrMatrix::from_row_pattern(m, rows)
}

/// Factorization of `[[K, c], [rᵀ, d]]` through `K + α e eᵀ`, where `e` is
/// the unit vector of the pivot row.
struct Bordered {
    lu: Lu<usize, f64>,
    pivot: usize,
    alpha: f64,
    r: Vec<f64>,
    d: f64,
    xe: Vec<f64>,
    xc: Vec<f64>,
}

impl Bordered {
    fn new(a: &CsrMatrix, template: &CsrMatrix, pivot: usize, symbolic: SymbolicLu<usize>) -> Result<Self, SolveError> {
        let m = a.nrows() - 1;
        let mut k = template.clone();
        let mut c = vec![0.0; m];
        for i in 0..m {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j < m {
                    k.add_at(i, j, v);
                } else {
                    c[i] = v;
                }
            }
        }
        let alpha = {
            let v = k.row(pivot).1.iter().fold(0.0_f64, |s, x| s.max(x.abs()));
            if v > 0.0 {
                v
            } else {
                1.0
            }
        };
        k.add_at(pivot, pivot, alpha);
        let mut r = vec![0.0; m];
        let mut d = 0.0;
        let (cols, vals) = a.row(m);
        for (&j, &v) in cols.iter().zip(vals) {
            if j < m {
                r[j] = v;
            } else {
                d = v;
            }
        }
        let lu = numeric_lu(symbolic, &k)?;
        let mut xe = vec![0.0; m];
        xe[pivot] = 1.0;
        lu_solve(&lu, &mut xe);
        let mut xc = c;
        lu_solve(&lu, &mut xc);
        Ok(Self { lu, pivot, alpha, r, d, xe, xc })
    }

    // K x + c λ = b, rᵀx + dλ = β with K = K̃ − α e eᵀ and s = eᵀx:
    // x = x_b + α s x_e − λ x_c
    fn apply(&self, b: &[f64]) -> Option<Vec<f64>> {
        let m = b.len() - 1;
        let mut xb = b[..m].to_vec();
        lu_solve(&self.lu, &mut xb);
        let j = self.pivot;
        let (a11, a12, r1) = (1.0 - self.alpha * self.xe[j], self.xc[j], xb[j]);
        let (a21, a22, r2) =
            (self.alpha * dot(&self.r, &self.xe), self.d - dot(&self.r, &self.xc), b[m] - dot(&self.r, &xb));
        let det = a11 * a22 - a12 * a21;
        let s = (r1 * a22 - a12 * r2) / det;
        let lambda = (a11 * r2 - a21 * r1) / det;
        if !(s.is_finite() && lambda.is_finite()) {
            return None;
        }
        let mut x: Vec<f64> =
            (0..m).map(|i| xb[i] + self.alpha * s * self.xe[i] - lambda * self.xc[i]).collect();
        x.push(lambda);
        Some(x)
    }
}

enum Factor {
    Plain(Lu<usize, f64>),
    Bordered(Bordered),
}

impl Factor {
    fn apply(&self, b: &[f64]) -> Option<Vec<f64>> {
        match self {
            Factor::Plain(lu) => {
                let mut x = b.to_vec();
                lu_solve(lu, &mut x);
                Some(x)
            }
            Factor::Bordered(f) => f.apply(b),
        }
    }
}

impl DirectSolver {
    pub fn new(tol: f64) -> Self {
        Self { tol, cache: None }
    }

    fn plan(&mut self, a: &CsrMatrix) -> Result<Plan, SolveError> {
        if let Some((rp, ci, plan)) = &self.cache {
            if rp == a.row_ptr() && ci == a.col_idx() {
                return Ok(plan.clone());
            }
        }
        let plan = match dense_border(a) {
            Some(pivot) => {
                let template = bordered_template(a, pivot);
                let symbolic = symbolic_lu(&template)?;
                Plan::Bordered { template, pivot, symbolic }
            }
            None => Plan::Plain(symbolic_lu(a)?),
        };
        self.cache = Some((a.row_ptr().to_vec(), a.col_idx().to_vec(), plan.clone()));
        Ok(plan)
    }

    /// Solve plus refinement; returns `(x, residual, relative residual, sweeps)`.
    fn refine(a: &CsrMatrix, b: &[f64], factor: &Factor) -> Option<(Vec<f64>, f64, f64, usize)> {
        let mut x = factor.apply(b)?;
        let (mut res, mut rel) = residual(a, &x, b);
        let mut sweeps = 0;
        while rel > REFINE_TARGET && sweeps < MAX_REFINE && rel.is_finite() {
            let ax = a.mul_vec(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
            let Some(dx) = factor.apply(&r) else { break };
            let candidate: Vec<f64> = x.iter().zip(&dx).map(|(p, q)| p + q).collect();
            let (cres, crel) = residual(a, &candidate, b);
            sweeps += 1;
            if !(crel < rel) {
                break;
            }
            x = candidate;
            res = cres;
            rel = crel;
        }
        Some((x, res, rel, sweeps))
    }
}

impl LinearSolver for DirectSolver {
    fn tolerance(&self) -> f64 {
        self.tol
    }

    fn solve(&mut self, a: &CsrMatrix, b: &[f64]) -> Result<(Vec<f64>, LinearSolveReport), SolveError> {
        check_dimensions(a, b)?;
        let start = Instant::now();
        let mut outcome = None;
        if let Plan::Bordered { template, pivot, symbolic } = self.plan(a)? {
            if let Ok(f) = Bordered::new(a, &template, pivot, symbolic) {
                outcome = Self::refine(a, b, &Factor::Bordered(f)).filter(|o| o.2 <= self.tol);
            }
        }
        let (x, res, rel, sweeps) = match outcome {
            Some(o) => o,
            None => {
                // no border, or the bordered solve was not accurate enough
                let symbolic = match self.plan(a)? {
                    Plan::Plain(s) => s,
                    Plan::Bordered { .. } => symbolic_lu(a)?,
                };
                let factor = Factor::Plain(numeric_lu(symbolic, a)?);
                Self::refine(a, b, &factor)
                    .ok_or_else(|| SolveError::Breakdown { reason: "non-finite solution".into(), best_residual: 1.0 })?
            }
        };
        if !rel.is_finite() {
            return Err(SolveError::Breakdown { reason: "non-finite solution".into(), best_residual: rel });
        }
        if rel > self.tol {
            return Err(SolveError::NotConverged { iterations: sweeps, best_residual: rel });
        }
        let report = LinearSolveReport {
            iterations: sweeps,
            residual_norm: res,
            relative_residual: rel,
            wall_time: Some(start.elapsed().as_secs_f64()),
        };
        Ok((x, report))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn identity() {
        let b = vec![3.0, -1.0, 2.5];
        let (x, rep) = DirectSolver::default().solve(&CsrMatrix::identity(3), &b).unwrap();
        assert_eq!(x, b);
        assert_eq!(rep.iterations, 0);
        assert!(rep.wall_time.is_some());
    }

    #[test]
    fn two_by_two() {
        let a = CsrMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let (x, _) = DirectSolver::default().solve(&a, &[3.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nonsymmetric_uses_correct_orientation() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
        let (x, _) = DirectSolver::default().solve(&a, &[5.0, 2.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn random_spd() {
        let mut rng = StdRng::seed_from_u64(11);
        let n = 50;
        let g: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let d: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| g[k][i] * g[k][j]).sum::<f64>() + f64::from(i == j)).collect())
            .collect();
        let a = CsrMatrix::from_dense(&d);
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut solver = DirectSolver::default();
        let (x, rep) = solver.solve(&a, &b).unwrap();
        let (_, rel) = residual(&a, &x, &b);
        assert!(rel <= 1e-10);
        assert_eq!(rel, rep.relative_residual);
        // second solve reuses the symbolic analysis
        let (y, _) = solver.solve(&a, &b).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn singular_matrix_fails() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(DirectSolver::default().solve(&a, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn saddle_border_matches_plain_lu() {
        use msm_core::assembly::{assemble_body_force, scalar_stiffness, SaddleLayout};
        use msm_core::mesh::build_square_mesh;
        use msm_core::TaylorHoodSpace;

        let space = TaylorHoodSpace::new(build_square_mesh(12).unwrap());
        let layout = SaddleLayout::new(&space);
        let a = layout.build(&scalar_stiffness(space.velocity(), space.mesh()));
        let b = layout.rhs(&assemble_body_force(&space, |x, y, _| [y * y, x], 0.0));
        assert!(dense_border(&a).is_some());

        let (x, rep) = DirectSolver::default().solve(&a, &b).unwrap();
        assert!(rep.relative_residual < 1e-13);
        let plain = Factor::Plain(numeric_lu(symbolic_lu(&a).unwrap(), &a).unwrap());
        let (y, _, _, _) = DirectSolver::refine(&a, &b, &plain).unwrap();
        let scale = y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn small_systems_have_no_border() {
        let a = CsrMatrix::from_dense(&[vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]);
        assert!(dense_border(&a).is_none());
    }
}

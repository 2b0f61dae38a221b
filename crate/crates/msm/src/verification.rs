//! Discrete checks of the analytical ingredients of the model: polarization,
//! Poincaré-Friedrichs, inf-sup stability of the element pair, and strong
//! monotonicity / local Lipschitz continuity of the Smagorinsky operator.

use std::fmt;

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use msm_core::assembly::{
    assemble_divergence, assemble_mass, assemble_stiffness, for_each_quad_point, gradient_lp_norm,
    scalar_mass, scalar_stiffness, smagorinsky_form, vector_block_diag,
};
use msm_core::basis::Element;
use msm_core::diagnostics::poincare_bound;
use msm_core::linsolve::LinearSolver;
use msm_core::space::{Order, ScalarSpace};
use msm_core::{CsrMatrix, Mesh, TaylorHoodSpace};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::direct::DirectSolver;

/// `|(u, Mv) − ½(uᵀMu + vᵀMv − (u−v)ᵀM(u−v))|`, relative to
/// `½(|uᵀMu| + |vᵀMv| + |(u−v)ᵀM(u−v)|)` (absolute when that scale is zero).
pub fn check_polarization(u: &[f64], v: &[f64], m: &CsrMatrix) -> f64 {
    let d: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
    let (uu, vv, dd) = (m.quadratic_form(u), m.quadratic_form(v), m.quadratic_form(&d));
    let defect = (m.bilinear_form(u, v) - 0.5 * (uu + vv - dd)).abs();
    let scale = 0.5 * (uu.abs() + vv.abs() + dd.abs());
    if scale > 0.0 {
        defect / scale
    } else {
        defect
    }
}

fn random_velocity(space: &TaylorHoodSpace, rng: &mut StdRng) -> Vec<f64> {
    space
        .dirichlet_mask()
        .iter()
        .map(|&m| if m { 0.0 } else { rng.random_range(-1.0..1.0) })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincareReport {
    pub seed: u64,
    pub samples: usize,
    /// Largest `‖u‖/‖∇u‖` over the random fields.
    pub random_max: f64,
    /// `1/√λ_min` of the Dirichlet eigenproblem `Ku = λMu` (the sharp
    /// discrete constant).
    pub eigen_ratio: f64,
    /// Analytic bound `diam(Ω)/π`.
    pub bound: f64,
}

/// Empirical Poincaré-Friedrichs constant of the velocity space.
pub fn check_poincare(space: &TaylorHoodSpace, samples: usize, seed: u64) -> PoincareReport {
    let mass = assemble_mass(space);
    let stiff = assemble_stiffness(space);
    let mut rng = StdRng::seed_from_u64(seed);
    let mut random_max: f64 = 0.0;
    for _ in 0..samples {
        let u = random_velocity(space, &mut rng);
        let k = stiff.quadratic_form(&u);
        if k > 0.0 {
            random_max = random_max.max((mass.quadratic_form(&u) / k).sqrt());
        }
    }

    // inverse iteration on the constrained stiffness matrix
    let mask = space.dirichlet_mask();
    let mut k_c = stiff.clone();
    let mut dummy = vec![0.0; k_c.nrows()];
    msm_core::assembly::apply_dirichlet(&mut k_c, &mut dummy, mask);
    let mut solver = DirectSolver::new(1e-8);
    let mut x: Vec<f64> = mask.iter().map(|&m| if m { 0.0 } else { 1.0 }).collect();
    let mut lambda = f64::INFINITY;
    for _ in 0..200 {
        let mut rhs = mass.mul_vec(&x);
        for (r, &m) in rhs.iter_mut().zip(mask) {
            if m {
                *r = 0.0;
            }
        }
        let Ok((y, _)) = solver.solve(&k_c, &rhs) else { break };
        let norm = mass.quadratic_form(&y).sqrt();
        x = y.iter().map(|v| v / norm).collect();
        let next = stiff.quadratic_form(&x);
        let converged = (next - lambda).abs() <= 1e-12 * next;
        lambda = next;
        if converged {
            break;
        }
    }
    PoincareReport { seed, samples, random_max, eigen_ratio: 1.0 / lambda.sqrt(), bound: poincare_bound(space) }
}

fn to_dense(m: &CsrMatrix) -> Mat<f64> {
    let mut out = Mat::zeros(m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let (cols, vals) = m.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            out[(i, j)] += v;
        }
    }
    out
}

/// Discrete inf-sup constant from the velocity stiffness `a`, the
/// divergence `b` (pressure rows, velocity columns), the pressure mass
/// `m_p` and the Dirichlet mask. The constant pressure mode is always in the
/// kernel; `β` is the square root of the next generalized eigenvalue of
/// `B A⁻¹ Bᵀ q = β² M_p q`.
pub fn infsup_constant(a: &CsrMatrix, b: &CsrMatrix, m_p: &CsrMatrix, mask: &[bool]) -> f64 {
    let free: Vec<usize> = (0..mask.len()).filter(|&i| !mask[i]).collect();
    let a_full = to_dense(a);
    let b_full = to_dense(b);
    let nf = free.len();
    let np = b.nrows();
    let a_int = Mat::from_fn(nf, nf, |i, j| a_full[(free[i], free[j])]);
    let bt_int = Mat::from_fn(nf, np, |i, q| b_full[(q, free[i])]);
    let x = a_int.partial_piv_lu().solve(&bt_int);
    let s = bt_int.transpose() * &x;
    let s = Mat::from_fn(np, np, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
    let l = to_dense(m_p).llt(Side::Lower).expect("pressure mass matrix is SPD");
    let l = l.L();
    let mut y = s.clone();
    l.solve_lower_triangular_in_place(&mut y);
    let mut c = y.transpose().to_owned();
    l.solve_lower_triangular_in_place(&mut c);
    let c = Mat::from_fn(np, np, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    let eig = c.self_adjoint_eigenvalues(Side::Lower).expect("symmetric eigenvalues");
    eig.get(1).copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Inf-sup constant of the Taylor-Hood pair on `space` (dense, small meshes
/// only).
pub fn check_infsup(space: &TaylorHoodSpace) -> f64 {
    let m_p = scalar_mass(space.pressure(), space.mesh());
    infsup_constant(&assemble_stiffness(space), &assemble_divergence(space), &m_p, space.dirichlet_mask())
}

/// Inf-sup constant of the equal-order P1-P1 pair, which is not stable.
pub fn check_infsup_p1p1(mesh: &Mesh) -> f64 {
    let p1 = ScalarSpace::new(mesh, Order::P1);
    let n = p1.n_dofs();
    let a = vector_block_diag(&scalar_stiffness(&p1, mesh));
    let mut triplets = Vec::new();
    let rule = msm_core::assembly::default_rule();
    for t in 0..mesh.n_triangles() {
        let elem = Element::new(mesh.triangle_coords(t));
        let dofs = p1.cell(t);
        for_each_quad_point(&p1, &elem, &rule, |qp| {
            for q in 0..3 {
                for k in 0..3 {
                    let w = qp.weight * qp.values[q];
                    triplets.push((dofs[q], dofs[k], w * qp.grads[k][0]));
                    triplets.push((dofs[q], dofs[k] + n, w * qp.grads[k][1]));
                }
            }
        });
    }
    let b = CsrMatrix::from_triplets(n, 2 * n, &triplets);
    let mut mask = p1.on_boundary().to_vec();
    mask.extend_from_within(..);
    infsup_constant(&a, &b, &scalar_mass(&p1, mesh), &mask)
}

/// Outcome of the strong-monotonicity / Lipschitz sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityReport {
    pub seed: u64,
    pub samples: usize,
    /// Smallest `(|∇u|∇u − |∇w|∇w, ∇(u−w))`.
    pub min_sm_value: f64,
    /// Smallest ratio of that value to `‖∇(u−w)‖³_{L³}` (empirical C₁).
    pub min_sm_ratio: f64,
    /// Largest `|(|∇u|∇u − |∇w|∇w, ∇v)| / (max(‖∇u‖₃, ‖∇w‖₃)‖∇(u−w)‖₃‖∇v‖₃)`.
    pub max_llc_ratio: f64,
    /// Largest `|SM(tu, tw) − t³SM(u, w)| / |t³SM(u, w)|` over the samples.
    pub homogeneity_defect: f64,
}

impl MonotonicityReport {
    pub fn passes(&self) -> bool {
        self.min_sm_value >= 0.0 && self.max_llc_ratio <= 2.0 && self.homogeneity_defect <= 1e-12
    }
}

/// Samples random velocity pairs/triples and evaluates the strong
/// monotonicity and local Lipschitz inequalities with the assembly
/// quadrature.
pub fn check_monotonicity_suite(space: &TaylorHoodSpace, samples: usize, seed: u64) -> MonotonicityReport {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut report = MonotonicityReport {
        seed,
        samples,
        min_sm_value: f64::INFINITY,
        min_sm_ratio: f64::INFINITY,
        max_llc_ratio: 0.0,
        homogeneity_defect: 0.0,
    };
    for _ in 0..samples {
        let u = random_velocity(space, &mut rng);
        let w = random_velocity(space, &mut rng);
        let v = random_velocity(space, &mut rng);
        let diff: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a - b).collect();
        let sm = smagorinsky_form(space, &u, &w, &diff);
        report.min_sm_value = report.min_sm_value.min(sm);
        let d3 = gradient_lp_norm(space, &diff, 3.0);
        if d3 > 0.0 {
            report.min_sm_ratio = report.min_sm_ratio.min(sm / d3.powi(3));
        }

        let llc = smagorinsky_form(space, &u, &w, &v).abs();
        let scale = gradient_lp_norm(space, &u, 3.0).max(gradient_lp_norm(space, &w, 3.0))
            * d3
            * gradient_lp_norm(space, &v, 3.0);
        if scale > 0.0 {
            report.max_llc_ratio = report.max_llc_ratio.max(llc / scale);
        }

        let t: f64 = rng.random_range(0.1..3.0);
        let (tu, tw): (Vec<f64>, Vec<f64>) = (u.iter().map(|x| t * x).collect(), w.iter().map(|x| t * x).collect());
        let tdiff: Vec<f64> = diff.iter().map(|x| t * x).collect();
        let scaled = smagorinsky_form(space, &tu, &tw, &tdiff);
        let expected = t.powi(3) * sm;
        if expected != 0.0 {
            report.homogeneity_defect = report.homogeneity_defect.max((scaled - expected).abs() / expected.abs());
        }
    }
    report
}

/// Full verification report printed by `msm verify`.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub seed: u64,
    pub max_polarization_defect: f64,
    pub poincare: PoincareReport,
    pub infsup_coarse: f64,
    pub infsup_fine: f64,
    pub infsup_p1p1: f64,
    pub monotonicity: MonotonicityReport,
}

/// Runs every check on small square meshes.
pub fn run_all(seed: u64, samples: usize) -> Result<VerificationReport, msm_core::MeshError> {
    use msm_core::mesh::build_square_mesh;
    let space = TaylorHoodSpace::new(build_square_mesh(9)?);
    let mass = assemble_mass(&space);
    let mut rng = StdRng::seed_from_u64(seed);
    let mut max_polarization_defect: f64 = 0.0;
    for _ in 0..samples {
        let u: Vec<f64> = (0..space.n_vel()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..space.n_vel()).map(|_| rng.random_range(-1.0..1.0)).collect();
        max_polarization_defect = max_polarization_defect.max(check_polarization(&u, &v, &mass));
    }
    Ok(VerificationReport {
        seed,
        max_polarization_defect,
        poincare: check_poincare(&space, samples, seed),
        infsup_coarse: check_infsup(&TaylorHoodSpace::new(build_square_mesh(3)?)),
        infsup_fine: check_infsup(&TaylorHoodSpace::new(build_square_mesh(5)?)),
        infsup_p1p1: check_infsup_p1p1(&build_square_mesh(5)?),
        monotonicity: check_monotonicity_suite(&space, samples, seed),
    })
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.monotonicity;
        let p = &self.poincare;
        writeln!(f, "seed: {}", self.seed)?;
        writeln!(f, "polarization: max relative defect {:.3e}", self.max_polarization_defect)?;
        writeln!(
            f,
            "poincare: eigen ratio {:.6}, random max {:.6}, bound diam/pi {:.6} ({} samples)",
            p.eigen_ratio, p.random_max, p.bound, p.samples
        )?;
        writeln!(
            f,
            "inf-sup: taylor-hood n=3 {:.6}, n=5 {:.6}; p1-p1 n=5 {:.3e}",
            self.infsup_coarse, self.infsup_fine, self.infsup_p1p1
        )?;
        writeln!(
            f,
            "monotonicity: min SM {:.3e}, min SM ratio {:.6}, max LLC ratio {:.6}, homogeneity defect {:.3e} ({} samples)",
            m.min_sm_value, m.min_sm_ratio, m.max_llc_ratio, m.homogeneity_defect, m.samples
        )
    }
}

//! Energy and dissipation functionals of the discrete model and the per-step
//! audit of the discrete energy equalities.
//!
//! Notation: `c_d = C_s⁴δ²/μ²` (dispersion coefficient), `(C_sδ)²` (eddy
//! coefficient), `k` the time step. All integrals use the same degree-5 rule
//! as the assembly so the energy identities close to solver accuracy.

use alloc::vec::Vec;

use crate::assembly::{contract, frobenius, integrate_gradients, scalar_mass, scalar_stiffness};
use crate::field::Field;
use crate::params::ModelParams;
use crate::space::TaylorHoodSpace;
use crate::sparse::{dot, CsrMatrix};
use crate::stepper::{Scheme, SimState, StepOutcome};

/// One row of the diagnostics series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub step: usize,
    pub t: f64,
    /// Model kinetic energy `½‖w‖² + ½c_d‖∇w‖²` at the new time level.
    pub mke: f64,
    /// Model dissipation, `msmd + evd` computed as one integral.
    pub md: f64,
    /// Dissipation of the dispersive term.
    pub msmd: f64,
    /// Eddy-viscosity dissipation.
    pub evd: f64,
    /// Viscous dissipation `ν‖∇w‖²` of the stage velocity.
    pub vd: f64,
    /// Signed, normalized defect of the discrete energy equality.
    pub energy_residual: f64,
    pub backscatter_flag: bool,
    /// Numerical diffusion of Backward Euler (zero for CNLE).
    pub numerical_diffusion: f64,
    /// `‖B w_{n+1}‖₂`.
    pub divergence_norm: f64,
    /// Euclidean norm of the coefficients of `w_{n+1}`.
    pub velocity_norm: f64,
}

/// `(md, msmd, evd)` of one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dissipation {
    pub md: f64,
    pub msmd: f64,
    pub evd: f64,
}

impl Dissipation {
    /// `|md − (msmd + evd)| / (|msmd| + |evd|)`, zero when all three vanish.
    pub fn decomposition_defect(&self) -> f64 {
        relative(self.md - (self.msmd + self.evd), self.msmd.abs() + self.evd.abs())
    }
}

fn relative(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num.abs() / den
    }
}

/// Evaluates the functionals on one space with fixed parameters.
#[derive(Debug, Clone)]
pub struct Diagnostics<'a> {
    space: &'a TaylorHoodSpace,
    params: ModelParams,
    mass: CsrMatrix,
    stiff: CsrMatrix,
}

impl<'a> Diagnostics<'a> {
    pub fn new(space: &'a TaylorHoodSpace, params: ModelParams) -> Self {
        Self {
            space,
            params,
            mass: scalar_mass(space.velocity(), space.mesh()),
            stiff: scalar_stiffness(space.velocity(), space.mesh()),
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    fn vector_form(&self, scalar: &CsrMatrix, a: &[f64], b: &[f64]) -> f64 {
        let n = self.space.n_p2();
        scalar.bilinear_form(&a[..n], &b[..n]) + scalar.bilinear_form(&a[n..], &b[n..])
    }

    /// `(a, b)` in L².
    pub fn l2_inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.vector_form(&self.mass, a, b)
    }

    /// `(∇a, ∇b)` in L².
    pub fn h1_inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.vector_form(&self.stiff, a, b)
    }

    pub fn compute_mke(&self, w: &Field) -> f64 {
        let c = w.coeffs();
        0.5 * self.l2_inner(c, c) + 0.5 * self.params.dispersion_coefficient() * self.h1_inner(c, c)
    }

    pub fn compute_vd(&self, w_stage: &Field) -> f64 {
        let c = w_stage.coeffs();
        self.params.nu * self.h1_inner(c, c)
    }

    /// `∫ (C_sδ)² |∇lag| |∇stage|²`.
    pub fn compute_evd(&self, stage: &Field, lag: &Field) -> f64 {
        let cs2 = self.params.eddy_coefficient();
        integrate_gradients(self.space, [stage.coeffs(), lag.coeffs()], |g| {
            cs2 * frobenius(&g[1]) * contract(&g[0], &g[0])
        })
    }

    /// Shared kernel: `c_d/k ∫(∇w_{n+1} − ∇w_n):∇stage` and the eddy part,
    /// each alone and as one combined integral.
    fn dissipation(&self, w_next: &Field, w_curr: &Field, stage: &Field, lag: &Field) -> Dissipation {
        let cd_k = self.params.dispersion_coefficient() / self.params.dt;
        let cs2 = self.params.eddy_coefficient();
        let fields = [w_next.coeffs(), w_curr.coeffs(), stage.coeffs(), lag.coeffs()];
        let msm = |g: &[[[f64; 2]; 2]; 4]| {
            let mut d = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    d[i][j] = g[0][i][j] - g[1][i][j];
                }
            }
            cd_k * contract(&d, &g[2])
        };
        let ev = |g: &[[[f64; 2]; 2]; 4]| cs2 * frobenius(&g[3]) * contract(&g[2], &g[2]);
        Dissipation {
            md: integrate_gradients(self.space, fields, |g| msm(g) + ev(g)),
            msmd: integrate_gradients(self.space, fields, msm),
            evd: integrate_gradients(self.space, fields, ev),
        }
    }

    /// Backward Euler model dissipation:
    /// `∫ c_d (∇w_{n+1} − ∇w_n)/k : ∇w_{n+1} + (C_sδ)²|∇w_n||∇w_{n+1}|²`.
    pub fn compute_md_be(&self, w_next: &Field, w_curr: &Field) -> Dissipation {
        self.dissipation(w_next, w_curr, w_next, w_curr)
    }

    /// CNLE model dissipation:
    /// `∫ c_d (∇w_{n+1} − ∇w_n)/k : ∇w_{n+½} + (C_sδ)²|∇w̃||∇w_{n+½}|²`
    /// with `w̃ = (3w_n − w_{n−1})/2`.
    pub fn compute_md_cnle(&self, w_next: &Field, w_curr: &Field, w_prev: &Field) -> Dissipation {
        let half = w_next.combine(0.5, w_curr, 0.5);
        let lag = w_curr.combine(1.5, w_prev, -0.5);
        self.dissipation(w_next, w_curr, &half, &lag)
    }

    /// Closed form of the CNLE dispersive dissipation:
    /// `c_d/(2k) (‖∇w_{n+1}‖² − ‖∇w_n‖²)`, together with the scale
    /// `c_d/(2k) (‖∇w_{n+1}‖² + ‖∇w_n‖²)` used to judge its accuracy.
    pub fn cnle_msmd_closed_form(&self, w_next: &Field, w_curr: &Field) -> (f64, f64) {
        let c = 0.5 * self.params.dispersion_coefficient() / self.params.dt;
        let a = self.h1_inner(w_next.coeffs(), w_next.coeffs());
        let b = self.h1_inner(w_curr.coeffs(), w_curr.coeffs());
        (c * (a - b), c * (a + b))
    }

    /// BE numerical diffusion `½‖w_{n+1} − w_n‖² + ½c_d‖∇(w_{n+1} − w_n)‖²`.
    pub fn numerical_diffusion(&self, w_next: &Field, w_curr: &Field) -> f64 {
        let d = w_next.combine(1.0, w_curr, -1.0);
        let c = d.coeffs();
        0.5 * self.l2_inner(c, c) + 0.5 * self.params.dispersion_coefficient() * self.h1_inner(c, c)
    }

    /// Full record for one completed step.
    pub fn record(&self, scheme: Scheme, before: &SimState, outcome: &StepOutcome) -> DiagnosticsRecord {
        let k = self.params.dt;
        let w_next = &outcome.state.w_curr;
        let w_curr = &before.w_curr;
        let mke_before = self.compute_mke(w_curr);
        let mke = self.compute_mke(w_next);
        let (diss, nd) = match scheme {
            Scheme::BackwardEuler => {
                (self.compute_md_be(w_next, w_curr), self.numerical_diffusion(w_next, w_curr))
            }
            Scheme::Cnle => (self.compute_md_cnle(w_next, w_curr, &before.w_prev), 0.0),
        };
        let vd = self.compute_vd(&outcome.stage);
        let work = dot(&outcome.load, outcome.stage.coeffs());
        let energy_residual = audit_energy(&EnergyBalance {
            mke_before,
            mke_after: mke,
            numerical_diffusion: nd,
            vd,
            evd: diss.evd,
            work,
            dt: k,
        });
        DiagnosticsRecord {
            step: outcome.state.step_index,
            t: outcome.state.t,
            mke,
            md: diss.md,
            msmd: diss.msmd,
            evd: diss.evd,
            vd,
            energy_residual,
            backscatter_flag: diss.md < 0.0,
            numerical_diffusion: nd,
            divergence_norm: outcome.divergence_norm,
            velocity_norm: crate::sparse::norm2(w_next.coeffs()),
        }
    }
}

/// Terms of one discrete energy equality
/// `MKE_{n+1} − MKE_n + ND + k(VD + EVD) = k·work`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBalance {
    pub mke_before: f64,
    pub mke_after: f64,
    /// Zero for CNLE.
    pub numerical_diffusion: f64,
    pub vd: f64,
    pub evd: f64,
    /// `(f, w_stage)`.
    pub work: f64,
    pub dt: f64,
}

/// Signed defect of the energy equality divided by `MKE_{n+1} + k|work|`
/// (zero when both vanish).
pub fn audit_energy(b: &EnergyBalance) -> f64 {
    let defect = b.mke_after - b.mke_before + b.numerical_diffusion + b.dt * (b.vd + b.evd) - b.dt * b.work;
    let scale = b.mke_after.abs() + b.dt * b.work.abs();
    if scale == 0.0 {
        if defect == 0.0 {
            0.0
        } else {
            defect.signum() * f64::INFINITY
        }
    } else {
        defect / scale
    }
}

/// Poincaré-Friedrichs constant bound `diam(Ω)/π` (the domain lies in a strip
/// of width `diam(Ω)`).
pub fn poincare_bound(space: &TaylorHoodSpace) -> f64 {
    space.mesh().diameter() / core::f64::consts::PI
}

/// A priori energy bound `MKE(t) ≤ MKE_0 + t·C_PF²·F²/(2ν)` where `F` bounds
/// `‖f(·, s)‖_{L²}` for `s ≤ t`.
pub fn stability_bound(mke0: f64, t: f64, c_pf: f64, f_norm_max: f64, nu: f64) -> f64 {
    mke0 + t * c_pf * c_pf * f_norm_max * f_norm_max / (2.0 * nu)
}

/// `‖f(·, t)‖_{L²}` by quadrature.
pub fn forcing_l2_norm(space: &TaylorHoodSpace, f: impl Fn(f64, f64, f64) -> [f64; 2], t: f64) -> f64 {
    let rule = crate::assembly::default_rule();
    let mut total = 0.0;
    let zero: Vec<f64> = alloc::vec![0.0; space.n_vel()];
    crate::assembly::for_each_velocity_point(space, [&zero[..]], &rule, |qp, _, _| {
        let v = f(qp.point[0], qp.point[1], t);
        total += qp.weight * (v[0] * v[0] + v[1] * v[1]);
    });
    libm::sqrt(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_square_mesh;

    fn setup() -> (TaylorHoodSpace, ModelParams) {
        let space = TaylorHoodSpace::new(build_square_mesh(5).unwrap());
        let p = ModelParams::new(0.01, 0.1, 0.4, 0.5, 0.1).unwrap();
        (space, p)
    }

    #[test]
    fn mke_and_vd_of_shear() {
        let (space, p) = setup();
        let d = Diagnostics::new(&space, p);
        let w = space.interpolate_velocity(|_, y| [y, 0.0], 0.0);
        // ∫y² over (−1,1)² = 4/3, ∫|∇w|² = area = 4
        let mke = 0.5 * 4.0 / 3.0 + 0.5 * p.dispersion_coefficient() * 4.0;
        assert!((d.compute_mke(&w) - mke).abs() < 1e-13);
        assert!((d.compute_vd(&w) - p.nu * 4.0).abs() < 1e-14);
        assert_eq!(d.compute_mke(&space.zero_velocity(0.0)), 0.0);
    }

    #[test]
    fn md_special_cases() {
        let (space, p) = setup();
        let d = Diagnostics::new(&space, p);
        let w = space.interpolate_velocity(|x, y| [x * y, x - y * y], 0.0);
        let same = d.compute_md_be(&w, &w);
        assert_eq!(same.msmd, 0.0);
        assert!(same.evd > 0.0 && same.decomposition_defect() < 1e-12);

        let c = space.interpolate_velocity(|_, _| [1.0, -2.0], 0.0);
        let from_const = d.compute_md_be(&w, &c);
        assert!(from_const.evd.abs() < 1e-14);

        let grown = d.compute_md_be(&w.scaled(2.0), &w);
        assert!(grown.msmd > 0.0);
    }

    #[test]
    fn cnle_telescoping() {
        let (space, p) = setup();
        let d = Diagnostics::new(&space, p);
        let a = space.interpolate_velocity(|x, y| [x * y, x - y * y], 0.0);
        let b = space.interpolate_velocity(|x, y| [y * y, x * x * y], 0.0);
        let c = space.interpolate_velocity(|x, _| [x, 0.5], 0.0);
        let diss = d.compute_md_cnle(&a, &b, &c);
        let (closed, scale) = d.cnle_msmd_closed_form(&a, &b);
        assert!((diss.msmd - closed).abs() <= 1e-12 * scale);
        assert!(diss.decomposition_defect() < 1e-12);
    }

    #[test]
    fn audit_zero_trajectory() {
        let b = EnergyBalance {
            mke_before: 0.0,
            mke_after: 0.0,
            numerical_diffusion: 0.0,
            vd: 0.0,
            evd: 0.0,
            work: 0.0,
            dt: 0.1,
        };
        assert_eq!(audit_energy(&b), 0.0);
    }
}

//! Linearly implicit time stepping: Backward Euler and Crank-Nicolson with
//! linear extrapolation (CNLE).
//!
//! Both schemes lag the nonlinearities (the convecting velocity and the
//! eddy-viscosity coefficient), so each step is a single linear saddle-point
//! solve. CNLE solves for the midpoint value `w_{n+½}` and recovers
//! `w_{n+1} = 2w_{n+½} − w_n`.

use alloc::vec::Vec;

use crate::assembly::{
    add_scalar_eddy_viscosity, add_scalar_trilinear, assemble_body_force, assemble_divergence, scalar_mass,
    scalar_stiffness, SaddleLayout,
};
use crate::error::SolveError;
use crate::field::{Field, FieldKind};
use crate::linsolve::{LinearSolveReport, LinearSolver};
use crate::params::ModelParams;
use crate::space::TaylorHoodSpace;
use crate::sparse::{norm2, CsrMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    BackwardEuler,
    Cnle,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::BackwardEuler => "be",
            Scheme::Cnle => "cnle",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "be" | "backward_euler" => Some(Scheme::BackwardEuler),
            "cnle" => Some(Scheme::Cnle),
            _ => None,
        }
    }
}

/// Time-level data carried between steps.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    /// `w_{n−1}` (only read by CNLE).
    pub w_prev: Field,
    /// `w_n`.
    pub w_curr: Field,
    /// Latest pressure: `p_n` for BE, `p_{n−½}` for CNLE.
    pub p_curr: Field,
    pub t: f64,
    pub step_index: usize,
    pub t0: f64,
}

impl SimState {
    /// Initial state. CNLE uses `w_{−1} = w_0`, so the first extrapolant is
    /// `w_0` itself; BE ignores `w_prev`.
    pub fn bootstrap(w0: Field, p0: Field, _scheme: Scheme) -> Self {
        let t0 = w0.time();
        Self { w_prev: w0.clone(), w_curr: w0, p_curr: p0, t: t0, step_index: 0, t0 }
    }

    /// `(3w_n − w_{n−1})/2`.
    pub fn extrapolant(&self) -> Field {
        self.w_curr.combine(1.5, &self.w_prev, -0.5)
    }
}

/// Everything produced by one step, including the quantities the energy
/// audit needs.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: SimState,
    /// Velocity the dissipative terms act on: `w_{n+1}` (BE) or `w_{n+½}`
    /// (CNLE).
    pub stage: Field,
    /// Lagged velocity: `w_n` (BE) or `(3w_n − w_{n−1})/2` (CNLE).
    pub lag: Field,
    /// Load vector used on the right-hand side.
    pub load: Vec<f64>,
    /// Pressure defined by the scheme: `p_{n+1}` (BE) or `p_{n+½}` (CNLE).
    pub pressure: Field,
    pub report: LinearSolveReport,
    /// `‖B w_{n+1}‖₂`.
    pub divergence_norm: f64,
}

/// Precomputed operators for one space, parameter set and scheme.
pub struct Stepper<'a, S> {
    space: &'a TaylorHoodSpace,
    params: ModelParams,
    scheme: Scheme,
    solver: S,
    layout: SaddleLayout,
    divergence: CsrMatrix,
    // (M + c_d K)/k scaled by 1 (BE) or 2 (CNLE)
    inertia: CsrMatrix,
    constant_block: CsrMatrix,
    matrix: Option<CsrMatrix>,
}

impl<'a, S: LinearSolver> Stepper<'a, S> {
    pub fn new(space: &'a TaylorHoodSpace, params: ModelParams, scheme: Scheme, solver: S) -> Self {
        let layout = SaddleLayout::new(space);
        let mass = scalar_mass(space.velocity(), space.mesh());
        let stiff = scalar_stiffness(space.velocity(), space.mesh());
        debug_assert!(mass.same_pattern(layout.scalar_template()));
        let factor = match scheme {
            Scheme::BackwardEuler => 1.0,
            Scheme::Cnle => 2.0,
        } / params.dt;
        let mut inertia = mass.clone();
        inertia.axpy_same_pattern(params.dispersion_coefficient(), &stiff);
        inertia.scale(factor);
        let mut constant_block = inertia.clone();
        constant_block.axpy_same_pattern(params.nu, &stiff);
        Self {
            space,
            params,
            scheme,
            solver,
            layout,
            divergence: assemble_divergence(space),
            inertia,
            constant_block,
            matrix: None,
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn solver(&self) -> &S {
        &self.solver
    }

    /// Advances `state` by one step of size `params.dt`.
    pub fn step(
        &mut self,
        state: &SimState,
        f: impl Fn(f64, f64, f64) -> [f64; 2],
    ) -> Result<StepOutcome, SolveError> {
        let k = self.params.dt;
        let t_next = state.t0 + (state.step_index + 1) as f64 * k;
        let (lag, t_force) = match self.scheme {
            Scheme::BackwardEuler => (state.w_curr.clone(), t_next),
            Scheme::Cnle => (state.extrapolant(), t_next - 0.5 * k),
        };

        let mut block = self.constant_block.clone();
        add_scalar_trilinear(self.space, lag.coeffs(), &mut block);
        add_scalar_eddy_viscosity(self.space, lag.coeffs(), self.params.eddy_coefficient(), &mut block);
        let matrix = match self.matrix.take() {
            Some(mut m) => {
                self.layout.build_into(&block, &mut m);
                m
            }
            None => self.layout.build(&block),
        };

        let load = assemble_body_force(self.space, &f, t_force);
        let mut rhs_vel = load.clone();
        let n2 = self.space.n_p2();
        let w = state.w_curr.coeffs();
        let mut tmp = alloc::vec![0.0; n2];
        for c in 0..2 {
            self.inertia.mul_vec_into(&w[c * n2..(c + 1) * n2], &mut tmp);
            for (r, v) in rhs_vel[c * n2..(c + 1) * n2].iter_mut().zip(&tmp) {
                *r += v;
            }
        }
        let rhs = self.layout.rhs(&rhs_vel);
        let solved = self.solver.solve(&matrix, &rhs);
        self.matrix = Some(matrix);
        let (x, report) = solved?;

        let (vel, pre, _) = self.layout.split(&x);
        let mut solution = Field::new(FieldKind::Velocity, vel.to_vec(), t_next);
        self.space.apply_no_slip(&mut solution);
        let pressure = Field::new(FieldKind::Pressure, pre.to_vec(), t_force);

        let (stage, w_next) = match self.scheme {
            Scheme::BackwardEuler => (solution.clone(), solution),
            Scheme::Cnle => {
                let mut half = solution;
                half.set_time(t_force);
                let mut next = half.combine(2.0, &state.w_curr, -1.0);
                next.set_time(t_next);
                (half, next)
            }
        };
        let divergence_norm = norm2(&self.divergence.mul_vec(w_next.coeffs()));
        let next_state = SimState {
            w_prev: state.w_curr.clone(),
            w_curr: w_next,
            p_curr: pressure.clone(),
            t: t_next,
            step_index: state.step_index + 1,
            t0: state.t0,
        };
        Ok(StepOutcome { state: next_state, stage, lag, load, pressure, report, divergence_norm })
    }
}

/// One Backward Euler step with freshly assembled operators.
pub fn step_backward_euler<S: LinearSolver>(
    state: &SimState,
    params: ModelParams,
    f: impl Fn(f64, f64, f64) -> [f64; 2],
    space: &TaylorHoodSpace,
    solver: S,
) -> Result<StepOutcome, SolveError> {
    Stepper::new(space, params, Scheme::BackwardEuler, solver).step(state, f)
}

/// One CNLE step with freshly assembled operators.
pub fn step_cnle<S: LinearSolver>(
    state: &SimState,
    params: ModelParams,
    f: impl Fn(f64, f64, f64) -> [f64; 2],
    space: &TaylorHoodSpace,
    solver: S,
) -> Result<StepOutcome, SolveError> {
    Stepper::new(space, params, Scheme::Cnle, solver).step(state, f)
}

/// Steady Stokes problem `−νΔw + ∇p = f(·, t)`, `∇·w = 0`, no-slip, with
/// mean-zero pressure.
pub fn solve_stokes<S: LinearSolver>(
    space: &TaylorHoodSpace,
    nu: f64,
    f: impl Fn(f64, f64, f64) -> [f64; 2],
    t: f64,
    solver: &mut S,
) -> Result<(Field, Field, LinearSolveReport), SolveError> {
    let layout = SaddleLayout::new(space);
    let mut block = scalar_stiffness(space.velocity(), space.mesh());
    block.scale(nu);
    let matrix = layout.build(&block);
    let rhs = layout.rhs(&assemble_body_force(space, f, t));
    let (x, report) = solver.solve(&matrix, &rhs)?;
    let (vel, pre, _) = layout.split(&x);
    let mut w = Field::new(FieldKind::Velocity, vel.to_vec(), t);
    space.apply_no_slip(&mut w);
    Ok((w, Field::new(FieldKind::Pressure, pre.to_vec(), t), report))
}

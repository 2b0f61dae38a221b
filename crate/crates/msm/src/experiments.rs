//! Built-in experiments: a manufactured-solution convergence study on the
//! square and the flow between offset cylinders.

use std::f64::consts::PI;

use msm_core::assembly::{default_rule, for_each_pressure_point, for_each_velocity_point};
use msm_core::diagnostics::{forcing_l2_norm, poincare_bound, Diagnostics, DiagnosticsRecord};
use msm_core::linsolve::LinearSolver;
use msm_core::mesh::{build_offset_annulus_mesh, build_square_mesh, OffsetAnnulus};
use msm_core::stepper::{solve_stokes, Scheme, SimState, Stepper};
use msm_core::{Field, Mesh, ModelParams, ParamError, SolveError, TaylorHoodSpace};

use crate::config::SolverConfig;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Mesh(#[from] msm_core::MeshError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("step {step}: {source}")]
    Solve { step: usize, source: SolveError },
    #[error("invalid experiment setup: {0}")]
    Setup(String),
}

/// Physical constants; `delta = None` means the shortest mesh edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSettings {
    pub nu: f64,
    pub c_s: f64,
    pub mu: f64,
    pub delta: Option<f64>,
}

impl ModelSettings {
    pub fn params(&self, mesh: &Mesh, dt: f64) -> Result<ModelParams, ParamError> {
        ModelParams::new(self.nu, self.c_s, self.mu, self.delta.unwrap_or(mesh.h_min()), dt)
    }
}

/// Manufactured velocity `π sin t (sin 2πy sin²πx, −sin 2πx sin²πy)`.
pub fn exact_velocity(x: f64, y: f64, t: f64) -> [f64; 2] {
    let s = t.sin();
    let (sx, sy) = ((PI * x).sin(), (PI * y).sin());
    [PI * s * (2.0 * PI * y).sin() * sx * sx, -PI * s * (2.0 * PI * x).sin() * sy * sy]
}

/// Gradient `G[c][d] = ∂u_c/∂x_d` of [`exact_velocity`].
pub fn exact_velocity_gradient(x: f64, y: f64, t: f64) -> [[f64; 2]; 2] {
    let s = t.sin();
    let pi2 = PI * PI;
    let (s2x, s2y) = ((2.0 * PI * x).sin(), (2.0 * PI * y).sin());
    let (c2x, c2y) = ((2.0 * PI * x).cos(), (2.0 * PI * y).cos());
    let (sx, sy) = ((PI * x).sin(), (PI * y).sin());
    [
        [pi2 * s * s2x * s2y, 2.0 * pi2 * s * c2y * sx * sx],
        [-2.0 * pi2 * s * c2x * sy * sy, -pi2 * s * s2x * s2y],
    ]
}

/// Manufactured pressure `sin t cos πx sin πy` (mean zero on the square).
pub fn exact_pressure(x: f64, y: f64, t: f64) -> f64 {
    t.sin() * (PI * x).cos() * (PI * y).sin()
}

/// Body force `u_t + u·∇u − νΔu + ∇p` of the manufactured solution (the
/// Navier-Stokes residual, without model terms).
pub fn manufactured_forcing(x: f64, y: f64, t: f64, nu: f64) -> [f64; 2] {
    let (s, c) = (t.sin(), t.cos());
    let pi3 = PI * PI * PI;
    let (sx, sy) = ((PI * x).sin(), (PI * y).sin());
    let (cx, cy) = ((PI * x).cos(), (PI * y).cos());
    let (s2x, s2y) = ((2.0 * PI * x).sin(), (2.0 * PI * y).sin());
    let (c2x, c2y) = ((2.0 * PI * x).cos(), (2.0 * PI * y).cos());

    let u = exact_velocity(x, y, t);
    let g = exact_velocity_gradient(x, y, t);
    let ut = [PI * c * s2y * sx * sx, -PI * c * s2x * sy * sy];
    let lap = [
        2.0 * pi3 * s * c2x * s2y - 4.0 * pi3 * s * s2y * sx * sx,
        4.0 * pi3 * s * s2x * sy * sy - 2.0 * pi3 * s * s2x * c2y,
    ];
    let grad_p = [-PI * s * sx * sy, PI * s * cx * cy];
    let mut f = [0.0; 2];
    for i in 0..2 {
        f[i] = ut[i] + u[0] * g[i][0] + u[1] * g[i][1] - nu * lap[i] + grad_p[i];
    }
    f
}

/// Offset-cylinder body force `(−4y(1−x²−y²), 4x(1−x²−y²))`.
pub fn offset_cylinder_forcing(x: f64, y: f64, _t: f64) -> [f64; 2] {
    let r = 1.0 - x * x - y * y;
    [-4.0 * y * r, 4.0 * x * r]
}

/// Spatial errors at one time level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialErrors {
    pub velocity_l2: f64,
    pub gradient_l2: f64,
    pub pressure_l2: f64,
}

/// L² errors of `w` and `∇w` against the exact velocity at `w.time()` and
/// of `p` against the exact pressure at `p.time()`.
pub fn spatial_errors(
    space: &TaylorHoodSpace,
    w: &Field,
    p: &Field,
    u: impl Fn(f64, f64, f64) -> [f64; 2],
    grad_u: impl Fn(f64, f64, f64) -> [[f64; 2]; 2],
    p_exact: impl Fn(f64, f64, f64) -> f64,
) -> SpatialErrors {
    let rule = default_rule();
    let (tw, tp) = (w.time(), p.time());
    let (mut ev, mut eg, mut ep) = (0.0, 0.0, 0.0);
    for_each_velocity_point(space, [w.coeffs()], &rule, |qp, v, g| {
        let [x, y] = qp.point;
        let ue = u(x, y, tw);
        let ge = grad_u(x, y, tw);
        ev += qp.weight * ((ue[0] - v[0][0]).powi(2) + (ue[1] - v[0][1]).powi(2));
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                s += (ge[i][j] - g[0][i][j]).powi(2);
            }
        }
        eg += qp.weight * s;
    });
    for_each_pressure_point(space, p.coeffs(), &rule, |qp, ph| {
        ep += qp.weight * (p_exact(qp.point[0], qp.point[1], tp) - ph).powi(2);
    });
    SpatialErrors { velocity_l2: ev.sqrt(), gradient_l2: eg.sqrt(), pressure_l2: ep.sqrt() }
}

/// Time norms of a trajectory: discrete max over all levels for the L∞(L²)
/// velocity error and composite trapezoid in time for the L²(L²) gradient
/// and pressure errors. `levels[i]` holds the errors at `times[i]` (velocity
/// time) and `p_times[i]` (pressure time).
pub fn time_norms(levels: &[SpatialErrors], times: &[f64], p_times: &[f64]) -> (f64, f64, f64) {
    assert_eq!(levels.len(), times.len());
    assert_eq!(levels.len(), p_times.len());
    let inf0 = levels.iter().map(|e| e.velocity_l2).fold(0.0, f64::max);
    let trapezoid = |ts: &[f64], f: &dyn Fn(&SpatialErrors) -> f64| {
        let mut s = 0.0;
        for i in 1..levels.len() {
            s += 0.5 * (ts[i] - ts[i - 1]) * (f(&levels[i - 1]).powi(2) + f(&levels[i]).powi(2));
        }
        s.sqrt()
    };
    (inf0, trapezoid(times, &|e| e.gradient_l2), trapezoid(p_times, &|e| e.pressure_l2))
}

/// Trajectory snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub velocity: Field,
    pub pressure: Field,
}

/// Error norms of a stored trajectory against the manufactured solution.
pub fn compute_error_norms(space: &TaylorHoodSpace, trajectory: &[Snapshot]) -> (f64, f64, f64) {
    let levels: Vec<SpatialErrors> = trajectory
        .iter()
        .map(|s| {
            spatial_errors(space, &s.velocity, &s.pressure, exact_velocity, exact_velocity_gradient, exact_pressure)
        })
        .collect();
    let times: Vec<f64> = trajectory.iter().map(|s| s.velocity.time()).collect();
    let p_times: Vec<f64> = trajectory.iter().map(|s| s.pressure.time()).collect();
    time_norms(&levels, &times, &p_times)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub err_inf0: f64,
    pub err_grad00: f64,
    pub err_p00: f64,
    pub rate_inf0: Option<f64>,
    pub rate_grad00: Option<f64>,
    pub rate_p00: Option<f64>,
    /// Largest `‖B w_n‖ / ‖w_n‖` over the steps.
    pub max_divergence_ratio: f64,
}

/// `log(e_prev/e)/log(dt_prev/dt)`.
pub fn observed_rate(e_prev: f64, e: f64, dt_prev: f64, dt: f64) -> f64 {
    (e_prev / e).ln() / (dt_prev / dt).ln()
}

/// Fills in the rate columns from consecutive rows.
pub fn with_rates(mut rows: Vec<ConvergenceRow>) -> Vec<ConvergenceRow> {
    for i in 1..rows.len() {
        let (a, b) = (rows[i - 1], rows[i]);
        rows[i].rate_inf0 = Some(observed_rate(a.err_inf0, b.err_inf0, a.dt, b.dt));
        rows[i].rate_grad00 = Some(observed_rate(a.err_grad00, b.err_grad00, a.dt, b.dt));
        rows[i].rate_p00 = Some(observed_rate(a.err_p00, b.err_p00, a.dt, b.dt));
    }
    rows
}

/// Number of steps of size `dt` to reach `t_final`, requiring an integer
/// multiple up to rounding.
pub fn step_count(t_final: f64, dt: f64) -> Result<usize, ExperimentError> {
    let n = (t_final / dt).round();
    if !(dt > 0.0 && t_final > 0.0) || (n * dt - t_final).abs() > 1e-9 * t_final {
        return Err(ExperimentError::Setup(format!("t_final = {t_final} is not a multiple of dt = {dt}")));
    }
    Ok(n as usize)
}

/// Manufactured-solution run on the square for a single time step: starts
/// from `w_0 = 0` (the exact solution vanishes at `t = 0`) and returns the
/// three time norms of the error.
pub fn manufactured_errors<S: LinearSolver>(
    space: &TaylorHoodSpace,
    scheme: Scheme,
    dt: f64,
    t_final: f64,
    settings: &ModelSettings,
    solver: S,
) -> Result<ConvergenceRow, ExperimentError> {
    let params = settings.params(space.mesh(), dt)?;
    let steps = step_count(t_final, dt)?;
    let nu = params.nu;
    let force = move |x: f64, y: f64, t: f64| manufactured_forcing(x, y, t, nu);
    let mut stepper = Stepper::new(space, params, scheme, solver);
    let mut state = SimState::bootstrap(space.zero_velocity(0.0), space.zero_pressure(0.0), scheme);
    let errs = |w: &Field, p: &Field| {
        spatial_errors(space, w, p, exact_velocity, exact_velocity_gradient, exact_pressure)
    };
    let mut levels = vec![errs(&state.w_curr, &state.p_curr)];
    let mut times = vec![0.0];
    let mut p_times = vec![0.0];
    let mut max_divergence_ratio: f64 = 0.0;
    for step in 1..=steps {
        let out = stepper.step(&state, force).map_err(|source| ExperimentError::Solve { step, source })?;
        levels.push(errs(&out.state.w_curr, &out.pressure));
        let w_norm = msm_core::sparse::norm2(out.state.w_curr.coeffs());
        if w_norm > 0.0 {
            max_divergence_ratio = max_divergence_ratio.max(out.divergence_norm / w_norm);
        }
        times.push(out.state.t);
        p_times.push(out.pressure.time());
        state = out.state;
    }
    let (err_inf0, err_grad00, err_p00) = time_norms(&levels, &times, &p_times);
    Ok(ConvergenceRow {
        dt,
        err_inf0,
        err_grad00,
        err_p00,
        rate_inf0: None,
        rate_grad00: None,
        rate_p00: None,
        max_divergence_ratio,
    })
}

/// Convergence study on an `n_per_side` square mesh; each time step size
/// runs on its own thread.
pub fn run_manufactured(
    n_per_side: usize,
    dt_list: &[f64],
    t_final: f64,
    scheme: Scheme,
    settings: &ModelSettings,
    solver: &SolverConfig,
) -> Result<Vec<ConvergenceRow>, ExperimentError> {
    if dt_list.is_empty() {
        return Ok(Vec::new());
    }
    if dt_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(ExperimentError::Setup("dt_list must be strictly decreasing".into()));
    }
    let space = TaylorHoodSpace::new(build_square_mesh(n_per_side)?);
    let results: Vec<Result<ConvergenceRow, ExperimentError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = dt_list
            .iter()
            .map(|&dt| {
                let space = &space;
                scope.spawn(move || manufactured_errors(space, scheme, dt, t_final, settings, solver.build()))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("convergence worker panicked")).collect()
    });
    let rows = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(with_rates(rows))
}

/// Settings of an offset-cylinder run.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderSetup {
    pub scheme: Scheme,
    pub n_outer: usize,
    pub n_inner: usize,
    pub dt: f64,
    pub t_final: f64,
    pub settings: ModelSettings,
    /// `false` switches the body force off (the flow then decays from the
    /// Stokes start).
    pub forcing: bool,
    /// Times at which to keep velocity/pressure snapshots (nearest step).
    pub snapshot_times: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CylinderRun {
    pub space: TaylorHoodSpace,
    pub params: ModelParams,
    /// MKE of the Stokes start.
    pub mke0: f64,
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<Snapshot>,
    /// Largest relative linear-solve residual over all steps.
    pub max_solve_residual: f64,
    /// A priori bound on MKE at each record's time.
    pub energy_bounds: Vec<f64>,
    /// Largest relative defect of the CNLE closed form for msmd (zero for BE).
    pub max_telescoping_defect: f64,
    pub final_state: SimState,
}

impl CylinderRun {
    pub fn backscatter_steps(&self) -> usize {
        self.records.iter().filter(|r| r.backscatter_flag).count()
    }
}

/// Mesh of the offset-cylinder domain.
pub fn offset_cylinder_space(n_outer: usize, n_inner: usize) -> Result<TaylorHoodSpace, ExperimentError> {
    Ok(TaylorHoodSpace::new(build_offset_annulus_mesh(&OffsetAnnulus::default(), n_outer, n_inner)?))
}

/// Viscosity of the steady Stokes problem `−νΔw + ∇p = f` that gives the
/// offset-cylinder start. The nondimensional problem has unit viscosity; the
/// model viscosity would give velocities of order `1/ν`.
pub const STOKES_START_VISCOSITY: f64 = 1.0;

/// Flow between offset cylinders, started from the steady Stokes solution
/// with the same body force.
pub fn run_offset_cylinder(setup: &CylinderSetup, solver: &SolverConfig) -> Result<CylinderRun, ExperimentError> {
    let space = offset_cylinder_space(setup.n_outer, setup.n_inner)?;
    run_offset_cylinder_on(space, setup, solver)
}

/// As [`run_offset_cylinder`] on a prebuilt space.
pub fn run_offset_cylinder_on(
    space: TaylorHoodSpace,
    setup: &CylinderSetup,
    solver: &SolverConfig,
) -> Result<CylinderRun, ExperimentError> {
    let params = setup.settings.params(space.mesh(), setup.dt)?;
    let steps = step_count(setup.t_final, setup.dt)?;
    let on = if setup.forcing { 1.0 } else { 0.0 };
    let force = move |x: f64, y: f64, t: f64| {
        let f = offset_cylinder_forcing(x, y, t);
        [on * f[0], on * f[1]]
    };

    // the Stokes start always uses the body force
    let (w0, p0, stokes) =
        solve_stokes(&space, STOKES_START_VISCOSITY, offset_cylinder_forcing, 0.0, &mut solver.build())
        .map_err(|source| ExperimentError::Solve { step: 0, source })?;
    let diagnostics = Diagnostics::new(&space, params);
    let mke0 = diagnostics.compute_mke(&w0);
    let c_pf = poincare_bound(&space);
    let f_norm = forcing_l2_norm(&space, force, 0.0);

    let mut snapshot_steps: Vec<usize> =
        setup.snapshot_times.iter().map(|t| (t / setup.dt).round().max(0.0) as usize).collect();
    snapshot_steps.sort_unstable();
    snapshot_steps.dedup();
    let mut snapshots = Vec::new();
    if snapshot_steps.first() == Some(&0) {
        snapshots.push(Snapshot { velocity: w0.clone(), pressure: p0.clone() });
    }

    let mut stepper = Stepper::new(&space, params, setup.scheme, solver.build());
    let mut state = SimState::bootstrap(w0, p0, setup.scheme);
    let mut records = Vec::with_capacity(steps);
    let mut energy_bounds = Vec::with_capacity(steps);
    let mut max_solve_residual = stokes.relative_residual;
    let mut max_telescoping_defect: f64 = 0.0;
    for step in 1..=steps {
        let out = stepper.step(&state, force).map_err(|source| ExperimentError::Solve { step, source })?;
        let record = diagnostics.record(setup.scheme, &state, &out);
        max_solve_residual = max_solve_residual.max(out.report.relative_residual);
        if setup.scheme == Scheme::Cnle {
            let (closed, scale) = diagnostics.cnle_msmd_closed_form(&out.state.w_curr, &state.w_curr);
            if scale > 0.0 {
                max_telescoping_defect = max_telescoping_defect.max((record.msmd - closed).abs() / scale);
            }
        }
        energy_bounds.push(msm_core::diagnostics::stability_bound(mke0, record.t, c_pf, f_norm, params.nu));
        records.push(record);
        if snapshot_steps.binary_search(&step).is_ok() {
            snapshots.push(Snapshot { velocity: out.state.w_curr.clone(), pressure: out.pressure.clone() });
        }
        state = out.state;
    }
    drop(stepper);
    Ok(CylinderRun {
        space,
        params,
        mke0,
        records,
        snapshots,
        max_solve_residual,
        energy_bounds,
        max_telescoping_defect,
        final_state: state,
    })
}

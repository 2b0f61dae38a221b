use msm_core::assembly::{
    assemble_body_force, assemble_divergence, assemble_eddy_viscosity, assemble_mass, assemble_pressure_mean,
    assemble_stiffness, assemble_trilinear, scalar_mass, scalar_stiffness,
};
use msm_core::diagnostics::Diagnostics;
use msm_core::linsolve::GmresIlu;
use msm_core::mesh::{build_annulus_mesh, build_square_mesh};
use msm_core::sparse::norm2;
use msm_core::stepper::{solve_stokes, Scheme, SimState, Stepper};
use msm_core::{CsrMatrix, Field, FieldKind, Mesh, ModelParams, TaylorHoodSpace};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn square(n: usize) -> TaylorHoodSpace {
    TaylorHoodSpace::new(build_square_mesh(n).unwrap())
}

fn random_velocity(space: &TaylorHoodSpace, rng: &mut StdRng) -> Field {
    let c = (0..space.n_vel()).map(|_| rng.random_range(-1.0..1.0)).collect();
    Field::new(FieldKind::Velocity, c, 0.0)
}

fn params() -> ModelParams {
    ModelParams::new(1e-2, 0.1, 0.4, 0.05, 0.01).unwrap()
}

// sum |w_i| |A_ij| |w_j|, the natural scale of a quadratic form
fn abs_form(a: &CsrMatrix, w: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.nrows() {
        for k in a.row_ptr()[i]..a.row_ptr()[i + 1] {
            s += (w[i] * a.values()[k] * w[a.col_idx()[k]]).abs();
        }
    }
    s
}

#[test]
fn trilinear_is_skew_for_random_fields() {
    let mut rng = StdRng::seed_from_u64(11);
    for space in [square(6), TaylorHoodSpace::new(build_annulus_mesh(24, 12).unwrap())] {
        for _ in 0..50 {
            let a = random_velocity(&space, &mut rng);
            let w = random_velocity(&space, &mut rng);
            let n = assemble_trilinear(&space, &a);
            assert_eq!(n.skew_defect(), 0.0);
            let q = n.quadratic_form(w.coeffs());
            assert!(q.abs() <= 1e-13 * abs_form(&n, w.coeffs()), "wᵀN(a)w = {q}");
        }
    }
}

#[test]
fn eddy_viscosity_of_unit_shear_is_scaled_stiffness() {
    let space = square(5);
    let p = params();
    let shear = space.interpolate_velocity(|_, y| [y, 0.0], 0.0);
    let e = assemble_eddy_viscosity(&space, &shear, &p);
    let mut k = assemble_stiffness(&space);
    k.scale(p.eddy_coefficient());
    let scale = k.max_abs();
    for i in 0..k.nrows() {
        for j in 0..k.ncols() {
            assert!((e.get(i, j) - k.get(i, j)).abs() <= 1e-13 * scale);
        }
    }
}

#[test]
fn eddy_viscosity_vanishes_for_constant_lag() {
    let space = square(4);
    let c = space.interpolate_velocity(|_, _| [2.0, -3.0], 0.0);
    assert!(assemble_eddy_viscosity(&space, &c, &params()).max_abs() < 1e-14);
}

#[test]
fn eddy_viscosity_is_positive_semidefinite() {
    let space = square(5);
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..20 {
        let lag = random_velocity(&space, &mut rng);
        let e = assemble_eddy_viscosity(&space, &lag, &params());
        let v = random_velocity(&space, &mut rng);
        assert!(e.quadratic_form(v.coeffs()) >= -1e-14 * abs_form(&e, v.coeffs()));
    }
}

#[test]
fn symmetric_operators_are_symmetric() {
    let space = square(6);
    let mut rng = StdRng::seed_from_u64(5);
    let lag = random_velocity(&space, &mut rng);
    for m in [assemble_mass(&space), assemble_stiffness(&space), assemble_eddy_viscosity(&space, &lag, &params())] {
        assert!(m.symmetry_defect() <= 1e-13 * m.max_abs());
    }
}

#[test]
fn divergence_of_linear_fields() {
    let space = square(5);
    let b = assemble_divergence(&space);
    let rot = space.interpolate_velocity(|x, y| [y, -x], 0.0);
    assert!(norm2(&b.mul_vec(rot.coeffs())) < 1e-13);
    let stretch = space.interpolate_velocity(|x, _| [x, 0.0], 0.0);
    let bw = b.mul_vec(stretch.coeffs());
    for (got, want) in bw.iter().zip(assemble_pressure_mean(&space)) {
        assert!((got - want).abs() < 1e-14);
    }
}

#[test]
fn unit_body_force_gives_mass_row_sums() {
    let space = square(4);
    let f = assemble_body_force(&space, |_, _, _| [1.0, 0.0], 0.0);
    let m = scalar_mass(space.velocity(), space.mesh());
    let sums = m.mul_vec(&vec![1.0; space.n_p2()]);
    for (i, s) in sums.iter().enumerate() {
        assert!((f[i] - s).abs() < 1e-15);
        assert_eq!(f[space.n_p2() + i], 0.0);
    }
    assert!((sums.iter().sum::<f64>() - space.mesh().area()).abs() < 1e-13);
}

#[test]
fn stiffness_annihilates_constants() {
    let space = square(6);
    let k = scalar_stiffness(space.velocity(), space.mesh());
    let r = k.mul_vec(&vec![1.0; space.n_p2()]);
    assert!(norm2(&r) < 1e-12);
}

#[test]
fn assembly_is_independent_of_vertex_order() {
    let mesh = build_square_mesh(4).unwrap();
    let rotated: Vec<[usize; 3]> = mesh.triangles().iter().map(|t| [t[1], t[2], t[0]]).collect();
    let other = Mesh::new(mesh.vertices().to_vec(), rotated, mesh.boundary_edges().to_vec()).unwrap();
    let a = TaylorHoodSpace::new(mesh);
    let b = TaylorHoodSpace::new(other);
    let a_nodes = a.velocity().nodes();
    let b_nodes = b.velocity().nodes();
    // match P2 nodes by position
    let map: Vec<usize> = a_nodes
        .iter()
        .map(|p| b_nodes.iter().position(|q| (p[0] - q[0]).abs() + (p[1] - q[1]).abs() < 1e-12).unwrap())
        .collect();
    let (ka, kb) = (scalar_stiffness(a.velocity(), a.mesh()), scalar_stiffness(b.velocity(), b.mesh()));
    let (ma, mb) = (scalar_mass(a.velocity(), a.mesh()), scalar_mass(b.velocity(), b.mesh()));
    for i in 0..a.n_p2() {
        for j in 0..a.n_p2() {
            assert!((ka.get(i, j) - kb.get(map[i], map[j])).abs() < 1e-13);
            assert!((ma.get(i, j) - mb.get(map[i], map[j])).abs() < 1e-15);
        }
    }
}

#[test]
fn energy_equality_holds_with_iterative_solver() {
    let space = square(6);
    let p = ModelParams::new(1e-2, 0.1, 0.4, space.mesh().h_min(), 0.05).unwrap();
    let force = |x: f64, y: f64, t: f64| [y * (1.0 + t), -x];
    let (w0, p0, _) = solve_stokes(&space, 1.0, force, 0.0, &mut GmresIlu::new(1e-12, 2000)).unwrap();
    let diagnostics = Diagnostics::new(&space, p);
    for scheme in [Scheme::BackwardEuler, Scheme::Cnle] {
        let mut stepper = Stepper::new(&space, p, scheme, GmresIlu::new(1e-12, 2000));
        let mut state = SimState::bootstrap(w0.clone(), p0.clone(), scheme);
        for _ in 0..5 {
            let out = stepper.step(&state, force).unwrap();
            let r = diagnostics.record(scheme, &state, &out);
            assert!(r.energy_residual.abs() <= 1e-8, "{scheme:?}: {}", r.energy_residual);
            assert!(r.divergence_norm <= 1e-9 * r.velocity_norm);
            state = out.state;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mass_polarization(seed in any::<u64>()) {
        let space = square(3);
        let m = assemble_mass(&space);
        let mut rng = StdRng::seed_from_u64(seed);
        let u = random_velocity(&space, &mut rng);
        let v = random_velocity(&space, &mut rng);
        let sum = u.combine(1.0, &v, 1.0);
        let diff = u.combine(1.0, &v, -1.0);
        let lhs = m.bilinear_form(u.coeffs(), v.coeffs());
        let rhs = 0.25 * (m.quadratic_form(sum.coeffs()) - m.quadratic_form(diff.coeffs()));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (m.quadratic_form(u.coeffs()) + m.quadratic_form(v.coeffs())));
    }

    #[test]
    fn mass_matrix_integrates_quadratics(a in -2.0..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64) {
        // ∫ over [-1,1]² of (a + b x + c y²)
        let space = square(3);
        let m = scalar_mass(space.velocity(), space.mesh());
        let f = space.velocity().interpolate(|x, y| a + b * x + c * y * y);
        let integral: f64 = m.mul_vec(&f).iter().sum();
        let exact = 4.0 * a + 4.0 * c / 3.0;
        prop_assert!((integral - exact).abs() < 1e-12);
    }
}

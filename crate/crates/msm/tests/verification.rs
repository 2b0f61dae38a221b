use msm::msm_core::mesh::build_square_mesh;
use msm::msm_core::TaylorHoodSpace;
use msm::verification::{check_infsup, check_infsup_p1p1, check_monotonicity_suite, check_poincare, run_all};

#[test]
fn taylor_hood_is_inf_sup_stable() {
    let coarse = check_infsup(&TaylorHoodSpace::new(build_square_mesh(3).unwrap()));
    let fine = check_infsup(&TaylorHoodSpace::new(build_square_mesh(6).unwrap()));
    assert!(coarse > 0.1 && fine > 0.1);
    assert!((coarse - fine).abs() / coarse < 0.3, "{coarse} vs {fine}");
}

#[test]
fn equal_order_pair_is_not() {
    assert!(check_infsup_p1p1(&build_square_mesh(5).unwrap()) < 1e-6);
}

#[test]
fn poincare_constant_on_the_square() {
    // on [-1, 1]² the first Dirichlet eigenvalue is π²/2
    let r = check_poincare(&TaylorHoodSpace::new(build_square_mesh(8).unwrap()), 20, 1);
    let exact = std::f64::consts::SQRT_2 / std::f64::consts::PI;
    assert!((r.eigen_ratio - exact).abs() < 1e-3 * exact, "{}", r.eigen_ratio);
    assert!(r.eigen_ratio <= r.bound && r.random_max <= r.eigen_ratio * (1.0 + 1e-12));
}

#[test]
fn smagorinsky_term_is_monotone_and_lipschitz() {
    let r = check_monotonicity_suite(&TaylorHoodSpace::new(build_square_mesh(5).unwrap()), 50, 2);
    assert!(r.passes(), "{r:?}");
    assert!(r.min_sm_ratio > 0.0);
}

#[test]
fn full_report_is_deterministic() {
    let a = run_all(4, 5).unwrap();
    let b = run_all(4, 5).unwrap();
    assert_eq!(a.to_string(), b.to_string());
    assert!(a.max_polarization_defect < 1e-12);
}

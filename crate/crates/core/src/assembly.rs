//! Assembly of the bilinear and trilinear forms of the modified Smagorinsky
//! model on a Taylor-Hood space.
//!
//! Velocity operators of the model act componentwise (mass, stiffness, eddy
//! viscosity with the full gradient, and the skew-symmetrized convection), so
//! each is assembled once as a scalar P2 matrix and expanded to the
//! block-diagonal vector operator when needed. All volume integrals use the
//! degree-5 rule.

use alloc::vec;
use alloc::vec::Vec;

use crate::basis::{p2_gradients, p2_values, Element};
use crate::field::Field;
use crate::params::ModelParams;
use crate::quadrature::{make_quadrature, QuadratureRule, DEFAULT_DEGREE};
use crate::space::{Order, ScalarSpace, TaylorHoodSpace};
use crate::sparse::CsrMatrix;

/// Velocity gradient `G[c][d] = ∂w_c/∂x_d` at a point.
pub type Gradient = [[f64; 2]; 2];

pub fn default_rule() -> QuadratureRule {
    make_quadrature(DEFAULT_DEGREE).expect("default quadrature degree is supported")
}

/// Frobenius norm of a 2×2 velocity gradient.
#[inline]
pub fn frobenius(g: &Gradient) -> f64 {
    libm::sqrt(g[0][0] * g[0][0] + g[0][1] * g[0][1] + g[1][0] * g[1][0] + g[1][1] * g[1][1])
}

/// `A : B`.
#[inline]
pub fn contract(a: &Gradient, b: &Gradient) -> f64 {
    a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
}

/// Shape data at one quadrature point of one cell.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    /// Physical weight (reference weight times the Jacobian).
    pub weight: f64,
    pub point: [f64; 2],
    pub values: [f64; 6],
    pub grads: [[f64; 2]; 6],
}

fn shape_at(order: Order, elem: &Element, l: [f64; 3]) -> ([f64; 6], [[f64; 2]; 6]) {
    match order {
        Order::P1 => {
            let mut v = [0.0; 6];
            let mut g = [[0.0; 2]; 6];
            v[..3].copy_from_slice(&l);
            g[..3].copy_from_slice(&elem.grad_lambda);
            (v, g)
        }
        Order::P2 => (p2_values(l), p2_gradients(l, &elem.grad_lambda)),
    }
}

/// Calls `f` for every quadrature point of cell `t`.
pub fn for_each_quad_point(
    space: &ScalarSpace,
    elem: &Element,
    rule: &QuadratureRule,
    mut f: impl FnMut(&QuadPoint),
) {
    let jac = elem.jacobian();
    for (l, w) in rule.points().iter().zip(rule.weights()) {
        let (values, grads) = shape_at(space.order(), elem, *l);
        f(&QuadPoint { weight: w * jac, point: elem.point(*l), values, grads });
    }
}

fn element(space: &TaylorHoodSpace, t: usize) -> Element {
    Element::new(space.mesh().triangle_coords(t))
}

/// Zero matrix with the connectivity pattern of a scalar space.
pub fn scalar_pattern(space: &ScalarSpace) -> CsrMatrix {
    let mut rows = vec![Vec::new(); space.n_dofs()];
    for t in 0..space.n_cells() {
        let dofs = space.cell(t);
        for &i in dofs {
            rows[i].extend_from_slice(dofs);
        }
    }
    CsrMatrix::from_row_pattern(space.n_dofs(), rows)
}

fn scatter(matrix: &mut CsrMatrix, dofs: &[usize], local: &[[f64; 6]; 6]) {
    let n = dofs.len();
    for a in 0..n {
        for b in 0..n {
            matrix.add_at(dofs[a], dofs[b], local[a][b]);
        }
    }
}

/// Generic scalar assembly: `local(qp, a, b)` is the integrand for test
/// function `a` and trial function `b`.
fn assemble_scalar_with(
    space: &ScalarSpace,
    mesh: &crate::mesh::Mesh,
    rule: &QuadratureRule,
    mut local: impl FnMut(usize, &QuadPoint, &mut [[f64; 6]; 6]),
) -> CsrMatrix {
    let mut matrix = scalar_pattern(space);
    for t in 0..space.n_cells() {
        let elem = Element::new(mesh.triangle_coords(t));
        let mut block = [[0.0; 6]; 6];
        for_each_quad_point(space, &elem, rule, |qp| local(t, qp, &mut block));
        scatter(&mut matrix, space.cell(t), &block);
    }
    matrix
}

/// Scalar mass matrix `∫ φ_i φ_j` on a P1 or P2 space.
pub fn scalar_mass(space: &ScalarSpace, mesh: &crate::mesh::Mesh) -> CsrMatrix {
    let n = space.order().dofs_per_cell();
    assemble_scalar_with(space, mesh, &default_rule(), |_, qp, block| {
        for a in 0..n {
            for b in 0..n {
                block[a][b] += qp.weight * qp.values[a] * qp.values[b];
            }
        }
    })
}

/// Scalar stiffness matrix `∫ ∇φ_i·∇φ_j` on a P1 or P2 space.
pub fn scalar_stiffness(space: &ScalarSpace, mesh: &crate::mesh::Mesh) -> CsrMatrix {
    let n = space.order().dofs_per_cell();
    assemble_scalar_with(space, mesh, &default_rule(), |_, qp, block| {
        for a in 0..n {
            for b in 0..n {
                let g = qp.grads[a][0] * qp.grads[b][0] + qp.grads[a][1] * qp.grads[b][1];
                block[a][b] += qp.weight * g;
            }
        }
    })
}

/// Element mass and stiffness matrices of a single P1 triangle.
pub fn p1_element_matrices(coords: [[f64; 2]; 3]) -> ([[f64; 3]; 3], [[f64; 3]; 3]) {
    let elem = Element::new(coords);
    let mut mass = [[0.0; 3]; 3];
    let mut stiff = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            mass[i][j] = elem.area * if i == j { 1.0 / 6.0 } else { 1.0 / 12.0 };
            let gi = elem.grad_lambda[i];
            let gj = elem.grad_lambda[j];
            stiff[i][j] = elem.area * (gi[0] * gj[0] + gi[1] * gj[1]);
        }
    }
    (mass, stiff)
}

/// Expands a scalar P2 matrix to the block-diagonal velocity operator
/// `diag(A, A)` in the x-then-y layout.
pub fn vector_block_diag(scalar: &CsrMatrix) -> CsrMatrix {
    let n = scalar.nrows();
    let mut rows = Vec::with_capacity(2 * n);
    for shift in [0, n] {
        for i in 0..n {
            rows.push(scalar.row(i).0.iter().map(|&j| j + shift).collect());
        }
    }
    let mut out = CsrMatrix::from_row_pattern(2 * n, rows);
    let half = scalar.nnz();
    out.values_mut()[..half].copy_from_slice(scalar.values());
    out.values_mut()[half..].copy_from_slice(scalar.values());
    out
}

/// Velocity gradients of `field` at the quadrature points of cell `t`.
fn gather(space: &TaylorHoodSpace, coeffs: &[f64], t: usize) -> ([f64; 6], [f64; 6]) {
    let n = space.n_p2();
    let dofs = space.velocity().cell(t);
    let mut ux = [0.0; 6];
    let mut uy = [0.0; 6];
    for (k, &d) in dofs.iter().enumerate() {
        ux[k] = coeffs[d];
        uy[k] = coeffs[n + d];
    }
    (ux, uy)
}

#[inline]
fn value_and_gradient(qp: &QuadPoint, ux: &[f64; 6], uy: &[f64; 6]) -> ([f64; 2], Gradient) {
    let mut v = [0.0; 2];
    let mut g = [[0.0; 2]; 2];
    for k in 0..6 {
        v[0] += ux[k] * qp.values[k];
        v[1] += uy[k] * qp.values[k];
        g[0][0] += ux[k] * qp.grads[k][0];
        g[0][1] += ux[k] * qp.grads[k][1];
        g[1][0] += uy[k] * qp.grads[k][0];
        g[1][1] += uy[k] * qp.grads[k][1];
    }
    (v, g)
}

/// Calls `f(qp, values, gradients)` at every quadrature point of the mesh,
/// with the velocity value and gradient of each of the `N` fields.
pub fn for_each_velocity_point<const N: usize>(
    space: &TaylorHoodSpace,
    fields: [&[f64]; N],
    rule: &QuadratureRule,
    mut f: impl FnMut(&QuadPoint, &[[f64; 2]; N], &[Gradient; N]),
) {
    for field in &fields {
        assert_eq!(field.len(), space.n_vel(), "velocity field has the wrong length");
    }
    for t in 0..space.mesh().n_triangles() {
        let elem = element(space, t);
        let local: [([f64; 6], [f64; 6]); N] = core::array::from_fn(|i| gather(space, fields[i], t));
        for_each_quad_point(space.velocity(), &elem, rule, |qp| {
            let mut values = [[0.0; 2]; N];
            let mut grads = [[[0.0; 2]; 2]; N];
            for i in 0..N {
                let (v, g) = value_and_gradient(qp, &local[i].0, &local[i].1);
                values[i] = v;
                grads[i] = g;
            }
            f(qp, &values, &grads);
        });
    }
}

/// `∫ integrand(∇w₁, …, ∇w_N) dx` with the default rule.
pub fn integrate_gradients<const N: usize>(
    space: &TaylorHoodSpace,
    fields: [&[f64]; N],
    integrand: impl Fn(&[Gradient; N]) -> f64,
) -> f64 {
    let mut total = 0.0;
    for_each_velocity_point(space, fields, &default_rule(), |qp, _, g| total += qp.weight * integrand(g));
    total
}

/// `∫ (|∇u|∇u − |∇w|∇w) : ∇v`, the Smagorinsky operator difference tested
/// against `v`.
pub fn smagorinsky_form(space: &TaylorHoodSpace, u: &[f64], w: &[f64], v: &[f64]) -> f64 {
    integrate_gradients(space, [u, w, v], |g| {
        let (nu, nw) = (frobenius(&g[0]), frobenius(&g[1]));
        let mut d = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                d[i][j] = nu * g[0][i][j] - nw * g[1][i][j];
            }
        }
        contract(&d, &g[2])
    })
}

/// `‖∇u‖_{L^p}` with the Frobenius norm pointwise.
pub fn gradient_lp_norm(space: &TaylorHoodSpace, u: &[f64], p: f64) -> f64 {
    libm::pow(integrate_gradients(space, [u], |g| libm::pow(frobenius(&g[0]), p)), 1.0 / p)
}

/// Calls `f(qp, p)` at every quadrature point with the pressure value.
pub fn for_each_pressure_point(
    space: &TaylorHoodSpace,
    pressure: &[f64],
    rule: &QuadratureRule,
    mut f: impl FnMut(&QuadPoint, f64),
) {
    assert_eq!(pressure.len(), space.n_pre());
    for t in 0..space.mesh().n_triangles() {
        let elem = element(space, t);
        let dofs = space.pressure().cell(t);
        for_each_quad_point(space.pressure(), &elem, rule, |qp| {
            let p: f64 = (0..3).map(|k| pressure[dofs[k]] * qp.values[k]).sum();
            f(qp, p);
        });
    }
}

/// Vector P2 mass matrix `∫ φ_i·φ_j`.
pub fn assemble_mass(space: &TaylorHoodSpace) -> CsrMatrix {
    vector_block_diag(&scalar_mass(space.velocity(), space.mesh()))
}

/// Vector P2 stiffness matrix `∫ ∇φ_i : ∇φ_j`.
pub fn assemble_stiffness(space: &TaylorHoodSpace) -> CsrMatrix {
    vector_block_diag(&scalar_stiffness(space.velocity(), space.mesh()))
}

/// Scalar block of the eddy-viscosity operator
/// `∫ (C_s δ)² |∇w_lag| ∇φ_i·∇φ_j`.
pub fn scalar_eddy_viscosity(space: &TaylorHoodSpace, w_lag: &[f64], coefficient: f64) -> CsrMatrix {
    let mut matrix = scalar_pattern(space.velocity());
    add_scalar_eddy_viscosity(space, w_lag, coefficient, &mut matrix);
    matrix
}

pub(crate) fn add_scalar_eddy_viscosity(
    space: &TaylorHoodSpace,
    w_lag: &[f64],
    coefficient: f64,
    matrix: &mut CsrMatrix,
) {
    let rule = default_rule();
    for t in 0..space.mesh().n_triangles() {
        let elem = element(space, t);
        let (ux, uy) = gather(space, w_lag, t);
        let mut block = [[0.0; 6]; 6];
        for_each_quad_point(space.velocity(), &elem, &rule, |qp| {
            let (_, g) = value_and_gradient(qp, &ux, &uy);
            let nu_t = qp.weight * coefficient * frobenius(&g);
            for a in 0..6 {
                for b in 0..6 {
                    block[a][b] += nu_t * (qp.grads[a][0] * qp.grads[b][0] + qp.grads[a][1] * qp.grads[b][1]);
                }
            }
        });
        scatter(matrix, space.velocity().cell(t), &block);
    }
}

/// Vector eddy-viscosity matrix `∫ (C_s δ)² |∇w_lag| ∇φ_j : ∇φ_i` with the
/// Frobenius norm of the full velocity gradient.
pub fn assemble_eddy_viscosity(space: &TaylorHoodSpace, w_lag: &Field, params: &ModelParams) -> CsrMatrix {
    vector_block_diag(&scalar_eddy_viscosity(space, w_lag.coeffs(), params.eddy_coefficient()))
}

/// Scalar block of the skew-symmetrized convection operator:
/// `N_ij = ½∫(a·∇φ_j) φ_i − ½∫(a·∇φ_i) φ_j`.
pub fn scalar_trilinear(space: &TaylorHoodSpace, a: &[f64]) -> CsrMatrix {
    let mut matrix = scalar_pattern(space.velocity());
    add_scalar_trilinear(space, a, &mut matrix);
    matrix
}

pub(crate) fn add_scalar_trilinear(space: &TaylorHoodSpace, a: &[f64], matrix: &mut CsrMatrix) {
    let rule = default_rule();
    for t in 0..space.mesh().n_triangles() {
        let elem = element(space, t);
        let (ax, ay) = gather(space, a, t);
        // c[i][j] = ∫ (a·∇φ_j) φ_i
        let mut c = [[0.0; 6]; 6];
        for_each_quad_point(space.velocity(), &elem, &rule, |qp| {
            let (av, _) = value_and_gradient(qp, &ax, &ay);
            for j in 0..6 {
                let adv = qp.weight * (av[0] * qp.grads[j][0] + av[1] * qp.grads[j][1]);
                for i in 0..6 {
                    c[i][j] += adv * qp.values[i];
                }
            }
        });
        let mut block = [[0.0; 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                if i != j {
                    block[i][j] = 0.5 * (c[i][j] - c[j][i]);
                }
            }
        }
        scatter(matrix, space.velocity().cell(t), &block);
    }
}

/// Vector matrix `N(a)` with `v_iᵀ N(a) w_j = b*(a, φ_j, φ_i)`; skew-symmetric
/// entry by entry.
pub fn assemble_trilinear(space: &TaylorHoodSpace, a: &Field) -> CsrMatrix {
    vector_block_diag(&scalar_trilinear(space, a.coeffs()))
}

/// `n_pre × n_vel` matrix with `(B w)_q = ∫ q ∇·w`.
pub fn assemble_divergence(space: &TaylorHoodSpace) -> CsrMatrix {
    let n2 = space.n_p2();
    let mut rows = vec![Vec::new(); space.n_pre()];
    for t in 0..space.mesh().n_triangles() {
        let vdofs = space.velocity().cell(t);
        for &q in space.pressure().cell(t) {
            rows[q].extend(vdofs.iter().copied());
            rows[q].extend(vdofs.iter().map(|&d| d + n2));
        }
    }
    let mut b = CsrMatrix::from_row_pattern(space.n_vel(), rows);
    let rule = default_rule();
    for t in 0..space.mesh().n_triangles() {
        let elem = element(space, t);
        let vdofs = space.velocity().cell(t);
        let pdofs = space.pressure().cell(t);
        let mut bx = [[0.0; 6]; 3];
        let mut by = [[0.0; 6]; 3];
        for_each_quad_point(space.velocity(), &elem, &rule, |qp| {
            // P1 pressure basis values are the barycentric coordinates
            let lam = barycentric_of(&elem, qp.point);
            for q in 0..3 {
                for k in 0..6 {
                    bx[q][k] += qp.weight * lam[q] * qp.grads[k][0];
                    by[q][k] += qp.weight * lam[q] * qp.grads[k][1];
                }
            }
        });
        for q in 0..3 {
            for k in 0..6 {
                b.add_at(pdofs[q], vdofs[k], bx[q][k]);
                b.add_at(pdofs[q], vdofs[k] + n2, by[q][k]);
            }
        }
    }
    b
}

fn barycentric_of(elem: &Element, p: [f64; 2]) -> [f64; 3] {
    let c0 = elem.coords[0];
    let (dx, dy) = (p[0] - c0[0], p[1] - c0[1]);
    let l1 = elem.grad_lambda[1][0] * dx + elem.grad_lambda[1][1] * dy;
    let l2 = elem.grad_lambda[2][0] * dx + elem.grad_lambda[2][1] * dy;
    [1.0 - l1 - l2, l1, l2]
}

/// `m_q = ∫ q`, the P1 pressure basis integrals.
pub fn assemble_pressure_mean(space: &TaylorHoodSpace) -> Vec<f64> {
    let mut m = vec![0.0; space.n_pre()];
    for t in 0..space.mesh().n_triangles() {
        let area = space.mesh().triangle_area(t);
        for &q in space.pressure().cell(t) {
            m[q] += area / 3.0;
        }
    }
    m
}

/// Load vector `∫ f(·, t)·φ_i` in the velocity layout.
pub fn assemble_body_force(space: &TaylorHoodSpace, f: impl Fn(f64, f64, f64) -> [f64; 2], t: f64) -> Vec<f64> {
    let n2 = space.n_p2();
    let mut out = vec![0.0; space.n_vel()];
    let rule = default_rule();
    for c in 0..space.mesh().n_triangles() {
        let elem = element(space, c);
        let dofs = space.velocity().cell(c);
        for_each_quad_point(space.velocity(), &elem, &rule, |qp| {
            let fv = f(qp.point[0], qp.point[1], t);
            for k in 0..6 {
                out[dofs[k]] += qp.weight * fv[0] * qp.values[k];
                out[n2 + dofs[k]] += qp.weight * fv[1] * qp.values[k];
            }
        });
    }
    out
}

/// Homogeneous Dirichlet conditions on the leading `mask.len()` unknowns:
/// masked rows become identity rows, masked columns are zeroed and the
/// masked right-hand side entries are set to zero. Symmetric blocks stay
/// symmetric.
pub fn apply_dirichlet(matrix: &mut CsrMatrix, rhs: &mut [f64], mask: &[bool]) {
    assert!(mask.len() <= matrix.nrows() && mask.len() <= matrix.ncols());
    let masked = |j: usize| j < mask.len() && mask[j];
    for i in 0..matrix.nrows() {
        let start = matrix.row_ptr()[i];
        let end = matrix.row_ptr()[i + 1];
        let row_masked = masked(i);
        for k in start..end {
            let j = matrix.col_idx()[k];
            if row_masked {
                matrix.values_mut()[k] = if j == i { 1.0 } else { 0.0 };
            } else if masked(j) {
                matrix.values_mut()[k] = 0.0;
            }
        }
        if row_masked {
            assert!(matrix.position(i, i).is_some(), "masked row {i} has no diagonal entry");
            rhs[i] = 0.0;
        }
    }
}

/// Sparsity layout of the constrained saddle-point system
///
/// ```text
/// [ A   0  −Bxᵀ  0 ] [wx]   [fx]
/// [ 0   A  −Byᵀ  0 ] [wy] = [fy]
/// [−Bx −By  0    m ] [p ]   [0 ]
/// [ 0   0   mᵀ   0 ] [λ ]   [0 ]
/// ```
///
/// where `A` is a scalar P2 block shared by both components and the last row
/// enforces `∫ p = 0`. No-slip rows and columns are eliminated. Building a
/// system only copies the scalar block values into a precomputed pattern.
#[derive(Debug, Clone)]
pub struct SaddleLayout {
    n2: usize,
    n1: usize,
    base: CsrMatrix,
    scalar_template: CsrMatrix,
    // start of the scalar segment in each velocity row (x rows then y rows)
    segment_start: Vec<usize>,
    zero_positions: Vec<usize>,
    unit_positions: Vec<usize>,
    mask: Vec<bool>,
}

impl SaddleLayout {
    pub fn new(space: &TaylorHoodSpace) -> Self {
        let n2 = space.n_p2();
        let n1 = space.n_pre();
        let nv = 2 * n2;
        let n = nv + n1 + 1;
        let scalar_template = scalar_pattern(space.velocity());
        let div = assemble_divergence(space);
        let div_t = div.transpose();
        let mean = assemble_pressure_mean(space);

        let mut rows: Vec<Vec<usize>> = Vec::with_capacity(n);
        for shift in [0, n2] {
            for i in 0..n2 {
                let mut r: Vec<usize> = scalar_template.row(i).0.iter().map(|&j| j + shift).collect();
                r.extend(div_t.row(i + shift).0.iter().map(|&q| q + nv));
                rows.push(r);
            }
        }
        for q in 0..n1 {
            let mut r: Vec<usize> = div.row(q).0.to_vec();
            r.push(nv + n1);
            rows.push(r);
        }
        rows.push((nv..nv + n1).collect());
        let mut base = CsrMatrix::from_row_pattern(n, rows);

        for q in 0..n1 {
            let (cols, vals) = div.row(q);
            for (&j, &v) in cols.iter().zip(vals) {
                base.add_at(q + nv, j, -v);
                base.add_at(j, q + nv, -v);
            }
            base.add_at(q + nv, nv + n1, mean[q]);
            base.add_at(nv + n1, q + nv, mean[q]);
        }

        let mask = space.dirichlet_mask().to_vec();
        let mut segment_start = Vec::with_capacity(nv);
        let mut zero_positions = Vec::new();
        let mut unit_positions = Vec::new();
        for i in 0..n {
            let (start, end) = (base.row_ptr()[i], base.row_ptr()[i + 1]);
            if i < nv {
                segment_start.push(start);
            }
            let row_masked = i < nv && mask[i];
            for k in start..end {
                let j = base.col_idx()[k];
                if row_masked {
                    if j == i {
                        unit_positions.push(k);
                    } else {
                        zero_positions.push(k);
                    }
                } else if j < nv && mask[j] {
                    zero_positions.push(k);
                }
            }
        }
        for &k in &zero_positions {
            base.values_mut()[k] = 0.0;
        }
        for &k in &unit_positions {
            base.values_mut()[k] = 1.0;
        }
        Self { n2, n1, base, scalar_template, segment_start, zero_positions, unit_positions, mask }
    }

    pub fn size(&self) -> usize {
        2 * self.n2 + self.n1 + 1
    }

    pub fn n_vel(&self) -> usize {
        2 * self.n2
    }

    pub fn n_pre(&self) -> usize {
        self.n1
    }

    /// Zero scalar P2 matrix with the pattern expected by [`Self::build`].
    pub fn scalar_template(&self) -> &CsrMatrix {
        &self.scalar_template
    }

    /// Constrained saddle matrix with velocity block `diag(a, a)`.
    pub fn build(&self, a: &CsrMatrix) -> CsrMatrix {
        let mut out = self.base.clone();
        self.build_into(a, &mut out);
        out
    }

    /// Same as [`Self::build`], reusing `out` (which must come from a
    /// previous build).
    pub fn build_into(&self, a: &CsrMatrix, out: &mut CsrMatrix) {
        assert!(a.same_pattern(&self.scalar_template), "scalar block has the wrong pattern");
        let rp = a.row_ptr();
        let values = out.values_mut();
        for shift in [0, self.n2] {
            for i in 0..self.n2 {
                let src = &a.values()[rp[i]..rp[i + 1]];
                let dst = self.segment_start[i + shift];
                values[dst..dst + src.len()].copy_from_slice(src);
            }
        }
        for &k in &self.zero_positions {
            values[k] = 0.0;
        }
        for &k in &self.unit_positions {
            values[k] = 1.0;
        }
    }

    /// Full right-hand side from a velocity load vector (pressure and
    /// multiplier entries zero, no-slip entries zeroed).
    pub fn rhs(&self, velocity_load: &[f64]) -> Vec<f64> {
        assert_eq!(velocity_load.len(), self.n_vel());
        let mut b = vec![0.0; self.size()];
        for (i, &f) in velocity_load.iter().enumerate() {
            if !self.mask[i] {
                b[i] = f;
            }
        }
        b
    }

    /// Splits a solution into velocity, pressure and the mean multiplier.
    pub fn split<'a>(&self, x: &'a [f64]) -> (&'a [f64], &'a [f64], f64) {
        let nv = self.n_vel();
        (&x[..nv], &x[nv..nv + self.n1], x[nv + self.n1])
    }
}

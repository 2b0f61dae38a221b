//! Lagrange P1/P2 shape functions in barycentric form and affine element
//! geometry.
//!
//! Local P2 node order: the three vertices, then the midpoints of edges
//! (0,1), (1,2), (2,0).

/// Local vertex pairs of the three P2 edge nodes.
pub const P2_EDGES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

/// Reference gradients of the barycentric coordinates with `ξ = λ₁`, `η = λ₂`.
const REF_GRAD_LAMBDA: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];

pub fn eval_p1_basis(l: [f64; 3]) -> ([f64; 3], [[f64; 2]; 3]) {
    (l, REF_GRAD_LAMBDA)
}

/// Values and reference-coordinate gradients of the six quadratic basis
/// functions at barycentric point `l`.
pub fn eval_p2_basis(l: [f64; 3]) -> ([f64; 6], [[f64; 2]; 6]) {
    (p2_values(l), p2_gradients(l, &REF_GRAD_LAMBDA))
}

pub fn p2_values(l: [f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

/// P2 gradients given the gradients of the barycentric coordinates (either
/// reference or physical).
pub fn p2_gradients(l: [f64; 3], grad_lambda: &[[f64; 2]; 3]) -> [[f64; 2]; 6] {
    let mut g = [[0.0; 2]; 6];
    for i in 0..3 {
        let s = 4.0 * l[i] - 1.0;
        g[i] = [s * grad_lambda[i][0], s * grad_lambda[i][1]];
    }
    for (k, &[i, j]) in P2_EDGES.iter().enumerate() {
        g[3 + k] = [
            4.0 * (l[j] * grad_lambda[i][0] + l[i] * grad_lambda[j][0]),
            4.0 * (l[j] * grad_lambda[i][1] + l[i] * grad_lambda[j][1]),
        ];
    }
    g
}

/// Affine triangle: area and physical gradients of the barycentric
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub coords: [[f64; 2]; 3],
    pub area: f64,
    pub grad_lambda: [[f64; 2]; 3],
}

impl Element {
    pub fn new(coords: [[f64; 2]; 3]) -> Self {
        let [[x0, y0], [x1, y1], [x2, y2]] = coords;
        let twice_area = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
        let inv = 1.0 / twice_area;
        let grad_lambda = [
            [(y1 - y2) * inv, (x2 - x1) * inv],
            [(y2 - y0) * inv, (x0 - x2) * inv],
            [(y0 - y1) * inv, (x1 - x0) * inv],
        ];
        Self { coords, area: 0.5 * twice_area, grad_lambda }
    }

    /// Physical point for barycentric coordinates `l`.
    pub fn point(&self, l: [f64; 3]) -> [f64; 2] {
        let c = &self.coords;
        [
            l[0] * c[0][0] + l[1] * c[1][0] + l[2] * c[2][0],
            l[0] * c[0][1] + l[1] * c[1][1] + l[2] * c[2][1],
        ]
    }

    /// Quadrature weight scaling from the reference triangle (area 1/2).
    pub fn jacobian(&self) -> f64 {
        2.0 * self.area
    }

    pub fn p2_gradients(&self, l: [f64; 3]) -> [[f64; 2]; 6] {
        p2_gradients(l, &self.grad_lambda)
    }
}

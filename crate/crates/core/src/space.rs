//! Degree-of-freedom maps for scalar Lagrange spaces and the Taylor-Hood
//! P2-P1 pair.

use alloc::vec;
use alloc::vec::Vec;

use crate::basis::P2_EDGES;
use crate::field::{Field, FieldKind};
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    P1,
    P2,
}

impl Order {
    pub fn dofs_per_cell(self) -> usize {
        match self {
            Order::P1 => 3,
            Order::P2 => 6,
        }
    }
}

/// Continuous scalar Lagrange space. P1 nodes are the mesh vertices; P2 nodes
/// are the vertices followed by the edge midpoints in [`Mesh::edges`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSpace {
    order: Order,
    n_dofs: usize,
    cell_dofs: Vec<usize>,
    nodes: Vec<[f64; 2]>,
    on_boundary: Vec<bool>,
}

impl ScalarSpace {
    pub fn new(mesh: &Mesh, order: Order) -> Self {
        let nv = mesh.n_vertices();
        let mut nodes: Vec<[f64; 2]> = mesh.vertices().to_vec();
        let mut cell_dofs = Vec::with_capacity(mesh.n_triangles() * order.dofs_per_cell());
        let mut on_boundary = vec![false; nv];
        match order {
            Order::P1 => {
                for tri in mesh.triangles() {
                    cell_dofs.extend_from_slice(tri);
                }
                for e in mesh.boundary_edges().iter().filter(|e| e.tag.is_dirichlet()) {
                    on_boundary[e.vertices[0]] = true;
                    on_boundary[e.vertices[1]] = true;
                }
            }
            Order::P2 => {
                let edges = mesh.edges();
                let mut edge_id = alloc::collections::BTreeMap::new();
                for (k, &[a, b]) in edges.iter().enumerate() {
                    edge_id.insert((a, b), nv + k);
                    let (p, q) = (mesh.vertices()[a], mesh.vertices()[b]);
                    nodes.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                }
                on_boundary.resize(nv + edges.len(), false);
                let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
                for tri in mesh.triangles() {
                    cell_dofs.extend_from_slice(tri);
                    for &[i, j] in &P2_EDGES {
                        cell_dofs.push(edge_id[&key(tri[i], tri[j])]);
                    }
                }
                for e in mesh.boundary_edges().iter().filter(|e| e.tag.is_dirichlet()) {
                    let [a, b] = e.vertices;
                    on_boundary[a] = true;
                    on_boundary[b] = true;
                    on_boundary[edge_id[&key(a, b)]] = true;
                }
            }
        }
        Self { order, n_dofs: nodes.len(), cell_dofs, nodes, on_boundary }
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn n_cells(&self) -> usize {
        self.cell_dofs.len() / self.order.dofs_per_cell()
    }

    /// Global dofs of cell `t` in local node order.
    pub fn cell(&self, t: usize) -> &[usize] {
        let n = self.order.dofs_per_cell();
        &self.cell_dofs[t * n..(t + 1) * n]
    }

    /// Coordinates of the Lagrange nodes.
    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    /// `true` for nodes on a Dirichlet-tagged boundary edge.
    pub fn on_boundary(&self) -> &[bool] {
        &self.on_boundary
    }

    /// Nodal interpolant of a scalar function.
    pub fn interpolate(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|p| f(p[0], p[1])).collect()
    }
}

/// Taylor-Hood pair on a mesh: continuous P2 velocity (two components) and
/// continuous P1 pressure.
///
/// Velocity coefficient layout: all x-components (one per P2 node), then all
/// y-components. `n_vel = 2·(#vertices + #edges)`, `n_pre = #vertices`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorHoodSpace {
    mesh: Mesh,
    velocity: ScalarSpace,
    pressure: ScalarSpace,
    dirichlet: Vec<bool>,
}

impl TaylorHoodSpace {
    pub fn new(mesh: Mesh) -> Self {
        let velocity = ScalarSpace::new(&mesh, Order::P2);
        let pressure = ScalarSpace::new(&mesh, Order::P1);
        let mut dirichlet = velocity.on_boundary().to_vec();
        dirichlet.extend_from_within(..);
        Self { mesh, velocity, pressure, dirichlet }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    /// Scalar P2 space carrying each velocity component.
    pub fn velocity(&self) -> &ScalarSpace {
        &self.velocity
    }

    pub fn pressure(&self) -> &ScalarSpace {
        &self.pressure
    }

    pub fn n_p2(&self) -> usize {
        self.velocity.n_dofs()
    }

    pub fn n_vel(&self) -> usize {
        2 * self.velocity.n_dofs()
    }

    pub fn n_pre(&self) -> usize {
        self.pressure.n_dofs()
    }

    /// One flag per velocity dof; `true` where the no-slip condition holds.
    pub fn dirichlet_mask(&self) -> &[bool] {
        &self.dirichlet
    }

    pub fn zero_velocity(&self, time: f64) -> Field {
        Field::new(FieldKind::Velocity, vec![0.0; self.n_vel()], time)
    }

    pub fn zero_pressure(&self, time: f64) -> Field {
        Field::new(FieldKind::Pressure, vec![0.0; self.n_pre()], time)
    }

    /// Nodal P2 interpolant of a vector function.
    pub fn interpolate_velocity(&self, f: impl Fn(f64, f64) -> [f64; 2], time: f64) -> Field {
        let n = self.n_p2();
        let mut c = vec![0.0; 2 * n];
        for (i, p) in self.velocity.nodes().iter().enumerate() {
            let v = f(p[0], p[1]);
            c[i] = v[0];
            c[n + i] = v[1];
        }
        Field::new(FieldKind::Velocity, c, time)
    }

    /// Nodal P1 interpolant of a scalar function.
    pub fn interpolate_pressure(&self, f: impl Fn(f64, f64) -> f64, time: f64) -> Field {
        Field::new(FieldKind::Pressure, self.pressure.interpolate(f), time)
    }

    /// Sets masked velocity coefficients to zero.
    pub fn apply_no_slip(&self, w: &mut Field) {
        for (c, &m) in w.coeffs_mut().iter_mut().zip(&self.dirichlet) {
            if m {
                *c = 0.0;
            }
        }
    }
}

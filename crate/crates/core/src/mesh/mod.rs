//! Conforming triangular meshes with tagged boundary edges.

mod annulus;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::MeshError;

pub use annulus::{build_annulus_mesh, build_offset_annulus_mesh, OffsetAnnulus};

/// Which part of the boundary an edge lies on. Velocity degrees of freedom on
/// `Outer` and `Inner` edges carry a no-slip condition; `None` edges are left
/// free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    Outer,
    Inner,
    None,
}

impl BoundaryTag {
    pub fn is_dirichlet(self) -> bool {
        !matches!(self, BoundaryTag::None)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryTag::Outer => "outer",
            BoundaryTag::Inner => "inner",
            BoundaryTag::None => "none",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "outer" => Some(BoundaryTag::Outer),
            "inner" => Some(BoundaryTag::Inner),
            "none" => Some(BoundaryTag::None),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub tag: BoundaryTag,
}

/// Immutable, validated triangulation.
///
/// Triangles are counterclockwise with strictly positive area, every edge is
/// shared by one (boundary) or two (interior) triangles, and `boundary_edges`
/// lists each boundary edge exactly once.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    h_min: f64,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub(crate) fn signed_area(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
}

fn distance(p: [f64; 2], q: [f64; 2]) -> f64 {
    libm::hypot(p[0] - q[0], p[1] - q[1])
}

impl Mesh {
    /// Validates and wraps a triangulation.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
    ) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Invalid("mesh has no triangles".to_string()));
        }
        let nv = vertices.len();
        for (k, v) in vertices.iter().enumerate() {
            if !(v[0].is_finite() && v[1].is_finite()) {
                return Err(MeshError::Invalid(format!("vertex {k} is not finite")));
            }
        }
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(MeshError::Invalid(format!("triangle {t} references a missing vertex")));
            }
            let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if !(area > 0.0) {
                return Err(MeshError::Invalid(format!(
                    "triangle {t} has non-positive signed area {area:e}"
                )));
            }
        }

        // directed half-edge counts give the manifold and orientation checks
        let mut uses: BTreeMap<(usize, usize), (u32, u32)> = BTreeMap::new();
        for tri in &triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let e = uses.entry(edge_key(a, b)).or_insert((0, 0));
                if a < b {
                    e.0 += 1;
                } else {
                    e.1 += 1;
                }
            }
        }
        let mut listed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for be in &boundary_edges {
            *listed.entry(edge_key(be.vertices[0], be.vertices[1])).or_insert(0) += 1;
        }
        for (&(a, b), &(fwd, back)) in &uses {
            let total = fwd + back;
            match total {
                1 => match listed.get(&(a, b)) {
                    Some(1) => {}
                    Some(_) => {
                        return Err(MeshError::Invalid(format!("boundary edge ({a}, {b}) listed twice")))
                    }
                    None => {
                        return Err(MeshError::Invalid(format!(
                            "edge ({a}, {b}) belongs to one triangle but is not a boundary edge"
                        )))
                    }
                },
                2 => {
                    if fwd != 1 {
                        return Err(MeshError::Invalid(format!(
                            "interior edge ({a}, {b}) has inconsistent orientation"
                        )));
                    }
                    if listed.contains_key(&(a, b)) {
                        return Err(MeshError::Invalid(format!(
                            "interior edge ({a}, {b}) is listed as a boundary edge"
                        )));
                    }
                }
                n => {
                    return Err(MeshError::Invalid(format!("edge ({a}, {b}) belongs to {n} triangles")));
                }
            }
        }
        for key in listed.keys() {
            if !uses.contains_key(key) {
                return Err(MeshError::Invalid(format!(
                    "boundary edge ({}, {}) is not an edge of any triangle",
                    key.0, key.1
                )));
            }
        }

        let h_min = shortest_edge_of(&vertices, &triangles);
        Ok(Self { vertices, triangles, boundary_edges, h_min })
    }

    /// Builds the boundary edge list automatically: every edge used by a
    /// single triangle is tagged with `tag(a, b)`.
    pub fn with_boundary_tags(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        tag: impl Fn([f64; 2], [f64; 2]) -> BoundaryTag,
    ) -> Result<Self, MeshError> {
        let mut count: BTreeMap<(usize, usize), (usize, [usize; 2])> = BTreeMap::new();
        for tri in &triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                count.entry(edge_key(a, b)).or_insert((0, [a, b])).0 += 1;
            }
        }
        let mut boundary_edges = Vec::new();
        for (_, (n, [a, b])) in count {
            if n == 1 {
                if a >= vertices.len() || b >= vertices.len() {
                    return Err(MeshError::Invalid("triangle references a missing vertex".to_string()));
                }
                boundary_edges.push(BoundaryEdge { vertices: [a, b], tag: tag(vertices[a], vertices[b]) });
            }
        }
        Self::new(vertices, triangles, boundary_edges)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Shortest edge over all triangles.
    pub fn h_min(&self) -> f64 {
        self.h_min
    }

    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [p, q, r] = self.triangle_coords(t);
        signed_area(p, q, r)
    }

    pub fn area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    /// Longest distance between two vertices (brute force over boundary
    /// vertices, which carry the convex hull).
    pub fn diameter(&self) -> f64 {
        let mut on_boundary: Vec<usize> = self.boundary_edges.iter().flat_map(|e| e.vertices).collect();
        on_boundary.sort_unstable();
        on_boundary.dedup();
        let mut d: f64 = 0.0;
        for (i, &a) in on_boundary.iter().enumerate() {
            for &b in &on_boundary[i + 1..] {
                d = d.max(distance(self.vertices[a], self.vertices[b]));
            }
        }
        d
    }

    /// Unique undirected edges `(a, b)` with `a < b`, in order of first
    /// appearance when walking triangles and their local edges
    /// `(0,1), (1,2), (2,0)`.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut seen: BTreeMap<(usize, usize), ()> = BTreeMap::new();
        let mut out = Vec::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = edge_key(tri[k], tri[(k + 1) % 3]);
                if seen.insert((a, b), ()).is_none() {
                    out.push([a, b]);
                }
            }
        }
        out
    }
}

fn shortest_edge_of(vertices: &[[f64; 2]], triangles: &[[usize; 3]]) -> f64 {
    let mut h = f64::INFINITY;
    for tri in triangles {
        for k in 0..3 {
            h = h.min(distance(vertices[tri[k]], vertices[tri[(k + 1) % 3]]));
        }
    }
    h
}

/// Shortest edge length over all triangles; used as the filter width δ.
pub fn shortest_edge(mesh: &Mesh) -> f64 {
    mesh.h_min()
}

/// Uniform triangulation of (−1, 1)² with `n_per_side` nodes per side. Each
/// grid cell is split along its south-west to north-east diagonal. All
/// boundary edges are tagged [`BoundaryTag::Outer`].
pub fn build_square_mesh(n_per_side: usize) -> Result<Mesh, MeshError> {
    if n_per_side < 2 {
        return Err(MeshError::InvalidArgument(format!(
            "n_per_side must be at least 2, got {n_per_side}"
        )));
    }
    let n = n_per_side;
    let step = 2.0 / (n - 1) as f64;
    let coord = |i: usize| if i == n - 1 { 1.0 } else { -1.0 + step * i as f64 };
    let mut vertices = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            vertices.push([coord(i), coord(j)]);
        }
    }
    let id = |i: usize, j: usize| j * n + i;
    let mut triangles = Vec::with_capacity(2 * (n - 1) * (n - 1));
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Mesh::with_boundary_tags(vertices, triangles, |_, _| BoundaryTag::Outer)
}

//! Disk with an off-center circular hole.
//!
//! Boundary nodes are placed uniformly on both circles. Interior nodes come
//! from graded rings around the hole (spacing grows linearly with the
//! distance to the hole until it reaches the outer boundary spacing) and from
//! concentric rings inside the outer circle. Candidates closer than a fraction
//! of the local spacing to an accepted node are dropped. The point set is then
//! triangulated by a constrained Delaunay triangulation that contains every
//! boundary chord, triangles inside the hole are removed, and two rounds of
//! Laplacian smoothing with re-triangulation improve the element shapes.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use super::{signed_area, BoundaryEdge, BoundaryTag, Mesh};
use crate::error::MeshError;

/// `{ |x| < outer_radius } \ { |x − inner_center| ≤ inner_radius }`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetAnnulus {
    pub outer_radius: f64,
    pub inner_radius: f64,
    pub inner_center: [f64; 2],
}

impl Default for OffsetAnnulus {
    /// Unit disk with a hole of radius 0.1 centred at (1/2, 0).
    fn default() -> Self {
        Self { outer_radius: 1.0, inner_radius: 0.1, inner_center: [0.5, 0.0] }
    }
}

impl OffsetAnnulus {
    pub fn area(&self) -> f64 {
        PI * (self.outer_radius * self.outer_radius - self.inner_radius * self.inner_radius)
    }

    fn validate(&self) -> Result<(), MeshError> {
        let [cx, cy] = self.inner_center;
        let gap = self.outer_radius - libm::hypot(cx, cy) - self.inner_radius;
        if !(self.inner_radius > 0.0 && self.outer_radius > 0.0 && gap > 0.0) {
            return Err(MeshError::InvalidArgument(format!(
                "hole must lie strictly inside the disk: {self:?}"
            )));
        }
        Ok(())
    }
}

// Ratio between spacing increase and distance from the hole.
const GRADING: f64 = 0.2;
// Candidates closer than this fraction of the local spacing are rejected.
const MIN_SEPARATION: f64 = 0.7;
const SMOOTHING_ROUNDS: usize = 2;

/// Mesh of the default offset annulus with `n_outer` nodes on the unit circle
/// and `n_inner` nodes on the obstacle.
pub fn build_annulus_mesh(n_outer: usize, n_inner: usize) -> Result<Mesh, MeshError> {
    build_offset_annulus_mesh(&OffsetAnnulus::default(), n_outer, n_inner)
}

pub fn build_offset_annulus_mesh(
    geometry: &OffsetAnnulus,
    n_outer: usize,
    n_inner: usize,
) -> Result<Mesh, MeshError> {
    if n_outer < 8 || n_inner < 8 {
        return Err(MeshError::InvalidArgument(format!(
            "need at least 8 nodes on each circle, got n_outer={n_outer}, n_inner={n_inner}"
        )));
    }
    geometry.validate()?;
    let sizing = Sizing::new(geometry, n_outer, n_inner);

    let mut points = Vec::new();
    for k in 0..n_outer {
        let theta = 2.0 * PI * k as f64 / n_outer as f64;
        points.push(on_circle([0.0, 0.0], geometry.outer_radius, theta));
    }
    for k in 0..n_inner {
        let theta = 2.0 * PI * k as f64 / n_inner as f64;
        points.push(on_circle(geometry.inner_center, geometry.inner_radius, theta));
    }
    let n_boundary = points.len();

    let mut grid = PointGrid::new(geometry.outer_radius, 0.5 * sizing.h_out);
    for (i, &p) in points.iter().enumerate() {
        grid.insert(p, i);
    }
    for candidate in sizing.candidates() {
        if sizing.admissible(candidate) {
            let spacing = MIN_SEPARATION * sizing.size(candidate);
            if !grid.any_within(candidate, spacing, &points) {
                grid.insert(candidate, points.len());
                points.push(candidate);
            }
        }
    }

    let mut constraints = Vec::with_capacity(n_boundary);
    for k in 0..n_outer {
        constraints.push([k, (k + 1) % n_outer]);
    }
    for k in 0..n_inner {
        constraints.push([n_outer + k, n_outer + (k + 1) % n_inner]);
    }
    let is_inner = |v: usize| v >= n_outer && v < n_boundary;

    let mut triangles = triangulate(&points, &constraints, &is_inner)?;
    for _ in 0..SMOOTHING_ROUNDS {
        smooth(&mut points, &triangles, n_boundary);
        triangles = triangulate(&points, &constraints, &is_inner)?;
    }

    let boundary_edges = constraints
        .iter()
        .map(|&[a, b]| BoundaryEdge {
            vertices: [a, b],
            tag: if is_inner(a) { BoundaryTag::Inner } else { BoundaryTag::Outer },
        })
        .collect();
    Mesh::new(points, triangles, boundary_edges).map_err(|e| MeshError::Generation(format!("{e}")))
}

fn on_circle(center: [f64; 2], radius: f64, theta: f64) -> [f64; 2] {
    [center[0] + radius * libm::cos(theta), center[1] + radius * libm::sin(theta)]
}

struct Sizing {
    geometry: OffsetAnnulus,
    h_out: f64,
    h_in: f64,
    sagitta_out: f64,
}

impl Sizing {
    fn new(geometry: &OffsetAnnulus, n_outer: usize, n_inner: usize) -> Self {
        let h_out = 2.0 * PI * geometry.outer_radius / n_outer as f64;
        let h_in = 2.0 * PI * geometry.inner_radius / n_inner as f64;
        let sagitta_out = geometry.outer_radius * (1.0 - libm::cos(PI / n_outer as f64));
        Self { geometry: *geometry, h_out, h_in: h_in.min(h_out), sagitta_out }
    }

    fn hole_distance(&self, p: [f64; 2]) -> f64 {
        let c = self.geometry.inner_center;
        libm::hypot(p[0] - c[0], p[1] - c[1]) - self.geometry.inner_radius
    }

    fn size(&self, p: [f64; 2]) -> f64 {
        (self.h_in + GRADING * self.hole_distance(p).max(0.0)).min(self.h_out)
    }

    fn admissible(&self, p: [f64; 2]) -> bool {
        let s = self.size(p);
        let to_outer = self.geometry.outer_radius - libm::hypot(p[0], p[1]);
        to_outer >= self.sagitta_out + 0.5 * s && self.hole_distance(p) >= 0.5 * s
    }

    /// Graded rings around the hole, then concentric rings from the outer
    /// circle inwards, then the disk centre.
    fn candidates(&self) -> Vec<[f64; 2]> {
        let g = &self.geometry;
        let mut out = Vec::new();
        let row = 0.5 * libm::sqrt(3.0);

        let saturation = (self.h_out - self.h_in) / GRADING + 2.0 * self.h_out;
        let mut rho = g.inner_radius;
        let mut h = self.h_in;
        let mut ring = 0usize;
        loop {
            rho += row * h;
            ring += 1;
            let dist = rho - g.inner_radius;
            if dist > saturation || rho > 2.0 * g.outer_radius {
                break;
            }
            h = (self.h_in + GRADING * dist).min(self.h_out);
            let m = ((2.0 * PI * rho / h).round() as usize).max(6);
            let shift = if ring % 2 == 1 { PI / m as f64 } else { 0.0 };
            for k in 0..m {
                out.push(on_circle(g.inner_center, rho, shift + 2.0 * PI * k as f64 / m as f64));
            }
        }

        let mut ring = 0usize;
        loop {
            ring += 1;
            let rho = g.outer_radius - row * self.h_out * ring as f64;
            if rho < 0.5 * self.h_out {
                break;
            }
            let m = ((2.0 * PI * rho / self.h_out).round() as usize).max(3);
            let shift = if ring % 2 == 1 { PI / m as f64 } else { 0.0 };
            for k in 0..m {
                out.push(on_circle([0.0, 0.0], rho, shift + 2.0 * PI * k as f64 / m as f64));
            }
        }
        out.push([0.0, 0.0]);
        out
    }
}

/// Uniform bucket grid over the bounding square of the disk.
struct PointGrid {
    origin: f64,
    cell: f64,
    n: usize,
    buckets: Vec<Vec<usize>>,
}

impl PointGrid {
    fn new(radius: f64, cell: f64) -> Self {
        let n = ((2.0 * radius / cell).ceil() as usize).max(1) + 1;
        Self { origin: -radius, cell, n, buckets: vec![Vec::new(); n * n] }
    }

    fn cell_of(&self, p: [f64; 2]) -> (usize, usize) {
        let clamp = |v: f64| (((v - self.origin) / self.cell).floor().max(0.0) as usize).min(self.n - 1);
        (clamp(p[0]), clamp(p[1]))
    }

    fn insert(&mut self, p: [f64; 2], id: usize) {
        let (i, j) = self.cell_of(p);
        self.buckets[j * self.n + i].push(id);
    }

    fn any_within(&self, p: [f64; 2], radius: f64, points: &[[f64; 2]]) -> bool {
        let reach = (radius / self.cell).ceil() as usize;
        let (ci, cj) = self.cell_of(p);
        let r2 = radius * radius;
        for j in cj.saturating_sub(reach)..=(cj + reach).min(self.n - 1) {
            for i in ci.saturating_sub(reach)..=(ci + reach).min(self.n - 1) {
                for &id in &self.buckets[j * self.n + i] {
                    let q = points[id];
                    let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
                    if dx * dx + dy * dy < r2 {
                        return true;
                    }
                }
            }
        }
        false
    }
}

fn triangulate(
    points: &[[f64; 2]],
    constraints: &[[usize; 2]],
    is_inner: &dyn Fn(usize) -> bool,
) -> Result<Vec<[usize; 3]>, MeshError> {
    let vertices: Vec<Point2<f64>> = points.iter().map(|p| Point2::new(p[0], p[1])).collect();
    let cdt: ConstrainedDelaunayTriangulation<Point2<f64>> =
        ConstrainedDelaunayTriangulation::bulk_load_cdt(vertices, constraints.to_vec())
            .map_err(|e| MeshError::Generation(format!("triangulation failed: {e:?}")))?;
    if cdt.num_vertices() != points.len() {
        return Err(MeshError::Generation("duplicate mesh nodes".into()));
    }
    if cdt.num_constraints() != constraints.len() {
        return Err(MeshError::Generation(format!(
            "boundary chords were split: {} constraints for {} chords",
            cdt.num_constraints(),
            constraints.len()
        )));
    }
    let mut triangles = Vec::with_capacity(cdt.num_inner_faces());
    for face in cdt.inner_faces() {
        let [a, b, c] = face.vertices().map(|v| v.fix().index());
        if is_inner(a) && is_inner(b) && is_inner(c) {
            continue;
        }
        let area = signed_area(points[a], points[b], points[c]);
        if area > 0.0 {
            triangles.push([a, b, c]);
        } else if area < 0.0 {
            triangles.push([a, c, b]);
        } else {
            return Err(MeshError::Generation(format!("degenerate triangle ({a}, {b}, {c})")));
        }
    }
    Ok(triangles)
}

/// Moves each interior node towards the mean of its neighbours when that
/// keeps every incident triangle positively oriented.
fn smooth(points: &mut [[f64; 2]], triangles: &[[usize; 3]], n_fixed: usize) {
    let n = points.len();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (t, tri) in triangles.iter().enumerate() {
        for &v in tri {
            incident[v].push(t);
        }
    }
    for v in n_fixed..n {
        let mut sum = [0.0, 0.0];
        let mut count = 0.0;
        for &t in &incident[v] {
            for &w in &triangles[t] {
                if w != v {
                    sum[0] += points[w][0];
                    sum[1] += points[w][1];
                    count += 1.0;
                }
            }
        }
        if count == 0.0 {
            continue;
        }
        let target = [sum[0] / count, sum[1] / count];
        let old = points[v];
        points[v] = target;
        let valid = incident[v].iter().all(|&t| {
            let [a, b, c] = triangles[t];
            signed_area(points[a], points[b], points[c]) > 0.0
        });
        if !valid {
            points[v] = old;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_boundary_radii(mesh: &Mesh, g: &OffsetAnnulus) {
        for e in mesh.boundary_edges() {
            for &v in &e.vertices {
                let p = mesh.vertices()[v];
                match e.tag {
                    BoundaryTag::Outer => assert!((libm::hypot(p[0], p[1]) - g.outer_radius).abs() < 1e-12),
                    BoundaryTag::Inner => {
                        let c = g.inner_center;
                        assert!((libm::hypot(p[0] - c[0], p[1] - c[1]) - g.inner_radius).abs() < 1e-12)
                    }
                    BoundaryTag::None => panic!("untagged boundary edge"),
                }
            }
        }
    }

    #[test]
    fn coarse_offset_cylinder_mesh() {
        let g = OffsetAnnulus::default();
        let mesh = build_annulus_mesh(80, 60).unwrap();
        let outer = mesh.boundary_edges().iter().filter(|e| e.tag == BoundaryTag::Outer).count();
        let inner = mesh.boundary_edges().iter().filter(|e| e.tag == BoundaryTag::Inner).count();
        assert_eq!((outer, inner), (80, 60));
        check_boundary_radii(&mesh, &g);
        let rel = (mesh.area() - g.area()).abs() / g.area();
        assert!(rel < 0.02, "area defect {rel}");
        // polygonal approximation is inscribed in the outer circle
        assert!(mesh.area() < PI);
    }

    #[test]
    fn minimal_node_counts() {
        let mesh = build_annulus_mesh(8, 8).unwrap();
        assert_eq!(mesh.boundary_edges().len(), 16);
        check_boundary_radii(&mesh, &OffsetAnnulus::default());
    }

    #[test]
    fn rejects_too_few_nodes() {
        assert!(matches!(build_annulus_mesh(7, 60), Err(MeshError::InvalidArgument(_))));
        assert!(matches!(build_annulus_mesh(80, 3), Err(MeshError::InvalidArgument(_))));
    }

    #[test]
    fn rejects_hole_outside_disk() {
        let g = OffsetAnnulus { outer_radius: 1.0, inner_radius: 0.3, inner_center: [0.8, 0.0] };
        assert!(build_offset_annulus_mesh(&g, 40, 40).is_err());
    }

    #[test]
    fn concentric_annulus_area() {
        let g = OffsetAnnulus { outer_radius: 1.0, inner_radius: 0.5, inner_center: [0.0, 0.0] };
        let mesh = build_offset_annulus_mesh(&g, 64, 32).unwrap();
        let rel = (mesh.area() - g.area()).abs() / g.area();
        assert!(rel < 0.01, "area defect {rel}");
    }
}

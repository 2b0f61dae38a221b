use std::io::Write;

use msm_core::{Field, TaylorHoodSpace};

use super::FormatError;

const VTK_QUADRATIC_TRIANGLE: u8 = 22;

/// Legacy ASCII VTK file on the P2 nodes: quadratic triangles, velocity
/// vectors and pressure scalars (the P1 pressure evaluated at every P2 node).
pub fn write_vtk(
    space: &TaylorHoodSpace,
    velocity: &Field,
    pressure: &Field,
    title: &str,
    mut out: impl Write,
) -> Result<(), FormatError> {
    let nodes = space.velocity().nodes();
    let n2 = space.n_p2();
    let nt = space.mesh().n_triangles();
    let w = velocity.coeffs();

    let mut p_nodes = vec![0.0; n2];
    let pc = pressure.coeffs();
    for t in 0..nt {
        let vd = space.velocity().cell(t);
        let pd = space.pressure().cell(t);
        for k in 0..3 {
            p_nodes[vd[k]] = pc[pd[k]];
        }
        for (k, [a, b]) in msm_core::basis::P2_EDGES.iter().enumerate() {
            p_nodes[vd[3 + k]] = 0.5 * (pc[pd[*a]] + pc[pd[*b]]);
        }
    }

    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{}", title.lines().next().unwrap_or("msm"))?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {n2} double")?;
    for p in nodes {
        writeln!(out, "{:?} {:?} 0", p[0], p[1])?;
    }
    writeln!(out, "CELLS {nt} {}", nt * 7)?;
    for t in 0..nt {
        let d = space.velocity().cell(t);
        writeln!(out, "6 {} {} {} {} {} {}", d[0], d[1], d[2], d[3], d[4], d[5])?;
    }
    writeln!(out, "CELL_TYPES {nt}")?;
    for _ in 0..nt {
        writeln!(out, "{VTK_QUADRATIC_TRIANGLE}")?;
    }
    writeln!(out, "POINT_DATA {n2}")?;
    writeln!(out, "VECTORS velocity double")?;
    for i in 0..n2 {
        writeln!(out, "{:?} {:?} 0", w[i], w[n2 + i])?;
    }
    writeln!(out, "SCALARS pressure double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for p in &p_nodes {
        writeln!(out, "{p:?}")?;
    }
    Ok(())
}

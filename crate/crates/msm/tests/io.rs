use msm::io::{read_diagnostics_csv, read_mesh, write_convergence_csv, write_diagnostics_csv, write_mesh, write_vtk};
use msm::experiments::ConvergenceRow;
use msm::msm_core::diagnostics::DiagnosticsRecord;
use msm::msm_core::mesh::{build_offset_annulus_mesh, build_square_mesh, OffsetAnnulus};
use msm::msm_core::{BoundaryTag, Mesh, TaylorHoodSpace};
use proptest::prelude::*;

fn round_trip(mesh: &Mesh) -> Mesh {
    let mut buf = Vec::new();
    write_mesh(mesh, &mut buf).unwrap();
    read_mesh(buf.as_slice()).unwrap()
}

#[test]
fn mesh_round_trip_is_exact() {
    for mesh in [
        build_square_mesh(7).unwrap(),
        build_offset_annulus_mesh(&OffsetAnnulus::default(), 40, 20).unwrap(),
    ] {
        let back = round_trip(&mesh);
        assert_eq!(back.vertices(), mesh.vertices());
        assert_eq!(back.triangles(), mesh.triangles());
        assert_eq!(back.boundary_edges(), mesh.boundary_edges());
    }
}

#[test]
fn annulus_boundary_tags_survive() {
    let mesh = build_offset_annulus_mesh(&OffsetAnnulus::default(), 30, 12).unwrap();
    let back = round_trip(&mesh);
    let count = |m: &Mesh, tag| m.boundary_edges().iter().filter(|e| e.tag == tag).count();
    assert_eq!(count(&back, BoundaryTag::Outer), 30);
    assert_eq!(count(&back, BoundaryTag::Inner), 12);
}

#[test]
fn malformed_meshes_are_rejected() {
    let good = {
        let mut buf = Vec::new();
        write_mesh(&build_square_mesh(2).unwrap(), &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    };
    assert!(read_mesh(good.as_bytes()).is_ok());
    for bad in [
        good.replace("vertices 4", "vertices 5"),
        good.replace("triangles 2", "triangles x"),
        good.replace("outer", "sideways"),
        good.lines().take(6).collect::<Vec<_>>().join("\n"),
        String::new(),
    ] {
        assert!(read_mesh(bad.as_bytes()).is_err(), "accepted:\n{bad}");
    }
}

fn record(step: usize, values: [f64; 7], flag: bool) -> DiagnosticsRecord {
    DiagnosticsRecord {
        step,
        t: values[0],
        mke: values[1],
        md: values[2],
        msmd: values[3],
        evd: values[4],
        vd: values[5],
        energy_residual: values[6],
        backscatter_flag: flag,
        numerical_diffusion: 0.0,
        divergence_norm: 0.0,
        velocity_norm: 0.0,
    }
}

proptest! {
    #[test]
    fn diagnostics_csv_round_trip(
        rows in prop::collection::vec((0usize..10_000, prop::array::uniform7(-1e12..1e12f64), any::<bool>()), 0..20)
    ) {
        let records: Vec<_> = rows.into_iter().map(|(s, v, f)| record(s, v, f)).collect();
        let mut buf = Vec::new();
        write_diagnostics_csv(&records, &mut buf).unwrap();
        prop_assert_eq!(read_diagnostics_csv(buf.as_slice()).unwrap(), records);
    }
}

#[test]
fn diagnostics_csv_layout() {
    let mut buf = Vec::new();
    write_diagnostics_csv(&[record(3, [0.03, 1.0, -2.0, -3.0, 1.0, 0.5, 1e-16], true)], &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,t,mke,md,msmd,evd,vd,energy_residual,backscatter_flag"));
    let row = lines.next().unwrap();
    assert!(row.starts_with("3,") && row.ends_with(",1"));
    assert!(read_diagnostics_csv("step,t\n1,2\n".as_bytes()).is_err());
}

#[test]
fn convergence_csv_leaves_first_rates_empty() {
    let row = |dt: f64, e: f64, r: Option<f64>| ConvergenceRow {
        dt,
        err_inf0: e,
        err_grad00: e,
        err_p00: e,
        rate_inf0: r,
        rate_grad00: r,
        rate_p00: r,
        max_divergence_ratio: 0.0,
    };
    let mut buf = Vec::new();
    write_convergence_csv(&[row(0.02, 0.4, None), row(0.01, 0.2, Some(1.0))], &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].ends_with(",,,"));
    assert_eq!(lines[2].split(',').nth(4).unwrap().parse::<f64>().unwrap(), 1.0);
}

#[test]
fn vtk_has_consistent_sizes() {
    let space = TaylorHoodSpace::new(build_square_mesh(3).unwrap());
    let w = space.interpolate_velocity(|x, y| [y, -x], 0.5);
    let p = space.interpolate_pressure(|x, _| x, 0.5);
    let mut buf = Vec::new();
    write_vtk(&space, &w, &p, "test", &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let n2 = space.n_p2();
    let nt = space.mesh().n_triangles();
    assert!(text.contains(&format!("POINTS {n2} double")));
    assert!(text.contains(&format!("CELLS {nt} {}", 7 * nt)));
    assert!(text.contains(&format!("POINT_DATA {n2}")));
    // the pressure x is linear, so its value at every P2 node equals x
    let scalars: Vec<f64> = text
        .lines()
        .skip_while(|l| !l.starts_with("LOOKUP_TABLE"))
        .skip(1)
        .map(|l| l.parse().unwrap())
        .collect();
    assert_eq!(scalars.len(), n2);
    for (s, node) in scalars.iter().zip(space.velocity().nodes()) {
        assert!((s - node[0]).abs() < 1e-15);
    }
}

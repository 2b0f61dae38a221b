use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use msm::config::{Experiment, RunConfig};
use msm::experiments::{manufactured_errors, run_manufactured, run_offset_cylinder};
use msm::io::{read_mesh, write_convergence_csv, write_diagnostics_csv, write_mesh, write_vtk};
use msm::msm_core::mesh::{build_annulus_mesh, build_offset_annulus_mesh, build_square_mesh, OffsetAnnulus};
use msm::msm_core::TaylorHoodSpace;
use msm::verification;

#[derive(Parser)]
#[command(name = "msm", version, about = "Modified Smagorinsky model solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or inspect mesh files.
    Mesh {
        #[command(subcommand)]
        action: MeshAction,
    },
    /// Run a single simulation described by a TOML file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Manufactured-solution time convergence study.
    Convergence {
        #[arg(long)]
        config: PathBuf,
    },
    /// Randomised checks of the discrete operators.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MeshKind {
    Square,
    Annulus,
    OffsetAnnulus,
}

#[derive(Subcommand)]
enum MeshAction {
    /// Write a generated mesh.
    Export {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = MeshKind::OffsetAnnulus)]
        kind: MeshKind,
        #[arg(long, default_value_t = 16)]
        n_per_side: usize,
        #[arg(long, default_value_t = 80)]
        n_outer: usize,
        #[arg(long, default_value_t = 60)]
        n_inner: usize,
    },
    /// Read a mesh file and print a summary.
    Import { file: PathBuf },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Mesh { action } => mesh(action),
        Command::Run { config } => run(&config),
        Command::Convergence { config } => convergence(&config),
        Command::Verify { seed, samples } => {
            print!("{}", verification::run_all(seed, samples)?);
            Ok(())
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?))
}

fn mesh(action: MeshAction) -> Result<()> {
    match action {
        MeshAction::Export { file, kind, n_per_side, n_outer, n_inner } => {
            let m = match kind {
                MeshKind::Square => build_square_mesh(n_per_side)?,
                MeshKind::Annulus => build_annulus_mesh(n_outer, n_inner)?,
                MeshKind::OffsetAnnulus => build_offset_annulus_mesh(&OffsetAnnulus::default(), n_outer, n_inner)?,
            };
            let mut out = create(&file)?;
            write_mesh(&m, &mut out)?;
            out.flush()?;
            println!("wrote {} ({} vertices, {} triangles)", file.display(), m.n_vertices(), m.n_triangles());
        }
        MeshAction::Import { file } => {
            let input = File::open(&file).with_context(|| format!("cannot open {}", file.display()))?;
            let m = read_mesh(BufReader::new(input))?;
            println!("vertices: {}", m.n_vertices());
            println!("triangles: {}", m.n_triangles());
            println!("boundary edges: {}", m.boundary_edges().len());
            println!("area: {:.12}", m.area());
            println!("h_min: {:.6e}", m.h_min());
        }
    }
    Ok(())
}

fn run(path: &Path) -> Result<()> {
    let cfg = RunConfig::load(path)?;
    match cfg.experiment {
        Experiment::Manufactured => {
            let dt = cfg.dt.context("`dt` is required for a run")?;
            let space = TaylorHoodSpace::new(build_square_mesh(cfg.mesh.n_per_side)?);
            let row =
                manufactured_errors(&space, cfg.scheme(), dt, cfg.t_final, &cfg.settings(), cfg.solver.build())?;
            println!("dt: {dt}");
            println!("max_t |u - u_h|_L2: {:.6e}", row.err_inf0);
            println!("(sum k |grad(u - u_h)|^2)^1/2: {:.6e}", row.err_grad00);
            println!("(sum k |p - p_h|^2)^1/2: {:.6e}", row.err_p00);
        }
        Experiment::OffsetCylinder => {
            let setup = cfg.cylinder_setup()?;
            let run = run_offset_cylinder(&setup, &cfg.solver)?;
            if let Some(p) = &cfg.output.diagnostics {
                let mut out = create(p)?;
                write_diagnostics_csv(&run.records, &mut out)?;
                out.flush()?;
            }
            if let Some(prefix) = &cfg.output.vtk_prefix {
                for s in &run.snapshots {
                    let t = s.velocity.time();
                    let p = PathBuf::from(format!("{}_{:08.4}.vtk", prefix.display(), t));
                    let mut out = create(&p)?;
                    write_vtk(&run.space, &s.velocity, &s.pressure, &format!("t = {t}"), &mut out)?;
                    out.flush()?;
                }
            }
            let last = run.records.last().context("no time steps taken")?;
            println!("steps: {}", run.records.len());
            println!("final MKE: {:.6e}", last.mke);
            println!("backscatter steps: {}", run.backscatter_steps());
            println!(
                "max |energy residual|: {:.3e}",
                run.records.iter().map(|r| r.energy_residual.abs()).fold(0.0, f64::max)
            );
        }
    }
    Ok(())
}

fn convergence(path: &Path) -> Result<()> {
    let cfg = RunConfig::load(path)?;
    if cfg.experiment != Experiment::Manufactured {
        bail!("convergence studies need experiment = \"manufactured\"");
    }
    let dts = if cfg.convergence.dt_list.is_empty() {
        vec![cfg.dt.context("set `dt` or `convergence.dt_list`")?]
    } else {
        cfg.convergence.dt_list.clone()
    };
    let rows = run_manufactured(cfg.mesh.n_per_side, &dts, cfg.t_final, cfg.scheme(), &cfg.settings(), &cfg.solver)?;
    let mut stdout = std::io::stdout().lock();
    write_convergence_csv(&rows, &mut stdout)?;
    if let Some(p) = &cfg.output.convergence {
        let mut out = create(p)?;
        write_convergence_csv(&rows, &mut out)?;
        out.flush()?;
    }
    Ok(())
}

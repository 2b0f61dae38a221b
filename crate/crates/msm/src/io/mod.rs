//! File formats: plain-text meshes, diagnostics CSV and legacy VTK.

mod csv;
mod mesh_file;
mod vtk;

pub use self::csv::{read_diagnostics_csv, write_convergence_csv, write_diagnostics_csv, DIAGNOSTICS_HEADER};
pub use self::mesh_file::{read_mesh, write_mesh};
pub use self::vtk::write_vtk;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Mesh(#[from] msm_core::MeshError),
}

pub(crate) fn parse_error(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse { line, message: message.into() }
}

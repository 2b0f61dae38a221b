//! Driver for the modified Smagorinsky model: sparse direct solves, the
//! built-in experiments, verification checks, file formats and the `msm`
//! command-line tool. The numerical kernels live in `msm-core`.

pub mod config;
pub mod direct;
pub mod experiments;
pub mod io;
pub mod verification;

pub use msm_core;

use std::io::{BufRead, Write};

use msm_core::diagnostics::DiagnosticsRecord;

use super::{parse_error, FormatError};
use crate::experiments::ConvergenceRow;

pub const DIAGNOSTICS_HEADER: &str = "step,t,mke,md,msmd,evd,vd,energy_residual,backscatter_flag";

/// Writes the diagnostics series, 17 significant digits per value and the
/// backscatter flag as 0/1.
pub fn write_diagnostics_csv(records: &[DiagnosticsRecord], mut out: impl Write) -> Result<(), FormatError> {
    writeln!(out, "{DIAGNOSTICS_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            r.step,
            r.t,
            r.mke,
            r.md,
            r.msmd,
            r.evd,
            r.vd,
            r.energy_residual,
            u8::from(r.backscatter_flag)
        )?;
    }
    Ok(())
}

/// Reads a file written by [`write_diagnostics_csv`]. Fields not stored in
/// the file (numerical diffusion, divergence and velocity norms) come back
/// as zero.
pub fn read_diagnostics_csv(input: impl BufRead) -> Result<Vec<DiagnosticsRecord>, FormatError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != DIAGNOSTICS_HEADER {
                return Err(parse_error(1, "unexpected header"));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 9 {
            return Err(parse_error(i + 1, format!("expected 9 columns, found {}", f.len())));
        }
        let real = |k: usize| f[k].parse::<f64>().map_err(|_| parse_error(i + 1, format!("bad number `{}`", f[k])));
        out.push(DiagnosticsRecord {
            step: f[0].parse().map_err(|_| parse_error(i + 1, "bad step"))?,
            t: real(1)?,
            mke: real(2)?,
            md: real(3)?,
            msmd: real(4)?,
            evd: real(5)?,
            vd: real(6)?,
            energy_residual: real(7)?,
            backscatter_flag: match f[8] {
                "1" => true,
                "0" => false,
                other => return Err(parse_error(i + 1, format!("bad flag `{other}`"))),
            },
            numerical_diffusion: 0.0,
            divergence_norm: 0.0,
            velocity_norm: 0.0,
        });
    }
    Ok(out)
}

/// Convergence table; rate columns are empty on the first row.
pub fn write_convergence_csv(rows: &[ConvergenceRow], mut out: impl Write) -> Result<(), FormatError> {
    writeln!(out, "dt,err_inf0,err_grad00,err_p00,rate_inf0,rate_grad00,rate_p00")?;
    let fmt = |r: Option<f64>| r.map(|v| format!("{v:.16e}")).unwrap_or_default();
    for r in rows {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{},{},{}",
            r.dt,
            r.err_inf0,
            r.err_grad00,
            r.err_p00,
            fmt(r.rate_inf0),
            fmt(r.rate_grad00),
            fmt(r.rate_p00)
        )?;
    }
    Ok(())
}

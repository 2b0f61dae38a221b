use crate::error::ParamError;

/// Constants of the modified Smagorinsky model and of the time discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Kinematic viscosity ν.
    pub nu: f64,
    /// Smagorinsky constant C_s.
    pub c_s: f64,
    /// Kolmogorov-Prandtl constant μ.
    pub mu: f64,
    /// Filter width δ, normally the shortest mesh edge.
    pub delta: f64,
    /// Time step k.
    pub dt: f64,
}

impl ModelParams {
    pub fn new(nu: f64, c_s: f64, mu: f64, delta: f64, dt: f64) -> Result<Self, ParamError> {
        let p = Self { nu, c_s, mu, delta, dt };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        for (name, value) in [
            ("nu", self.nu),
            ("c_s", self.c_s),
            ("mu", self.mu),
            ("delta", self.delta),
            ("dt", self.dt),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ParamError { name, value });
            }
        }
        Ok(())
    }

    pub fn with_dt(self, dt: f64) -> Self {
        Self { dt, ..self }
    }

    /// Coefficient `(C_s δ)²` of the eddy viscosity `ν_T = (C_s δ)² |∇w|`.
    pub fn eddy_coefficient(&self) -> f64 {
        let l = self.c_s * self.delta;
        l * l
    }

    /// Coefficient `C_s⁴ δ² / μ²` of the dispersive term `−(C_s⁴ δ²/μ²) Δw_t`.
    pub fn dispersion_coefficient(&self) -> f64 {
        let c2 = self.c_s * self.c_s;
        c2 * c2 * self.delta * self.delta / (self.mu * self.mu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients() {
        let p = ModelParams::new(1e-4, 0.1, 0.4, 0.1, 0.01).unwrap();
        assert!((p.eddy_coefficient() - 1e-4).abs() < 1e-18);
        assert!((p.dispersion_coefficient() - 1e-4 * 1e-2 / 0.16).abs() < 1e-18);
    }

    #[test]
    fn rejects_nonpositive() {
        assert_eq!(ModelParams::new(0.0, 0.1, 0.4, 0.1, 0.01).unwrap_err().name, "nu");
        assert_eq!(ModelParams::new(1.0, 0.1, 0.4, 0.1, -1.0).unwrap_err().name, "dt");
        assert!(ModelParams::new(1.0, f64::NAN, 0.4, 0.1, 1.0).is_err());
    }
}

use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    /// P2 vector field, x-block then y-block.
    Velocity,
    /// P1 scalar field.
    Pressure,
}

/// Coefficients of a discrete function at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    kind: FieldKind,
    coeffs: Vec<f64>,
    time: f64,
}

impl Field {
    pub fn new(kind: FieldKind, coeffs: Vec<f64>, time: f64) -> Self {
        Self { kind, coeffs, time }
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `a·self + b·other`, keeping this field's kind and time.
    pub fn combine(&self, a: f64, other: &Field, b: f64) -> Field {
        assert_eq!(self.kind, other.kind);
        assert_eq!(self.len(), other.len());
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| a * x + b * y).collect();
        Field { kind: self.kind, coeffs, time: self.time }
    }

    pub fn scaled(&self, a: f64) -> Field {
        Field { kind: self.kind, coeffs: self.coeffs.iter().map(|x| a * x).collect(), time: self.time }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }
}

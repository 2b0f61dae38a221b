//! Symmetric quadrature rules on the reference triangle
//! `{(ξ, η) : ξ, η ≥ 0, ξ + η ≤ 1}`.

use alloc::vec::Vec;

use crate::error::QuadratureError;

/// Degree used for every volume integral in assembly and diagnostics.
pub const DEFAULT_DEGREE: usize = 5;

/// Points in barycentric coordinates `(λ₀, λ₁, λ₂)` with `ξ = λ₁`, `η = λ₂`.
/// Weights sum to the reference area 1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    degree: usize,
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Reference-triangle integral of `f(ξ, η)`.
    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p[1], p[2])).sum()
    }

    fn push_centroid(&mut self, w: f64) {
        let third = 1.0 / 3.0;
        self.points.push([third, third, third]);
        self.weights.push(w);
    }

    fn push_s21(&mut self, a: f64, w: f64) {
        let b = 1.0 - 2.0 * a;
        for p in [[a, a, b], [a, b, a], [b, a, a]] {
            self.points.push(p);
            self.weights.push(w);
        }
    }

    fn push_s111(&mut self, a: f64, b: f64, w: f64) {
        let c = 1.0 - a - b;
        for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
            self.points.push(p);
            self.weights.push(w);
        }
    }
}

/// Rule exact for all polynomials of total degree `degree` ∈ {4, 5, 6}.
///
/// Degree 5 is the 7-point Radon rule; degrees 4 and 6 are the 6- and
/// 12-point Dunavant rules, with nodes refined to full double precision.
pub fn make_quadrature(degree: usize) -> Result<QuadratureRule, QuadratureError> {
    let mut rule = QuadratureRule { degree, points: Vec::new(), weights: Vec::new() };
    match degree {
        4 => {
            rule.push_s21(0.445_948_490_915_964_878_07, 0.111_690_794_839_005_626_62);
            rule.push_s21(0.091_576_213_509_770_918_548, 0.054_975_871_827_661_040_049);
        }
        5 => {
            let s15 = libm::sqrt(15.0);
            rule.push_centroid(9.0 / 80.0);
            rule.push_s21((6.0 - s15) / 21.0, (155.0 - s15) / 2400.0);
            rule.push_s21((6.0 + s15) / 21.0, (155.0 + s15) / 2400.0);
        }
        6 => {
            rule.push_s21(0.249_286_745_170_910_421_29, 0.058_393_137_863_189_683_013);
            rule.push_s21(0.063_089_014_491_502_228_34, 0.025_422_453_185_103_408_46);
            rule.push_s111(
                0.053_145_049_844_816_947_353,
                0.310_352_451_033_784_405_42,
                0.041_425_537_809_186_787_597,
            );
        }
        _ => return Err(QuadratureError(degree)),
    }
    Ok(rule)
}

//! Projective poles and the chordal metric.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Which of the two vector components a pole is assigned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    One,
    Two,
}

impl Component {
    pub fn from_label(label: u8) -> Result<Self> {
        match label {
            1 => Ok(Component::One),
            2 => Ok(Component::Two),
            other => Err(Error::LengthMismatch(format!(
                "component label must be 1 or 2, got {other}"
            ))),
        }
    }

    pub fn label(self) -> u8 {
        match self {
            Component::One => 1,
            Component::Two => 2,
        }
    }

    /// 0-based index into a 2-vector.
    pub fn idx(self) -> usize {
        match self {
            Component::One => 0,
            Component::Two => 1,
        }
    }

    pub fn other(self) -> Component {
        match self {
            Component::One => Component::Two,
            Component::Two => Component::One,
        }
    }
}

/// A pole as a projective pair (nu, mu) with value nu/mu; mu = 0 encodes the
/// pole at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectivePole {
    pub nu: Complex64,
    pub mu: Complex64,
}

impl ProjectivePole {
    pub fn new(nu: Complex64, mu: Complex64) -> Result<Self> {
        if nu == Complex64::ZERO && mu == Complex64::ZERO {
            return Err(Error::InvalidPole);
        }
        Ok(Self { nu, mu })
    }

    /// Finite pole with value p, represented as (p, 1).
    pub fn finite(p: Complex64) -> Self {
        Self {
            nu: p,
            mu: Complex64::ONE,
        }
    }

    /// Canonical pole at infinity: (nu, mu) = (-1, 0).
    pub fn infinity() -> Self {
        Self {
            nu: Complex64::new(-1.0, 0.0),
            mu: Complex64::ZERO,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.mu == Complex64::ZERO
    }

    /// The pole value nu/mu, or None for the pole at infinity.
    pub fn value(&self) -> Option<Complex64> {
        if self.is_infinite() {
            None
        } else {
            Some(self.nu / self.mu)
        }
    }

    /// Chordal distance to another projective point:
    /// |nu1 mu2 - nu2 mu1| / sqrt((|nu1|^2 + |mu1|^2)(|nu2|^2 + |mu2|^2)).
    pub fn chordal_distance(&self, other: &ProjectivePole) -> f64 {
        chordal(self.nu, self.mu, other.nu, other.mu)
    }

    /// Chordal distance to the projective point given by a ratio nu/mu of
    /// pencil entries, without forming the quotient.
    pub fn chordal_distance_to_ratio(&self, nu: Complex64, mu: Complex64) -> f64 {
        chordal(self.nu, self.mu, nu, mu)
    }
}

pub fn chordal(nu1: Complex64, mu1: Complex64, nu2: Complex64, mu2: Complex64) -> f64 {
    let num = (nu1 * mu2 - nu2 * mu1).norm();
    let d1 = (nu1.norm_sqr() + mu1.norm_sqr()).sqrt();
    let d2 = (nu2.norm_sqr() + mu2.norm_sqr()).sqrt();
    if d1 == 0.0 || d2 == 0.0 {
        return f64::INFINITY;
    }
    num / (d1 * d2)
}

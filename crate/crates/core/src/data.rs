//! Named library of initial data.

use alloc::format;

use crate::algebra::Point;
use crate::error::{Error, Result};
use crate::math;

/// Initial datum `ψ`. Every member is constant outside a compact set of the
/// horizontal variables; [`InitialData::far_field`] is that constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialData {
    Constant { value: f64 },
    /// `scale · min(|p_h|² − radius², cap)`: zero level set is the vertical
    /// cylinder `|p_h| = radius`.
    QuadraticCylinder { radius: f64, cap: f64, scale: f64 },
    /// `min(|p_h|² + offset, cap)`.
    CappedQuadratic { cap: f64, offset: f64 },
    /// `A · exp(1 − 1/(1 − |p|²/R²))` for `|p| < R`, zero outside.
    SmoothBump { amplitude: f64, radius: f64 },
}

impl InitialData {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(format!("initial data: {msg}")));
        match *self {
            Self::Constant { value } if !value.is_finite() => bad("value must be finite"),
            Self::QuadraticCylinder { radius, cap, scale } => {
                if !(radius > 0.0) || !radius.is_finite() {
                    bad("radius must be positive")
                } else if !(cap > 0.0) || !cap.is_finite() {
                    bad("cap must be positive")
                } else if !(scale > 0.0) || !scale.is_finite() {
                    bad("scale must be positive")
                } else {
                    Ok(())
                }
            }
            Self::CappedQuadratic { cap, offset } => {
                if !cap.is_finite() || !offset.is_finite() || cap <= offset {
                    bad("need finite cap > offset")
                } else {
                    Ok(())
                }
            }
            Self::SmoothBump { amplitude, radius } => {
                if !amplitude.is_finite() || !(radius > 0.0) || !radius.is_finite() {
                    bad("need finite amplitude and positive radius")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// `ψ(p)`; `m1` is the number of horizontal coordinates.
    pub fn evaluate(&self, p: &Point, m1: usize) -> f64 {
        let r2: f64 = p.coords()[..m1].iter().map(|x| x * x).sum();
        match *self {
            Self::Constant { value } => value,
            Self::QuadraticCylinder { radius, cap, scale } => scale * (r2 - radius * radius).min(cap),
            Self::CappedQuadratic { cap, offset } => (r2 + offset).min(cap),
            Self::SmoothBump { amplitude, radius } => {
                let full: f64 = p.coords().iter().map(|x| x * x).sum();
                let s = full / (radius * radius);
                if s >= 1.0 {
                    0.0
                } else {
                    amplitude * math::exp(1.0 - 1.0 / (1.0 - s))
                }
            }
        }
    }

    pub fn far_field(&self) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::QuadraticCylinder { cap, scale, .. } => scale * cap,
            Self::CappedQuadratic { cap, .. } => cap,
            Self::SmoothBump { .. } => 0.0,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "constant",
            Self::QuadraticCylinder { .. } => "quadratic-cylinder",
            Self::CappedQuadratic { .. } => "capped-quadratic",
            Self::SmoothBump { .. } => "smooth-bump",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cylinder_ignores_vertical_coordinate() {
        let d = InitialData::QuadraticCylinder { radius: 1.0, cap: 1.25, scale: 1.0 };
        let a = d.evaluate(&Point::from_slice(&[0.5, 0.5, 0.0]), 2);
        let b = d.evaluate(&Point::from_slice(&[0.5, 0.5, 1.3]), 2);
        assert_eq!(a, -0.5);
        assert_eq!(a, b);
        assert_eq!(d.evaluate(&Point::from_slice(&[2.0, 0.0, 0.0]), 2), d.far_field());
    }

    #[test]
    fn bump_vanishes_outside_radius() {
        let d = InitialData::SmoothBump { amplitude: 2.0, radius: 1.0 };
        assert_eq!(d.evaluate(&Point::from_slice(&[0.0, 0.0]), 2), 2.0);
        assert_eq!(d.evaluate(&Point::from_slice(&[1.0, 0.1]), 2), 0.0);
    }

    #[test]
    fn validation() {
        assert!(InitialData::CappedQuadratic { cap: 0.0, offset: 1.0 }.validate().is_err());
        assert!(InitialData::SmoothBump { amplitude: 1.0, radius: -1.0 }.validate().is_err());
        assert!(InitialData::Constant { value: 2.0 }.validate().is_ok());
    }
}

//! Closed-form optimal drops for the half-plane, the sector and the strip.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};

/// `J0(x)` from its power series; accurate for `|x| < 10`.
pub fn bessel_j0(x: f64) -> f64 {
    let q = -x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        term *= q / (k * k) as f64;
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// First positive zero of `J0`, by bisection on `(2.4, 2.41)`.
pub fn bessel_j0_first_zero() -> f64 {
    let (mut lo, mut hi) = (2.4, 2.41);
    let flo = bessel_j0(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if bessel_j0(mid).signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Shape of a reference optimum.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum ReferenceShape {
    /// Half-disc centered on the container wall.
    HalfDisc { radius: f64 },
    /// Sector of the container truncated at `radius` from the apex.
    TruncatedSector { alpha: f64, radius: f64 },
    /// Full-width rectangle of the given length.
    Rectangle { length: f64, width: f64 },
}

impl ReferenceShape {
    pub fn area(&self) -> f64 {
        match *self {
            ReferenceShape::HalfDisc { radius } => FRAC_PI_2 * radius * radius,
            ReferenceShape::TruncatedSector { alpha, radius } => alpha * radius * radius,
            ReferenceShape::Rectangle { length, width } => length * width,
        }
    }
}

/// Which strip branch the known theory settles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StripRegime {
    /// `c <= 2/pi`: the half-disc is optimal.
    HalfDiscProved,
    /// `c >= 2 sqrt(2) pi`: the rectangle is optimal.
    RectangleProved,
    /// In between; only the numeric comparison of the two branches is available.
    Unresolved,
}

impl StripRegime {
    pub fn as_str(self) -> &'static str {
        match self {
            StripRegime::HalfDiscProved => "half_disc_proved",
            StripRegime::RectangleProved => "rectangle_proved",
            StripRegime::Unresolved => "unresolved",
        }
    }
}

/// Reference optimum for a given volume.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReferenceSolution {
    pub volume: f64,
    pub lambda: f64,
    pub shape: ReferenceShape,
}

/// Both strip branches plus the crossover.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StripReference {
    pub volume: f64,
    pub half_disc: ReferenceSolution,
    pub rectangle: ReferenceSolution,
    /// Volume where the two branches give the same eigenvalue.
    pub crossover: f64,
    pub regime: StripRegime,
}

impl StripReference {
    /// The branch with the smaller eigenvalue (rectangle on ties).
    pub fn winner(&self) -> &ReferenceSolution {
        if self.half_disc.lambda < self.rectangle.lambda {
            &self.half_disc
        } else {
            &self.rectangle
        }
    }

    pub fn winner_name(&self) -> &'static str {
        if self.half_disc.lambda < self.rectangle.lambda {
            "half_disc"
        } else {
            "rectangle"
        }
    }
}

fn check_volume(c: f64) -> Result<()> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Validation("volume must be positive".into()));
    }
    Ok(())
}

/// Half-disc of area `c` on the half-plane wall.
pub fn half_plane(c: f64) -> Result<ReferenceSolution> {
    check_volume(c)?;
    let j = bessel_j0_first_zero();
    let r = (2.0 * c / PI).sqrt();
    Ok(ReferenceSolution {
        volume: c,
        lambda: j * j / (r * r),
        shape: ReferenceShape::HalfDisc { radius: r },
    })
}

/// Truncated sector `{|x| < r0}` of area `c` in the sector of half-angle `alpha`.
pub fn sector(alpha: f64, c: f64) -> Result<ReferenceSolution> {
    check_volume(c)?;
    if !(alpha > 0.0 && alpha <= FRAC_PI_2 * (1.0 + f64::EPSILON)) {
        return Err(Error::Validation("sector angle must lie in (0, pi/2]".into()));
    }
    let j = bessel_j0_first_zero();
    let r0 = (c / alpha).sqrt();
    Ok(ReferenceSolution {
        volume: c,
        lambda: (j / r0).powi(2),
        shape: ReferenceShape::TruncatedSector { alpha, radius: r0 },
    })
}

/// Volume at which the half-disc and rectangle branches cross in the unit strip.
pub fn strip_crossover() -> f64 {
    let j = bessel_j0_first_zero();
    2.0 * PI / (j * j)
}

/// Half-disc and rectangle branches in the strip of unit width.
pub fn strip(c: f64) -> Result<StripReference> {
    strip_with_width(1.0, c)
}

/// Half-disc and rectangle branches in a strip of width `w`.
pub fn strip_with_width(w: f64, c: f64) -> Result<StripReference> {
    check_volume(c)?;
    if !(w > 0.0) || !w.is_finite() {
        return Err(Error::Validation("strip width must be positive".into()));
    }
    let j = bessel_j0_first_zero();
    let r = (2.0 * c / PI).sqrt();
    let w2 = w * w;
    let regime = if c <= 2.0 * w2 / PI {
        StripRegime::HalfDiscProved
    } else if c >= 2.0 * 2f64.sqrt() * PI * w2 {
        StripRegime::RectangleProved
    } else {
        StripRegime::Unresolved
    };
    Ok(StripReference {
        volume: c,
        half_disc: ReferenceSolution {
            volume: c,
            lambda: PI * j * j / (2.0 * c),
            shape: ReferenceShape::HalfDisc { radius: r },
        },
        rectangle: ReferenceSolution {
            volume: c,
            lambda: PI * PI * w2 / (c * c),
            shape: ReferenceShape::Rectangle {
                length: c / w,
                width: w,
            },
        },
        crossover: strip_crossover() * w2,
        regime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_root() {
        let j = bessel_j0_first_zero();
        assert!((j - 2.404825557695773).abs() < 1e-12);
        assert!(bessel_j0(j).abs() < 1e-12);
        assert!(bessel_j0(2.4) > 0.0 && bessel_j0(2.41) < 0.0);
        assert!((bessel_j0(0.0) - 1.0).abs() < 1e-16);
    }

    #[test]
    fn worked_values() {
        let j = bessel_j0_first_zero();
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        let hp = half_plane(1.0).unwrap();
        assert!((hp.lambda - PI * j * j / 2.0).abs() < 1e-12);
        // commonly quoted six-digit values agree to about 3e-6
        assert!(rel(hp.lambda, 9.084233) < 1e-5);
        assert!(matches!(hp.shape, ReferenceShape::HalfDisc { radius } if (radius - 0.797885).abs() < 1e-6));
        let s = sector(PI / 4.0, 1.0).unwrap();
        assert!((s.lambda - PI / 4.0 * j * j).abs() < 1e-12);
        assert!(rel(s.lambda, 4.542117) < 1e-5);
        assert!(matches!(s.shape, ReferenceShape::TruncatedSector { radius, .. } if (radius - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-12));
        let st = strip(4.0).unwrap();
        assert!((st.rectangle.lambda - 0.616850).abs() < 5e-7);
        assert!(rel(st.half_disc.lambda, 2.271058) < 1e-5);
        assert_eq!(st.regime, StripRegime::Unresolved);
        assert_eq!(st.winner_name(), "rectangle");
    }

    #[test]
    fn crossover_and_regimes() {
        let cs = strip_crossover();
        assert!((cs - 1.086457).abs() < 1e-6);
        assert!((cs - 1.086427).abs() / cs < 1e-4);
        let at = strip(cs).unwrap();
        assert!((at.half_disc.lambda - at.rectangle.lambda).abs() < 1e-12);
        assert_eq!(strip(0.5).unwrap().regime, StripRegime::HalfDiscProved);
        assert_eq!(strip(9.0).unwrap().regime, StripRegime::RectangleProved);
        assert_eq!(strip(0.5).unwrap().winner_name(), "half_disc");
    }

    #[test]
    fn sector_meets_half_plane() {
        let a = sector(FRAC_PI_2, 1.0).unwrap().lambda;
        let b = half_plane(1.0).unwrap().lambda;
        assert!((a - b).abs() < 1e-12);
        assert!(sector(2.0, 1.0).is_err());
        assert!(half_plane(0.0).is_err());
    }

    #[test]
    fn shape_areas_match_volume() {
        for c in [0.3, 1.0, 2.7] {
            assert!((half_plane(c).unwrap().shape.area() - c).abs() < 1e-12);
            assert!((sector(0.7, c).unwrap().shape.area() - c).abs() < 1e-12);
            let st = strip(c).unwrap();
            assert!((st.half_disc.shape.area() - c).abs() < 1e-12);
            assert!((st.rectangle.shape.area() - c).abs() < 1e-12);
        }
    }

    #[test]
    fn dimensional_scaling() {
        for s in [0.5, 2.0] {
            let c = 1.3;
            let hp = half_plane(s * s * c).unwrap().lambda * s * s;
            assert!((hp - half_plane(c).unwrap().lambda).abs() < 1e-10);
            let se = sector(0.4, s * s * c).unwrap().lambda * s * s;
            assert!((se - sector(0.4, c).unwrap().lambda).abs() < 1e-10);
            // the strip scales together with its width
            let a = strip_with_width(s, s * s * c).unwrap();
            let b = strip(c).unwrap();
            assert!((a.half_disc.lambda * s * s - b.half_disc.lambda).abs() < 1e-10);
            assert!((a.rectangle.lambda * s * s - b.rectangle.lambda).abs() < 1e-10);
            assert!((a.crossover - s * s * b.crossover).abs() < 1e-12);
            assert_eq!(a.regime, b.regime);
        }
    }
}

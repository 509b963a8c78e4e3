//! Exact primitives on the Poincaré half-plane model of the hyperbolic plane.
//!
//! Points are `x + iy` with `y > 0` and the metric is `(dx² + dy²) / y²`.
//! Rotations about the basepoint `i` are parameterized by an angle in
//! `[0, 2π)` through the half-angle SL2 matrix
//! `[[cos(θ/2), sin(θ/2)], [-sin(θ/2), cos(θ/2)]]`, so a full turn of `θ`
//! sweeps every geometric rotation about `i` exactly once.

use std::f64::consts::TAU;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("half-plane point requires finite x and y > 0, got ({x}, {y})")]
    InvalidPoint { x: f64, y: f64 },
    #[error("polar radius must be finite and non-negative, got {0}")]
    InvalidRadius(f64),
    #[error("angle must be finite, got {0}")]
    InvalidAngle(f64),
}

/// A point `x + iy` of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HPoint {
    x: f64,
    y: f64,
}

impl HPoint {
    /// The basepoint `i`, fixed by every [`Rotation`].
    pub const I: HPoint = HPoint { x: 0.0, y: 1.0 };

    pub fn new(x: f64, y: f64) -> Result<Self, GeomError> {
        if x.is_finite() && y.is_finite() && y > 0.0 {
            Ok(Self { x, y })
        } else {
            Err(GeomError::InvalidPoint { x, y })
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn from_complex(z: Complex64) -> Result<Self, GeomError> {
        Self::new(z.re, z.im)
    }
}

fn reduce_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Geodesic polar coordinates about `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarCoord {
    r: f64,
    theta: f64,
}

impl PolarCoord {
    pub fn new(r: f64, theta: f64) -> Result<Self, GeomError> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(GeomError::InvalidRadius(r));
        }
        if !theta.is_finite() {
            return Err(GeomError::InvalidAngle(theta));
        }
        Ok(Self {
            r,
            theta: reduce_angle(theta),
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// An element of the stabilizer of `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    theta: f64,
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation { theta: 0.0 };

    /// Builds the rotation for `theta`, reduced mod 2π.
    ///
    /// Non-finite angles collapse to the identity.
    pub fn new(theta: f64) -> Self {
        if theta.is_finite() {
            Self {
                theta: reduce_angle(theta),
            }
        } else {
            Self::IDENTITY
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Entries `(a, b, c, d)` of the SL2 matrix acting by `z ↦ (az + b)/(cz + d)`.
    #[inline]
    pub fn matrix(&self) -> (f64, f64, f64, f64) {
        let (s, c) = (0.5 * self.theta).sin_cos();
        (c, s, -s, c)
    }

    pub fn inverse(&self) -> Rotation {
        Rotation::new(-self.theta)
    }
}

/// Tangent vector given by its length and angle in the frame transported from `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    pub magnitude: f64,
    pub direction: f64,
}

impl TangentVector {
    pub fn new(magnitude: f64, direction: f64) -> Self {
        Self {
            magnitude,
            direction,
        }
    }

    /// Polar form of the Cartesian components `(v1, v2)`.
    pub fn from_components(v1: f64, v2: f64) -> Self {
        Self {
            magnitude: v1.hypot(v2),
            direction: v2.atan2(v1),
        }
    }
}

/// Hyperbolic distance.
///
/// Evaluated as `2 asinh(|a - b| / (2 sqrt(a.y b.y)))`, which equals
/// `arccosh(1 + |a - b|² / (2 a.y b.y))` and stays accurate for nearby points.
pub fn dist(a: HPoint, b: HPoint) -> f64 {
    let chord = (a.x - b.x).hypot(a.y - b.y);
    2.0 * (chord / (2.0 * (a.y * b.y).sqrt())).asinh()
}

/// `cosh(dist(a, b))` without going through the distance.
pub fn cosh_dist(a: HPoint, b: HPoint) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    1.0 + (dx * dx + dy * dy) / (2.0 * a.y * b.y)
}

pub fn rotate(k: Rotation, z: HPoint) -> HPoint {
    let (a, b, c, d) = k.matrix();
    // (az + b)/(cz + d) with the denominator multiplied through by its conjugate
    let den_re = c * z.x + d;
    let den_im = c * z.y;
    let den = den_re * den_re + den_im * den_im;
    let num_re = a * z.x + b;
    let num_im = a * z.y;
    let x = (num_re * den_re + num_im * den_im) / den;
    // det = 1 so the imaginary part reduces to y / |cz + d|²
    let y = z.y / den;
    HPoint { x, y }
}

/// Imaginary part of `rotate(k, z)`.
#[inline]
pub fn im_rotated(k: Rotation, z: HPoint) -> f64 {
    let (_, _, c, d) = k.matrix();
    let re = c * z.x + d;
    let im = c * z.y;
    z.y / (re * re + im * im)
}

pub fn polar_to_point(p: PolarCoord) -> HPoint {
    let up = HPoint {
        x: 0.0,
        y: p.r.exp(),
    };
    rotate(Rotation::new(p.theta), up)
}

/// Geodesic polar coordinates of `z` about `i`, inverting [`polar_to_point`].
pub fn point_to_polar(z: HPoint) -> PolarCoord {
    let r = dist(HPoint::I, z);
    if r == 0.0 {
        return PolarCoord { r, theta: 0.0 };
    }
    // The Cayley map sends i·e^r onto the positive real axis and each rotation
    // to w ↦ e^{iθ} w, so θ is the disk argument.
    let i = Complex64::i();
    let w = (z.to_complex() - i) / (z.to_complex() + i);
    PolarCoord {
        r,
        theta: reduce_angle(w.arg()),
    }
}

/// Exponential map at `base`.
///
/// The affine isometry `z ↦ base.y · z + base.x` carries `i` to `base`, so the
/// result is that isometry applied to `polar_to_point(magnitude, direction)`.
pub fn exp_map(base: HPoint, v: TangentVector) -> HPoint {
    let direction = if v.direction.is_finite() {
        v.direction
    } else {
        0.0
    };
    let at_i = polar_to_point(PolarCoord {
        r: v.magnitude.max(0.0),
        theta: reduce_angle(direction),
    });
    HPoint {
        x: base.x + base.y * at_i.x,
        y: base.y * at_i.y,
    }
}

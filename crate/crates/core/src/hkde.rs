//! Kernel density estimation on the hyperbolic plane in the Helgason-Fourier
//! domain.
//!
//! For a point cloud `Z_1..Z_n` the transform of the empirical measure at
//! spectral parameter `s = 1/2 + it` and rotation angle `θ` is
//! `(1/n) Σ Im(k_θ Z_j)^{1/2 - it}`. The kernel is the heat kernel at time
//! `h`, whose transform is the real multiplier `exp(-h (t² + 1/4))`, so the
//! estimator's transform is a pointwise product and never needs a spatial
//! convolution.
//!
//! The inverse transform integrates against `t tanh(πt) / (8π²) dθ dt` over
//! `t ∈ ℝ`, `θ ∈ [0, 2π)`. The same weight turns squared transform
//! differences into squared L2 distances between densities.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::hgeom::{im_rotated, HPoint, Rotation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HkdeError {
    #[error("density estimate needs at least one center")]
    EmptyModel,
    #[error("bandwidth must be finite and > 0, got {0}")]
    Bandwidth(f64),
    #[error(
        "quadrature needs truncation > 0 and at least one pair, got T={truncation}, m={pairs}"
    )]
    Quadrature { truncation: f64, pairs: usize },
    #[error("sample size must be at least 1")]
    EmptySample,
}

/// Kernel density estimate: centers plus heat-kernel bandwidth `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    centers: Vec<HPoint>,
    h: f64,
}

impl DensityEstimate {
    pub fn new(centers: Vec<HPoint>, h: f64) -> Result<Self, HkdeError> {
        if centers.is_empty() {
            return Err(HkdeError::EmptyModel);
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(HkdeError::Bandwidth(h));
        }
        Ok(Self { centers, h })
    }

    /// Estimate with the default bandwidth for its sample size.
    pub fn with_default_bandwidth(centers: Vec<HPoint>) -> Result<Self, HkdeError> {
        let h = bandwidth_default(centers.len())?;
        Self::new(centers, h)
    }

    pub fn centers(&self) -> &[HPoint] {
        &self.centers
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

/// Spectral coordinate `(t, θ)` with `s = 1/2 + it`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub t: f64,
    pub rotation: Rotation,
}

impl SpectralPoint {
    pub fn new(t: f64, theta: f64) -> Self {
        Self {
            t,
            rotation: Rotation::new(theta),
        }
    }

    pub fn theta(&self) -> f64 {
        self.rotation.theta()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    truncation: f64,
    pairs: usize,
}

impl QuadratureSpec {
    pub const DEFAULT_PAIRS: usize = 100;

    pub fn new(truncation: f64, pairs: usize) -> Result<Self, HkdeError> {
        if truncation.is_finite() && truncation > 0.0 && pairs >= 1 {
            Ok(Self { truncation, pairs })
        } else {
            Err(HkdeError::Quadrature { truncation, pairs })
        }
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn pairs(&self) -> usize {
        self.pairs
    }

    /// Draws `pairs` uniform points of `[-T, T] × [0, 2π)`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> QuadraturePoints {
        let t = self.truncation;
        let points = (0..self.pairs)
            .map(|_| {
                let tt = rng.random_range(-t..=t);
                let theta = rng.random_range(0.0..TAU);
                SpectralPoint::new(tt, theta)
            })
            .collect();
        QuadraturePoints {
            truncation: t,
            points,
        }
    }
}

/// A fixed set of Monte Carlo nodes, shared by every distance in one comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraturePoints {
    truncation: f64,
    points: Vec<SpectralPoint>,
}

impl QuadraturePoints {
    pub fn new(truncation: f64, points: Vec<SpectralPoint>) -> Result<Self, HkdeError> {
        QuadratureSpec::new(truncation, points.len())?;
        Ok(Self { truncation, points })
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn points(&self) -> &[SpectralPoint] {
        &self.points
    }

    /// Lebesgue measure of `[-T, T] × [0, 2π)`.
    pub fn domain_measure(&self) -> f64 {
        4.0 * PI * self.truncation
    }
}

/// Plancherel density `t tanh(πt) / (8π²)` for the `dθ dt` measure.
#[inline]
pub fn plancherel_weight(t: f64) -> f64 {
    t * (PI * t).tanh() / (8.0 * PI * PI)
}

/// Transform of the empirical measure of `centers` at `p`.
///
/// Panics if `centers` is empty.
pub fn helgason_empirical(centers: &[HPoint], p: SpectralPoint) -> Complex64 {
    assert!(
        !centers.is_empty(),
        "empirical transform of an empty sample"
    );
    let mut sum = Complex64::new(0.0, 0.0);
    for &z in centers {
        let ln_y = im_rotated(p.rotation, z).ln();
        // y^{1/2 - it} = exp(ln y / 2) · exp(-i t ln y)
        let modulus = (0.5 * ln_y).exp();
        let (s, c) = (p.t * ln_y).sin_cos();
        sum += Complex64::new(modulus * c, -modulus * s);
    }
    sum / centers.len() as f64
}

/// Heat-kernel multiplier `exp(-h (t² + 1/4))`.
#[inline]
pub fn kernel_multiplier(h: f64, t: f64) -> f64 {
    (-h * (t * t + 0.25)).exp()
}

pub fn helgason_kde(model: &DensityEstimate, p: SpectralPoint) -> Complex64 {
    helgason_empirical(&model.centers, p) * kernel_multiplier(model.h, p.t)
}

/// Monte Carlo estimate of the squared L2 distance between two estimates,
/// truncated to `|t| <= T`, on shared quadrature nodes.
pub fn l2_distance_at(m1: &DensityEstimate, m2: &DensityEstimate, q: &QuadraturePoints) -> f64 {
    let total: f64 = q
        .points
        .iter()
        .map(|&p| (helgason_kde(m1, p) - helgason_kde(m2, p)).norm_sqr() * plancherel_weight(p.t))
        .sum();
    q.domain_measure() * total / q.points.len() as f64
}

/// Draws fresh quadrature nodes from `q` and evaluates [`l2_distance_at`].
pub fn l2_distance<R: Rng + ?Sized>(
    m1: &DensityEstimate,
    m2: &DensityEstimate,
    q: &QuadratureSpec,
    rng: &mut R,
) -> f64 {
    l2_distance_at(m1, m2, &q.draw(rng))
}

/// `h = 1 / (n + 100)`.
pub fn bandwidth_default(n: usize) -> Result<f64, HkdeError> {
    if n == 0 {
        return Err(HkdeError::EmptySample);
    }
    Ok(1.0 / (n as f64 + 100.0))
}

/// `T = n^{-1/6}`.
pub fn truncation_default(n: usize) -> Result<f64, HkdeError> {
    if n == 0 {
        return Err(HkdeError::EmptySample);
    }
    Ok((n as f64).powf(-1.0 / 6.0))
}

/// Trapezoid grid for the inverse transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridResolution {
    /// Intervals along `t ∈ [-T_vis, T_vis]`.
    pub t_steps: usize,
    /// Nodes along `θ ∈ [0, 2π)` (periodic, equally weighted).
    pub theta_steps: usize,
}

impl Default for GridResolution {
    fn default() -> Self {
        Self {
            t_steps: 1024,
            theta_steps: 256,
        }
    }
}

/// Multiplier floor defining the spectral cutoff of the inverse transform.
const VIS_MULTIPLIER_FLOOR: f64 = 1e-8;

/// Smallest `T` with `kernel_multiplier(h, T) <= 1e-8`, at least 1.
pub fn visual_truncation(h: f64) -> f64 {
    (-VIS_MULTIPLIER_FLOOR.ln() / h - 0.25).max(1.0).sqrt()
}

/// Spatial evaluation of a density estimate through the inverse transform.
///
/// Transform values on the `(t, θ)` grid are computed once; each evaluation
/// then costs one pass over the grid.
#[derive(Debug, Clone)]
pub struct DensityEvaluator {
    t_nodes: Vec<f64>,
    rotations: Vec<Rotation>,
    /// Transform value times quadrature weight, row-major over (θ, t).
    weighted: Vec<Complex64>,
}

impl DensityEvaluator {
    pub fn new(model: &DensityEstimate, res: GridResolution) -> Self {
        let nt = res.t_steps.max(2);
        let ntheta = res.theta_steps.max(1);
        let t_max = visual_truncation(model.h);
        let dt = 2.0 * t_max / nt as f64;
        let dtheta = TAU / ntheta as f64;
        let t_nodes: Vec<f64> = (0..=nt).map(|i| -t_max + i as f64 * dt).collect();
        let rotations: Vec<Rotation> = (0..ntheta)
            .map(|j| Rotation::new(j as f64 * dtheta))
            .collect();
        let mut weighted = Vec::with_capacity(t_nodes.len() * rotations.len());
        for &rotation in &rotations {
            for (i, &t) in t_nodes.iter().enumerate() {
                let end = if i == 0 || i == nt { 0.5 } else { 1.0 };
                let w = end * dt * dtheta * plancherel_weight(t);
                weighted.push(helgason_kde(model, SpectralPoint { t, rotation }) * w);
            }
        }
        Self {
            t_nodes,
            rotations,
            weighted,
        }
    }

    pub fn density(&self, z: HPoint) -> f64 {
        let nt = self.t_nodes.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &rotation) in self.rotations.iter().enumerate() {
            let ln_y = im_rotated(rotation, z).ln();
            let modulus = (0.5 * ln_y).exp();
            let row = &self.weighted[j * nt..(j + 1) * nt];
            let mut inner = Complex64::new(0.0, 0.0);
            for (&t, &h) in self.t_nodes.iter().zip(row) {
                // y^{1/2 + it}
                let (s, c) = (t * ln_y).sin_cos();
                inner += h * Complex64::new(c, s);
            }
            acc += inner * modulus;
        }
        debug_assert!(
            acc.im.abs() < 1e-6 * (1.0 + acc.re.abs()),
            "inverse transform left imaginary residue {}",
            acc.im
        );
        acc.re
    }
}

/// Density of `model` at `z`; see [`DensityEvaluator`] for repeated queries.
pub fn density_at(model: &DensityEstimate, z: HPoint, res: GridResolution) -> f64 {
    DensityEvaluator::new(model, res).density(z)
}

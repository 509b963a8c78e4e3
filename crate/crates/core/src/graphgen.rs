//! Node-density samplers on the hyperbolic plane and graph generators.
//!
//! Latent-space graphs place i.i.d. nodes on the half-plane and connect every
//! pair within hyperbolic distance `c`. Watts-Strogatz graphs are provided as
//! an out-of-model baseline.

use std::f64::consts::{LN_2, TAU};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::graphcore::Graph;
use crate::hgeom::{dist, exp_map, polar_to_point, HPoint, PolarCoord, TangentVector};
use crate::hkde::DensityEstimate;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("quasi-uniform parameters need delta > 0 and radius > 0, got delta={delta}, radius={radius}")]
    QuasiUniform { delta: f64, radius: f64 },
    #[error("hyperbolic Gaussian spread must be finite and > 0, got {0}")]
    Sigma(f64),
    #[error("link threshold must be > 0, got {0}")]
    Threshold(f64),
    #[error("Watts-Strogatz requires even k >= 2 and n > k, got n={n}, k={k}")]
    WattsStrogatzShape { n: usize, k: usize },
    #[error("rewiring probability must lie in [0, 1], got {0}")]
    RewireProbability(f64),
    #[error("cannot sample from a density estimate without centers")]
    EmptyModel,
}

/// Quasi-uniform density `q_{δ,R}`: uniform angle, radial CDF
/// `(cosh(δr) - 1) / (cosh(δR) - 1)` on `[0, R]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiUniformParams {
    delta: f64,
    radius: f64,
}

/// `ln(sinh(x))` for `x > 0` without overflow.
fn ln_sinh(x: f64) -> f64 {
    if x > 20.0 {
        x - LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

impl QuasiUniformParams {
    pub fn new(delta: f64, radius: f64) -> Result<Self, GenError> {
        if delta.is_finite() && radius.is_finite() && delta > 0.0 && radius > 0.0 {
            Ok(Self { delta, radius })
        } else {
            Err(GenError::QuasiUniform { delta, radius })
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn radial_cdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        if r >= self.radius {
            return 1.0;
        }
        // (cosh(δr) - 1) / (cosh(δR) - 1) = sinh²(δr/2) / sinh²(δR/2)
        (2.0 * (ln_sinh(0.5 * self.delta * r) - ln_sinh(0.5 * self.delta * self.radius))).exp()
    }

    /// `r = arccosh(1 + u (cosh(δR) - 1)) / δ`, evaluated in log space for large `δR`.
    pub fn inverse_radial_cdf(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let u = u.min(1.0);
        // a = u (cosh(δR) - 1) = 2u sinh²(δR/2)
        let ln_a = u.ln() + LN_2 + 2.0 * ln_sinh(0.5 * self.delta * self.radius);
        let acosh_1p = if ln_a < 600.0 {
            let a = ln_a.exp();
            (a + (a * (a + 2.0)).sqrt()).ln_1p()
        } else {
            LN_2 + ln_a
        };
        (acosh_1p / self.delta).min(self.radius)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypGaussianParams {
    sigma: f64,
}

impl HypGaussianParams {
    pub fn new(sigma: f64) -> Result<Self, GenError> {
        if sigma.is_finite() && sigma > 0.0 {
            Ok(Self { sigma })
        } else {
            Err(GenError::Sigma(sigma))
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Hard-threshold link function: connect iff `dist <= threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkRule {
    threshold: f64,
}

impl LinkRule {
    /// `threshold` may be `+∞` (complete graph).
    pub fn new(threshold: f64) -> Result<Self, GenError> {
        if threshold > 0.0 {
            Ok(Self { threshold })
        } else {
            Err(GenError::Threshold(threshold))
        }
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn connects(&self, a: HPoint, b: HPoint) -> bool {
        dist(a, b) <= self.threshold
    }
}

pub fn sample_quasi_uniform<R: Rng + ?Sized>(
    p: &QuasiUniformParams,
    n: usize,
    rng: &mut R,
) -> Vec<HPoint> {
    (0..n)
        .map(|_| {
            let theta = rng.random_range(0.0..TAU);
            let u: f64 = rng.random();
            let r = p.inverse_radial_cdf(u);
            polar_to_point(PolarCoord::new(r, theta).expect("radius in [0, R]"))
        })
        .collect()
}

/// Isotropic tangent-space normal at `base` pushed through the exponential map.
fn perturb<R: Rng + ?Sized>(base: HPoint, normal: &Normal<f64>, rng: &mut R) -> HPoint {
    let v1 = normal.sample(rng);
    let v2 = normal.sample(rng);
    exp_map(base, TangentVector::from_components(v1, v2))
}

/// Small-spread hyperbolic Gaussian centred at `i`.
pub fn sample_hyp_gaussian<R: Rng + ?Sized>(
    p: &HypGaussianParams,
    n: usize,
    rng: &mut R,
) -> Vec<HPoint> {
    let normal = Normal::new(0.0, p.sigma).expect("sigma validated");
    (0..n).map(|_| perturb(HPoint::I, &normal, rng)).collect()
}

/// Draws from a fitted density estimate: a uniformly chosen center perturbed by
/// a tangent normal with per-axis standard deviation `sqrt(2h)`.
pub fn sample_from_kde<R: Rng + ?Sized>(
    model: &DensityEstimate,
    n: usize,
    rng: &mut R,
) -> Result<Vec<HPoint>, GenError> {
    let centers = model.centers();
    if centers.is_empty() {
        return Err(GenError::EmptyModel);
    }
    let normal = Normal::new(0.0, (2.0 * model.bandwidth()).sqrt()).expect("h validated");
    Ok((0..n)
        .map(|_| {
            let c = centers[rng.random_range(0..centers.len())];
            perturb(c, &normal, rng)
        })
        .collect())
}

pub fn generate_graph(points: &[HPoint], link: &LinkRule) -> Graph {
    let mut g = Graph::new(points.len());
    for (i, &a) in points.iter().enumerate() {
        for (j, &b) in points.iter().enumerate().skip(i + 1) {
            if link.connects(a, b) {
                g.insert_unchecked(i, j);
            }
        }
    }
    g
}

/// Watts-Strogatz small-world graph.
///
/// Starts from a ring lattice of degree `k` and, for each lattice edge
/// `(u, u + j)`, with probability `p` moves its far end to a uniformly chosen
/// node that is neither `u` nor already adjacent to `u`. The edge count stays
/// `n k / 2`.
pub fn watts_strogatz<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    p: f64,
    rng: &mut R,
) -> Result<Graph, GenError> {
    if k < 2 || !k.is_multiple_of(2) || n <= k {
        return Err(GenError::WattsStrogatzShape { n, k });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(GenError::RewireProbability(p));
    }
    let mut g = Graph::ring_lattice(n, k);
    for j in 1..=k / 2 {
        for u in 0..n {
            if rng.random::<f64>() >= p {
                continue;
            }
            if g.degree(u) >= n - 1 {
                continue;
            }
            let v = (u + j) % n;
            let w = loop {
                let w = rng.random_range(0..n);
                if w != u && !g.has_edge(u, w) {
                    break w;
                }
            };
            g.remove_edge(u, v);
            g.insert_unchecked(u, w);
        }
    }
    Ok(g)
}

/// Family of random graphs used by the power harness and the CLI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorSpec {
    QuasiUniform {
        params: QuasiUniformParams,
        n: usize,
        link: LinkRule,
    },
    HypGaussian {
        params: HypGaussianParams,
        n: usize,
        link: LinkRule,
    },
    WattsStrogatz {
        n: usize,
        k: usize,
        p: f64,
    },
}

impl GeneratorSpec {
    pub fn node_count(&self) -> usize {
        match *self {
            GeneratorSpec::QuasiUniform { n, .. }
            | GeneratorSpec::HypGaussian { n, .. }
            | GeneratorSpec::WattsStrogatz { n, .. } => n,
        }
    }

    /// Validates shape parameters that the typed params cannot encode.
    pub fn validate(&self) -> Result<(), GenError> {
        if let GeneratorSpec::WattsStrogatz { n, k, p } = *self {
            if k < 2 || k % 2 != 0 || n <= k {
                return Err(GenError::WattsStrogatzShape { n, k });
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(GenError::RewireProbability(p));
            }
        }
        Ok(())
    }

    /// Latent positions (when the family has them) and the generated graph.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
    ) -> Result<(Option<Vec<HPoint>>, Graph), GenError> {
        match self {
            GeneratorSpec::QuasiUniform { params, n, link } => {
                let pts = sample_quasi_uniform(params, *n, rng);
                let g = generate_graph(&pts, link);
                Ok((Some(pts), g))
            }
            GeneratorSpec::HypGaussian { params, n, link } => {
                let pts = sample_hyp_gaussian(params, *n, rng);
                let g = generate_graph(&pts, link);
                Ok((Some(pts), g))
            }
            GeneratorSpec::WattsStrogatz { n, k, p } => {
                Ok((None, watts_strogatz(*n, *k, *p, rng)?))
            }
        }
    }

    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Graph, GenError> {
        self.sample(rng).map(|(_, g)| g)
    }
}

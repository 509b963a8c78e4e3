//! Generalized multidimensional scaling into the hyperbolic plane.
//!
//! Points on the hyperboloid `xt² - x1² - x2² = 1` satisfy
//! `cosh ρ(a, b) = xt·xt' - x1·x1' - x2·x2'`, so the matrix
//! `R_ij = cosh ρ(i, j)` of an exactly embeddable metric has one positive and
//! two negative eigenvalues. Scaling the leading eigenvector and the two most
//! negative ones by `sqrt(|λ|)` recovers hyperboloid coordinates up to a
//! Lorentz transformation. For graph metrics the rows are projected back onto
//! the hyperboloid before conversion to the half-plane.

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

use crate::graphcore::DistanceMatrix;
use crate::hgeom::{cosh_dist, HPoint};

/// Eigenvalues below `-NEGATIVE_TOLERANCE · max|λ|` count as negative.
pub const NEGATIVE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbeddingError {
    #[error("cosh-distance matrix has {negative} negative eigenvalue(s), need 2 (spectrum {spectrum:?})")]
    InsufficientNegativeEigenvalues { negative: usize, spectrum: Vec<f64> },
    #[error("row {row} is not timelike after projection (xt² - x1² - x2² = {quadric})")]
    DegenerateRow { row: usize, quadric: f64 },
    #[error("nodes {i} and {j} are not connected")]
    DisconnectedInput { i: usize, j: usize },
    #[error("({x1}, {x2}, {xt}) is not on the upper hyperboloid sheet")]
    OffHyperboloid { x1: f64, x2: f64, xt: f64 },
}

/// Half-plane coordinates of embedded nodes, in node order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedCloud {
    pub points: Vec<HPoint>,
    /// Eigenvalues used: leading, then the two most negative.
    pub eigenvalues: [f64; 3],
    pub source: Option<String>,
}

impl EmbeddedCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }
}

/// Embeds a graph's hop-distance matrix. All pairs must be reachable.
pub fn cosh_mds(d: &DistanceMatrix) -> Result<EmbeddedCloud, EmbeddingError> {
    let n = d.size();
    let mut r = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let hops = d
                .get(i, j)
                .ok_or(EmbeddingError::DisconnectedInput { i, j })?;
            r[(i, j)] = f64::from(hops).cosh();
        }
    }
    embed_cosh_matrix(r)
}

/// Embeds an arbitrary real distance matrix (row-major, `n × n`).
pub fn cosh_mds_from_distances(
    n: usize,
    distances: &[f64],
) -> Result<EmbeddedCloud, EmbeddingError> {
    assert_eq!(distances.len(), n * n, "distance matrix must be n × n");
    embed_cosh_matrix(DMatrix::from_fn(n, n, |i, j| distances[i * n + j].cosh()))
}

/// Flips `v` so that its largest-magnitude entry is positive.
fn canonical_sign(mut v: Vec<f64>) -> Vec<f64> {
    let pivot = v.iter().copied().fold(
        0.0f64,
        |best, x| if x.abs() > best.abs() { x } else { best },
    );
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

fn embed_cosh_matrix(r: DMatrix<f64>) -> Result<EmbeddedCloud, EmbeddingError> {
    let n = r.nrows();
    if n == 0 {
        return Err(EmbeddingError::InsufficientNegativeEigenvalues {
            negative: 0,
            spectrum: Vec::new(),
        });
    }
    let eig = SymmetricEigen::new(r);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let spectrum: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();

    let scale = spectrum.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let negative = spectrum
        .iter()
        .filter(|&&x| x < -NEGATIVE_TOLERANCE * scale)
        .count();
    if negative < 2 || spectrum[0] <= 0.0 {
        return Err(EmbeddingError::InsufficientNegativeEigenvalues { negative, spectrum });
    }

    let lead = order[0];
    let neg1 = order[n - 1];
    let neg2 = order[n - 2];
    let column = |k: usize| canonical_sign(eig.eigenvectors.column(k).iter().copied().collect());
    let (u_t, u_1, u_2) = (column(lead), column(neg1), column(neg2));
    let (s_t, s_1, s_2) = (
        eig.eigenvalues[lead].sqrt(),
        (-eig.eigenvalues[neg1]).sqrt(),
        (-eig.eigenvalues[neg2]).sqrt(),
    );

    let mut points = Vec::with_capacity(n);
    for row in 0..n {
        let mut xt = s_t * u_t[row];
        let mut x1 = s_1 * u_1[row];
        let mut x2 = s_2 * u_2[row];
        let quadric = xt * xt - x1 * x1 - x2 * x2;
        if quadric.is_nan() || quadric <= 0.0 {
            return Err(EmbeddingError::DegenerateRow { row, quadric });
        }
        let norm = quadric.sqrt() * xt.signum();
        xt /= norm;
        x1 /= norm;
        x2 /= norm;
        points.push(hyperboloid_to_halfplane(x1, x2, xt)?);
    }

    Ok(EmbeddedCloud {
        points,
        eigenvalues: [
            eig.eigenvalues[lead],
            eig.eigenvalues[neg1],
            eig.eigenvalues[neg2],
        ],
        source: None,
    })
}

/// Maps a point of the upper hyperboloid sheet to the half-plane.
///
/// Equivalent to the disk coordinate `w = (x1 + i x2)/(1 + xt)` followed by
/// `z = i (1 - w)/(1 + w)`, which simplifies to `z = (x2 + i)/(xt + x1)`.
pub fn hyperboloid_to_halfplane(x1: f64, x2: f64, xt: f64) -> Result<HPoint, EmbeddingError> {
    let off = EmbeddingError::OffHyperboloid { x1, x2, xt };
    if !(xt > 0.0 && x1.is_finite() && x2.is_finite() && xt.is_finite()) {
        return Err(off);
    }
    if (xt * xt - x1 * x1 - x2 * x2 - 1.0).abs() > 1e-6 * xt * xt {
        return Err(off);
    }
    // (xt + x1)(xt - x1) = 1 + x2²; pick the form without cancellation
    let y = if x1 >= 0.0 {
        1.0 / (xt + x1)
    } else {
        (xt - x1) / (1.0 + x2 * x2)
    };
    HPoint::new(x2 * y, y).map_err(|_| off)
}

/// `Σ (cosh ρ_G - cosh ρ(φ))²` over ordered node pairs.
pub fn cosh_stress(d: &DistanceMatrix, points: &[HPoint]) -> f64 {
    let n = d.size();
    assert_eq!(points.len(), n);
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if let Some(h) = d.get(i, j) {
                let diff = f64::from(h).cosh() - cosh_dist(points[i], points[j]);
                total += diff * diff;
            }
        }
    }
    total
}

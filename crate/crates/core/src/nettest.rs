//! Two-sample network comparison by pooled-model bootstrap, and the power
//! harness built on top of it.
//!
//! Each graph is reduced to its largest component, embedded with cosh-MDS and
//! turned into a kernel density estimate. The observed statistic is the
//! Helgason-domain L2 distance between the two estimates. Under the null both
//! graphs come from the estimate fitted to the union of the embedded clouds;
//! replicate graph pairs are drawn from it, re-fitted, and their distances
//! form the reference distribution.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::embed::{cosh_mds, EmbeddingError};
use crate::graphcore::{largest_component, shortest_paths, Graph};
use crate::graphgen::{generate_graph, sample_from_kde, GenError, GeneratorSpec, LinkRule};
use crate::hkde::{
    bandwidth_default, l2_distance_at, truncation_default, DensityEstimate, QuadraturePoints,
    QuadratureSpec,
};
use crate::rng::{RngSeed, Stream, StreamRng};

#[derive(Debug, Error)]
pub enum NetTestError {
    #[error("embedding of observed graph {which} failed: {source}")]
    ObservedEmbedding {
        which: usize,
        #[source]
        source: EmbeddingError,
    },
    #[error("bootstrap replicate {replicate} failed to embed after {attempts} attempts")]
    ReplicateRetriesExhausted { replicate: usize, attempts: usize },
    #[error("power pair {pair} failed to embed after {attempts} regenerations")]
    PairRetriesExhausted { pair: usize, attempts: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Generation(#[from] GenError),
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonConfig {
    /// Bootstrap replicates `B`.
    pub replicates: usize,
    /// Monte Carlo quadrature pairs `m`.
    pub quadrature_pairs: usize,
    pub link: LinkRule,
    /// Nominal size.
    pub alpha: f64,
    pub seed: RngSeed,
    /// Redraws allowed per replicate (or per power pair) after embedding failures.
    pub max_retries: usize,
    /// Worker threads; `None` uses the global pool. Results do not depend on it.
    pub threads: Option<usize>,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        Self {
            replicates: 50,
            quadrature_pairs: QuadratureSpec::DEFAULT_PAIRS,
            link: LinkRule::new(1.5).expect("positive threshold"),
            alpha: 0.1,
            seed: RngSeed::new(0),
            max_retries: 100,
            threads: None,
        }
    }
}

impl ComparisonConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = RngSeed::new(seed);
        self
    }

    pub fn validate(&self) -> Result<(), NetTestError> {
        if self.replicates < 1 {
            return Err(NetTestError::InvalidConfig("B must be at least 1".into()));
        }
        if self.quadrature_pairs < 1 {
            return Err(NetTestError::InvalidConfig("m must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(NetTestError::InvalidConfig(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.threads == Some(0) {
            return Err(NetTestError::InvalidConfig(
                "threads must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn run<T: Send>(&self, work: impl FnOnce() -> T + Send) -> Result<T, NetTestError> {
        match self.threads {
            Some(k) => Ok(rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()?
                .install(work)),
            None => Ok(work()),
        }
    }
}

/// Density estimate of one graph plus bookkeeping about dropped nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub estimate: DensityEstimate,
    pub original_nodes: usize,
    /// Original ids of the embedded nodes, ascending.
    pub retained: Vec<usize>,
}

impl FittedModel {
    pub fn embedded_nodes(&self) -> usize {
        self.retained.len()
    }

    pub fn dropped_fraction(&self) -> f64 {
        if self.original_nodes == 0 {
            return 0.0;
        }
        1.0 - self.retained.len() as f64 / self.original_nodes as f64
    }
}

/// Largest component → hop distances → cosh-MDS → KDE with `h = 1/(n + 100)`.
pub fn estimate_model(g: &Graph) -> Result<FittedModel, EmbeddingError> {
    let (core, retained) = largest_component(g);
    let cloud = cosh_mds(&shortest_paths(&core))?;
    let h = bandwidth_default(cloud.len()).expect("embedding is non-empty");
    let estimate = DensityEstimate::new(cloud.points, h).expect("non-empty cloud, positive h");
    Ok(FittedModel {
        estimate,
        original_nodes: g.node_count(),
        retained,
    })
}

/// KDE on the union of both embedded clouds with `h = 1/(n1 + n2 + 100)`.
pub fn pooled_model(a: &FittedModel, b: &FittedModel) -> DensityEstimate {
    let centers: Vec<_> = a
        .estimate
        .centers()
        .iter()
        .chain(b.estimate.centers())
        .copied()
        .collect();
    DensityEstimate::with_default_bandwidth(centers).expect("non-empty union")
}

/// Add-one Monte Carlo p-value `(1 + #{replicate >= d*}) / (B + 1)`.
pub fn p_value(d_star: f64, replicates: &[f64]) -> f64 {
    let exceed = replicates.iter().filter(|&&d| d >= d_star).count();
    (1 + exceed) as f64 / (replicates.len() + 1) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub original_nodes: [usize; 2],
    pub embedded_nodes: [usize; 2],
    pub dropped_fraction: [f64; 2],
    pub bandwidths: [f64; 2],
    pub pooled_bandwidth: f64,
    pub truncation: f64,
    /// Embedding failures absorbed by redrawing, per replicate.
    pub replicate_retries: Vec<usize>,
}

impl Diagnostics {
    pub fn total_retries(&self) -> usize {
        self.replicate_retries.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub d_star: f64,
    pub replicates: Vec<f64>,
    pub p_value: f64,
    pub diagnostics: Diagnostics,
}

impl TestResult {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value <= alpha
    }

    /// `key: value` document echoing the effective configuration.
    ///
    /// The thread count is deliberately absent so output is identical across
    /// parallelism settings.
    pub fn to_document(&self, cfg: &ComparisonConfig) -> String {
        let d = &self.diagnostics;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k}: {v}");
        };
        kv("d_star", self.d_star.to_string());
        kv("p_value", self.p_value.to_string());
        if self.rejects(cfg.alpha) {
            kv("reject", "true".into());
        }
        kv("B", cfg.replicates.to_string());
        kv("alpha", cfg.alpha.to_string());
        kv("m", cfg.quadrature_pairs.to_string());
        kv("c", cfg.link.threshold().to_string());
        kv("seed", cfg.seed.value().to_string());
        kv("max_retries", cfg.max_retries.to_string());
        kv("truncation", d.truncation.to_string());
        for i in 0..2 {
            let k = i + 1;
            kv(&format!("n{k}"), d.original_nodes[i].to_string());
            kv(&format!("embedded_n{k}"), d.embedded_nodes[i].to_string());
            kv(
                &format!("dropped_fraction_{k}"),
                d.dropped_fraction[i].to_string(),
            );
            kv(&format!("bandwidth_{k}"), d.bandwidths[i].to_string());
        }
        kv("bandwidth_pooled", d.pooled_bandwidth.to_string());
        kv("retries", d.total_retries().to_string());
        kv(
            "replicates",
            self.replicates
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(","),
        );
        out
    }
}

/// Parses a `key: value` document into a map. Lines without `": "` are ignored.
pub fn parse_document(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .filter_map(|line| line.split_once(": "))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

/// Everything a bootstrap replicate needs; replicates differ only in their RNG.
#[derive(Debug, Clone)]
pub struct BootstrapPlan<'a> {
    pub pooled: &'a DensityEstimate,
    pub sizes: [usize; 2],
    pub link: LinkRule,
    pub quadrature: &'a QuadraturePoints,
    pub max_retries: usize,
}

impl BootstrapPlan<'_> {
    /// One replicate distance and the number of redraws it needed, or `None`
    /// once the retry cap is spent.
    pub fn replicate(&self, rng: &mut StreamRng) -> Option<(f64, usize)> {
        for attempt in 0..=self.max_retries {
            let fit = |n: usize, rng: &mut StreamRng| {
                let pts = sample_from_kde(self.pooled, n, rng).expect("pooled model is non-empty");
                estimate_model(&generate_graph(&pts, &self.link))
            };
            let a = fit(self.sizes[0], rng);
            let b = fit(self.sizes[1], rng);
            if let (Ok(a), Ok(b)) = (a, b) {
                return Some((
                    l2_distance_at(&a.estimate, &b.estimate, self.quadrature),
                    attempt,
                ));
            }
        }
        None
    }
}

/// Runs the full pooled-bootstrap test of `g1` against `g2`.
pub fn compare(g1: &Graph, g2: &Graph, cfg: &ComparisonConfig) -> Result<TestResult, NetTestError> {
    cfg.validate()?;
    cfg.run(|| compare_in_pool(g1, g2, cfg))?
}

fn compare_in_pool(
    g1: &Graph,
    g2: &Graph,
    cfg: &ComparisonConfig,
) -> Result<TestResult, NetTestError> {
    let fit1 = estimate_model(g1)
        .map_err(|source| NetTestError::ObservedEmbedding { which: 1, source })?;
    let fit2 = estimate_model(g2)
        .map_err(|source| NetTestError::ObservedEmbedding { which: 2, source })?;

    // one truncation and one node set for d* and every replicate
    let n_min = fit1.embedded_nodes().min(fit2.embedded_nodes());
    let truncation = truncation_default(n_min).expect("embedded clouds are non-empty");
    let spec = QuadratureSpec::new(truncation, cfg.quadrature_pairs)
        .map_err(|e| NetTestError::InvalidConfig(e.to_string()))?;
    let quadrature = spec.draw(&mut cfg.seed.rng(Stream::Quadrature, 0));

    let d_star = l2_distance_at(&fit1.estimate, &fit2.estimate, &quadrature);
    let pooled = pooled_model(&fit1, &fit2);
    let plan = BootstrapPlan {
        pooled: &pooled,
        sizes: [g1.node_count(), g2.node_count()],
        link: cfg.link,
        quadrature: &quadrature,
        max_retries: cfg.max_retries,
    };

    let outcomes: Vec<Option<(f64, usize)>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|b| plan.replicate(&mut cfg.seed.rng(Stream::Bootstrap, b as u64)))
        .collect();
    let mut replicates = Vec::with_capacity(outcomes.len());
    let mut retries = Vec::with_capacity(outcomes.len());
    for (b, outcome) in outcomes.into_iter().enumerate() {
        let (d, r) = outcome.ok_or(NetTestError::ReplicateRetriesExhausted {
            replicate: b,
            attempts: cfg.max_retries + 1,
        })?;
        replicates.push(d);
        retries.push(r);
    }

    let p = p_value(d_star, &replicates);
    Ok(TestResult {
        d_star,
        p_value: p,
        diagnostics: Diagnostics {
            original_nodes: [fit1.original_nodes, fit2.original_nodes],
            embedded_nodes: [fit1.embedded_nodes(), fit2.embedded_nodes()],
            dropped_fraction: [fit1.dropped_fraction(), fit2.dropped_fraction()],
            bandwidths: [fit1.estimate.bandwidth(), fit2.estimate.bandwidth()],
            pooled_bandwidth: pooled.bandwidth(),
            truncation,
            replicate_retries: retries,
        },
        replicates,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerResult {
    pub power: f64,
    pub rejections: usize,
    pub pairs: usize,
    pub p_values: Vec<f64>,
    /// Graph pairs thrown away because an observed graph failed to embed.
    pub regenerations: usize,
}

/// Fraction of independent `(genA, genB)` graph pairs rejected at level `alpha`.
pub fn power_simulation(
    gen_a: &GeneratorSpec,
    gen_b: &GeneratorSpec,
    pairs: usize,
    cfg: &ComparisonConfig,
) -> Result<PowerResult, NetTestError> {
    cfg.validate()?;
    gen_a.validate()?;
    gen_b.validate()?;
    if pairs < 1 {
        return Err(NetTestError::InvalidConfig(
            "pairs must be at least 1".into(),
        ));
    }
    cfg.run(|| {
        let outcomes: Vec<Result<(f64, usize), NetTestError>> = (0..pairs)
            .into_par_iter()
            .map(|i| power_pair(gen_a, gen_b, i, cfg))
            .collect();
        let mut p_values = Vec::with_capacity(pairs);
        let mut regenerations = 0;
        for outcome in outcomes {
            let (p, regen) = outcome?;
            p_values.push(p);
            regenerations += regen;
        }
        let rejections = p_values.iter().filter(|&&p| p <= cfg.alpha).count();
        Ok(PowerResult {
            power: rejections as f64 / pairs as f64,
            rejections,
            pairs,
            p_values,
            regenerations,
        })
    })?
}

fn power_pair(
    gen_a: &GeneratorSpec,
    gen_b: &GeneratorSpec,
    pair: usize,
    cfg: &ComparisonConfig,
) -> Result<(f64, usize), NetTestError> {
    let pair_seed = cfg.seed.derive(Stream::Pair, pair as u64);
    for attempt in 0..=cfg.max_retries {
        let mut rng = pair_seed.rng(Stream::Generation, attempt as u64);
        let g1 = gen_a.generate(&mut rng)?;
        let g2 = gen_b.generate(&mut rng)?;
        let inner = ComparisonConfig {
            seed: pair_seed.derive(Stream::Comparison, attempt as u64),
            threads: None,
            ..*cfg
        };
        match compare_in_pool(&g1, &g2, &inner) {
            Ok(result) => return Ok((result.p_value, attempt)),
            Err(NetTestError::ObservedEmbedding { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(NetTestError::PairRetriesExhausted {
        pair,
        attempts: cfg.max_retries + 1,
    })
}

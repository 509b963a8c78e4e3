//! Command-line front end.
//!
//! Every subcommand writes a plain-text artifact (edge list, coordinates, CSV
//! or a `key: value` result document) to `-o` or standard output and logs the
//! master seed to standard error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::embed::{cosh_mds, EmbeddingError};
use crate::graphcore::{format_edge_list, largest_component, read_edge_list, shortest_paths};
use crate::graphgen::{GeneratorSpec, HypGaussianParams, LinkRule, QuasiUniformParams};
use crate::hgeom::HPoint;
use crate::hkde::{DensityEstimate, DensityEvaluator, GridResolution};
use crate::nettest::{compare, estimate_model, power_simulation, ComparisonConfig, NetTestError};
use crate::rng::{RngSeed, Stream};

/// Environment variable that makes `--seed` mandatory.
pub const CI_ENV: &str = "CI";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_EMBEDDING: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "hypnet",
    version,
    about = "Compare networks through hyperbolic embeddings"
)]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random graph and write its edge list.
    Generate(GenerateArgs),
    /// Embed the largest component of a graph and write "x y" per node.
    Embed(EmbedArgs),
    /// Evaluate the density estimate of a graph on a rectangular grid.
    Density(DensityArgs),
    /// Test whether two graphs share a node density.
    Compare(CompareArgs),
    /// Estimate power over a sweep of one generator parameter.
    Power(PowerArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    QuasiUniform,
    HypGaussian,
    WattsStrogatz,
}

#[derive(Debug, Clone, Args)]
pub struct GeneratorArgs {
    #[arg(long, value_enum, default_value = "quasi-uniform")]
    pub family: Family,
    /// Dispersion of the quasi-uniform family.
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Radius of the quasi-uniform family.
    #[arg(long = "R", default_value_t = 1.0)]
    pub radius: f64,
    /// Spread of the hyperbolic Gaussian family.
    #[arg(long, default_value_t = 0.3)]
    pub sigma: f64,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Watts-Strogatz lattice degree.
    #[arg(long, default_value_t = 40)]
    pub k: usize,
    /// Watts-Strogatz rewiring probability.
    #[arg(long, default_value_t = 0.1)]
    pub p: f64,
}

impl GeneratorArgs {
    fn spec(&self, c: f64) -> anyhow::Result<GeneratorSpec> {
        let link = LinkRule::new(c)?;
        let spec = match self.family {
            Family::QuasiUniform => GeneratorSpec::QuasiUniform {
                params: QuasiUniformParams::new(self.delta, self.radius)?,
                n: self.n,
                link,
            },
            Family::HypGaussian => GeneratorSpec::HypGaussian {
                params: HypGaussianParams::new(self.sigma)?,
                n: self.n,
                link,
            },
            Family::WattsStrogatz => GeneratorSpec::WattsStrogatz {
                n: self.n,
                k: self.k,
                p: self.p,
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub generator: GeneratorArgs,
    /// Link threshold.
    #[arg(long, default_value_t = 1.5)]
    pub c: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Also write latent positions as "x y" lines.
    #[arg(long)]
    pub positions: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EmbedArgs {
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DensityArgs {
    /// Edge list, or a coordinate file with `--coords`.
    pub input: PathBuf,
    /// Treat the input as "x y" coordinates instead of an edge list.
    #[arg(long)]
    pub coords: bool,
    /// Bandwidth; defaults to 1/(n + 100).
    #[arg(long)]
    pub h: Option<f64>,
    /// Grid nodes per axis.
    #[arg(long, default_value_t = 40)]
    pub grid: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub y_min: Option<f64>,
    #[arg(long)]
    pub y_max: Option<f64>,
    /// Spectral grid intervals of the inverse transform.
    #[arg(long, default_value_t = GridResolution::default().t_steps)]
    pub t_steps: usize,
    /// Angular nodes of the inverse transform.
    #[arg(long, default_value_t = GridResolution::default().theta_steps)]
    pub theta_steps: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    /// Bootstrap replicates.
    #[arg(long = "B", default_value_t = 50)]
    pub replicates: usize,
    /// Monte Carlo quadrature pairs.
    #[arg(long, default_value_t = 100)]
    pub m: usize,
    /// Link threshold used for replicate graphs.
    #[arg(long, default_value_t = 1.5)]
    pub c: f64,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 100)]
    pub max_retries: usize,
    /// Worker threads; output does not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,
}

impl TestArgs {
    fn config(&self, seed: u64) -> anyhow::Result<ComparisonConfig> {
        let cfg = ComparisonConfig {
            replicates: self.replicates,
            quadrature_pairs: self.m,
            link: LinkRule::new(self.c)?,
            alpha: self.alpha,
            seed: RngSeed::new(seed),
            max_retries: self.max_retries,
            threads: self.threads,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    pub first: PathBuf,
    pub second: PathBuf,
    #[command(flatten)]
    pub test: TestArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PowerArgs {
    /// Baseline generator; the sweep replaces one of its parameters.
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["sigma_sweep", "p_sweep"])]
    pub delta_sweep: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', conflicts_with = "p_sweep")]
    pub sigma_sweep: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub p_sweep: Option<Vec<f64>>,
    #[arg(long, default_value_t = 25)]
    pub pairs: usize,
    #[command(flatten)]
    pub test: TestArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match CliConfig::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            if is_embedding_failure(&e) {
                EXIT_EMBEDDING
            } else {
                EXIT_USAGE
            }
        }
    }
}

fn is_embedding_failure(e: &anyhow::Error) -> bool {
    e.chain().any(|cause| {
        cause.is::<EmbeddingError>()
            || matches!(
                cause.downcast_ref::<NetTestError>(),
                Some(NetTestError::ObservedEmbedding { .. })
            )
    })
}

fn dispatch(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<()> {
    match command {
        Command::Generate(a) => generate(a, out, err),
        Command::Embed(a) => embed(a, out, err),
        Command::Density(a) => density(a, out, err),
        Command::Compare(a) => compare_cmd(a, out, err),
        Command::Power(a) => power(a, out, err),
    }
}

/// Uses the given seed, or draws one unless running under CI.
fn resolve_seed(seed: Option<u64>, err: &mut dyn Write) -> anyhow::Result<u64> {
    let seed = match seed {
        Some(s) => s,
        None if std::env::var_os(CI_ENV).is_some() => {
            bail!("--seed is required when {CI_ENV} is set")
        }
        None => rand::random(),
    };
    writeln!(err, "seed: {seed}")?;
    Ok(seed)
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => out.write_all(text.as_bytes()).context("writing output"),
    }
}

fn format_points(points: &[HPoint]) -> String {
    points
        .iter()
        .map(|z| format!("{} {}\n", z.x(), z.y()))
        .collect()
}

/// Reads "x y" lines; blank lines and `#` comments are skipped.
pub fn parse_points(text: &str) -> anyhow::Result<Vec<HPoint>> {
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            bail!("line {}: expected \"x y\"", i + 1);
        }
        let x: f64 = fields[0]
            .parse()
            .with_context(|| format!("line {}", i + 1))?;
        let y: f64 = fields[1]
            .parse()
            .with_context(|| format!("line {}", i + 1))?;
        points.push(HPoint::new(x, y).with_context(|| format!("line {}", i + 1))?);
    }
    Ok(points)
}

fn generate(a: &GenerateArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<()> {
    let spec = a.generator.spec(a.c)?;
    let seed = resolve_seed(a.seed, err)?;
    let (positions, g) = spec.sample(&mut RngSeed::new(seed).rng(Stream::Generation, 0))?;
    if let Some(path) = &a.positions {
        let pts =
            positions.ok_or_else(|| anyhow!("watts-strogatz graphs have no latent positions"))?;
        emit(Some(path), &format_points(&pts), out)?;
    }
    emit(a.output.as_deref(), &format_edge_list(&g), out)
}

fn embed(a: &EmbedArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<()> {
    let g = read_edge_list(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let (core, retained) = largest_component(&g);
    if retained.len() < g.node_count() {
        writeln!(
            err,
            "embedding largest component: {} of {} nodes",
            retained.len(),
            g.node_count()
        )?;
    }
    let cloud = cosh_mds(&shortest_paths(&core))?;
    emit(a.output.as_deref(), &format_points(&cloud.points), out)
}

fn density(a: &DensityArgs, out: &mut dyn Write, _err: &mut dyn Write) -> anyhow::Result<()> {
    if a.grid < 2 {
        bail!("--grid must be at least 2");
    }
    let text =
        fs::read_to_string(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let centers = if a.coords {
        parse_points(&text)?
    } else {
        let g = crate::graphcore::parse_edge_list(&text)?;
        estimate_model(&g)?.estimate.centers().to_vec()
    };
    if centers.is_empty() {
        bail!("no points to estimate a density from");
    }
    let model = match a.h {
        Some(h) => DensityEstimate::new(centers, h)?,
        None => DensityEstimate::with_default_bandwidth(centers)?,
    };

    let cs = model.centers();
    let fold =
        |init: f64, f: fn(f64, f64) -> f64, g: fn(&HPoint) -> f64| cs.iter().map(g).fold(init, f);
    let (x_lo, x_hi) = (
        fold(f64::INFINITY, f64::min, HPoint::x),
        fold(f64::NEG_INFINITY, f64::max, HPoint::x),
    );
    let (y_lo, y_hi) = (
        fold(f64::INFINITY, f64::min, HPoint::y),
        fold(f64::NEG_INFINITY, f64::max, HPoint::y),
    );
    let pad = 0.1 * (x_hi - x_lo).max(y_hi - y_lo).max(1e-3);
    let x_min = a.x_min.unwrap_or(x_lo - pad);
    let x_max = a.x_max.unwrap_or(x_hi + pad);
    let y_min = a.y_min.unwrap_or(y_lo / 1.2);
    let y_max = a.y_max.unwrap_or(y_hi * 1.2);
    if !(x_min < x_max && 0.0 < y_min && y_min < y_max) {
        bail!("grid bounds need x_min < x_max and 0 < y_min < y_max");
    }

    let evaluator = DensityEvaluator::new(
        &model,
        GridResolution {
            t_steps: a.t_steps,
            theta_steps: a.theta_steps,
        },
    );
    let step = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (a.grid - 1) as f64;
    let mut csv = String::from("x,y,density\n");
    for j in 0..a.grid {
        let y = step(y_min, y_max, j);
        for i in 0..a.grid {
            let x = step(x_min, x_max, i);
            let f = evaluator.density(HPoint::new(x, y)?);
            csv.push_str(&format!("{x},{y},{f}\n"));
        }
    }
    emit(a.output.as_deref(), &csv, out)
}

fn compare_cmd(a: &CompareArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<()> {
    let g1 = read_edge_list(&a.first).with_context(|| format!("reading {}", a.first.display()))?;
    let g2 =
        read_edge_list(&a.second).with_context(|| format!("reading {}", a.second.display()))?;
    let cfg = a.test.config(resolve_seed(a.test.seed, err)?)?;
    let result = compare(&g1, &g2, &cfg)?;
    emit(a.output.as_deref(), &result.to_document(&cfg), out)
}

fn power(a: &PowerArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<()> {
    let base = &a.generator;
    let sweep: Vec<(f64, GeneratorArgs)> = match (&a.delta_sweep, &a.sigma_sweep, &a.p_sweep) {
        (Some(v), None, None) if base.family == Family::QuasiUniform => v
            .iter()
            .map(|&delta| {
                (
                    delta,
                    GeneratorArgs {
                        delta,
                        ..base.clone()
                    },
                )
            })
            .collect(),
        (None, Some(v), None) if base.family == Family::HypGaussian => v
            .iter()
            .map(|&sigma| {
                (
                    sigma,
                    GeneratorArgs {
                        sigma,
                        ..base.clone()
                    },
                )
            })
            .collect(),
        (None, None, Some(v)) if base.family == Family::WattsStrogatz => v
            .iter()
            .map(|&p| (p, GeneratorArgs { p, ..base.clone() }))
            .collect(),
        _ => bail!(
            "give exactly one sweep matching the family: --delta-sweep (quasi-uniform), \
             --sigma-sweep (hyp-gaussian) or --p-sweep (watts-strogatz)"
        ),
    };
    if sweep.is_empty() {
        bail!("sweep is empty");
    }
    let gen_a = base.spec(a.test.c)?;
    let specs = sweep
        .iter()
        .map(|(v, g)| g.spec(a.test.c).map(|s| (*v, s)))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let cfg = a.test.config(resolve_seed(a.test.seed, err)?)?;

    let mut csv = String::from("param,power\n");
    for (i, (value, gen_b)) in specs.iter().enumerate() {
        let point_cfg = ComparisonConfig {
            seed: cfg.seed.derive(Stream::Comparison, i as u64),
            ..cfg
        };
        let result = power_simulation(&gen_a, gen_b, a.pairs, &point_cfg)?;
        csv.push_str(&format!("{value},{}\n", result.power));
    }
    emit(a.output.as_deref(), &csv, out)
}

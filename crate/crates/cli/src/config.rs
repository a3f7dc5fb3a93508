//! Command-line grammar and the validated run configuration.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use murmur_core::densities::{NuWindow, Parity};
use murmur_core::frame::{Normalization, Sign};
use murmur_core::special::{bump, indicator, WeightFunction};
use murmur_core::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "murmur", version, about = "Murmuration averages for families of L-functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads; the MURMUR_WORKERS environment variable takes precedence.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quadratic Dirichlet characters by direct enumeration.
    Dirichlet {
        /// Conductor scale X.
        #[arg(long = "x")]
        x: f64,
        #[command(flatten)]
        common: CommonArgs,
        /// Average a(p) = λ(p)√p (default) or λ(p).
        #[arg(long, value_enum, default_value_t = NormArg::Raw)]
        normalization: NormArg,
    },
    /// Harmonic averages of level-1 forms through the Petersson formula.
    Petersson {
        #[arg(long = "k-window", num_args = 2, value_names = ["LO", "HI"])]
        k_window: Vec<u32>,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        tol: ToleranceArgs,
    },
    /// Symmetric-square averages, λ_f(p²), through the Petersson formula.
    Symsq {
        #[arg(long = "k-window", num_args = 2, value_names = ["LO", "HI"])]
        k_window: Vec<u32>,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        tol: ToleranceArgs,
    },
    /// The closed-form ILS murmuration density on a y-grid.
    DensityIls {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of grid points.
        #[arg(long, default_value_t = 1000)]
        points: usize,
    },
    /// Atoms of the ν(E) density.
    DensityNu {
        /// Window E as two endpoints, each a decimal or a fraction `n/d`.
        #[arg(long = "e", num_args = 2, value_names = ["LO", "HI"])]
        e: Vec<String>,
        #[arg(long = "q-max", default_value_t = 500)]
        q_max: u64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        prefactor: f64,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        tol: ToleranceArgs,
    },
    /// One-level-density kernels and their pairing with a bump test function.
    OldKernel {
        /// Which kernel to tabulate.
        #[arg(long, value_enum, default_value_t = ParityArg::Both)]
        parity: ParityArg,
        /// The test transform is a bump on [−θ, θ], θ < 2.
        #[arg(long, default_value_t = 0.8)]
        theta: f64,
        /// Tabulate W (physical) or its transform Ŵ (fourier).
        #[arg(long, value_enum, default_value_t = DomainArg::Fourier)]
        domain: DomainArg,
        /// Number of grid points.
        #[arg(long, default_value_t = 1000)]
        points: usize,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        tol: ToleranceArgs,
    },
    /// Murmuration series of an ingested coefficient file.
    IngestRun {
        /// Family file in the `#murmur-family v1` format.
        #[arg(long)]
        input: PathBuf,
        /// Conductor scale X.
        #[arg(long = "x")]
        x: f64,
        /// Average a(p) (raw) or λ(p) = a(p)/√p (analytic).
        #[arg(long, value_enum, default_value_t = NormArg::Raw)]
        normalization: NormArg,
        /// Also write the canonical form of the input here.
        #[arg(long)]
        canonical: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Weight Φ: `bump A B` or `indicator A B`.
    #[arg(long, num_args = 3, value_names = ["KIND", "A", "B"], allow_hyphen_values = true)]
    pub phi: Option<Vec<String>>,
    /// Sign class: +1, -1 or both.
    #[arg(long, allow_hyphen_values = true)]
    pub sign: Option<String>,
    /// Number of equal-width y-bins.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Range of y = p/X (or of the density argument).
    #[arg(long = "y-range", num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true)]
    pub y_range: Option<Vec<f64>>,
    /// Output path prefix; `<out>.csv` and optionally `<out>.svg`.
    #[arg(long, default_value = "murmur")]
    pub out: PathBuf,
    /// Also write an SVG plot.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Args)]
pub struct ToleranceArgs {
    /// Tail tolerance for truncated sums.
    #[arg(long = "tail-tol")]
    pub tail_tol: Option<f64>,
    /// Largest admissible cutoff for truncated sums.
    #[arg(long = "max-cutoff")]
    pub max_cutoff: Option<u64>,
    /// Absolute tolerance for adaptive quadrature.
    #[arg(long = "quad-tol")]
    pub quad_tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Analytic,
    Raw,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ParityArg {
    Even,
    Odd,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    Physical,
    Fourier,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhiSpec {
    Bump(f64, f64),
    Indicator(f64, f64),
}

impl PhiSpec {
    pub fn build(&self) -> Result<WeightFunction> {
        match *self {
            PhiSpec::Bump(a, b) => bump(a, b),
            PhiSpec::Indicator(a, b) => indicator(a, b),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignChoice {
    One(Sign),
    Both,
}

impl SignChoice {
    pub fn classes(&self) -> Vec<Sign> {
        match self {
            SignChoice::One(s) => vec![*s],
            SignChoice::Both => vec![Sign::Plus, Sign::Minus],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    pub tail: Option<f64>,
    pub max_cutoff: Option<u64>,
    pub quadrature: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Experiment {
    Dirichlet {
        x: f64,
        normalization: Normalization,
    },
    Petersson {
        k_lo: u32,
        k_hi: u32,
    },
    Symsq {
        k_lo: u32,
        k_hi: u32,
    },
    DensityIls {
        points: usize,
    },
    DensityNu {
        window: NuWindow,
        q_max: u64,
        prefactor: f64,
    },
    OldKernel {
        parities: Vec<Parity>,
        theta: f64,
        domain: DomainArg,
        points: usize,
    },
    IngestRun {
        input: PathBuf,
        x: f64,
        normalization: Normalization,
        canonical: Option<PathBuf>,
    },
}

/// A validated experiment plus the options every command shares.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub phi: PhiSpec,
    pub sign: SignChoice,
    pub bins: Option<usize>,
    pub y_range: Option<(f64, f64)>,
    pub out: PathBuf,
    pub plot: bool,
    pub tolerances: Tolerances,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("--{name} must be positive, got {v}")))
    }
}

fn parse_phi(raw: &Option<Vec<String>>) -> Result<PhiSpec> {
    let Some(v) = raw else {
        return Ok(PhiSpec::Bump(1.0, 2.0));
    };
    let num = |s: &str| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|_| usage(format!("--phi endpoint {s:?} is not a number")))
    };
    let (a, b) = (num(&v[1])?, num(&v[2])?);
    let spec = match v[0].as_str() {
        "bump" => PhiSpec::Bump(a, b),
        "indicator" => PhiSpec::Indicator(a, b),
        other => return Err(usage(format!("--phi kind must be bump or indicator, got {other:?}"))),
    };
    spec.build()?;
    Ok(spec)
}

fn parse_sign(raw: &Option<String>, default: SignChoice) -> Result<SignChoice> {
    match raw.as_deref() {
        None => Ok(default),
        Some("+1") | Some("1") | Some("+") => Ok(SignChoice::One(Sign::Plus)),
        Some("-1") | Some("-") => Ok(SignChoice::One(Sign::Minus)),
        Some("both") => Ok(SignChoice::Both),
        Some(other) => Err(usage(format!("--sign must be +1, -1 or both, got {other:?}"))),
    }
}

fn parse_endpoint(s: &str) -> Result<Endpoint> {
    if let Some((n, d)) = s.split_once('/') {
        let n: u64 = n.trim().parse().map_err(|_| usage(format!("bad fraction {s:?}")))?;
        let d: u64 = d.trim().parse().map_err(|_| usage(format!("bad fraction {s:?}")))?;
        if d == 0 {
            return Err(usage(format!("zero denominator in {s:?}")));
        }
        return Ok(Endpoint::Rational(n, d));
    }
    if !s.contains(['.', 'e', 'E']) {
        if let Ok(n) = s.parse::<u64>() {
            return Ok(Endpoint::Rational(n, 1));
        }
    }
    s.parse::<f64>()
        .map(Endpoint::Float)
        .map_err(|_| usage(format!("endpoint {s:?} is neither a decimal nor a fraction")))
}

enum Endpoint {
    Rational(u64, u64),
    Float(f64),
}

impl Endpoint {
    fn value(&self) -> f64 {
        match *self {
            Endpoint::Rational(n, d) => n as f64 / d as f64,
            Endpoint::Float(v) => v,
        }
    }
}

fn nu_window(e: &[String]) -> Result<NuWindow> {
    let lo = parse_endpoint(&e[0])?;
    let hi = parse_endpoint(&e[1])?;
    Ok(match (lo, hi) {
        (Endpoint::Rational(a, b), Endpoint::Rational(c, d)) => NuWindow::Rational { lo: (a, b), hi: (c, d) },
        (l, h) => NuWindow::Float {
            lo: l.value(),
            hi: h.value(),
        },
    })
}

fn k_window(v: &[u32]) -> Result<(u32, u32)> {
    if v.len() != 2 {
        return Err(usage("--k-window needs two weights"));
    }
    if v[0] < 4 || v[0] > v[1] {
        return Err(usage(format!("--k-window {} {} must satisfy 4 ≤ LO ≤ HI", v[0], v[1])));
    }
    Ok((v[0], v[1]))
}

fn norm(n: NormArg) -> Normalization {
    match n {
        NormArg::Analytic => Normalization::Analytic,
        NormArg::Raw => Normalization::RawSqrtP,
    }
}

fn tolerances(t: Option<&ToleranceArgs>) -> Result<Tolerances> {
    let Some(t) = t else {
        return Ok(Tolerances {
            tail: None,
            max_cutoff: None,
            quadrature: None,
        });
    };
    if let Some(v) = t.tail_tol {
        positive("tail-tol", v)?;
    }
    if let Some(v) = t.quad_tol {
        positive("quad-tol", v)?;
    }
    if t.max_cutoff == Some(0) {
        return Err(usage("--max-cutoff must be positive"));
    }
    Ok(Tolerances {
        tail: t.tail_tol,
        max_cutoff: t.max_cutoff,
        quadrature: t.quad_tol,
    })
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let (experiment, common, tol, default_sign) = match &cli.command {
            Command::Dirichlet {
                x,
                common,
                normalization,
            } => {
                let x = positive("x", *x)?;
                if x < 3.0 {
                    return Err(usage(format!("--x must be at least 3, got {x}")));
                }
                (
                    Experiment::Dirichlet {
                        x,
                        normalization: norm(*normalization),
                    },
                    common,
                    None,
                    SignChoice::Both,
                )
            }
            Command::Petersson {
                k_window: w,
                common,
                tol,
            } => {
                let (k_lo, k_hi) = k_window(w)?;
                (
                    Experiment::Petersson { k_lo, k_hi },
                    common,
                    Some(tol),
                    SignChoice::Both,
                )
            }
            Command::Symsq {
                k_window: w,
                common,
                tol,
            } => {
                let (k_lo, k_hi) = k_window(w)?;
                (
                    Experiment::Symsq { k_lo, k_hi },
                    common,
                    Some(tol),
                    SignChoice::One(Sign::Plus),
                )
            }
            Command::DensityIls { common, points } => {
                if *points < 2 {
                    return Err(usage("--points must be at least 2"));
                }
                (
                    Experiment::DensityIls { points: *points },
                    common,
                    None,
                    SignChoice::One(Sign::Plus),
                )
            }
            Command::DensityNu {
                e,
                q_max,
                prefactor,
                common,
                tol,
            } => {
                if *q_max == 0 {
                    return Err(usage("--q-max must be positive"));
                }
                if !prefactor.is_finite() {
                    return Err(usage("--prefactor must be finite"));
                }
                (
                    Experiment::DensityNu {
                        window: nu_window(e)?,
                        q_max: *q_max,
                        prefactor: *prefactor,
                    },
                    common,
                    Some(tol),
                    SignChoice::One(Sign::Plus),
                )
            }
            Command::OldKernel {
                parity,
                theta,
                domain,
                points,
                common,
                tol,
            } => {
                positive("theta", *theta)?;
                if *points < 2 {
                    return Err(usage("--points must be at least 2"));
                }
                let parities = match parity {
                    ParityArg::Even => vec![Parity::Even],
                    ParityArg::Odd => vec![Parity::Odd],
                    ParityArg::Both => vec![Parity::Even, Parity::Odd],
                };
                (
                    Experiment::OldKernel {
                        parities,
                        theta: *theta,
                        domain: *domain,
                        points: *points,
                    },
                    common,
                    Some(tol),
                    SignChoice::One(Sign::Plus),
                )
            }
            Command::IngestRun {
                input,
                x,
                normalization,
                canonical,
                common,
            } => (
                Experiment::IngestRun {
                    input: input.clone(),
                    x: positive("x", *x)?,
                    normalization: norm(*normalization),
                    canonical: canonical.clone(),
                },
                common,
                None,
                SignChoice::Both,
            ),
        };
        if common.bins == Some(0) {
            return Err(usage("--bins must be at least 1"));
        }
        let y_range = match &common.y_range {
            Some(v) => {
                if !(v[0] < v[1] && v[0].is_finite() && v[1].is_finite()) {
                    return Err(usage(format!("--y-range {} {} must be increasing", v[0], v[1])));
                }
                Some((v[0], v[1]))
            }
            None => None,
        };
        Ok(Self {
            experiment,
            phi: parse_phi(&common.phi)?,
            sign: parse_sign(&common.sign, default_sign)?,
            bins: common.bins,
            y_range,
            out: common.out.clone(),
            plot: common.plot,
            tolerances: tolerances(tol)?,
        })
    }
}

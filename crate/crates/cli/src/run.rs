//! Executes a validated configuration and writes its artifacts.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use murmur_core::arith::{sieve, ArithTables};
use murmur_core::compare::{normalized_residual, peak_location, weight_aspect_reference};
use murmur_core::densities::{
    ils_density, nu_density, old_pairing_tol, w_so, w_so_atoms, w_so_hat, w_so_hat_atoms, Atom, Parity,
};
use murmur_core::families::{ingest, quadratic_murmuration_classes};
use murmur_core::frame::{murmuration_series, MurmurationSeries, Sign};
use murmur_core::petersson::{harmonic_series, weight_conductor, HarmonicMode, WeightWindow};
use murmur_core::special::quadrature::DEFAULT_TOLERANCE;
use murmur_core::special::{TruncationPolicy, WeightFunction};
use murmur_core::{Error, Result};

use crate::config::{DomainArg, Experiment, RunConfig, SignChoice};
use crate::emit::{density_csv, emit_csv, fmt_f64, series_csv, svg, write_file, Overlay};

/// What a run produced.
#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

const DEFAULT_DIRICHLET_BINS: usize = 200;

/// `<out>.csv` for the first output, `<out>.<tag>.csv` for the others.
fn csv_path(out: &Path, index: usize, tag: &str) -> PathBuf {
    with_suffix(
        out,
        if index == 0 {
            "csv".to_string()
        } else {
            format!("{tag}.csv")
        },
    )
}

fn with_suffix(out: &Path, suffix: String) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn sign_tag(s: Sign) -> &'static str {
    match s {
        Sign::Plus => "plus",
        Sign::Minus => "minus",
    }
}

fn parity_tag(p: Parity) -> &'static str {
    match p {
        Parity::Even => "even",
        Parity::Odd => "odd",
    }
}

fn points_of(series: &MurmurationSeries) -> Vec<(f64, f64)> {
    series.samples().iter().map(|s| (s.y, s.value)).collect()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn policy(cfg: &RunConfig) -> TruncationPolicy {
    let TruncationPolicy::TailBound { tolerance, max_cutoff } = TruncationPolicy::default() else {
        unreachable!()
    };
    TruncationPolicy::TailBound {
        tolerance: cfg.tolerances.tail.unwrap_or(tolerance),
        max_cutoff: cfg.tolerances.max_cutoff.unwrap_or(max_cutoff),
    }
}

fn tables_for(limit: f64) -> Result<ArithTables> {
    if !(limit.is_finite() && limit < 4.0e9) {
        return Err(Error::Size(format!("table limit {limit} is too large")));
    }
    sieve((limit.ceil() as u64).max(1000))
}

fn maybe_bin(series: MurmurationSeries, bins: Option<usize>, range: (f64, f64)) -> Result<MurmurationSeries> {
    match bins {
        Some(b) => series.binned(range.0, range.1, b),
        None => Ok(series),
    }
}

fn write_svg(
    cfg: &RunConfig,
    title: &str,
    overlays: &[Overlay],
    atoms: &[Atom],
    files: &mut Vec<PathBuf>,
) -> Result<()> {
    if cfg.plot {
        let path = with_suffix(&cfg.out, "svg".into());
        write_file(&path, &svg(title, overlays, atoms))?;
        files.push(path);
    }
    Ok(())
}

fn peak_text(points: &[(f64, f64)], sign: Sign) -> String {
    // Report the extremum of the larger magnitude unless a sign is implied.
    match peak_location(points, sign) {
        Some((y, v)) => format!("peak_y={} peak_value={}", fmt_f64(y), fmt_f64(v)),
        None => "peak_y=NA peak_value=NA".into(),
    }
}

fn dominant_sign(points: &[(f64, f64)]) -> Sign {
    let hi = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let lo = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    if hi.abs() >= lo.abs() {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let phi = cfg.phi.build()?;
    match &cfg.experiment {
        Experiment::Dirichlet { x, normalization } => {
            let range = cfg.y_range.unwrap_or((0.0, 2.0));
            let (_, b) = phi.support();
            let tables = tables_for((range.1 * x).max(b * x) + 1.0)?;
            let primes = tables.primes_between((range.0 * x).ceil().max(2.0) as u64, (range.1 * x).floor() as u64);
            if primes.is_empty() {
                return Err(Error::Window(format!(
                    "no primes with p/X in [{}, {}]",
                    range.0, range.1
                )));
            }
            let classes = cfg.sign.classes();
            let all = quadratic_murmuration_classes(*x, &phi, &classes, primes, *normalization, &tables)?;
            let bins = Some(cfg.bins.unwrap_or(DEFAULT_DIRICHLET_BINS));
            let mut files = Vec::new();
            let mut overlays = Vec::new();
            let mut parts = Vec::new();
            for (i, (series, sign)) in all.into_iter().zip(&classes).enumerate() {
                let series = maybe_bin(series, bins, range)?;
                let path = csv_path(&cfg.out, i, sign_tag(*sign));
                emit_csv(&path, &series_csv(&series))?;
                files.push(path);
                let pts = points_of(&series);
                parts.push(format!(
                    "sign={sign} {} bins={}",
                    peak_text(&pts, dominant_sign(&pts)),
                    series.len()
                ));
                overlays.push(Overlay {
                    label: format!("quadratic d sign {sign}"),
                    points: pts,
                });
            }
            write_svg(
                cfg,
                &format!("quadratic characters, X = {x}"),
                &overlays,
                &[],
                &mut files,
            )?;
            Ok(Outcome {
                files,
                summary: format!("dirichlet X={x} {}", parts.join(" ")),
            })
        }
        Experiment::Petersson { k_lo, k_hi } | Experiment::Symsq { k_lo, k_hi } => {
            let symsq = matches!(cfg.experiment, Experiment::Symsq { .. });
            let window = WeightWindow::new(*k_lo, *k_hi)?;
            let scale = *k_lo as f64;
            let x = weight_conductor(scale);
            let range = cfg.y_range.unwrap_or((0.5, 2.5));
            let pol = policy(cfg);
            let cutoff_need = match pol {
                TruncationPolicy::TailBound { max_cutoff, .. } => max_cutoff as f64,
                TruncationPolicy::Fixed { cutoff } => cutoff as f64,
            };
            let tables = tables_for((range.1 * x).max(cutoff_need) + 1.0)?;
            let primes = tables.primes_between(
                (range.0 * x).ceil().max(2.0) as u64,
                (range.1 * x).floor().max(0.0) as u64,
            );
            if primes.is_empty() {
                return Err(Error::Window(format!(
                    "no primes with p/N(K) in [{}, {}] for N(K) = {x}",
                    range.0, range.1
                )));
            }
            let modes: Vec<(HarmonicMode, Option<Sign>)> = if symsq {
                vec![(HarmonicMode::SymmetricSquare, None)]
            } else {
                cfg.sign
                    .classes()
                    .into_iter()
                    .map(|s| (HarmonicMode::Class(s), Some(s)))
                    .collect()
            };
            let mut files = Vec::new();
            let mut overlays = Vec::new();
            let mut parts = Vec::new();
            for (i, (mode, sign)) in modes.iter().enumerate() {
                let series = harmonic_series(scale, window, primes, &phi, *mode, pol, &tables)?;
                let series = maybe_bin(series, cfg.bins, range)?;
                let tag = sign.map_or("symsq", sign_tag);
                let path = csv_path(&cfg.out, i, tag);
                emit_csv(&path, &series_csv(&series))?;
                files.push(path);
                let pts = points_of(&series);
                match sign {
                    Some(s) => {
                        let reference: Vec<f64> = pts
                            .iter()
                            .map(|p| weight_aspect_reference(p.0, &phi, *s, &tables))
                            .collect::<Result<_>>()?;
                        let inside: Vec<usize> = (0..pts.len()).filter(|&j| reference[j] != 0.0).collect();
                        let residual = if inside.is_empty() {
                            f64::NAN
                        } else {
                            normalized_residual(
                                &inside.iter().map(|&j| pts[j].1).collect::<Vec<_>>(),
                                &inside.iter().map(|&j| reference[j]).collect::<Vec<_>>(),
                            )
                        };
                        parts.push(format!(
                            "sign={s} {} residual={}",
                            peak_text(&pts, dominant_sign(&pts)),
                            fmt_f64(residual)
                        ));
                        // Least-squares scale so the reference overlays the data.
                        let num: f64 = pts.iter().zip(&reference).map(|(p, r)| p.1 * r).sum();
                        let den: f64 = reference.iter().map(|r| r * r).sum();
                        let c = if den > 0.0 { num / den } else { 0.0 };
                        overlays.push(Overlay {
                            label: format!("harmonic average, class {s}"),
                            points: pts.clone(),
                        });
                        overlays.push(Overlay {
                            label: format!("reference density × {c:.4}, class {s}"),
                            points: pts.iter().zip(&reference).map(|(p, r)| (p.0, c * r)).collect(),
                        });
                    }
                    None => {
                        parts.push(format!("symsq {}", peak_text(&pts, dominant_sign(&pts))));
                        overlays.push(Overlay {
                            label: "symmetric-square average".into(),
                            points: pts,
                        });
                    }
                }
            }
            let name = if symsq { "symsq" } else { "petersson" };
            write_svg(
                cfg,
                &format!("{name}, K = {k_lo}, weights in [{k_lo}, {k_hi}]"),
                &overlays,
                &[],
                &mut files,
            )?;
            Ok(Outcome {
                files,
                summary: format!(
                    "{name} K={k_lo} N(K)={} primes={} {}",
                    fmt_f64(x),
                    primes.len(),
                    parts.join(" ")
                ),
            })
        }
        Experiment::DensityIls { points } => {
            let (a, b) = phi.support();
            let range = cfg.y_range.unwrap_or((0.0, 5.0 * b / (16.0 * PI * PI)));
            if range.0 < 0.0 {
                return Err(Error::Domain("density y-range must be nonnegative".into()));
            }
            let c_max = 4.0 * PI * (range.1 / a).sqrt() + 2.0;
            let tables = tables_for(c_max)?;
            let grid = linspace(range.0, range.1, *points);
            let mut files = Vec::new();
            let mut overlays = Vec::new();
            let mut parts = Vec::new();
            for (i, sign) in cfg.sign.classes().into_iter().enumerate() {
                let pts: Vec<(f64, f64)> = grid
                    .iter()
                    .map(|&y| {
                        Ok((
                            y,
                            if y > 0.0 {
                                ils_density(y, &phi, sign, &tables)?
                            } else {
                                0.0
                            },
                        ))
                    })
                    .collect::<Result<_>>()?;
                let path = csv_path(&cfg.out, i, sign_tag(sign));
                emit_csv(&path, &density_csv(&pts, &[]))?;
                files.push(path);
                parts.push(format!("sign={sign} {}", peak_text(&pts, sign)));
                overlays.push(Overlay {
                    label: format!("ILS density, sign {sign}"),
                    points: pts,
                });
            }
            write_svg(cfg, "ILS murmuration density", &overlays, &[], &mut files)?;
            Ok(Outcome {
                files,
                summary: format!("density-ils points={points} {}", parts.join(" ")),
            })
        }
        Experiment::DensityNu {
            window,
            q_max,
            prefactor,
        } => {
            let tables = tables_for(*q_max as f64 + 17.0)?;
            let d = nu_density(*window, *q_max, *prefactor, cfg.tolerances.tail, &tables)?;
            let atoms = d.distribution.atoms().to_vec();
            let mut files = Vec::new();
            let path = csv_path(&cfg.out, 0, "");
            emit_csv(&path, &density_csv(&[], &atoms))?;
            files.push(path);
            write_svg(cfg, "nu(E) atoms", &[], &atoms, &mut files)?;
            let (lo, hi) = window.bounds();
            Ok(Outcome {
                files,
                summary: format!(
                    "density-nu E=[{}, {}] Q_max={q_max} atoms={} total_mass={} tail_bound={}",
                    fmt_f64(lo),
                    fmt_f64(hi),
                    atoms.len(),
                    fmt_f64(d.distribution.total_atomic_mass()),
                    fmt_f64(d.tail_bound)
                ),
            })
        }
        Experiment::OldKernel {
            parities,
            theta,
            domain,
            points,
        } => {
            if *theta >= 2.0 {
                return Err(Error::Domain(format!("--theta must be below 2, got {theta}")));
            }
            let test = WeightFunction::symmetric_bump(*theta)?;
            let tol = cfg.tolerances.quadrature.unwrap_or(DEFAULT_TOLERANCE);
            let default_range = match domain {
                DomainArg::Fourier => (-2.0, 2.0),
                DomainArg::Physical => (-3.0, 3.0),
            };
            let grid = linspace(
                cfg.y_range.map_or(default_range.0, |r| r.0),
                cfg.y_range.map_or(default_range.1, |r| r.1),
                *points,
            );
            let mut files = Vec::new();
            let mut overlays = Vec::new();
            let mut all_atoms = Vec::new();
            let mut parts = Vec::new();
            for (i, &parity) in parities.iter().enumerate() {
                let (pts, atoms): (Vec<(f64, f64)>, Vec<Atom>) = match domain {
                    DomainArg::Fourier => (
                        grid.iter().map(|&y| (y, w_so_hat(parity, y))).collect(),
                        w_so_hat_atoms(parity),
                    ),
                    DomainArg::Physical => (grid.iter().map(|&x| (x, w_so(parity, x))).collect(), w_so_atoms(parity)),
                };
                let path = csv_path(&cfg.out, i, parity_tag(parity));
                emit_csv(&path, &density_csv(&pts, &atoms))?;
                files.push(path);
                let pairing = old_pairing_tol(&test, parity, tol)?;
                parts.push(format!("{}_pairing={}", parity_tag(parity), fmt_f64(pairing)));
                overlays.push(Overlay {
                    label: format!("W_SO {}", parity_tag(parity)),
                    points: pts,
                });
                if all_atoms.is_empty() {
                    all_atoms = atoms;
                }
            }
            write_svg(cfg, "one-level-density kernels", &overlays, &all_atoms, &mut files)?;
            Ok(Outcome {
                files,
                summary: format!("old-kernel theta={} {}", fmt_f64(*theta), parts.join(" ")),
            })
        }
        Experiment::IngestRun {
            input,
            x,
            normalization,
            canonical,
        } => {
            let family = ingest(input)?;
            let mut files = Vec::new();
            if let Some(path) = canonical {
                family.write_canonical(path)?;
                files.push(path.clone());
            }
            let coverage = family
                .prime_coverage
                .ok_or_else(|| Error::Window("ingested family has no coefficients".into()))?;
            let range = cfg.y_range.unwrap_or((0.0, coverage as f64 / x));
            let tables = tables_for(range.1 * x + 1.0)?;
            let primes = tables.primes_between(
                (range.0 * x).ceil().max(2.0) as u64,
                (range.1 * x).floor().max(0.0) as u64,
            );
            if primes.is_empty() {
                return Err(Error::Window(format!(
                    "no primes with p/X in [{}, {}]",
                    range.0, range.1
                )));
            }
            let mut overlays = Vec::new();
            let mut parts = Vec::new();
            let classes = match cfg.sign {
                SignChoice::Both => vec![None, Some(Sign::Plus), Some(Sign::Minus)],
                SignChoice::One(s) => vec![Some(s)],
            };
            let mut written = 0;
            for class in classes {
                let members: Vec<_> = family
                    .records
                    .iter()
                    .filter(|r| class.is_none_or(|s| r.root_number() == s))
                    .cloned()
                    .collect();
                let series = match murmuration_series(&members, *x, &phi, primes, *normalization) {
                    Err(Error::Window(_)) if class.is_some() && matches!(cfg.sign, SignChoice::Both) => continue,
                    other => other?,
                };
                let series = maybe_bin(series, cfg.bins, range)?;
                let tag = class.map_or("all", sign_tag);
                let path = csv_path(&cfg.out, written, tag);
                written += 1;
                emit_csv(&path, &series_csv(&series))?;
                files.push(path);
                let pts = points_of(&series);
                parts.push(format!("{tag}: {}", peak_text(&pts, dominant_sign(&pts))));
                overlays.push(Overlay {
                    label: format!("ingested family, {tag}"),
                    points: pts,
                });
            }
            write_svg(cfg, &format!("ingested family, X = {x}"), &overlays, &[], &mut files)?;
            Ok(Outcome {
                files,
                summary: format!(
                    "ingest-run records={} digest={:016x} coverage={coverage} {}",
                    family.records.len(),
                    family.source_digest,
                    parts.join(" ")
                ),
            })
        }
    }
}

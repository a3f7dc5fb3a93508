//! Weighted family averages and murmuration series.
//!
//! A family is a list of [`FamilyRecord`]s ordered by conductor. For a weight
//! `Φ` and scale `X`, `A(f, X) = Σ_π Φ(N(π)/X) f(π)` and the expectation is
//! `A(f, X) / A(1, X)`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::special::WeightFunction;

/// Root number or sign class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_int(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(Error::Validation(format!("sign must be +1 or -1, got {v}"))),
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn as_int(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

/// Prime-indexed coefficients of one L-function.
pub trait Coefficients: Send + Sync {
    /// Analytically normalized `λ(p)`.
    fn lambda(&self, p: u64) -> Result<f64>;

    /// Raw `a(p) = λ(p)√p` when the source stores it directly.
    fn raw(&self, _p: u64) -> Option<Result<f64>> {
        None
    }
}

#[derive(Clone)]
pub struct FamilyRecord {
    label: String,
    conductor: f64,
    root_number: Sign,
    coefficients: Arc<dyn Coefficients>,
}

impl fmt::Debug for FamilyRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FamilyRecord")
            .field("label", &self.label)
            .field("conductor", &self.conductor)
            .field("root_number", &self.root_number)
            .finish_non_exhaustive()
    }
}

impl FamilyRecord {
    pub fn new(
        label: impl Into<String>,
        conductor: f64,
        root_number: Sign,
        coefficients: Arc<dyn Coefficients>,
    ) -> Result<Self> {
        let label = label.into();
        if !(conductor > 0.0 && conductor.is_finite()) {
            return Err(Error::Validation(format!(
                "record {label:?}: conductor must be positive, got {conductor}"
            )));
        }
        Ok(Self {
            label,
            conductor,
            root_number,
            coefficients,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn conductor(&self) -> f64 {
        self.conductor
    }

    pub fn root_number(&self) -> Sign {
        self.root_number
    }

    pub fn lambda(&self, p: u64) -> Result<f64> {
        self.coefficients.lambda(p)
    }

    /// `a(p)`, taken from the raw accessor when present and otherwise `λ(p)√p`.
    pub fn raw(&self, p: u64) -> Result<f64> {
        match self.coefficients.raw(p) {
            Some(v) => v,
            None => Ok(self.lambda(p)? * (p as f64).sqrt()),
        }
    }

    pub fn coefficient(&self, p: u64, normalization: Normalization) -> Result<f64> {
        match normalization {
            Normalization::Analytic => self.lambda(p),
            Normalization::RawSqrtP => self.raw(p),
        }
    }
}

/// Which coefficient a series averages: `λ(p)` or `a(p) = λ(p)√p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Normalization {
    #[default]
    Analytic,
    RawSqrtP,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub y: f64,
    pub value: f64,
    /// Number of primes aggregated into this sample.
    pub count: u64,
    /// Empirical standard error of the mean, available once `count ≥ 2`.
    pub std_err: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MurmurationSeries {
    samples: Vec<Sample>,
    window_scale: f64,
    normalization: Normalization,
}

impl MurmurationSeries {
    pub fn new(samples: Vec<Sample>, window_scale: f64, normalization: Normalization) -> Result<Self> {
        for w in samples.windows(2) {
            if !(w[0].y < w[1].y) {
                return Err(Error::Validation(format!(
                    "series abscissae must increase strictly ({} then {})",
                    w[0].y, w[1].y
                )));
            }
        }
        if let Some(s) = samples.iter().find(|s| s.count == 0) {
            return Err(Error::Validation(format!("sample at y={} has zero count", s.y)));
        }
        Ok(Self {
            samples,
            window_scale,
            normalization,
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn window_scale(&self) -> f64 {
        self.window_scale
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Groups samples into `bins` equal-width bins over `[y_lo, y_hi)` (the
    /// last bin is closed). Each bin reports its centre, the count-weighted
    /// mean, the total count and the standard error of the mean computed from
    /// the spread of its member samples. Empty bins are dropped.
    pub fn binned(&self, y_lo: f64, y_hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 || !(y_lo < y_hi) {
            return Err(Error::domain(format!(
                "binning needs bins ≥ 1 and y_lo < y_hi, got {bins} bins over [{y_lo}, {y_hi}]"
            )));
        }
        let width = (y_hi - y_lo) / bins as f64;
        // (Σc, Σc·v, Σc·v²)
        let mut acc = vec![(0u64, 0.0f64, 0.0f64); bins];
        for s in &self.samples {
            if s.y < y_lo || s.y > y_hi {
                continue;
            }
            let idx = (((s.y - y_lo) / width) as usize).min(bins - 1);
            let c = s.count as f64;
            let a = &mut acc[idx];
            a.0 += s.count;
            a.1 += c * s.value;
            a.2 += c * s.value * s.value;
        }
        let samples = acc
            .iter()
            .enumerate()
            .filter(|(_, a)| a.0 > 0)
            .map(|(i, &(n, sum, sq))| {
                let nf = n as f64;
                let mean = sum / nf;
                let std_err = (n >= 2).then(|| {
                    let var = ((sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
                    (var / nf).sqrt()
                });
                Sample {
                    y: y_lo + (i as f64 + 0.5) * width,
                    value: mean,
                    count: n,
                    std_err,
                }
            })
            .collect();
        Self::new(samples, self.window_scale, self.normalization)
    }

    /// Index of the sample with the largest `sign·value`.
    pub fn peak_index(&self, sign: Sign) -> Option<usize> {
        let s = sign.as_f64();
        self.samples
            .iter()
            .enumerate()
            .max_by(|a, b| (s * a.1.value).total_cmp(&(s * b.1.value)))
            .map(|(i, _)| i)
    }
}

/// `A_Φ(f, X) = Σ Φ(N(π)/X)·f(π)`, summed in family order. Records whose
/// weight vanishes are skipped without evaluating `f`.
pub fn weighted_sum<F>(family: &[FamilyRecord], f: F, x: f64, phi: &WeightFunction) -> Result<f64>
where
    F: Fn(&FamilyRecord) -> Result<f64>,
{
    check_scale(x)?;
    let mut total = 0.0;
    for rec in family {
        let w = phi.eval(rec.conductor / x);
        if w != 0.0 {
            total += w * f(rec)?;
        }
    }
    Ok(total)
}

/// `E[f; X] = A(f, X) / A(1, X)`.
pub fn expectation<F>(family: &[FamilyRecord], f: F, x: f64, phi: &WeightFunction) -> Result<f64>
where
    F: Fn(&FamilyRecord) -> Result<f64>,
{
    let den = weighted_sum(family, |_| Ok(1.0), x, phi)?;
    if den == 0.0 {
        return Err(Error::window(format!(
            "no family member has conductor in supp(Φ)·X for X = {x}"
        )));
    }
    Ok(weighted_sum(family, f, x, phi)? / den)
}

fn check_scale(x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::domain(format!("scale X must be positive, got {x}")));
    }
    Ok(())
}

/// One sample per prime: `y = p/X`, value `E[λ(p); X]` (or `E[a(p); X]`).
pub fn murmuration_series(
    family: &[FamilyRecord],
    x: f64,
    phi: &WeightFunction,
    primes: &[u64],
    normalization: Normalization,
) -> Result<MurmurationSeries> {
    check_scale(x)?;
    check_primes(primes)?;
    let active: Vec<(f64, &FamilyRecord)> = family
        .iter()
        .filter_map(|r| {
            let w = phi.eval(r.conductor / x);
            (w != 0.0).then_some((w, r))
        })
        .collect();
    let den: f64 = active.iter().map(|(w, _)| w).sum();
    if den == 0.0 {
        return Err(Error::window(format!(
            "no family member has conductor in supp(Φ)·X for X = {x}"
        )));
    }
    let values: Vec<f64> = primes
        .par_iter()
        .map(|&p| {
            let mut num = 0.0;
            for (w, r) in &active {
                num += w * r.coefficient(p, normalization)?;
            }
            Ok(num / den)
        })
        .collect::<Result<_>>()?;
    let samples = primes
        .iter()
        .zip(values)
        .map(|(&p, value)| Sample {
            y: p as f64 / x,
            value,
            count: 1,
            std_err: None,
        })
        .collect();
    MurmurationSeries::new(samples, x, normalization)
}

pub(crate) fn check_primes(primes: &[u64]) -> Result<()> {
    if primes.is_empty() {
        return Err(Error::domain("prime list is empty"));
    }
    if primes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("prime list must be strictly ascending"));
    }
    Ok(())
}

/// Closed interval `[lo, hi]` with `0 < lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::domain(format!("interval [{lo}, {hi}] must satisfy 0 < lo < hi")));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// `Σ log p · num(p) / Σ log p · den(p)` over the primes with `p/N ∈ E`.
/// Both sums run over exactly the same primes, taken from `primes`.
pub fn prime_window_average<F, G>(num: F, den: G, e: Interval, n: f64, primes: &[u64]) -> Result<f64>
where
    F: Fn(u64) -> Result<f64>,
    G: Fn(u64) -> Result<f64>,
{
    check_scale(n)?;
    let mut top = 0.0;
    let mut bottom = 0.0;
    let mut any = false;
    for &p in primes {
        if !e.contains(p as f64 / n) {
            continue;
        }
        any = true;
        let lp = (p as f64).ln();
        top += lp * num(p)?;
        bottom += lp * den(p)?;
    }
    if !any {
        return Err(Error::window(format!(
            "no prime p with p/N in [{}, {}] for N = {n}",
            e.lo, e.hi
        )));
    }
    if bottom == 0.0 {
        return Err(Error::window("denominator of the prime-window average vanishes"));
    }
    Ok(top / bottom)
}

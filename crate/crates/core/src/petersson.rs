//! The Petersson trace formula for level 1 and harmonic averages built on it.
//!
//! For even `k ≥ 4` and `m, n ≥ 1`,
//!
//! ```text
//! Δ_k(m, n) = δ_{m=n} + 2π i^k Σ_{c≥1} S(m, n; c)/c · J_{k−1}(4π√(mn)/c)
//! ```
//!
//! equals `Γ(k−1)/(4π√(mn))^{k−1} · Σ_f λ_f(m) λ_f(n) / ‖f‖²` over a Hecke
//! eigenbasis of weight `k` cusp forms with `a_f(1) = 1`, where
//! `λ_f(n) = a_f(n)/n^{(k−1)/2}`.

use std::f64::consts::PI;

use crate::arith::{gcd, kloosterman_direct, kloosterman_fast, ArithTables, KloostermanParams};
use crate::error::{Error, Result};
use crate::frame::{check_primes, MurmurationSeries, Normalization, Sample, Sign};
use crate::special::{bessel_j, petersson_prefactor, Truncation, TruncationPolicy, WeightFunction};

/// Highest weight whose Bessel order `k − 1` is supported.
pub const MAX_WEIGHT: u32 = 500;

/// `i^k` for even `k`: `+1` when `4 | k`, `−1` otherwise.
pub fn weight_sign(k: u32) -> Sign {
    if k.is_multiple_of(4) {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// Weight-aspect conductor `N(k) = ((k−1)/4π)²`.
pub fn weight_conductor(k: f64) -> f64 {
    ((k - 1.0) / (4.0 * PI)).powi(2)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeterssonQuery {
    k: u32,
    m: u64,
    n: u64,
    policy: TruncationPolicy,
}

impl PeterssonQuery {
    pub fn new(k: u32, m: u64, n: u64, policy: TruncationPolicy) -> Result<Self> {
        if k < 4 || k % 2 == 1 || k > MAX_WEIGHT {
            return Err(Error::domain(format!(
                "weight must be even with 4 ≤ k ≤ {MAX_WEIGHT}, got {k}"
            )));
        }
        if m == 0 || n == 0 {
            return Err(Error::domain("Petersson indices must be positive"));
        }
        if (m as f64) * (n as f64) > 6.0e7 {
            return Err(Error::domain(format!(
                "m·n = {} puts the leading Bessel argument beyond its supported range",
                m as u128 * n as u128
            )));
        }
        match policy {
            TruncationPolicy::Fixed { cutoff: 0 } => {
                return Err(Error::domain("fixed cutoff must be at least 1"));
            }
            TruncationPolicy::TailBound { tolerance, .. } if !(tolerance > 0.0) => {
                return Err(Error::domain(format!(
                    "tail tolerance must be positive, got {tolerance}"
                )));
            }
            _ => {}
        }
        Ok(Self { k, m, n, policy })
    }

    pub fn weight(&self) -> u32 {
        self.k
    }

    pub fn indices(&self) -> (u64, u64) {
        (self.m, self.n)
    }

    pub fn policy(&self) -> TruncationPolicy {
        self.policy
    }

    /// `ln` of the proven bound on `2π Σ_{c>C} |S(m,n;c)/c · J_{k−1}(4π√(mn)/c)|`.
    ///
    /// Uses `|J_ν(x)| ≤ (x/2)^ν/ν!`, the Weil bound
    /// `|S| ≤ τ(c)√gcd(m,n,c)√c` with `τ(c) ≤ 2√c`, and
    /// `Σ_{c>C} c^{−ν} ≤ C^{1−ν}/(ν−1)`.
    pub fn ln_tail_bound(&self, cutoff: u64) -> f64 {
        let nu = (self.k - 1) as f64;
        let g = gcd(self.m, self.n) as f64;
        let mn = self.m as f64 * self.n as f64;
        let ln_lead = (4.0 * PI).ln() + 0.5 * g.ln() + nu * (2.0 * PI * mn.sqrt()).ln()
            - ln_factorial(self.k - 1)
            - (nu - 1.0).ln();
        ln_lead + (1.0 - nu) * (cutoff as f64).ln()
    }

    /// The cutoff `C` and its tail bound under this query's policy.
    pub fn truncation(&self) -> Result<Truncation> {
        match self.policy {
            TruncationPolicy::Fixed { cutoff } => Ok(Truncation {
                cutoff,
                tail_bound: self.ln_tail_bound(cutoff).exp(),
            }),
            TruncationPolicy::TailBound { tolerance, max_cutoff } => {
                let nu = (self.k - 1) as f64;
                let mn = self.m as f64 * self.n as f64;
                // Bessel argument at C below (k−1)/10, and never fewer than 1000 terms
                // unless the budget is smaller; the tail bound still decides.
                let floor = ((40.0 * PI * mn.sqrt() / nu).ceil() as u64).max(1000).min(max_cutoff);
                // Smallest C with the bound ≤ tolerance, from ln bound(1) + (1−ν) ln C ≤ ln tol.
                let needed = ((self.ln_tail_bound(1) - tolerance.ln()) / (nu - 1.0)).exp();
                let mut cutoff = floor.max(needed.ceil().min(u64::MAX as f64 / 2.0) as u64);
                while self.ln_tail_bound(cutoff).exp() > tolerance {
                    cutoff += 1;
                }
                if cutoff > max_cutoff {
                    return Err(Error::Accuracy {
                        message: format!(
                            "tail tolerance {tolerance:e} for k={}, m={}, n={} needs cutoff {cutoff} > budget {max_cutoff}",
                            self.k, self.m, self.n
                        ),
                        best: f64::NAN,
                        bound: self.ln_tail_bound(max_cutoff).exp(),
                    });
                }
                Ok(Truncation {
                    cutoff,
                    tail_bound: self.ln_tail_bound(cutoff).exp(),
                })
            }
        }
    }
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|j| (j as f64).ln()).sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeterssonValue {
    pub value: f64,
    pub truncation: Truncation,
}

fn kloosterman_table(m: u64, n: u64, cutoff: u64, tables: &ArithTables) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    (1..=cutoff)
        .into_par_iter()
        .map(|c| {
            let params = KloostermanParams::new(m as i64, n as i64, c)?;
            if c <= tables.limit() {
                kloosterman_fast(params, tables)
            } else {
                Ok(kloosterman_direct(params))
            }
        })
        .collect()
}

/// The Kloosterman–Bessel sum for a query using precomputed `S(m, n; c)`,
/// `c = 1..=sums.len()`, truncated at `cutoff`.
fn delta_from_sums(k: u32, m: u64, n: u64, cutoff: u64, sums: &[f64]) -> Result<f64> {
    let scale = 4.0 * PI * (m as f64 * n as f64).sqrt();
    let mut acc = 0.0;
    for c in 1..=cutoff {
        let s = sums[(c - 1) as usize];
        if s == 0.0 {
            continue;
        }
        let cf = c as f64;
        acc += s / cf * bessel_j(k - 1, scale / cf)?;
    }
    let diagonal = if m == n { 1.0 } else { 0.0 };
    Ok(diagonal + 2.0 * PI * weight_sign(k).as_f64() * acc)
}

/// Right-hand side of the Petersson formula with certified truncation.
pub fn petersson_delta(query: &PeterssonQuery, tables: &ArithTables) -> Result<PeterssonValue> {
    let (truncation, shortfall) = budgeted(query)?;
    let sums = kloosterman_table(query.m, query.n, truncation.cutoff, tables)?;
    let value = delta_from_sums(query.k, query.m, query.n, truncation.cutoff, &sums)?;
    if let Some(message) = shortfall {
        return Err(Error::Accuracy {
            message,
            best: value,
            bound: truncation.tail_bound,
        });
    }
    Ok(PeterssonValue { value, truncation })
}

/// The query's truncation, or, when the tolerance needs more terms than the
/// budget allows, the truncation at the budget together with the reason.
fn budgeted(query: &PeterssonQuery) -> Result<(Truncation, Option<String>)> {
    match query.truncation() {
        Ok(t) => Ok((t, None)),
        Err(Error::Accuracy { message, bound, .. }) => {
            let TruncationPolicy::TailBound { max_cutoff, .. } = query.policy else {
                unreachable!("fixed truncation never fails");
            };
            Ok((
                Truncation {
                    cutoff: max_cutoff,
                    tail_bound: bound,
                },
                Some(message),
            ))
        }
        Err(e) => Err(e),
    }
}

/// Inclusive range of weights considered by a harmonic average.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeightWindow {
    pub lo: u32,
    pub hi: u32,
}

impl WeightWindow {
    pub fn new(lo: u32, hi: u32) -> Result<Self> {
        if lo > hi || hi > MAX_WEIGHT {
            return Err(Error::domain(format!(
                "weight window [{lo}, {hi}] must satisfy lo ≤ hi ≤ {MAX_WEIGHT}"
            )));
        }
        Ok(Self { lo, hi })
    }
}

/// Result of a harmonic average together with its bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicAverage {
    pub value: f64,
    /// `Σ_k Φ(N(k)/X) Δ_k(1, n)`.
    pub numerator: f64,
    /// `Σ_k Φ(N(k)/X) Δ_k(1, 1)`.
    pub denominator: f64,
    /// Weights `k` that entered, with their weights `Φ(N(k)/X)`.
    pub weights: Vec<(u32, f64)>,
    /// Sum of the tail bounds of every Petersson evaluation used.
    pub tail_bound: f64,
    /// How `value` relates to averages of Hecke eigenvalues.
    pub metadata: String,
}

fn selected_weights(
    scale_weight: f64,
    window: WeightWindow,
    phi: &WeightFunction,
    class: Option<Sign>,
) -> Result<Vec<(u32, f64)>> {
    if !(scale_weight > 1.0 && scale_weight.is_finite()) {
        return Err(Error::domain(format!(
            "scale weight K must exceed 1, got {scale_weight}"
        )));
    }
    let x = weight_conductor(scale_weight);
    let start = window.lo.max(4).next_multiple_of(2);
    let ks: Vec<(u32, f64)> = (start..=window.hi)
        .step_by(2)
        .filter(|&k| class.is_none_or(|s| weight_sign(k) == s))
        .filter_map(|k| {
            let w = phi.eval(weight_conductor(k as f64) / x);
            (w != 0.0).then_some((k, w))
        })
        .collect();
    if ks.is_empty() {
        let class = class.map_or("any".to_string(), |s| s.to_string());
        return Err(Error::window(format!(
            "no weight of class {class} in [{}, {}] has Φ(N(k)/N(K)) > 0 for K = {scale_weight}",
            window.lo, window.hi
        )));
    }
    Ok(ks)
}

fn weighted_petersson(
    ks: &[(u32, f64)],
    n: u64,
    policy: TruncationPolicy,
    tables: &ArithTables,
) -> Result<(f64, f64, f64, Option<String>)> {
    let queries: Vec<(PeterssonQuery, PeterssonQuery, f64)> = ks
        .iter()
        .map(|&(k, w)| {
            Ok((
                PeterssonQuery::new(k, 1, n, policy)?,
                PeterssonQuery::new(k, 1, 1, policy)?,
                w,
            ))
        })
        .collect::<Result<_>>()?;
    let mut cut_n = Vec::with_capacity(queries.len());
    let mut cut_1 = Vec::with_capacity(queries.len());
    let mut shortfall = None;
    for (qn, q1, _) in &queries {
        for (q, out) in [(qn, &mut cut_n), (q1, &mut cut_1)] {
            let (t, miss) = budgeted(q)?;
            out.push(t);
            shortfall = shortfall.or(miss);
        }
    }
    let max_n = cut_n.iter().map(|t| t.cutoff).max().unwrap_or(1);
    let max_1 = cut_1.iter().map(|t| t.cutoff).max().unwrap_or(1);
    let sums_n = kloosterman_table(1, n, max_n, tables)?;
    let sums_1 = kloosterman_table(1, 1, max_1, tables)?;
    let (mut num, mut den, mut tail) = (0.0, 0.0, 0.0);
    for (i, &(k, w)) in ks.iter().enumerate() {
        num += w * delta_from_sums(k, 1, n, cut_n[i].cutoff, &sums_n)?;
        den += w * delta_from_sums(k, 1, 1, cut_1[i].cutoff, &sums_1)?;
        tail += w * (cut_n[i].tail_bound + cut_1[i].tail_bound);
    }
    Ok((num, den, tail, shortfall))
}

/// Turns a budget shortfall into an accuracy error carrying the uncertified
/// value; `bound` is the summed weighted tail of numerator and denominator.
fn shortfall_error(shortfall: Option<String>, value: f64, bound: f64) -> Result<()> {
    match shortfall {
        Some(message) => Err(Error::Accuracy {
            message,
            best: value,
            bound,
        }),
        None => Ok(()),
    }
}

/// Harmonic-weight murmuration average at the prime `p`:
///
/// ```text
/// √p · Σ_k Φ(N(k)/X) Δ_k(1, p) / Σ_k Φ(N(k)/X) Δ_k(1, 1),   X = N(K),
/// ```
///
/// over even `k` in `window` with `i^k` equal to `sign`.
pub fn harmonic_murmuration(
    scale_weight: f64,
    window: WeightWindow,
    p: u64,
    phi: &WeightFunction,
    sign: Sign,
    policy: TruncationPolicy,
    tables: &ArithTables,
) -> Result<HarmonicAverage> {
    let ks = selected_weights(scale_weight, window, phi, Some(sign))?;
    let (numerator, denominator, tail, shortfall) = weighted_petersson(&ks, p, policy, tables)?;
    let value = (p as f64).sqrt() * numerator / denominator;
    shortfall_error(shortfall, value, tail)?;
    let metadata = format!(
        "value = sqrt(p) * sum_k w_k D_k(1,p) / sum_k w_k D_k(1,1) with w_k = Phi(N(k)/N(K)), \
         N(k) = ((k-1)/4pi)^2, K = {scale_weight}, class i^k = {sign}; \
         D_k(1,n) = G_k(n) sum_f lambda_f(n)/||f||^2 with G_k(n) = Gamma(k-1)/(4pi sqrt(n))^(k-1) \
         (ln G_k(1) for k = {}: {:.6}); ||f||^2 is proportional to L(1, Sym^2 f) with an undetermined constant",
        ks[0].0,
        petersson_prefactor(ks[0].0, 1, 1)?.ln
    );
    Ok(HarmonicAverage {
        value,
        numerator,
        denominator,
        weights: ks,
        tail_bound: tail,
        metadata,
    })
}

/// Symmetric-square variant: `Σ_k Φ(N(k)/X) Δ_k(1, p²) / Σ_k Φ(N(k)/X) Δ_k(1, 1)`
/// over every even `k` in the window, since all symmetric squares have root
/// number `+1`.
pub fn symsq_murmuration(
    scale_weight: f64,
    window: WeightWindow,
    p: u64,
    phi: &WeightFunction,
    policy: TruncationPolicy,
    tables: &ArithTables,
) -> Result<HarmonicAverage> {
    let ks = selected_weights(scale_weight, window, phi, None)?;
    let (numerator, denominator, tail, shortfall) = weighted_petersson(&ks, p * p, policy, tables)?;
    let value = numerator / denominator;
    shortfall_error(shortfall, value, tail)?;
    let metadata = format!(
        "value = sum_k w_k D_k(1,p^2) / sum_k w_k D_k(1,1) with w_k = Phi(N(k)/N(K)), \
         N(k) = ((k-1)/4pi)^2, K = {scale_weight}, all even k; D_k(1,n) = G_k(n) sum_f lambda_f(n)/||f||^2 \
         with G_k(n) = Gamma(k-1)/(4pi sqrt(n))^(k-1)"
    );
    Ok(HarmonicAverage {
        value,
        numerator,
        denominator,
        weights: ks,
        tail_bound: tail,
        metadata,
    })
}

/// Which trace-formula average a series samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HarmonicMode {
    Class(Sign),
    SymmetricSquare,
}

/// Harmonic averages at each prime, as a series in `y = p/N(K)`.
pub fn harmonic_series(
    scale_weight: f64,
    window: WeightWindow,
    primes: &[u64],
    phi: &WeightFunction,
    mode: HarmonicMode,
    policy: TruncationPolicy,
    tables: &ArithTables,
) -> Result<MurmurationSeries> {
    check_primes(primes)?;
    let x = weight_conductor(scale_weight);
    let mut samples = Vec::with_capacity(primes.len());
    for &p in primes {
        let avg = match mode {
            HarmonicMode::Class(sign) => harmonic_murmuration(scale_weight, window, p, phi, sign, policy, tables)?,
            HarmonicMode::SymmetricSquare => symsq_murmuration(scale_weight, window, p, phi, policy, tables)?,
        };
        samples.push(Sample {
            y: p as f64 / x,
            value: avg.value,
            count: 1,
            std_err: None,
        });
    }
    MurmurationSeries::new(samples, x, Normalization::RawSqrtP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::sieve;
    use crate::special::bump;

    fn tables() -> ArithTables {
        sieve(200_000).unwrap()
    }

    #[test]
    fn phase_is_real_sign() {
        assert_eq!(weight_sign(4), Sign::Plus);
        assert_eq!(weight_sign(12), Sign::Plus);
        assert_eq!(weight_sign(6), Sign::Minus);
        assert_eq!(weight_sign(98), Sign::Minus);
    }

    #[test]
    fn rejects_bad_queries() {
        let pol = TruncationPolicy::default();
        assert!(PeterssonQuery::new(13, 1, 1, pol).is_err());
        assert!(PeterssonQuery::new(2, 1, 1, pol).is_err());
        assert!(PeterssonQuery::new(502, 1, 1, pol).is_err());
        assert!(PeterssonQuery::new(12, 0, 1, pol).is_err());
    }

    #[test]
    fn high_weight_is_diagonal() {
        let t = tables();
        let pol = TruncationPolicy::default();
        let d11 = petersson_delta(&PeterssonQuery::new(100, 1, 1, pol).unwrap(), &t).unwrap();
        let d12 = petersson_delta(&PeterssonQuery::new(100, 1, 2, pol).unwrap(), &t).unwrap();
        assert!((d11.value - 1.0).abs() < 1e-30);
        assert!(d12.value.abs() < 1e-30);
        assert!(d11.truncation.tail_bound <= 1e-12);
    }

    #[test]
    fn weight_twelve_at_two() {
        let t = tables();
        let pol = TruncationPolicy::default();
        let a = petersson_delta(&PeterssonQuery::new(12, 1, 2, pol).unwrap(), &t).unwrap();
        let b = petersson_delta(&PeterssonQuery::new(12, 1, 1, pol).unwrap(), &t).unwrap();
        let expected = -24.0 / 2f64.powf(5.5);
        assert!((a.value / b.value - expected).abs() < 1e-9, "{}", a.value / b.value);
    }

    #[test]
    fn tail_bound_is_honest() {
        let t = tables();
        for (k, n) in [(12u32, 3u64), (16, 7), (20, 25)] {
            let coarse = PeterssonQuery::new(k, 1, n, TruncationPolicy::Fixed { cutoff: 200 }).unwrap();
            let fine = PeterssonQuery::new(k, 1, n, TruncationPolicy::Fixed { cutoff: 3000 }).unwrap();
            let a = petersson_delta(&coarse, &t).unwrap();
            let b = petersson_delta(&fine, &t).unwrap();
            assert!((a.value - b.value).abs() <= a.truncation.tail_bound);
        }
    }

    #[test]
    fn budget_exhaustion_is_an_accuracy_error() {
        let pol = TruncationPolicy::TailBound {
            tolerance: 1e-12,
            max_cutoff: 10,
        };
        let q = PeterssonQuery::new(4, 1, 1000, pol).unwrap();
        assert!(matches!(q.truncation(), Err(Error::Accuracy { .. })));
    }

    #[test]
    fn single_weight_harmonic_average() {
        let t = tables();
        let pol = TruncationPolicy::default();
        let phi = bump(0.5, 2.0).unwrap();
        let w = WeightWindow::new(12, 12).unwrap();
        let avg = harmonic_murmuration(12.0, w, 2, &phi, Sign::Plus, pol, &t).unwrap();
        let expected = -24.0 / 2f64.powf(5.5) * 2f64.sqrt();
        assert!((avg.value - expected).abs() < 1e-9);
        assert_eq!(avg.weights.len(), 1);
        assert!(matches!(
            harmonic_murmuration(12.0, w, 2, &phi, Sign::Minus, pol, &t),
            Err(Error::Window(_))
        ));
    }

    #[test]
    fn symsq_isolated_high_weight_vanishes() {
        let t = tables();
        let phi = bump(0.5, 2.0).unwrap();
        let w = WeightWindow::new(100, 100).unwrap();
        let avg = symsq_murmuration(100.0, w, 2, &phi, TruncationPolicy::default(), &t).unwrap();
        assert!(avg.value.abs() < 1e-20);
    }
}

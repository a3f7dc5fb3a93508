//! Closed-form reference densities and one-level-density kernels.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::arith::{gcd, ArithTables};
use crate::error::{Error, Result};
use crate::frame::{Coefficients, Sign};
use crate::special::{quadrature_tol, WeightFunction};

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// A measure split into point masses and a density.
#[derive(Clone)]
pub struct DistributionValue {
    atoms: Vec<Atom>,
    continuous: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for DistributionValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DistributionValue")
            .field("atoms", &self.atoms)
            .finish_non_exhaustive()
    }
}

impl DistributionValue {
    pub fn new<F>(atoms: Vec<Atom>, continuous: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        for w in atoms.windows(2) {
            if !(w[0].location < w[1].location) {
                return Err(Error::Validation(format!(
                    "atom locations must be distinct and sorted ({} then {})",
                    w[0].location, w[1].location
                )));
            }
        }
        if let Some(a) = atoms.iter().find(|a| !a.mass.is_finite() || !a.location.is_finite()) {
            return Err(Error::Validation(format!("atom {a:?} is not finite")));
        }
        Ok(Self {
            atoms,
            continuous: Arc::new(continuous),
        })
    }

    /// A purely atomic measure.
    pub fn atomic(atoms: Vec<Atom>) -> Result<Self> {
        Self::new(atoms, |_| 0.0)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn continuous(&self, x: f64) -> f64 {
        (self.continuous)(x)
    }

    pub fn total_atomic_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }
}

/// The integers `c ≥ 1` with `16π²y/c² ∈ [a, b]`, where `[a, b] = supp(Φ)`.
pub fn admissible_c(y: f64, phi: &WeightFunction) -> Vec<u64> {
    let (a, b) = phi.support();
    if !(y > 0.0) || b <= 0.0 {
        return Vec::new();
    }
    let t = 16.0 * PI * PI * y;
    let lo = (t / b).sqrt().ceil().max(1.0) as u64;
    // a ≤ 0 leaves no upper limit on c; such weights are rejected earlier.
    let hi = (t / a.max(f64::MIN_POSITIVE)).sqrt().floor() as u64;
    // Repair floating-point rounding at both ends against the defining inequality.
    let inside = |c: u64| {
        let v = t / (c as f64 * c as f64);
        a <= v && v <= b
    };
    let lo = if lo > 1 && inside(lo - 1) { lo - 1 } else { lo };
    let hi = if inside(hi + 1) { hi + 1 } else { hi };
    (lo..=hi).filter(|&c| c >= 1 && inside(c)).collect()
}

/// `sign · 4π Σ_{c≥1} μ²(c)/(c² φ(c)) · Φ(16π²y/c²)`, summed exactly over the
/// admissible `c`.
pub fn ils_density(y: f64, phi: &WeightFunction, sign: Sign, tables: &ArithTables) -> Result<f64> {
    let (a, _) = phi.support();
    if a <= 0.0 {
        return Err(Error::domain("ILS density needs supp(Φ) inside (0, ∞)"));
    }
    let t = 16.0 * PI * PI * y;
    let mut total = 0.0;
    for c in admissible_c(y, phi) {
        if !tables.is_squarefree(c)? {
            continue;
        }
        let cf = c as f64;
        total += phi.eval(t / (cf * cf)) / (cf * cf * tables.euler_phi(c)? as f64);
    }
    Ok(sign.as_f64() * 4.0 * PI * total)
}

/// Endpoints of the window `E` for the `ν(E)` density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NuWindow {
    /// `[lo.0/lo.1, hi.0/hi.1]`, compared exactly.
    Rational { lo: (u64, u64), hi: (u64, u64) },
    /// Floating endpoints; a location within relative `1e-12` of an endpoint
    /// counts as lying on it.
    Float { lo: f64, hi: f64 },
}

pub const ENDPOINT_SNAP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Place {
    Outside,
    Interior,
    Endpoint,
}

impl NuWindow {
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            NuWindow::Rational { lo, hi } => (lo.0 as f64 / lo.1 as f64, hi.0 as f64 / hi.1 as f64),
            NuWindow::Float { lo, hi } => (lo, hi),
        }
    }

    fn validate(&self) -> Result<()> {
        if let NuWindow::Rational { lo, hi } = self {
            if lo.1 == 0 || hi.1 == 0 || lo.0 == 0 {
                return Err(Error::domain(
                    "rational endpoints need positive numerators and denominators",
                ));
            }
        }
        let (lo, hi) = self.bounds();
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::domain(format!("window [{lo}, {hi}] must satisfy 0 < lo < hi")));
        }
        Ok(())
    }

    /// Where `(q/a)²` sits relative to the window.
    fn place(&self, q: u64, a: u64) -> Place {
        match *self {
            NuWindow::Rational { lo, hi } => {
                // (q/a)² vs n/d  ⇔  q²·d vs n·a²
                let lhs = |d: u64| (q as u128 * q as u128) * d as u128;
                let rhs = |n: u64| n as u128 * (a as u128 * a as u128);
                let (l1, r1) = (lhs(lo.1), rhs(lo.0));
                let (l2, r2) = (lhs(hi.1), rhs(hi.0));
                if l1 < r1 || l2 > r2 {
                    Place::Outside
                } else if l1 == r1 || l2 == r2 {
                    Place::Endpoint
                } else {
                    Place::Interior
                }
            }
            NuWindow::Float { lo, hi } => {
                let v = (q as f64 / a as f64).powi(2);
                let near = |e: f64| (v - e).abs() <= ENDPOINT_SNAP * e.max(1.0);
                if near(lo) || near(hi) {
                    Place::Endpoint
                } else if v < lo || v > hi {
                    Place::Outside
                } else {
                    Place::Interior
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NuAtom {
    pub a: u64,
    pub q: u64,
    pub location: f64,
    pub mass: f64,
    pub endpoint: bool,
}

#[derive(Clone, Debug)]
pub struct NuDensity {
    pub atoms: Vec<NuAtom>,
    pub distribution: DistributionValue,
    /// Proven upper bound on the total |mass| of atoms with `q > Q_max`.
    pub tail_bound: f64,
    pub q_max: u64,
}

fn nu_atoms_for_q(window: &NuWindow, q: u64, prefactor: f64, tables: &ArithTables) -> Result<Vec<NuAtom>> {
    if !tables.is_squarefree(q)? {
        return Ok(Vec::new());
    }
    let (lo, hi) = window.bounds();
    let qf = q as f64;
    let phi = tables.euler_phi(q)? as f64;
    let sigma = tables.divisor_sigma(q)? as f64;
    let weight = prefactor / (phi * phi * sigma);
    // a ∈ [q/√hi, q/√lo], widened by one so exact comparisons decide the ends.
    let a_lo = ((qf / hi.sqrt()).floor() as u64).saturating_sub(1).max(1);
    let a_hi = (qf / lo.sqrt()).ceil() as u64 + 1;
    let mut out = Vec::new();
    for a in a_lo..=a_hi {
        if gcd(a, q) != 1 {
            continue;
        }
        let place = window.place(q, a);
        if place == Place::Outside {
            continue;
        }
        let r = qf / a as f64;
        let mut mass = weight * r * r * r;
        if place == Place::Endpoint {
            mass *= 0.5;
        }
        out.push(NuAtom {
            a,
            q,
            location: r * r,
            mass,
            endpoint: place == Place::Endpoint,
        });
    }
    Ok(out)
}

/// Atoms of `ν(E)`: at `(q/a)²` for coprime `a, q` with `q ≤ Q_max`
/// squarefree and `(q/a)² ∈ E`, of mass
/// `prefactor · μ(q)²/(φ(q)²σ(q)) · (q/a)³`, halved on the endpoints of `E`.
///
/// When `tolerance` is given and the certified tail bound exceeds it, the
/// result is an accuracy error.
pub fn nu_density(
    window: NuWindow,
    q_max: u64,
    prefactor: f64,
    tolerance: Option<f64>,
    tables: &ArithTables,
) -> Result<NuDensity> {
    window.validate()?;
    if q_max == 0 {
        return Err(Error::domain("Q_max must be at least 1"));
    }
    if !prefactor.is_finite() {
        return Err(Error::domain("prefactor must be finite"));
    }
    if q_max.max(16) > tables.limit() {
        return Err(Error::OutOfRange {
            what: "Q_max",
            value: q_max.max(16),
            limit: tables.limit(),
        });
    }
    let per_q: Vec<Vec<NuAtom>> = (1..=q_max)
        .into_par_iter()
        .map(|q| nu_atoms_for_q(&window, q, prefactor, tables))
        .collect::<Result<_>>()?;
    let mut atoms: Vec<NuAtom> = per_q.into_iter().flatten().collect();
    atoms.sort_by(|x, y| x.location.total_cmp(&y.location));
    let tail_bound = nu_tail_bound(&window, q_max, prefactor, tables)?;
    if let Some(tol) = tolerance {
        if tail_bound > tol {
            let best: f64 = atoms.iter().map(|a| a.mass).sum();
            return Err(Error::Accuracy {
                message: format!("Q_max = {q_max} cannot certify the tail to {tol:e}"),
                best,
                bound: tail_bound,
            });
        }
    }
    let distribution = DistributionValue::atomic(
        atoms
            .iter()
            .map(|a| Atom {
                location: a.location,
                mass: a.mass,
            })
            .collect(),
    )?;
    Ok(NuDensity {
        atoms,
        distribution,
        tail_bound,
        q_max,
    })
}

/// Upper bound on `Σ_{q > Q} Σ_a |mass|`.
///
/// Each term is at most `|prefactor| · hi^{3/2} / (φ(q)²σ(q))`, with at most
/// `q(1/√lo − 1/√hi) + 1` admissible `a`. For squarefree `q`,
/// `φ(q)σ(q) ≥ 6q²/π²` and `q/φ(q) < e^γ ln ln q + 2.51/ln ln q` (`q ≥ 3`), and
/// the resulting decreasing summands are bounded by integrals from `Q`.
/// Moduli in `(Q, 16]` are summed exactly because the integral estimates need
/// `ln ln Q > 0` and monotone summands.
fn nu_tail_bound(window: &NuWindow, q_max: u64, prefactor: f64, tables: &ArithTables) -> Result<f64> {
    let (lo, hi) = window.bounds();
    let pre = prefactor.abs();
    let mut exact = 0.0;
    for q in (q_max + 1)..=16 {
        exact += nu_atoms_for_q(window, q, pre, tables)?
            .iter()
            .map(|a| a.mass)
            .sum::<f64>();
    }
    let qe = q_max.max(16) as f64;
    let ll = qe.ln().ln();
    let l = qe.ln();
    let g = EULER_GAMMA.exp();
    let i2 = (g * (ll + 1.0 / l) + 2.51 / ll) / qe;
    let i3 = (g * (ll / 2.0 + 1.0 / (4.0 * l)) + 2.51 / (2.0 * ll)) / (qe * qe);
    let len = 1.0 / lo.sqrt() - 1.0 / hi.sqrt();
    let analytic = pre * hi.powf(1.5) * (PI * PI / 6.0) * (len * i2 + i3);
    Ok(exact + analytic)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

/// `sin(2πx)/(2πx)` with the value `1` at `x = 0`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let t = 2.0 * PI * x;
    t.sin() / t
}

/// Continuous part of the one-level-density kernel: `1 + sinc` (even) or
/// `1 − sinc` (odd). The odd kernel's `δ_0` is reported by [`w_so_atoms`].
pub fn w_so(parity: Parity, x: f64) -> f64 {
    match parity {
        Parity::Even => 1.0 + sinc(x),
        Parity::Odd => 1.0 - sinc(x),
    }
}

pub fn w_so_atoms(parity: Parity) -> Vec<Atom> {
    match parity {
        Parity::Even => Vec::new(),
        Parity::Odd => vec![Atom {
            location: 0.0,
            mass: 1.0,
        }],
    }
}

fn unit_indicator(y: f64) -> f64 {
    if (-1.0..=1.0).contains(&y) {
        1.0
    } else {
        0.0
    }
}

/// Continuous part of the transformed kernel:
/// `1_{[−1,1]}(y)/2` (odd) or `(2 − 1_{[−1,1]}(y))/2` (even).
pub fn w_so_hat(parity: Parity, y: f64) -> f64 {
    match parity {
        Parity::Odd => 0.5 * unit_indicator(y),
        Parity::Even => 0.5 * (2.0 - unit_indicator(y)),
    }
}

/// Both transformed kernels carry a unit atom at the origin.
pub fn w_so_hat_atoms(_parity: Parity) -> Vec<Atom> {
    vec![Atom {
        location: 0.0,
        mass: 1.0,
    }]
}

pub fn w_so_distribution(parity: Parity) -> DistributionValue {
    DistributionValue::new(w_so_atoms(parity), move |x| w_so(parity, x)).expect("static atoms")
}

pub fn w_so_hat_distribution(parity: Parity) -> DistributionValue {
    DistributionValue::new(w_so_hat_atoms(parity), move |y| w_so_hat(parity, y)).expect("static atoms")
}

/// `∫ φ̂(y) Ŵ(y) dy`, with the continuous part integrated piecewise between
/// the jumps at `±1` and the atom contributing `φ̂(0)`.
pub fn old_pairing(phi_hat: &WeightFunction, parity: Parity) -> Result<f64> {
    old_pairing_tol(phi_hat, parity, crate::special::quadrature::DEFAULT_TOLERANCE)
}

pub fn old_pairing_tol(phi_hat: &WeightFunction, parity: Parity, tol: f64) -> Result<f64> {
    let (a, b) = phi_hat.support();
    if a <= -2.0 || b >= 2.0 {
        return Err(Error::domain(format!("supp(φ̂) = [{a}, {b}] must lie inside (−2, 2)")));
    }
    let mut cuts = vec![a];
    cuts.extend([-1.0, 1.0].into_iter().filter(|&t| a < t && t < b));
    cuts.push(b);
    let pieces = (cuts.len() - 1) as f64;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        // Ŵ is constant on each piece; evaluate it at the midpoint.
        let level = w_so_hat(parity, mid);
        if level == 0.0 {
            continue;
        }
        let r = quadrature_tol(|y| phi_hat.eval(y), w[0], w[1], tol / pieces)?;
        total += level * r.value;
    }
    for atom in w_so_hat_atoms(parity) {
        total += atom.mass * phi_hat.eval(atom.location);
    }
    Ok(total)
}

/// `Σ_p λ(p) log p/√p · φ̂(log p/log N)` over the primes `p ≤ N^θ`, where
/// `[−θ, θ] ⊇ supp(φ̂)`.
pub fn explicit_prime_sum(
    coefficients: &dyn Coefficients,
    n: f64,
    phi_hat: &WeightFunction,
    tables: &ArithTables,
) -> Result<f64> {
    if !(n > 1.0 && n.is_finite()) {
        return Err(Error::domain(format!("N must exceed 1, got {n}")));
    }
    let (a, b) = phi_hat.support();
    let theta = a.abs().max(b.abs());
    let top = n.powf(theta);
    if top < 2.0 {
        return Ok(0.0);
    }
    let top = top.floor() as u64;
    if top > tables.limit() {
        return Err(Error::OutOfRange {
            what: "N^θ",
            value: top,
            limit: tables.limit(),
        });
    }
    let ln_n = n.ln();
    let mut total = 0.0;
    for &p in tables.primes_between(2, top) {
        let lp = (p as f64).ln();
        let w = phi_hat.eval(lp / ln_n);
        if w == 0.0 {
            continue;
        }
        total += coefficients.lambda(p)? * lp / (p as f64).sqrt() * w;
    }
    Ok(total)
}

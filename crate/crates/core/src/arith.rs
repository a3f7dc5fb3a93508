//! Exact integer kernels: a smallest-prime-factor sieve, the classical
//! multiplicative functions, the Kronecker symbol and Kloosterman sums.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest sieve limit accepted; factor tables are stored as `u32`.
pub const MAX_SIEVE_LIMIT: u64 = u32::MAX as u64;

/// Smallest-prime-factor table over `[0, limit]` plus the ascending prime list.
///
/// Immutable once built, so it can be shared freely across threads.
#[derive(Clone, Debug)]
pub struct ArithTables {
    limit: u64,
    spf: Vec<u32>,
    primes: Vec<u64>,
}

/// Builds the tables with a linear sieve.
pub fn sieve(limit: u64) -> Result<ArithTables> {
    if limit < 2 {
        return Err(Error::domain(format!("sieve limit must be at least 2, got {limit}")));
    }
    if limit > MAX_SIEVE_LIMIT {
        return Err(Error::Size(format!(
            "sieve limit {limit} exceeds the supported maximum {MAX_SIEVE_LIMIT}"
        )));
    }
    let len = usize::try_from(limit)
        .ok()
        .and_then(|l| l.checked_add(1))
        .ok_or_else(|| Error::Size(format!("sieve limit {limit} overflows usize")))?;

    let mut spf = vec![0u32; len];
    let mut primes: Vec<u64> = Vec::new();
    for i in 2..len {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u64);
        }
        let si = spf[i] as u64;
        for &p in &primes {
            let j = p as usize * i;
            if p > si || j >= len {
                break;
            }
            spf[j] = p as u32;
        }
    }
    Ok(ArithTables { limit, spf, primes })
}

impl ArithTables {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// All primes up to the limit, ascending.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Primes in the closed range `[lo, hi]` (clipped to the table).
    pub fn primes_between(&self, lo: u64, hi: u64) -> &[u64] {
        let start = self.primes.partition_point(|&p| p < lo);
        let end = self.primes.partition_point(|&p| p <= hi);
        &self.primes[start..end.max(start)]
    }

    fn check(&self, n: u64) -> Result<()> {
        if n == 0 || n > self.limit {
            return Err(Error::OutOfRange {
                what: "n",
                value: n,
                limit: self.limit,
            });
        }
        Ok(())
    }

    pub fn is_prime(&self, n: u64) -> Result<bool> {
        self.check(n)?;
        Ok(n >= 2 && self.spf[n as usize] as u64 == n)
    }

    pub fn smallest_prime_factor(&self, n: u64) -> Result<u64> {
        self.check(n)?;
        if n == 1 {
            return Ok(1);
        }
        Ok(self.spf[n as usize] as u64)
    }

    /// Prime factorization as `(prime, exponent)` pairs in ascending order.
    pub fn factorize(&self, n: u64) -> Result<Vec<(u64, u32)>> {
        self.check(n)?;
        let mut out: Vec<(u64, u32)> = Vec::new();
        let mut m = n as usize;
        while m > 1 {
            let p = self.spf[m] as usize;
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            out.push((p as u64, e));
        }
        Ok(out)
    }

    pub fn mobius(&self, n: u64) -> Result<i8> {
        let mut sign = 1i8;
        for (_, e) in self.factorize(n)? {
            if e > 1 {
                return Ok(0);
            }
            sign = -sign;
        }
        Ok(sign)
    }

    pub fn is_squarefree(&self, n: u64) -> Result<bool> {
        Ok(self.factorize(n)?.iter().all(|&(_, e)| e == 1))
    }

    pub fn euler_phi(&self, n: u64) -> Result<u64> {
        Ok(self
            .factorize(n)?
            .into_iter()
            .map(|(p, e)| (p - 1) * p.pow(e - 1))
            .product())
    }

    pub fn divisor_sigma(&self, n: u64) -> Result<u64> {
        Ok(self
            .factorize(n)?
            .into_iter()
            .map(|(p, e)| (p.pow(e + 1) - 1) / (p - 1))
            .product())
    }

    /// Number of divisors, τ(n).
    pub fn num_divisors(&self, n: u64) -> Result<u64> {
        Ok(self.factorize(n)?.into_iter().map(|(_, e)| e as u64 + 1).product())
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    if m <= i64::MAX as u64 {
        // Bézout coefficients stay below m in absolute value.
        let (mut old_r, mut r) = ((a % m) as i64, m as i64);
        let (mut old_s, mut s) = (1i64, 0i64);
        while r != 0 {
            let q = old_r / r;
            (old_r, r) = (r, old_r - q * r);
            (old_s, s) = (s, old_s - q * s);
        }
        return (old_r == 1).then(|| old_s.rem_euclid(m as i64) as u64);
    }
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Jacobi symbol `(a | n)` for odd positive `n`.
fn jacobi(mut a: u64, mut n: u64) -> i8 {
    debug_assert!(n % 2 == 1);
    let mut t = 1i8;
    a %= n;
    while a != 0 {
        let z = a.trailing_zeros();
        a >>= z;
        if z & 1 == 1 && (n & 7 == 3 || n & 7 == 5) {
            t = -t;
        }
        if a & 3 == 3 && n & 3 == 3 {
            t = -t;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Kronecker symbol `(d | n)` for arbitrary integers, using the standard
/// completion at `n = 0`, `n = -1` and `n = 2`.
pub fn kronecker(d: i64, n: i64) -> i8 {
    let d = d as i128;
    let mut n = n as i128;
    if n == 0 {
        return if d == 1 || d == -1 { 1 } else { 0 };
    }
    let mut result = 1i8;
    if n < 0 {
        n = -n;
        if d < 0 {
            result = -result;
        }
    }
    let v = n.trailing_zeros();
    if v > 0 {
        if d % 2 == 0 {
            return 0;
        }
        n >>= v;
        if v % 2 == 1 {
            let r = d.rem_euclid(8);
            if r == 3 || r == 5 {
                result = -result;
            }
        }
    }
    if n == 1 {
        return result;
    }
    let a = d.rem_euclid(n) as u64;
    result * jacobi(a, n as u64)
}

/// Kronecker symbol `(d | p)` for a prime `p`; skips the general bookkeeping.
#[inline]
pub fn kronecker_prime(d: i64, p: u64) -> i8 {
    if p == 2 {
        return match d.rem_euclid(8) {
            1 | 7 => 1,
            3 | 5 => -1,
            _ => 0,
        };
    }
    jacobi(d.rem_euclid(p as i64) as u64, p)
}

/// The triple `(m, n; c)` of a Kloosterman sum `S(m, n; c)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KloostermanParams {
    pub m: i64,
    pub n: i64,
    pub c: u64,
}

impl KloostermanParams {
    pub fn new(m: i64, n: i64, c: u64) -> Result<Self> {
        if c == 0 {
            return Err(Error::domain("Kloosterman modulus must be positive"));
        }
        Ok(Self { m, n, c })
    }

    /// `m` and `n` reduced into `[0, c)`.
    pub fn reduced(&self) -> (u64, u64) {
        let c = self.c as i64;
        (self.m.rem_euclid(c) as u64, self.n.rem_euclid(c) as u64)
    }
}

/// Naive complex Kloosterman sum: `Σ_{d ∈ (Z/cZ)^×} e((md + n d̄)/c)`.
///
/// Returns `(re, im)`. For `c = 1` the single residue class gives `1`.
pub fn kloosterman_complex(params: KloostermanParams) -> (f64, f64) {
    let c = params.c;
    if c == 1 {
        return (1.0, 0.0);
    }
    let (m, n) = params.reduced();
    let (mut re, mut im) = (0.0, 0.0);
    for d in 1..c {
        let Some(dinv) = mod_inverse(d, c) else {
            continue;
        };
        let r = ((m as u128 * d as u128 + n as u128 * dinv as u128) % c as u128) as f64;
        let (s, co) = (TAU * r / c as f64).sin_cos();
        re += co;
        im += s;
    }
    (re, im)
}

/// Kloosterman sum by direct cosine summation over all units mod `c`.
///
/// # Panics
///
/// Panics if the imaginary part of the complex sum exceeds `1e-9`; it vanishes
/// identically, so a violation means a broken summation.
pub fn kloosterman_direct(params: KloostermanParams) -> f64 {
    let (re, im) = kloosterman_complex(params);
    assert!(
        im.abs() < 1e-9,
        "imaginary part {im:e} of S({}, {}; {}) is not negligible",
        params.m,
        params.n,
        params.c
    );
    re
}

/// Inverses of all units modulo `q` (entry 0 for non-units), by batch inversion.
fn unit_inverses(q: u64, units: &[u64]) -> Vec<u64> {
    let mut prefix = Vec::with_capacity(units.len());
    let mut acc = 1u64;
    for &u in units {
        acc = acc * u % q;
        prefix.push(acc);
    }
    let mut inv_acc = mod_inverse(acc, q).expect("product of units is a unit");
    let mut out = vec![0u64; q as usize];
    for i in (0..units.len()).rev() {
        let before = if i == 0 { 1 } else { prefix[i - 1] };
        out[units[i] as usize] = inv_acc * before % q;
        inv_acc = inv_acc * units[i] % q;
    }
    out
}

/// `S(a, b; q)` for a prime power `q = p^e`, summed directly.
fn kloosterman_prime_power(a: u64, b: u64, p: u64, q: u64) -> f64 {
    if q == 1 {
        return 1.0;
    }
    let units: Vec<u64> = (1..q).filter(|d| d % p != 0).collect();
    let inv = unit_inverses(q, &units);
    let scale = TAU / q as f64;
    units
        .iter()
        .map(|&d| {
            let r = (a * d % q + b * inv[d as usize] % q) % q;
            (scale * r as f64).cos()
        })
        .sum()
}

/// Kloosterman sum through the factorization of `c`.
///
/// Uses twisted multiplicativity: for `c = q·r` with `gcd(q, r) = 1`,
/// `S(m, n; c) = S(m r̄, n r̄; q) · S(m q̄, n q̄; r)`, applied across all prime
/// powers of `c`, with each prime-power factor summed directly.
pub fn kloosterman_fast(params: KloostermanParams, tables: &ArithTables) -> Result<f64> {
    let c = params.c;
    if c > tables.limit() {
        return Err(Error::OutOfRange {
            what: "Kloosterman modulus",
            value: c,
            limit: tables.limit(),
        });
    }
    if c == 1 {
        return Ok(1.0);
    }
    let (m, n) = params.reduced();
    let mut value = 1.0;
    for (p, e) in tables.factorize(c)? {
        let q = p.pow(e);
        let rest = c / q;
        let twist = mod_inverse(rest % q, q).expect("coprime cofactor");
        let a = (m % q) * twist % q;
        let b = (n % q) * twist % q;
        value *= kloosterman_prime_power(a, b, p, q);
    }
    Ok(value)
}

/// `S(m, n; c)` for every `c` in `1..=c_max`, in order. Each entry is computed
/// independently, so the work is spread over the rayon pool.
pub fn kloosterman_range(m: i64, n: i64, c_max: u64, tables: &ArithTables) -> Result<Vec<f64>> {
    (1..=c_max)
        .into_par_iter()
        .map(|c| kloosterman_fast(KloostermanParams { m, n, c }, tables))
        .collect()
}

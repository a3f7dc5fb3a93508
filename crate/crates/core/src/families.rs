//! Concrete families: real quadratic Dirichlet characters, and coefficient
//! tables ingested from files.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hasher;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::arith::{kronecker, kronecker_prime, ArithTables};
use crate::error::{Error, Result};
use crate::frame::{check_primes, Coefficients, FamilyRecord, MurmurationSeries, Normalization, Sample, Sign};
use crate::special::WeightFunction;

fn squarefree_by_trial(n: u64) -> bool {
    let mut n = n;
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return false;
            }
        }
        p += 1;
    }
    true
}

/// `d ≡ 1 (mod 4)` squarefree with `d ≠ 1`, or `d = 4m` with `m ≡ 2, 3 (mod 4)`
/// squarefree.
pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => squarefree_by_trial(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && squarefree_by_trial(m.unsigned_abs())
        }
        _ => false,
    }
}

/// The primitive real character `χ_d = (d | ·)` of a fundamental discriminant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadraticCharacter {
    d: i64,
}

impl QuadraticCharacter {
    pub fn new(d: i64) -> Result<Self> {
        if !is_fundamental_discriminant(d) {
            return Err(Error::domain(format!("{d} is not a fundamental discriminant")));
        }
        Ok(Self { d })
    }

    pub fn discriminant(&self) -> i64 {
        self.d
    }

    pub fn conductor(&self) -> u64 {
        self.d.unsigned_abs()
    }

    pub fn parity_class(&self) -> Sign {
        if self.d > 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn chi(&self, n: i64) -> i8 {
        kronecker(self.d, n)
    }
}

impl Coefficients for QuadraticCharacter {
    fn lambda(&self, p: u64) -> Result<f64> {
        Ok(kronecker_prime(self.d, p) as f64)
    }
}

fn tabled_fundamental(d: i64, tables: &ArithTables) -> Result<bool> {
    if d == 0 || d == 1 {
        return Ok(false);
    }
    Ok(match d.rem_euclid(4) {
        1 => tables.is_squarefree(d.unsigned_abs())?,
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && tables.is_squarefree(m.unsigned_abs())?
        }
        _ => false,
    })
}

/// All fundamental discriminants with `|d|/X ∈ [a, b]`, both signs, ordered by
/// `|d|` and then by sign (negative first).
pub fn enumerate_quadratic(x: f64, support: (f64, f64), tables: &ArithTables) -> Result<Vec<QuadraticCharacter>> {
    if !(x >= 3.0 && x.is_finite()) {
        return Err(Error::domain(format!("X must be at least 3, got {x}")));
    }
    let (a, b) = support;
    if !(a > 0.0 && a < b) {
        return Err(Error::domain(format!("support [{a}, {b}] must satisfy 0 < a < b")));
    }
    let lo = (a * x).ceil().max(1.0) as u64;
    let hi = (b * x).floor() as u64;
    if hi > tables.limit() {
        return Err(Error::OutOfRange {
            what: "discriminant bound",
            value: hi,
            limit: tables.limit(),
        });
    }
    let chunks: Vec<Vec<QuadraticCharacter>> = (lo..=hi)
        .into_par_iter()
        .map(|n| {
            let mut out = Vec::with_capacity(2);
            for d in [-(n as i64), n as i64] {
                if tabled_fundamental(d, tables)? {
                    out.push(QuadraticCharacter { d });
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Family records for one sign class, in enumeration order.
pub fn quadratic_family(x: f64, phi: &WeightFunction, parity: Sign, tables: &ArithTables) -> Result<Vec<FamilyRecord>> {
    enumerate_quadratic(x, phi.support(), tables)?
        .into_iter()
        .filter(|c| c.parity_class() == parity)
        .map(|c| FamilyRecord::new(c.d.to_string(), c.conductor() as f64, Sign::Plus, Arc::new(c)))
        .collect()
}

/// Bitset of the nonzero squares modulo an odd prime `p`.
fn square_bits(p: u64) -> Vec<u64> {
    let mut bits = vec![0u64; (p as usize >> 6) + 1];
    // (a+1)² = a² + 2a + 1 stays below 2p before reduction.
    let mut sq = 0u64;
    for a in 0..(p - 1) / 2 {
        sq += 2 * a + 1;
        if sq >= p {
            sq -= p;
        }
        bits[(sq >> 6) as usize] |= 1 << (sq & 63);
    }
    bits
}

/// `Σ_d w_d (d | p)` for odd `p` from a residue bitset. All members must have
/// the same sign and be sorted by `|d|`, so `|d| mod p` can be advanced by
/// the gaps instead of divided out.
fn residue_table_sum(members: &[(i64, f64)], p: u64, squares: &[u64]) -> f64 {
    let negative = members.first().is_some_and(|m| m.0 < 0);
    let mut total = 0.0;
    let mut prev = 0u64;
    let mut r = 0u64;
    for &(d, w) in members {
        let n = d.unsigned_abs();
        r += n - prev;
        prev = n;
        if r >= p {
            r %= p;
        }
        if r == 0 {
            continue;
        }
        let idx = if negative { p - r } else { r } as usize;
        let bit = (squares[idx >> 6] >> (idx & 63)) & 1;
        total += w * (2.0 * bit as f64 - 1.0);
    }
    total
}

/// `E[χ_d(p)]` over fundamental discriminants of one sign with `|d|/X` in
/// `supp(Φ)`, weighted by `Φ(|d|/X)`.
///
/// Agrees with [`crate::frame::murmuration_series`] on the records of
/// [`quadratic_family`]; this path evaluates characters prime by prime
/// through residue tables, which is much faster for large families.
pub fn quadratic_murmuration(
    x: f64,
    phi: &WeightFunction,
    parity: Sign,
    primes: &[u64],
    normalization: Normalization,
    tables: &ArithTables,
) -> Result<MurmurationSeries> {
    let mut out = quadratic_murmuration_classes(x, phi, &[parity], primes, normalization, tables)?;
    Ok(out.remove(0))
}

/// [`quadratic_murmuration`] for several sign classes at once, sharing the
/// residue table of each prime between them.
pub fn quadratic_murmuration_classes(
    x: f64,
    phi: &WeightFunction,
    parities: &[Sign],
    primes: &[u64],
    normalization: Normalization,
    tables: &ArithTables,
) -> Result<Vec<MurmurationSeries>> {
    check_primes(primes)?;
    let all = enumerate_quadratic(x, phi.support(), tables)?;
    let mut classes = Vec::with_capacity(parities.len());
    for &parity in parities {
        let members: Vec<(i64, f64)> = all
            .iter()
            .filter(|c| c.parity_class() == parity)
            .filter_map(|c| {
                let w = phi.eval(c.conductor() as f64 / x);
                (w != 0.0).then_some((c.d, w))
            })
            .collect();
        let den: f64 = members.iter().map(|m| m.1).sum();
        if den == 0.0 {
            return Err(Error::window(format!(
                "no fundamental discriminant of class {parity} with |d|/X in supp(Φ) for X = {x}"
            )));
        }
        classes.push((members, den));
    }
    let largest = classes.iter().map(|c| c.0.len()).sum::<usize>();
    let per_prime: Vec<Vec<f64>> = primes
        .par_iter()
        .map(|&p| {
            // A residue table costs about p/2 steps; a Jacobi symbol per member
            // costs a few dozen.
            let squares = (p != 2 && (p as usize) <= 40 * largest).then(|| square_bits(p));
            classes
                .iter()
                .map(|(members, den)| {
                    let num: f64 = match &squares {
                        Some(bits) => residue_table_sum(members, p, bits),
                        None => members.iter().map(|&(d, w)| w * kronecker_prime(d, p) as f64).sum(),
                    };
                    let mean = num / den;
                    match normalization {
                        Normalization::Analytic => mean,
                        Normalization::RawSqrtP => mean * (p as f64).sqrt(),
                    }
                })
                .collect()
        })
        .collect();
    (0..classes.len())
        .map(|i| {
            let samples = primes
                .iter()
                .zip(&per_prime)
                .map(|(&p, v)| Sample {
                    y: p as f64 / x,
                    value: v[i],
                    count: 1,
                    std_err: None,
                })
                .collect();
            MurmurationSeries::new(samples, x, normalization)
        })
        .collect()
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = fnv::FnvHasher::default();
    h.write(bytes);
    h.finish()
}

pub const FAMILY_MAGIC: &str = "#murmur-family v1";
pub const RECORD_HEADER: &str = "label,conductor,root_number";
pub const COEFFICIENT_HEADER: &str = "label,p,ap";

/// Raw coefficients `a(p)` of an ingested record.
#[derive(Clone, Debug, PartialEq)]
pub struct IngestedCoefficients {
    label: String,
    raw: BTreeMap<u64, f64>,
}

impl IngestedCoefficients {
    pub fn max_prime(&self) -> Option<u64> {
        self.raw.keys().next_back().copied()
    }
}

impl Coefficients for IngestedCoefficients {
    fn lambda(&self, p: u64) -> Result<f64> {
        self.raw
            .get(&p)
            .map(|a| a / (p as f64).sqrt())
            .ok_or_else(|| Error::Coverage {
                label: self.label.clone(),
                prime: p,
            })
    }

    fn raw(&self, p: u64) -> Option<Result<f64>> {
        Some(self.raw.get(&p).copied().ok_or_else(|| Error::Coverage {
            label: self.label.clone(),
            prime: p,
        }))
    }
}

#[derive(Clone, Debug)]
struct RecordText {
    label: String,
    conductor: String,
    root_number: String,
    coefficients: Vec<(u64, String)>,
}

#[derive(Clone, Debug)]
pub struct IngestedFamily {
    pub records: Vec<FamilyRecord>,
    /// FNV-1a of the file after line-ending normalization.
    pub source_digest: u64,
    /// Largest prime up to which every record has a coefficient; `None` for
    /// an empty family or a record with no coefficients.
    pub prime_coverage: Option<u64>,
    text: Vec<RecordText>,
}

fn normalize_line_endings(bytes: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'\r' {
            out.push(b'\n');
            if bytes.get(i + 1) == Some(&b'\n') {
                i += 1;
            }
        } else {
            out.push(bytes[i]);
        }
        i += 1;
    }
    out
}

fn parse_positive(token: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("{what} {token:?} is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("{what} {token:?} is not finite"),
        });
    }
    Ok(v)
}

/// Parses the family format from memory.
pub fn parse_family(bytes: &[u8]) -> Result<IngestedFamily> {
    let normalized = normalize_line_endings(bytes);
    let source_digest = fnv1a64(&normalized);
    let text = std::str::from_utf8(&normalized).map_err(|e| Error::Parse {
        line: 1 + normalized[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count(),
        message: "invalid UTF-8".into(),
    })?;
    let mut lines = text.split('\n').enumerate().map(|(i, l)| (i + 1, l)).peekable();
    match lines.next() {
        Some((_, l)) if l == FAMILY_MAGIC => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected {FAMILY_MAGIC:?}"),
            })
        }
    }
    match lines.next() {
        Some((_, l)) if l == RECORD_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 2,
                message: format!("expected {RECORD_HEADER:?}"),
            })
        }
    }

    let mut records: Vec<RecordText> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (n, line) in lines.by_ref() {
        if line.is_empty() {
            break;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: n,
                message: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let label = fields[0];
        if label.is_empty() {
            return Err(Error::Parse {
                line: n,
                message: "empty label".into(),
            });
        }
        let conductor = parse_positive(fields[1], n, "conductor")?;
        if conductor < 1.0 {
            return Err(Error::Validation(format!(
                "line {n}: conductor {conductor} of {label:?} is below 1"
            )));
        }
        if fields[2] != "1" && fields[2] != "-1" {
            return Err(Error::Validation(format!(
                "line {n}: root number {:?} of {label:?} is not 1 or -1",
                fields[2]
            )));
        }
        if index.insert(label.to_string(), records.len()).is_some() {
            return Err(Error::Validation(format!("line {n}: duplicate label {label:?}")));
        }
        records.push(RecordText {
            label: label.to_string(),
            conductor: fields[1].to_string(),
            root_number: fields[2].to_string(),
            coefficients: Vec::new(),
        });
    }

    let mut raw: Vec<BTreeMap<u64, f64>> = vec![BTreeMap::new(); records.len()];
    if let Some(&(_, l)) = lines.peek() {
        if l == COEFFICIENT_HEADER {
            lines.next();
        }
    }
    for (n, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: n,
                message: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let Some(&idx) = index.get(fields[0]) else {
            return Err(Error::Validation(format!("line {n}: unknown label {:?}", fields[0])));
        };
        let p: u64 = fields[1].parse().map_err(|_| Error::Parse {
            line: n,
            message: format!("prime {:?} is not a positive integer", fields[1]),
        })?;
        if p < 2 {
            return Err(Error::Parse {
                line: n,
                message: format!("prime {p} is below 2"),
            });
        }
        let ap = parse_positive(fields[2], n, "coefficient")?;
        if raw[idx].insert(p, ap).is_some() {
            return Err(Error::Validation(format!(
                "line {n}: duplicate coefficient for {:?} at p = {p}",
                fields[0]
            )));
        }
        records[idx].coefficients.push((p, fields[2].to_string()));
    }

    let mut family = Vec::with_capacity(records.len());
    let mut coverage: Option<u64> = None;
    for (i, (rec, coeffs)) in records.iter_mut().zip(raw).enumerate() {
        rec.coefficients.sort_by_key(|c| c.0);
        let source = IngestedCoefficients {
            label: rec.label.clone(),
            raw: coeffs,
        };
        let top = source.max_prime();
        coverage = match (i, coverage, top) {
            (0, _, t) => t,
            (_, Some(c), Some(t)) => Some(c.min(t)),
            _ => None,
        };
        let root = if rec.root_number == "1" {
            Sign::Plus
        } else {
            Sign::Minus
        };
        family.push(FamilyRecord::new(
            rec.label.clone(),
            rec.conductor.parse::<f64>().expect("validated above"),
            root,
            Arc::new(source),
        )?);
    }
    Ok(IngestedFamily {
        records: family,
        source_digest,
        prime_coverage: coverage,
        text: records,
    })
}

/// Reads and validates a family file.
pub fn ingest(path: &Path) -> Result<IngestedFamily> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_family(&bytes)
}

impl IngestedFamily {
    /// Canonical serialization: records in file order, then the coefficient
    /// section grouped by record and sorted by prime. Numeric fields keep the
    /// spelling they were read with.
    pub fn to_canonical(&self) -> String {
        let mut out = String::new();
        out.push_str(FAMILY_MAGIC);
        out.push('\n');
        out.push_str(RECORD_HEADER);
        out.push('\n');
        for r in &self.text {
            out.push_str(&format!("{},{},{}\n", r.label, r.conductor, r.root_number));
        }
        out.push('\n');
        out.push_str(COEFFICIENT_HEADER);
        out.push('\n');
        for r in &self.text {
            for (p, ap) in &r.coefficients {
                out.push_str(&format!("{},{},{}\n", r.label, p, ap));
            }
        }
        out
    }

    pub fn write_canonical(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_canonical()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

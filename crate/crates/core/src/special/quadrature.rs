//! Adaptive Gauss–Kronrod (7/15) integration.

use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
const MAX_INTERVALS: usize = 4000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    /// Estimated absolute error (sum of the per-interval Kronrod−Gauss gaps).
    pub error: f64,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Piece {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        k += WGK[j] * pair;
        if j % 2 == 1 {
            g += WG[j / 2] * pair;
        }
    }
    Piece {
        a,
        b,
        value: k * h,
        error: ((k - g) * h).abs(),
    }
}

/// `∫_a^b f` to absolute tolerance [`DEFAULT_TOLERANCE`].
pub fn quadrature<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<QuadratureResult> {
    quadrature_tol(f, a, b, DEFAULT_TOLERANCE)
}

/// `∫_a^b f` with a requested absolute tolerance. The interval with the
/// largest error estimate is bisected until the summed estimate meets the
/// tolerance; running out of subintervals yields [`Error::Accuracy`].
pub fn quadrature_tol<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadratureResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain(format!("integration bounds [{a}, {b}] must be finite")));
    }
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    if a == b {
        return Ok(QuadratureResult { value: 0.0, error: 0.0 });
    }
    if a > b {
        let r = quadrature_tol(f, b, a, tol)?;
        return Ok(QuadratureResult {
            value: -r.value,
            error: r.error,
        });
    }
    let mut pieces = vec![kronrod(&f, a, b)];
    loop {
        let error: f64 = pieces.iter().map(|p| p.error).sum();
        let value: f64 = pieces.iter().map(|p| p.value).sum();
        if !value.is_finite() {
            return Err(Error::Accuracy {
                message: "integrand produced a non-finite value".into(),
                best: value,
                bound: f64::INFINITY,
            });
        }
        if error <= tol {
            return Ok(QuadratureResult { value, error });
        }
        if pieces.len() >= MAX_INTERVALS {
            return Err(Error::Accuracy {
                message: format!("adaptive quadrature exhausted {MAX_INTERVALS} subintervals"),
                best: value,
                bound: error,
            });
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap();
        let p = pieces.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            return Err(Error::Accuracy {
                message: "subinterval fell below floating-point resolution".into(),
                best: value,
                bound: error,
            });
        }
        pieces.push(kronrod(&f, p.a, mid));
        pieces.push(kronrod(&f, mid, p.b));
    }
}

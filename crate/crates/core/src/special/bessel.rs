//! Bessel functions of the first kind, `J_ν(x)`, for integer order.
//!
//! Three regimes are used:
//!
//! * `x < max(8, ν/4)`: the ascending power series;
//! * `max(8, ν/4) ≤ x ≤ max(30, 2ν)`: Miller's backward recurrence,
//!   normalized with `J_0 + 2 Σ J_{2k} = 1`;
//! * `x > max(30, 2ν)`: Hankel asymptotics for `J_0`, `J_1` followed by
//!   forward recurrence, which is stable once `x` exceeds the order.
//!
//! The transition zone `x ≈ ν` is where the Petersson kernel lives, and it is
//! handled entirely by the backward recurrence.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const MAX_ORDER: u32 = 500;
pub const MAX_ARGUMENT: f64 = 1e5;

/// Which evaluation strategy [`bessel_j`] uses at a given point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BesselRegime {
    PowerSeries,
    BackwardRecurrence,
    Asymptotic,
}

pub fn regime(order: u32, x: f64) -> BesselRegime {
    let nu = order as f64;
    if x < f64::max(8.0, nu / 4.0) {
        BesselRegime::PowerSeries
    } else if x <= f64::max(30.0, 2.0 * nu) {
        BesselRegime::BackwardRecurrence
    } else {
        BesselRegime::Asymptotic
    }
}

/// `J_order(x)` for `0 ≤ order ≤ 500` and `0 ≤ x ≤ 1e5`.
pub fn bessel_j(order: u32, x: f64) -> Result<f64> {
    if order > MAX_ORDER {
        return Err(Error::domain(format!("Bessel order {order} exceeds {MAX_ORDER}")));
    }
    if !(0.0..=MAX_ARGUMENT).contains(&x) {
        return Err(Error::domain(format!(
            "Bessel argument {x} outside [0, {MAX_ARGUMENT}]"
        )));
    }
    if x == 0.0 {
        return Ok(if order == 0 { 1.0 } else { 0.0 });
    }
    Ok(match regime(order, x) {
        BesselRegime::PowerSeries => power_series(order, x),
        BesselRegime::BackwardRecurrence => miller(order, x),
        BesselRegime::Asymptotic => asymptotic_forward(order, x),
    })
}

fn power_series(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    // (x/2)^ν / ν! as a running product; partial products stay below e^{x/2}.
    let mut lead = 1.0;
    for j in 1..=order {
        lead *= half / j as f64;
        if lead == 0.0 {
            return 0.0;
        }
    }
    let q = -half * half;
    let nu = order as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..1000 {
        let kf = k as f64;
        term *= q / (kf * (kf + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && kf * (kf + nu) > -q {
            break;
        }
    }
    lead * sum
}

/// Starting index for the backward recurrence: far enough above
/// `max(ν, x)` that `J_N(x)` is below double precision relative to the peak.
fn miller_start(order: u32, x: f64) -> usize {
    let top = f64::max(order as f64, x);
    let n = (top + 12.0 * x.cbrt() + 20.0).ceil() as usize;
    n + n % 2
}

fn miller(order: u32, x: f64) -> f64 {
    const BIG: f64 = 1e250;
    let start = miller_start(order, x);
    let two_over_x = 2.0 / x;
    let mut next = 0.0; // b_{j+1}
    let mut cur = 1e-280; // b_j
    let mut norm = 0.0;
    let mut wanted = 0.0;
    if start == order as usize {
        wanted = cur;
    }
    for j in (1..=start).rev() {
        if j % 2 == 0 {
            norm += 2.0 * cur;
        }
        let prev = j as f64 * two_over_x * cur - next;
        next = cur;
        cur = prev;
        if j - 1 == order as usize {
            wanted = cur;
        }
        if cur.abs() > BIG {
            cur /= BIG;
            next /= BIG;
            norm /= BIG;
            wanted /= BIG;
        }
    }
    norm += cur;
    wanted / norm
}

/// Hankel's `P` and `Q` series for order 0 or 1.
fn hankel_pq(order: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * (order as f64).powi(2);
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0f64;
    let eightx = 8.0 * x;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = term * (mu - odd * odd) / (k as f64 * eightx);
        if next.abs() > term.abs() && k > 2 {
            break;
        }
        term = next;
        // k ≡ 1, 2, 3, 0 (mod 4) → +Q, −P, −Q, +P
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-18 {
            break;
        }
    }
    (p, q)
}

fn hankel(order: u32, x: f64) -> f64 {
    let (p, q) = hankel_pq(order, x);
    let (s, c) = x.sin_cos();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    // χ = x − (ν/2 + 1/4)π expanded so that only sin x, cos x are evaluated.
    let (cos_chi, sin_chi) = match order {
        0 => (r * (c + s), r * (s - c)),
        _ => (r * (s - c), -r * (s + c)),
    };
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

fn asymptotic_forward(order: u32, x: f64) -> f64 {
    let j0 = hankel(0, x);
    if order == 0 {
        return j0;
    }
    let mut prev = j0;
    let mut cur = hankel(1, x);
    for k in 1..order {
        let next = 2.0 * k as f64 / x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

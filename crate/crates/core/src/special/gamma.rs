use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `ln Γ(x)` for positive real `x`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!(
            "log_gamma needs a positive finite argument, got {x}"
        )));
    }
    if x.fract() == 0.0 && x <= 64.0 {
        // Γ(n) = (n−1)! is exact in f64 through 22!, and the product rounds
        // once per factor beyond that; this also gives ln Γ(1) = ln Γ(2) = 0.
        let n = x as u32;
        return Ok((2..n).map(f64::from).product::<f64>().ln());
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

/// A positive quantity carried by its natural logarithm, so that values such
/// as `Γ(499)/(4π)^{499}` remain representable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogScale {
    pub ln: f64,
}

impl LogScale {
    /// The value itself; saturates to `inf` or `0` outside the `f64` range.
    pub fn value(self) -> f64 {
        self.ln.exp()
    }
}

/// The Petersson normalization `Γ(k−1) / (4π√(mn))^{k−1}`, computed in log space.
pub fn petersson_prefactor(k: u32, m: u64, n: u64) -> Result<LogScale> {
    if k < 4 || k % 2 == 1 {
        return Err(Error::domain(format!("weight must be even and at least 4, got {k}")));
    }
    if m == 0 || n == 0 {
        return Err(Error::domain("Petersson indices must be positive"));
    }
    let nu = (k - 1) as f64;
    let ln_arg = (4.0 * PI).ln() + 0.5 * ((m as f64).ln() + (n as f64).ln());
    Ok(LogScale {
        ln: log_gamma(nu)? - nu * ln_arg,
    })
}

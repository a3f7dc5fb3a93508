use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Smoothness {
    Bump,
    /// Sharp cutoff. Sums against an indicator carry no smooth-tail guarantees.
    Indicator,
    Custom,
}

/// A compactly supported weight on the closed interval `[a, b]`.
///
/// Evaluation returns exactly `0` off the support.
#[derive(Clone)]
pub struct WeightFunction {
    lo: f64,
    hi: f64,
    max: f64,
    kind: Smoothness,
    eval: Evaluator,
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightFunction")
            .field("support", &(self.lo, self.hi))
            .field("max", &self.max)
            .field("kind", &self.kind)
            .finish()
    }
}

fn check_support(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::domain(format!(
            "weight support [{a}, {b}] is not a proper interval"
        )));
    }
    Ok(())
}

/// The standard mollifier `exp(−1/(1−t²))` moved to `[a, b]` and scaled to
/// peak value 1 at the midpoint.
pub fn bump(a: f64, b: f64) -> Result<WeightFunction> {
    check_support(a, b)?;
    if a <= 0.0 {
        return Err(Error::domain(format!(
            "bump support must lie in (0, ∞), got [{a}, {b}]"
        )));
    }
    Ok(WeightFunction::mollifier(a, b))
}

/// Indicator of the closed interval `[a, b]`, with `0 < a < b`.
pub fn indicator(a: f64, b: f64) -> Result<WeightFunction> {
    check_support(a, b)?;
    if a <= 0.0 {
        return Err(Error::domain(format!(
            "indicator support must lie in (0, ∞), got [{a}, {b}]"
        )));
    }
    Ok(WeightFunction {
        lo: a,
        hi: b,
        max: 1.0,
        kind: Smoothness::Indicator,
        eval: Arc::new(|_| 1.0),
    })
}

impl WeightFunction {
    /// Mollifier on an arbitrary interval, e.g. a symmetric test-function
    /// transform supported in `(−θ, θ)`.
    pub(crate) fn mollifier(a: f64, b: f64) -> Self {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        Self {
            lo: a,
            hi: b,
            max: 1.0,
            kind: Smoothness::Bump,
            eval: Arc::new(move |x| {
                let t = (x - mid) / half;
                let s = 1.0 - t * t;
                if s <= 0.0 {
                    0.0
                } else {
                    // exp(−1/(1−t²)) · e
                    (-t * t / s).exp()
                }
            }),
        }
    }

    /// Mollifier supported on `[−θ, θ]`.
    pub fn symmetric_bump(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::domain(format!("half-width must be positive, got {theta}")));
        }
        Ok(Self::mollifier(-theta, theta))
    }

    /// Arbitrary evaluator restricted to `[a, b]`. `max_abs` must bound `|f|` on
    /// the support; it is used for plotting and tail estimates only.
    pub fn custom<F>(a: f64, b: f64, max_abs: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_support(a, b)?;
        Ok(Self {
            lo: a,
            hi: b,
            max: max_abs,
            kind: Smoothness::Custom,
            eval: Arc::new(f),
        })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn max_value(&self) -> f64 {
        self.max
    }

    pub fn kind(&self) -> Smoothness {
        self.kind
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < self.lo || x > self.hi || x.is_nan() {
            return 0.0;
        }
        (self.eval)(x)
    }

    /// Same shape multiplied by a positive constant.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.eval.clone();
        Self {
            lo: self.lo,
            hi: self.hi,
            max: self.max * c.abs(),
            kind: self.kind,
            eval: Arc::new(move |x| c * inner(x)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_values() {
        let phi = bump(1.0, 2.0).unwrap();
        assert_eq!(phi.eval(1.5), 1.0);
        assert_eq!(phi.eval(0.999), 0.0);
        let v = phi.eval(1.25);
        let closed = (-1.0f64 / (1.0 - 0.25)).exp() * std::f64::consts::E;
        assert!(v > 0.0 && v < 1.0);
        assert!((v - closed).abs() < 1e-15);
    }

    #[test]
    fn support_is_exact() {
        for w in [bump(1.0, 2.0).unwrap(), indicator(1.0, 2.0).unwrap()] {
            assert_eq!(w.eval(1.0 - 1e-12), 0.0);
            assert_eq!(w.eval(2.0 + 1e-12), 0.0);
            assert_eq!(w.eval(-5.0), 0.0);
        }
        assert_eq!(bump(1.0, 2.0).unwrap().eval(1.0), 0.0);
        assert_eq!(bump(1.0, 2.0).unwrap().eval(2.0), 0.0);
        assert_eq!(indicator(1.0, 2.0).unwrap().eval(2.0), 1.0);
    }

    #[test]
    fn bump_is_flat_at_the_edges() {
        let phi = bump(1.0, 2.0).unwrap();
        let mut last = f64::INFINITY;
        for h in [1e-2, 5e-3, 2e-3, 1e-3] {
            let left = (phi.eval(1.0 + h) - phi.eval(1.0)) / h;
            let right = (phi.eval(2.0) - phi.eval(2.0 - h)) / h;
            let worst = left.abs().max(right.abs());
            assert!(worst < last);
            last = worst;
        }
        assert!(last < 1e-100);
    }

    #[test]
    fn rejects_bad_supports() {
        assert!(bump(2.0, 1.0).is_err());
        assert!(bump(1.0, 1.0).is_err());
        assert!(bump(0.0, 1.0).is_err());
        assert!(indicator(3.0, 3.0).is_err());
        assert!(WeightFunction::symmetric_bump(0.0).is_err());
    }

    #[test]
    fn nonnegative_and_bounded() {
        let phi = bump(0.5, 3.0).unwrap();
        for i in 0..=1000 {
            let x = i as f64 * 0.004;
            let v = phi.eval(x);
            assert!((0.0..=phi.max_value()).contains(&v));
        }
    }
}

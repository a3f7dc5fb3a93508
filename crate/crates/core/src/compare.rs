//! Shape comparisons between sampled series and reference curves.

use std::f64::consts::PI;

use crate::arith::ArithTables;
use crate::densities::ils_density;
use crate::error::Result;
use crate::frame::Sign;
use crate::special::WeightFunction;

/// Location of the extremum of `sign·v` over the samples `(y, v)`, refined by
/// the vertex of the parabola through the extreme sample and its two
/// neighbours. At either end of the list the sample itself is returned.
pub fn peak_location(points: &[(f64, f64)], sign: Sign) -> Option<(f64, f64)> {
    let s = sign.as_f64();
    let (i, _) = points
        .iter()
        .enumerate()
        .max_by(|a, b| (s * a.1 .1).total_cmp(&(s * b.1 .1)))?;
    if i == 0 || i + 1 == points.len() {
        return Some(points[i]);
    }
    let (x1, y1) = points[i - 1];
    let (x2, y2) = points[i];
    let (x3, y3) = points[i + 1];
    let num = (x2 - x1).powi(2) * (y2 - y3) - (x2 - x3).powi(2) * (y2 - y1);
    let den = (x2 - x1) * (y2 - y3) - (x2 - x3) * (y2 - y1);
    if den == 0.0 {
        return Some(points[i]);
    }
    Some((x2 - 0.5 * num / den, y2))
}

/// `‖a/‖a‖ − b/‖b‖‖₂`: zero for proportional shapes with the same sign,
/// `2` for opposite ones. `NaN` if either vector vanishes.
pub fn normalized_residual(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "residual needs equally long samples");
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    a.iter()
        .zip(b)
        .map(|(x, y)| (x / na - y / nb).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Reference murmuration density for weight-aspect averages at `y = p/N(K)`.
///
/// The harmonic averages live on the scale `N(k) = ((k−1)/4π)²`, under which
/// the density's argument `16π²p/(c²X)` becomes `y/c²`; this is
/// [`ils_density`] evaluated at `y/(16π²)`.
pub fn weight_aspect_reference(y: f64, phi: &WeightFunction, sign: Sign, tables: &ArithTables) -> Result<f64> {
    ils_density(y / (16.0 * PI * PI), phi, sign, tables)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola_vertex_is_exact_for_quadratics() {
        let pts: Vec<(f64, f64)> = [0.9, 1.2, 1.7, 2.0, 2.4]
            .iter()
            .map(|&x| (x, 3.0 - (x - 1.55f64).powi(2)))
            .collect();
        let (x, _) = peak_location(&pts, Sign::Plus).unwrap();
        assert!((x - 1.55).abs() < 1e-12);
        let neg: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x, -y)).collect();
        let (x, v) = peak_location(&neg, Sign::Minus).unwrap();
        assert!((x - 1.55).abs() < 1e-12 && v < 0.0);
    }

    #[test]
    fn residual_of_proportional_shapes() {
        let a = [1.0, 2.0, 3.0];
        let b = [0.5, 1.0, 1.5];
        assert!(normalized_residual(&a, &b) < 1e-15);
        let c = [-1.0, -2.0, -3.0];
        assert!((normalized_residual(&a, &c) - 2.0).abs() < 1e-15);
    }
}

//! CSV and SVG artifacts.

use std::fmt::Write as _;
use std::path::Path;

use murmur_core::densities::Atom;
use murmur_core::frame::MurmurationSeries;
use murmur_core::{Error, Result};

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn series_csv(series: &MurmurationSeries) -> String {
    let mut out = String::from("y,value,count\n");
    for s in series.samples() {
        let _ = writeln!(out, "{},{},{}", fmt_f64(s.y), fmt_f64(s.value), s.count);
    }
    out
}

/// Density samples with the atoms listed first as `#atom location mass`.
pub fn density_csv(points: &[(f64, f64)], atoms: &[Atom]) -> String {
    let mut out = String::new();
    for a in atoms {
        let _ = writeln!(out, "#atom {} {}", fmt_f64(a.location), fmt_f64(a.mass));
    }
    out.push_str("y,value\n");
    for &(y, v) in points {
        let _ = writeln!(out, "{},{}", fmt_f64(y), fmt_f64(v));
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn emit_csv(path: &Path, contents: &str) -> Result<()> {
    if contents.lines().count() < 2 {
        return Err(Error::Domain(format!(
            "refusing to write {} without data",
            path.display()
        )));
    }
    write_file(path, contents)
}

/// One curve of a plot.
#[derive(Clone, Debug)]
pub struct Overlay {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 1200.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn nice_bounds(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if lo == hi {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Static SVG with one polyline per overlay and atoms as vertical spikes.
pub fn svg(title: &str, overlays: &[Overlay], atoms: &[Atom]) -> String {
    let xs = overlays
        .iter()
        .flat_map(|o| o.points.iter().map(|p| p.0))
        .chain(atoms.iter().map(|a| a.location));
    let ys = overlays
        .iter()
        .flat_map(|o| o.points.iter().map(|p| p.1))
        .chain(atoms.iter().map(|a| a.mass))
        .chain(std::iter::once(0.0));
    let (x0, x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (y0, y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (x0, x1) = nice_bounds(x0, x1);
    let (y0, y1) = nice_bounds(y0, y1);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="30" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    // axes box and the zero line
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    if y0 < 0.0 && y1 > 0.0 {
        let z = sy(0.0);
        let _ = writeln!(
            out,
            r##"<line x1="{MARGIN}" y1="{z:.2}" x2="{:.2}" y2="{z:.2}" stroke="#999" stroke-dasharray="4 4"/>"##,
            WIDTH - MARGIN
        );
    }
    for (i, (vx, vy)) in [(x0, y0), (x1, y1)].iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            sx(*vx),
            HEIGHT - MARGIN + 18.0,
            short(*vx)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="end">{}</text>"#,
            MARGIN - 6.0,
            sy(*vy) + if i == 0 { 0.0 } else { 12.0 },
            short(*vy)
        );
    }
    for (i, o) in overlays.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = o
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" fill="{color}">{}</text>"#,
            MARGIN + 10.0,
            MARGIN + 18.0 * (i as f64 + 1.0),
            escape(&o.label)
        );
    }
    for a in atoms {
        let x = sx(a.location);
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#ff7f0e" stroke-width="2"/>"##,
            sy(0.0f64.max(y0)),
            sy(a.mass)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn short(v: f64) -> String {
    format!("{v:.4}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use murmur_core::frame::{Normalization, Sample};

    #[test]
    fn single_sample_schema() {
        let s = MurmurationSeries::new(
            vec![Sample {
                y: 1.0,
                value: 0.5,
                count: 3,
                std_err: None,
            }],
            1.0,
            Normalization::Analytic,
        )
        .unwrap();
        assert_eq!(series_csv(&s), "y,value,count\n1.0,0.5,3\n");
    }

    #[test]
    fn atoms_precede_rows() {
        let csv = density_csv(
            &[(0.5, 1.0)],
            &[Atom {
                location: 0.0,
                mass: 1.0,
            }],
        );
        assert_eq!(csv, "#atom 0.0 1.0\ny,value\n0.5,1.0\n");
    }

    #[test]
    fn two_overlays_two_polylines() {
        let a = Overlay {
            label: "empirical".into(),
            points: vec![(0.0, 1.0), (1.0, 2.0)],
        };
        let b = Overlay {
            label: "reference".into(),
            points: vec![(0.0, 0.5), (1.0, -1.0)],
        };
        let out = svg(
            "t",
            &[a, b],
            &[Atom {
                location: 0.5,
                mass: 1.0,
            }],
        );
        assert_eq!(out.matches("<polyline").count(), 2);
        assert!(out.contains(r#"width="1200""#) && out.contains(r#"height="600""#));
        assert!(out.contains("#ff7f0e"));
    }

    #[test]
    fn round_trip_formatting() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 123456789.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }
}

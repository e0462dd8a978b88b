use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use revival_core::Potential;

/// FNV-1a over the segment layout; ties CSV headers to the exact potential.
pub fn potential_hash(v: &Potential) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut eat = |bits: u64| {
        for byte in bits.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    };
    for s in v.segments() {
        eat(s.lo.to_bits());
        eat(s.hi.to_bits());
        for c in s.coeffs {
            eat(c.to_bits());
        }
    }
    h
}

/// Plain CSV: optional `#`-prefixed comment line, then a header row, then
/// rows. '.' decimal, ',' separator.
pub fn write_csv(
    path: &Path,
    comment: Option<&str>,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut out = String::new();
    if let Some(c) = comment {
        writeln!(out, "# {c}").unwrap();
    }
    writeln!(out, "{}", header.join(",")).unwrap();
    for row in rows {
        writeln!(out, "{}", row.join(",")).unwrap();
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub struct SvgSeries<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub ys: &'a [f64],
}

const W: f64 = 840.0;
const H: f64 = 520.0;
const ML: f64 = 60.0;
const MR: f64 = 20.0;
const MT: f64 = 40.0;
const MB: f64 = 40.0;

/// Dependency-free line plot of one or more series over shared x samples.
pub fn svg_line_plot(
    path: &Path,
    title: &str,
    xs: &[f64],
    series: &[SvgSeries<'_>],
) -> Result<()> {
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &y in s.ys {
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
    }
    if !ymin.is_finite() || ymax - ymin < 1e-12 {
        ymin -= 1.0;
        ymax += 1.0;
    }
    let pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    let (xmin, xmax) = (xs[0], *xs.last().unwrap());
    let px = |x: f64| ML + (x - xmin) / (xmax - xmin) * (W - ML - MR);
    let py = |y: f64| H - MB - (y - ymin) / (ymax - ymin) * (H - MT - MB);

    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    )
    .unwrap();
    writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>").unwrap();
    writeln!(
        svg,
        "<text x=\"{}\" y=\"24\" font-family=\"monospace\" font-size=\"15\">{title}</text>",
        ML
    )
    .unwrap();
    // frame and zero line
    writeln!(
        svg,
        "<rect x=\"{ML}\" y=\"{MT}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>",
        W - ML - MR,
        H - MT - MB
    )
    .unwrap();
    if ymin < 0.0 && ymax > 0.0 {
        writeln!(
            svg,
            "<line x1=\"{ML}\" y1=\"{0:.2}\" x2=\"{1}\" y2=\"{0:.2}\" stroke=\"#ccc\"/>",
            py(0.0),
            W - MR
        )
        .unwrap();
    }
    for (v, x) in [(ymin, ML - 55.0), (ymax, ML - 55.0)].iter().zip([H - MB, MT + 10.0]) {
        writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{x:.1}\" font-family=\"monospace\" font-size=\"11\">{:.3}</text>",
            v.1, v.0
        )
        .unwrap();
    }
    for (i, s) in series.iter().enumerate() {
        let mut pts = String::new();
        for (x, y) in xs.iter().zip(s.ys) {
            write!(pts, "{:.2},{:.2} ", px(*x), py(*y)).unwrap();
        }
        writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1\" points=\"{}\"/>",
            s.color,
            pts.trim_end()
        )
        .unwrap();
        writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\" fill=\"{}\">{}</text>",
            W - MR - 120.0,
            MT + 16.0 + 16.0 * i as f64,
            s.color,
            s.label
        )
        .unwrap();
    }
    writeln!(svg, "</svg>").unwrap();
    fs::write(path, svg).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

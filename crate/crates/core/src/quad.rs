//! Composite Gauss-Legendre quadrature with forced subdivision nodes.

use crate::error::{Result, SolverError};
use std::sync::OnceLock;

const GL_ORDER: usize = 16;

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre recurrence.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-based initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Legendre P_n(x) and derivative via recurrence
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    CACHE.get_or_init(|| gauss_legendre(GL_ORDER))
}

/// Integrate g over [a, b] with one 16-point rule (no checks).
fn panel<F: FnMut(f64) -> f64>(g: &mut F, a: f64, b: f64) -> Result<f64> {
    let (nodes, weights) = gl16();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        let xx = mid + half * x;
        let v = g(xx);
        if !v.is_finite() {
            return Err(SolverError::NonFiniteIntegrand { x: xx });
        }
        acc += w * v;
    }
    Ok(acc * half)
}

/// Split [a, b] at the forced nodes, then into panels no wider than
/// `max_panel`, and apply the 16-point rule per panel. Exact (to rounding)
/// for piecewise polynomials of degree <= 31 whose breakpoints are forced.
pub fn quadrature_with<F: FnMut(f64) -> f64>(
    mut g: F,
    a: f64,
    b: f64,
    forced: &[f64],
    max_panel: f64,
) -> Result<f64> {
    assert!(b > a, "quadrature requires a < b");
    let mut cuts: Vec<f64> = vec![a];
    let mut sorted: Vec<f64> = forced.iter().copied().filter(|x| *x > a && *x < b).collect();
    sorted.sort_by(|p, q| p.partial_cmp(q).unwrap());
    for x in sorted {
        if x - cuts.last().unwrap() > 1e-13 {
            cuts.push(x);
        }
    }
    if b - cuts.last().unwrap() > 1e-13 {
        cuts.push(b);
    } else {
        *cuts.last_mut().unwrap() = b;
    }

    let mut acc = 0.0;
    for pair in cuts.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let n_panels = ((hi - lo) / max_panel).ceil().max(1.0) as usize;
        let w = (hi - lo) / n_panels as f64;
        for k in 0..n_panels {
            acc += panel(&mut g, lo + k as f64 * w, lo + (k + 1) as f64 * w)?;
        }
    }
    Ok(acc)
}

/// Default panel cap: generous for smooth, non-oscillatory integrands.
pub const DEFAULT_MAX_PANEL: f64 = std::f64::consts::PI / 4.0;

pub fn quadrature<F: FnMut(f64) -> f64>(g: F, a: f64, b: f64, forced: &[f64]) -> Result<f64> {
    quadrature_with(g, a, b, forced, DEFAULT_MAX_PANEL)
}

/// Panel cap resolving oscillations of angular rate `rate` (radians of
/// integrand phase per unit x). A 16-point panel comfortably integrates a
/// few wavelengths; stay near one wavelength per panel.
pub fn oscillatory_panel(rate: f64) -> f64 {
    (std::f64::consts::TAU / rate.max(1.0)).min(DEFAULT_MAX_PANEL)
}

/// The quadrature nodes that `quadrature_with` would sample, in order.
/// Useful when the integrand must be tabulated by a sequential propagation
/// before summing.
pub fn quadrature_nodes(a: f64, b: f64, forced: &[f64], max_panel: f64) -> Vec<(f64, f64)> {
    let (nodes, weights) = gl16();
    let mut cuts: Vec<f64> = vec![a];
    let mut sorted: Vec<f64> = forced.iter().copied().filter(|x| *x > a && *x < b).collect();
    sorted.sort_by(|p, q| p.partial_cmp(q).unwrap());
    for x in sorted {
        if x - cuts.last().unwrap() > 1e-13 {
            cuts.push(x);
        }
    }
    if b - cuts.last().unwrap() > 1e-13 {
        cuts.push(b);
    } else {
        *cuts.last_mut().unwrap() = b;
    }
    let mut out = Vec::new();
    for pair in cuts.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let n_panels = ((hi - lo) / max_panel).ceil().max(1.0) as usize;
        let w = (hi - lo) / n_panels as f64;
        for k in 0..n_panels {
            let pa = lo + k as f64 * w;
            let pb = lo + (k + 1) as f64 * w;
            let mid = 0.5 * (pa + pb);
            let half = 0.5 * (pb - pa);
            for (x, wt) in nodes.iter().zip(weights) {
                out.push((mid + half * x, wt * half));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::{Potential, TAU};
    use std::f64::consts::PI;

    #[test]
    fn sin_squared() {
        let v = quadrature(|x| x.sin().powi(2), 0.0, TAU, &[]).unwrap();
        assert!((v - PI).abs() < 1e-12);
    }

    #[test]
    fn section5_integral() {
        let v = Potential::section5();
        let bps = v.breakpoints();
        let val = quadrature(|x| v.eval(x), 0.0, TAU, &bps).unwrap();
        assert!((val - 27.0 * PI / 2.0).abs() < 1e-10 * 27.0 * PI / 2.0);
    }

    #[test]
    fn linear_with_forced_node() {
        let val = quadrature(|x| x, 0.0, TAU, &[PI]).unwrap();
        assert!((val - 2.0 * PI * PI).abs() < 1e-11);
    }

    #[test]
    fn degree_ten_exactness() {
        // int_0^1 x^10 dx = 1/11, single panel
        let val = quadrature_with(|x| x.powi(10), 0.0, 1.0, &[], 10.0).unwrap();
        assert!((val - 1.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_finite() {
        let r = quadrature(|x| 1.0 / (x - 1.0), 0.0, 2.0, &[]);
        // integrand is finite at GL nodes (never exactly 1.0), so force a NaN
        assert!(r.is_ok());
        let r = quadrature(|_| f64::NAN, 0.0, 1.0, &[]);
        assert!(r.is_err());
    }

    #[test]
    fn nodes_match_integral() {
        let nodes = quadrature_nodes(0.0, TAU, &[PI], 0.3);
        let direct: f64 = nodes.iter().map(|(x, w)| w * x.sin().powi(2)).sum();
        assert!((direct - PI).abs() < 1e-12);
    }
}

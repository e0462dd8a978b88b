//! The rational-time revival function, the free-evolution translate
//! identity, and the decomposition u = w + psi_rev with jump diagnostics.

use crate::error::{Result, SolverError};
use crate::grid::{Grid, RationalTime, WaveField};
use crate::piecewise::{InitialDatum, TAU};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Gauss weights G_k = (1/r) sum_m e^{2 pi i (mk/r - m^2 q/r)}.
pub fn gauss_weights(t: RationalTime) -> Vec<Complex64> {
    let r = t.r() as usize;
    let q = t.q() as f64;
    let rf = r as f64;
    (0..r)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..r {
                let mf = m as f64;
                let phase = TAU * (mf * k as f64 / rf - mf * mf * q / rf);
                acc += Complex64::from_polar(1.0, phase);
            }
            acc / rf
        })
        .collect()
}

/// Free-evolution value at a rational time by the translate identity:
/// u0(2 pi q/r, x) = sum_k G_k f*(x - 2 pi k/r), with f* the periodic
/// extension evaluated directly (no grid interpolation).
pub fn free_translate_solution(f: &InitialDatum, t: RationalTime, grid: &Grid) -> Result<WaveField> {
    let weights = gauss_weights(t);
    let r = t.r() as usize;
    let shift = TAU / t.r() as f64;
    let samples: Vec<Complex64> = (0..grid.n_points())
        .map(|j| {
            let x = grid.node(j);
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, g) in weights.iter().enumerate().take(r) {
                acc += g * f.eval(x - k as f64 * shift);
            }
            acc
        })
        .collect();
    WaveField::new(grid.clone(), samples, t.value())
}

/// The revival component psi(2 pi q/r, x) = e^{-2 pi i <V> q/r} u0.
pub fn revival_component(
    f: &InitialDatum,
    t: RationalTime,
    mean_v: f64,
    grid: &Grid,
) -> Result<WaveField> {
    let u0 = free_translate_solution(f, t, grid)?;
    let phase = Complex64::from_polar(1.0, -TAU * mean_v * t.q() as f64 / t.r() as f64);
    Ok(WaveField {
        grid: u0.grid,
        samples: u0.samples.into_iter().map(|s| s * phase).collect(),
        time: u0.time,
    })
}

/// One-sided linear least-squares jump estimate at a candidate location.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JumpEstimate {
    pub location: f64,
    /// Gibbs-excluded core half-width (delta) in radians
    pub core: f64,
    /// fit window width (h) in radians beyond the core
    pub window: f64,
    pub left: Complex64,
    pub right: Complex64,
    pub jump: Complex64,
}

/// Fit a + b(x - x0) over the samples with x in [x0 + delta, x0 + delta + h]
/// (side = +1) or [x0 - delta - h, x0 - delta] (side = -1), periodically
/// wrapped; returns the extrapolated value at x0.
fn one_sided_fit(u: &WaveField, x0: f64, delta: f64, h: f64, side: f64) -> Complex64 {
    let n = u.grid.n_points();
    let dx = u.grid.spacing();
    let lo = delta;
    let hi = delta + h;
    let mut s0 = 0.0f64;
    let mut s1 = 0.0f64;
    let mut s2 = 0.0f64;
    let mut b0 = Complex64::new(0.0, 0.0);
    let mut b1 = Complex64::new(0.0, 0.0);
    // offsets measured from x0 along the chosen side
    let k_lo = (lo / dx).ceil() as i64;
    let k_hi = (hi / dx).floor() as i64;
    for k in k_lo..=k_hi {
        let off = side * k as f64 * dx;
        let x = x0 + off;
        let j = (x / dx).round() as i64;
        let idx = j.rem_euclid(n as i64) as usize;
        let y = u.samples[idx];
        s0 += 1.0;
        s1 += off;
        s2 += off * off;
        b0 += y;
        b1 += y * off;
    }
    let det = s0 * s2 - s1 * s1;
    // intercept of the least-squares line = value extrapolated to x0
    (b0 * s2 - b1 * s1) / det
}

fn estimate_jump(u: &WaveField, x0: f64, delta: f64, h: f64) -> JumpEstimate {
    let left = one_sided_fit(u, x0, delta, h, -1.0);
    let right = one_sided_fit(u, x0, delta, h, 1.0);
    JumpEstimate { location: x0, core: delta, window: h, left, right, jump: right - left }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JumpRow {
    pub location: f64,
    pub jump_u: Complex64,
    pub jump_psi: Complex64,
    pub jump_w: Complex64,
}

#[derive(Debug, Clone)]
pub struct RevivalDecomposition {
    pub time: RationalTime,
    pub u: WaveField,
    pub psi_rev: WaveField,
    pub w: WaveField,
    pub candidate_jumps: Vec<f64>,
    pub jump_table: Vec<JumpRow>,
    /// max |jump(w)| / max |jump(u)| over the candidates
    pub ratio: f64,
    pub delta: f64,
    pub window: f64,
}

/// Candidate jump set {d + 2 pi k/r mod 2 pi}, deduplicated at grid
/// resolution.
pub fn candidate_jump_set(seeds: &[f64], t: RationalTime, grid: &Grid) -> Vec<f64> {
    let r = t.r();
    let mut out: Vec<f64> = Vec::new();
    for d in seeds {
        for k in 0..r {
            let x = (d + TAU * k as f64 / r as f64).rem_euclid(TAU);
            out.push(x);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tol = grid.spacing();
    let mut dedup: Vec<f64> = Vec::new();
    for x in out {
        if dedup.last().map_or(true, |last| x - last > tol) {
            dedup.push(x);
        }
    }
    // periodic wrap: drop the last if it collides with the first
    if dedup.len() > 1 && (TAU - dedup.last().unwrap() + dedup[0]) <= tol {
        dedup.pop();
    }
    dedup
}

/// Split u into psi_rev + w and estimate the jump of each field at every
/// candidate discontinuity. delta and h default to 20 dx and 40 dx.
pub fn decompose_and_diagnose(
    u: &WaveField,
    psi_rev: &WaveField,
    seeds: &[f64],
    t: RationalTime,
) -> Result<RevivalDecomposition> {
    if u.grid != psi_rev.grid {
        return Err(SolverError::GridMismatch);
    }
    let grid = u.grid.clone();
    let dx = grid.spacing();
    let delta = 20.0 * dx;
    let window = 40.0 * dx;
    let w = WaveField {
        grid: grid.clone(),
        samples: u
            .samples
            .iter()
            .zip(&psi_rev.samples)
            .map(|(a, b)| a - b)
            .collect(),
        time: u.time,
    };
    let candidate_jumps = candidate_jump_set(seeds, t, &grid);
    let mut jump_table = Vec::with_capacity(candidate_jumps.len());
    let mut max_u = 0.0f64;
    let mut max_w = 0.0f64;
    for &x0 in &candidate_jumps {
        let ju = estimate_jump(u, x0, delta, window);
        let jp = estimate_jump(psi_rev, x0, delta, window);
        let jw = estimate_jump(&w, x0, delta, window);
        max_u = max_u.max(ju.jump.norm());
        max_w = max_w.max(jw.jump.norm());
        jump_table.push(JumpRow {
            location: x0,
            jump_u: ju.jump,
            jump_psi: jp.jump,
            jump_w: jw.jump,
        });
    }
    let ratio = if max_u > 0.0 { max_w / max_u } else { 0.0 };
    Ok(RevivalDecomposition {
        time: t,
        u: u.clone(),
        psi_rev: psi_rev.clone(),
        w,
        candidate_jumps,
        jump_table,
        ratio,
        delta,
        window,
    })
}

//! Integration of -u'' + V u = lambda u across piecewise-polynomial segments.
//!
//! Constant segments are propagated by exact 2x2 transfer matrices; polynomial
//! segments by an adaptive Dormand-Prince step with tight tolerance. The
//! Prufer phase is integrated as an ODE inside segments and re-initialized
//! from the continuous (u, u') data across potential jumps.

use crate::error::{Result, SolverError};
use crate::piecewise::{Potential, TAU};

/// Values and first derivatives of the fundamental solutions at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalPair {
    pub phi1: f64,
    pub dphi1: f64,
    pub phi2: f64,
    pub dphi2: f64,
    pub x: f64,
    pub lambda: f64,
}

impl FundamentalPair {
    pub fn wronskian(&self) -> f64 {
        self.phi1 * self.dphi2 - self.dphi1 * self.phi2
    }
}

/// Prufer polar coordinates of a solution trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PruferState {
    pub theta: f64,
    pub rho: f64,
    pub x: f64,
    pub lambda: f64,
}

/// 2x2 matrix [[m11, m12], [m21, m22]] acting on (u, u') column vectors.
/// As a fundamental matrix the columns are (phi1, phi1') and (phi2, phi2').
pub type Mat2 = [f64; 4];

pub const MAT2_IDENTITY: Mat2 = [1.0, 0.0, 0.0, 1.0];

#[inline]
pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

#[inline]
fn mat2_add(a: &Mat2, b: &Mat2) -> Mat2 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

/// Exact transfer matrix over a width-dx interval with constant d = lambda - V:
/// trigonometric, linear, or hyperbolic branch.
pub fn const_step(d: f64, dx: f64) -> Mat2 {
    if d > 1e-14 {
        let w = d.sqrt();
        let (s, c) = (w * dx).sin_cos();
        [c, s / w, -w * s, c]
    } else if d < -1e-14 {
        let k = (-d).sqrt();
        let (s, c) = ((k * dx).sinh(), (k * dx).cosh());
        [c, s / k, k * s, c]
    } else {
        [1.0 - 0.5 * d * dx * dx, dx, -d * dx, 1.0 - 0.5 * d * dx * dx]
    }
}

/// Transfer matrix and its derivative with respect to lambda.
pub fn const_step_dlambda(d: f64, dx: f64) -> (Mat2, Mat2) {
    // use the series branch when the phase w*dx is small enough that the
    // closed forms below lose digits to cancellation
    if d.abs() * dx * dx < 1e-4 {
        let d2 = d * d;
        let x2 = dx * dx;
        let diag = 1.0 - d * x2 / 2.0 + d2 * x2 * x2 / 24.0;
        let m12 = dx - d * dx * x2 / 6.0 + d2 * dx * x2 * x2 / 120.0;
        let m21 = -d * dx + d2 * dx * x2 / 6.0;
        let m = [diag, m12, m21, diag];
        let ddiag = -x2 / 2.0 + d * x2 * x2 / 12.0;
        let dm12 = -dx * x2 / 6.0 + d * dx * x2 * x2 / 60.0;
        let dm21 = -dx + d * dx * x2 / 3.0;
        (m, [ddiag, dm12, dm21, ddiag])
    } else if d > 0.0 {
        let w = d.sqrt();
        let (s, c) = (w * dx).sin_cos();
        let m = [c, s / w, -w * s, c];
        let ddiag = -s * dx / (2.0 * w);
        let dm12 = (c * dx * w - s) / (2.0 * w * w * w);
        let dm21 = -(s + w * dx * c) / (2.0 * w);
        (m, [ddiag, dm12, dm21, ddiag])
    } else {
        let k = (-d).sqrt();
        let (s, c) = ((k * dx).sinh(), (k * dx).cosh());
        let m = [c, s / k, k * s, c];
        // dk/dlambda = -1/(2k)
        let ddiag = -dx * s / (2.0 * k);
        let dm12 = -(dx * k * c - s) / (2.0 * k * k * k);
        let dm21 = -(s + k * dx * c) / (2.0 * k);
        (m, [ddiag, dm12, dm21, ddiag])
    }
}

// Dormand-Prince 5(4) coefficients.
const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const RK_TOL: f64 = 1e-12;

/// Adaptive Dormand-Prince from x0 to x1 (x0 < x1), step capped at h_cap.
fn rk_adaptive<const N: usize, F>(
    f: &mut F,
    x0: f64,
    x1: f64,
    y0: [f64; N],
    h_cap: f64,
    mut observer: Option<&mut dyn FnMut(f64, &[f64; N])>,
) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut x = x0;
    let mut y = y0;
    let mut h = h_cap.min(x1 - x0);
    let mut k = [[0.0f64; N]; 7];
    while x < x1 - 1e-14 * TAU {
        h = h.min(x1 - x).min(h_cap);
        k[0] = f(x, &y);
        for stage in 1..7 {
            let mut ys = y;
            for j in 0..stage {
                let a = DP_A[stage][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += h * a * k[j][i];
                    }
                }
            }
            k[stage] = f(x + DP_C[stage] * h, &ys);
        }
        let mut y5 = y;
        let mut err = 0.0f64;
        for i in 0..N {
            let mut inc5 = 0.0;
            let mut inc4 = 0.0;
            for stage in 0..7 {
                inc5 += DP_B5[stage] * k[stage][i];
                inc4 += DP_B4[stage] * k[stage][i];
            }
            y5[i] += h * inc5;
            let scale = 1.0 + y[i].abs().max(y5[i].abs());
            err = err.max((h * (inc5 - inc4)).abs() / scale);
        }
        if !err.is_finite() || y5.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite { x });
        }
        if err <= RK_TOL || h <= 1e-13 {
            x += h;
            y = y5;
            if let Some(obs) = observer.as_deref_mut() {
                obs(x, &y);
            }
        }
        let factor = if err > 0.0 { 0.9 * (RK_TOL / err).powf(0.2) } else { 5.0 };
        h *= factor.clamp(0.2, 5.0);
    }
    Ok(y)
}

fn default_observe_cap(lambda: f64) -> f64 {
    0.1 * TAU / lambda.abs().sqrt().max(1.0)
}

fn rk_step_cap(lambda: f64) -> f64 {
    0.1 * TAU / lambda.abs().sqrt().max(1.0)
}

/// Propagate the fundamental matrix (and optionally its lambda-derivative)
/// from x0 to x1, never straddling a segment breakpoint. When an observer is
/// given, constant segments are subdivided at `observe_cap` so the trajectory
/// is sampled densely enough to resolve one oscillation.
pub(crate) fn propagate(
    v: &Potential,
    lambda: f64,
    x0: f64,
    x1: f64,
    m: &mut Mat2,
    mut dm: Option<&mut Mat2>,
    mut observer: Option<&mut dyn FnMut(f64, &Mat2)>,
    observe_cap: f64,
) -> Result<()> {
    debug_assert!(x0 <= x1 && x0 >= 0.0 && x1 <= TAU + 1e-12);
    let segs = v.segments();
    let mut x = x0;
    // index of the segment containing x (right-limit side)
    let mut si = segs
        .iter()
        .position(|s| x < s.hi - 1e-14)
        .unwrap_or(segs.len() - 1);
    while x < x1 - 1e-14 {
        let seg = &segs[si];
        let stop = seg.hi.min(x1);
        if seg.is_constant() {
            let d = lambda - seg.coeffs[0];
            if observer.is_some() {
                // subdivide for dense output
                let n = ((stop - x) / observe_cap).ceil().max(1.0) as usize;
                let h = (stop - x) / n as f64;
                for _ in 0..n {
                    step_const(d, h, m, dm.as_deref_mut());
                    x += h;
                    if let Some(obs) = observer.as_deref_mut() {
                        obs(x, m);
                    }
                }
            } else {
                step_const(d, stop - x, m, dm.as_deref_mut());
                x = stop;
            }
        } else {
            let cap = rk_step_cap(lambda).min(observe_cap.max(1e-6));
            if let Some(dmat) = dm.as_deref_mut() {
                let y0: [f64; 8] = [m[0], m[2], m[1], m[3], dmat[0], dmat[2], dmat[1], dmat[3]];
                let mut f = |xx: f64, y: &[f64; 8]| -> [f64; 8] {
                    let q = v.eval(xx.min(seg.hi - 1e-15)) - lambda;
                    [
                        y[1],
                        q * y[0],
                        y[3],
                        q * y[2],
                        y[5],
                        q * y[4] - y[0],
                        y[7],
                        q * y[6] - y[2],
                    ]
                };
                let mut obs_wrap = observer.as_deref_mut().map(|obs| {
                    move |xx: f64, y: &[f64; 8]| obs(xx, &[y[0], y[2], y[1], y[3]])
                });
                let y = rk_adaptive(
                    &mut f,
                    x,
                    stop,
                    y0,
                    cap,
                    obs_wrap.as_mut().map(|o| o as &mut dyn FnMut(f64, &[f64; 8])),
                )?;
                *m = [y[0], y[2], y[1], y[3]];
                *dmat = [y[4], y[6], y[5], y[7]];
            } else {
                let y0: [f64; 4] = [m[0], m[2], m[1], m[3]];
                let mut f = |xx: f64, y: &[f64; 4]| -> [f64; 4] {
                    let q = v.eval(xx.min(seg.hi - 1e-15)) - lambda;
                    [y[1], q * y[0], y[3], q * y[2]]
                };
                let mut obs_wrap = observer.as_deref_mut().map(|obs| {
                    move |xx: f64, y: &[f64; 4]| obs(xx, &[y[0], y[2], y[1], y[3]])
                });
                let y = rk_adaptive(
                    &mut f,
                    x,
                    stop,
                    y0,
                    cap,
                    obs_wrap.as_mut().map(|o| o as &mut dyn FnMut(f64, &[f64; 4])),
                )?;
                *m = [y[0], y[2], y[1], y[3]];
            }
            x = stop;
        }
        if x >= seg.hi - 1e-14 && si + 1 < segs.len() {
            si += 1;
        }
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite { x });
    }
    Ok(())
}

#[inline]
fn step_const(d: f64, h: f64, m: &mut Mat2, dm: Option<&mut Mat2>) {
    if let Some(dmat) = dm {
        let (a, da) = const_step_dlambda(d, h);
        *dmat = mat2_add(&mat2_mul(&da, m), &mat2_mul(&a, dmat));
        *m = mat2_mul(&a, m);
    } else {
        let a = const_step(d, h);
        *m = mat2_mul(&a, m);
    }
}

fn pair_from_mat(m: &Mat2, x: f64, lambda: f64) -> FundamentalPair {
    FundamentalPair { phi1: m[0], dphi1: m[2], phi2: m[1], dphi2: m[3], x, lambda }
}

/// Propagate both fundamental solutions from 0 to x_end. With `dense` the
/// per-step trajectory samples are returned as well.
pub fn integrate_fundamental(
    v: &Potential,
    lambda: f64,
    x_end: f64,
    dense: bool,
) -> Result<(FundamentalPair, Option<Vec<FundamentalPair>>)> {
    assert!(x_end > 0.0 && x_end <= TAU + 1e-12, "x_end must lie in (0, 2*pi]");
    let mut m = MAT2_IDENTITY;
    let mut traj = if dense { Some(vec![pair_from_mat(&MAT2_IDENTITY, 0.0, lambda)]) } else { None };
    {
        let mut obs = traj.as_mut().map(|t| {
            move |x: f64, mm: &Mat2| t.push(pair_from_mat(mm, x, lambda))
        });
        propagate(
            v,
            lambda,
            0.0,
            x_end,
            &mut m,
            None,
            obs.as_mut().map(|o| o as &mut dyn FnMut(f64, &Mat2)),
            default_observe_cap(lambda),
        )?;
    }
    Ok((pair_from_mat(&m, x_end, lambda), traj))
}

/// Fundamental matrix over the full period.
pub fn fundamental_matrix(v: &Potential, lambda: f64) -> Result<Mat2> {
    let mut m = MAT2_IDENTITY;
    propagate(v, lambda, 0.0, TAU, &mut m, None, None, default_observe_cap(lambda))?;
    Ok(m)
}

/// Fundamental matrix over the full period plus its lambda-derivative.
pub fn fundamental_matrix_dlambda(v: &Potential, lambda: f64) -> Result<(Mat2, Mat2)> {
    let mut m = MAT2_IDENTITY;
    let mut dm = [0.0; 4];
    propagate(v, lambda, 0.0, TAU, &mut m, Some(&mut dm), None, default_observe_cap(lambda))?;
    Ok((m, dm))
}

/// Fundamental pairs at an ascending list of sample points in [0, 2pi],
/// obtained from a single sequential propagation.
pub fn fundamental_at(v: &Potential, lambda: f64, xs: &[f64]) -> Result<Vec<FundamentalPair>> {
    let mut out = Vec::with_capacity(xs.len());
    let mut m = MAT2_IDENTITY;
    let mut x = 0.0;
    for &xx in xs {
        assert!(xx >= x - 1e-13 && xx <= TAU + 1e-12, "sample points must ascend in [0, 2*pi]");
        if xx > x {
            propagate(v, lambda, x, xx, &mut m, None, None, default_observe_cap(lambda))?;
            x = xx;
        }
        out.push(pair_from_mat(&m, xx, lambda));
    }
    Ok(out)
}

fn wrap_pi(mut d: f64) -> f64 {
    while d > std::f64::consts::PI {
        d -= TAU;
    }
    while d <= -std::f64::consts::PI {
        d += TAU;
    }
    d
}

/// Prufer phase theta(x_end) for lambda above the potential, accumulated as a
/// continuous lift. Inside segments theta solves its own ODE (exactly linear
/// on constant segments); across potential jumps it is re-seeded from the
/// continuous (u, u') data with the phase correction taken in (-pi/2, pi/2).
pub fn prufer_phase(
    v: &Potential,
    lambda: f64,
    theta0: f64,
    x_end: f64,
) -> Result<PruferState> {
    let states = prufer_phase_at(v, lambda, theta0, &[x_end])?;
    Ok(states[0])
}

/// Prufer states at ascending sample points in (0, 2pi].
pub fn prufer_phase_at(
    v: &Potential,
    lambda: f64,
    theta0: f64,
    xs: &[f64],
) -> Result<Vec<PruferState>> {
    let max_v = v.max_value();
    if lambda <= max_v {
        return Err(SolverError::LambdaBelowPotential { lambda, max_v });
    }
    if !(0.0..std::f64::consts::PI).contains(&theta0) {
        return Err(SolverError::InvalidInitialPhase { theta0 });
    }
    let segs = v.segments();
    let r0 = (lambda - v.eval(0.0)).sqrt();
    let mut u = theta0.sin() / r0;
    let mut du = theta0.cos();
    let mut theta = theta0;
    let mut x = 0.0f64;
    let mut si = 0usize;
    let mut out = Vec::with_capacity(xs.len());

    // merged stops: segment boundaries and requested samples
    let mut stops: Vec<f64> = segs.iter().map(|s| s.hi).collect();
    stops.extend(xs.iter().copied());
    stops.retain(|s| *s > 0.0 && *s <= TAU + 1e-12);
    stops.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let x_last = *xs.last().expect("at least one sample point");
    let mut sample_iter = xs.iter().peekable();

    for stop in stops {
        if stop > x_last + 1e-13 {
            break;
        }
        if stop > x + 1e-14 {
            let seg = &segs[si];
            if seg.is_constant() {
                let w = (lambda - seg.coeffs[0]).sqrt();
                let a = const_step(lambda - seg.coeffs[0], stop - x);
                let (nu, ndu) = (a[0] * u + a[1] * du, a[2] * u + a[3] * du);
                theta += w * (stop - x);
                u = nu;
                du = ndu;
            } else {
                let cap = rk_step_cap(lambda);
                let mut f = |xx: f64, y: &[f64; 3]| -> [f64; 3] {
                    let xc = xx.min(seg.hi - 1e-15);
                    let vv = v.eval(xc);
                    let dv = v.eval_deriv(xc);
                    let d = lambda - vv;
                    [
                        y[1],
                        (vv - lambda) * y[0],
                        d.sqrt() - dv * (2.0 * y[2]).sin() / (4.0 * d),
                    ]
                };
                let y = rk_adaptive(&mut f, x, stop, [u, du, theta], cap, None)?;
                u = y[0];
                du = y[1];
                theta = y[2];
            }
            x = stop;
        }
        // emit samples that coincide with this stop
        while let Some(&&sx) = sample_iter.peek() {
            if (sx - x).abs() <= 1e-13 {
                let rr = {
                    // left-limit potential value at x
                    let seg = &segs[si];
                    (lambda - seg.eval(x.min(seg.hi))).sqrt()
                };
                let rho = ((rr * u).powi(2) + du * du).sqrt();
                out.push(PruferState { theta, rho, x: sx, lambda });
                sample_iter.next();
            } else {
                break;
            }
        }
        // crossing into the next segment: re-seed theta from (u, u')
        if si + 1 < segs.len() && (x - segs[si].hi).abs() <= 1e-13 {
            si += 1;
            let r_new = (lambda - v.eval(segs[si].lo)).sqrt();
            let principal = (r_new * u).atan2(du);
            let delta = wrap_pi(principal - theta);
            debug_assert!(delta.abs() < std::f64::consts::FRAC_PI_2 + 1e-6);
            theta += delta;
        }
        if !theta.is_finite() || !u.is_finite() {
            return Err(SolverError::NonFinite { x });
        }
    }
    debug_assert_eq!(out.len(), xs.len());
    Ok(out)
}

/// Continuous lift of atan2(S u, u') for an arbitrary solution, valid for any
/// lambda (also below max V). Used for root counting and Dirichlet bracketing.
/// Returns (lift at 0, lift at x_end) with the initial lift taken in [0, 2pi).
pub(crate) fn oscillation_phase(
    v: &Potential,
    lambda: f64,
    u0: (f64, f64),
    x_end: f64,
) -> Result<(f64, f64)> {
    let vmin = v.min_value();
    let vmax = v.max_value();
    let s = (lambda - vmin).max(1.0).sqrt();
    // rotation-rate bound of the scaled vector (S u, u')
    let rate = s.max((vmax - lambda).abs().max(lambda - vmin) / s).max(1.0);
    let h = 0.45 / rate;

    let (mut u, mut du) = u0;
    let mut principal = (s * u).atan2(du);
    if principal < 0.0 {
        principal += std::f64::consts::PI * 2.0;
    }
    let lift0 = principal;
    let mut lift = principal;
    let mut prev = principal;

    let segs = v.segments();
    let mut x = 0.0f64;
    for (si, seg) in segs.iter().enumerate() {
        let stop = seg.hi.min(x_end);
        if stop <= x {
            break;
        }
        let n = ((stop - x) / h).ceil().max(1.0) as usize;
        let hh = (stop - x) / n as f64;
        if seg.is_constant() {
            let a = const_step(lambda - seg.coeffs[0], hh);
            for _ in 0..n {
                let (nu, ndu) = (a[0] * u + a[1] * du, a[2] * u + a[3] * du);
                u = nu;
                du = ndu;
                let p = (s * u).atan2(du);
                lift += wrap_pi(p - prev);
                prev = p;
            }
            x = stop;
        } else {
            for k in 0..n {
                let xa = x + k as f64 * hh;
                let xb = x + (k + 1) as f64 * hh;
                let mut f = |xx: f64, y: &[f64; 2]| -> [f64; 2] {
                    let q = v.eval(xx.min(seg.hi - 1e-15)) - lambda;
                    [y[1], q * y[0]]
                };
                let y = rk_adaptive(&mut f, xa, xb, [u, du], hh, None)?;
                u = y[0];
                du = y[1];
                let p = (s * u).atan2(du);
                lift += wrap_pi(p - prev);
                prev = p;
            }
            x = stop;
        }
        if !u.is_finite() || !du.is_finite() {
            return Err(SolverError::NonFinite { x });
        }
        let _ = si;
        if x >= x_end - 1e-14 {
            break;
        }
    }
    Ok((lift0, lift))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::Segment;
    use std::f64::consts::PI;

    #[test]
    fn free_fundamental_period() {
        let v = Potential::zero();
        let (p, _) = integrate_fundamental(&v, 1.0, TAU, false).unwrap();
        assert!((p.phi1 - 1.0).abs() < 1e-10);
        assert!(p.dphi1.abs() < 1e-10);
        assert!(p.phi2.abs() < 1e-10);
        assert!((p.dphi2 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn degenerate_constant() {
        // V = 9, lambda = 9: solutions 1 and x
        let v = Potential::constant(9.0);
        let (p, _) = integrate_fundamental(&v, 9.0, TAU, false).unwrap();
        assert!((p.phi1 - 1.0).abs() < 1e-10);
        assert!(p.dphi1.abs() < 1e-10);
        assert!((p.phi2 - TAU).abs() < 1e-10);
        assert!((p.dphi2 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn section5_matches_transfer_product() {
        // two-factor exact product over the constant segments
        let v = Potential::section5();
        let lambda = 25.0;
        let a = const_step(lambda - 0.0, PI / 2.0);
        let b = const_step(lambda - 9.0, TAU - PI / 2.0);
        let exact = mat2_mul(&b, &a);
        let (p, _) = integrate_fundamental(&v, lambda, TAU, false).unwrap();
        assert!((p.phi1 - exact[0]).abs() < 1e-10);
        assert!((p.phi2 - exact[1]).abs() < 1e-10);
        assert!((p.dphi1 - exact[2]).abs() < 1e-10);
        assert!((p.dphi2 - exact[3]).abs() < 1e-10);
    }

    #[test]
    fn wronskian_along_dense_trajectory() {
        let v = Potential::section5();
        for lambda in [12.0, 100.0, 1234.5] {
            let (_, traj) = integrate_fundamental(&v, lambda, TAU, true).unwrap();
            for p in traj.unwrap() {
                assert!((p.wronskian() - 1.0).abs() < 1e-9, "W = {} at x = {}", p.wronskian(), p.x);
            }
        }
    }

    #[test]
    fn rk_path_against_constant_exact() {
        // a segment that is polynomial in form but constant in value exercises
        // the adaptive integrator against the closed-form matrix
        let seg = Segment { lo: 0.0, hi: TAU, coeffs: [2.5, 0.0, 0.0, 0.0] };
        let mut seg_poly = seg;
        seg_poly.coeffs[1] = 1e-300; // defeats the is_constant fast path
        let v_poly = Potential::new(vec![seg_poly]).unwrap();
        for lambda in [7.0, 50.0, 400.0] {
            let exact = const_step(lambda - 2.5, TAU);
            let m = fundamental_matrix(&v_poly, lambda).unwrap();
            for i in 0..4 {
                assert!((m[i] - exact[i]).abs() < 1e-9, "entry {i}: {} vs {}", m[i], exact[i]);
            }
        }
    }

    #[test]
    fn prufer_free_linear_phase() {
        let v = Potential::zero();
        let st = prufer_phase(&v, 9.0, 0.0, TAU).unwrap();
        assert!((st.theta - 6.0 * PI).abs() < 1e-10);
        assert!((st.rho - 1.0).abs() < 1e-10);
    }

    #[test]
    fn prufer_rejects_low_lambda() {
        let v = Potential::section5();
        assert!(prufer_phase(&v, 5.0, 0.0, TAU).is_err());
        assert!(prufer_phase(&v, 50.0, -0.1, TAU).is_err());
    }

    #[test]
    fn prufer_matches_atan2_reconstruction() {
        // independent phase reconstruction from the dense transfer-matrix
        // trajectory of u = phi2 (theta0 = 0)
        let v = Potential::section5();
        let lambda = 50.0;
        let (_, traj) = integrate_fundamental(&v, lambda, TAU, true).unwrap();
        let traj = traj.unwrap();
        let mut lift = 0.0f64;
        let mut prev = 0.0f64;
        for p in &traj {
            let r = (lambda - v.eval((p.x - 1e-12).max(0.0))).sqrt();
            let ph = (r * p.phi2).atan2(p.dphi2);
            let mut d = ph - prev;
            while d > PI {
                d -= TAU;
            }
            while d <= -PI {
                d += TAU;
            }
            lift += d;
            prev = ph;
        }
        let st = prufer_phase(&v, lambda, 0.0, TAU).unwrap();
        assert!(
            (st.theta - lift).abs() < 1e-8,
            "prufer {} vs reconstruction {}",
            st.theta,
            lift
        );
    }

    #[test]
    fn oscillation_phase_free() {
        let v = Potential::zero();
        // u = sin(3x): lift reaches 6 pi at 2 pi
        let (lift0, lift) = oscillation_phase(&v, 9.0, (0.0, 1.0), TAU).unwrap();
        assert_eq!(lift0, 0.0);
        assert!((lift - 6.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn oscillation_phase_below_potential() {
        // lambda below parts of V still integrates and counts no roots for
        // a non-oscillatory solution
        let v = Potential::section5();
        let (_, lift) = oscillation_phase(&v, 0.5, (0.0, 1.0), TAU).unwrap();
        assert!(lift < PI, "lift = {lift}");
        assert!(lift > 0.0);
    }
}

//! Piecewise-polynomial functions on [0, 2pi) with explicit breakpoints.
//!
//! Segments are half-open [lo, hi); evaluation at a breakpoint returns the
//! right limit. Everything is extended 2pi-periodically via x mod 2pi.

use crate::error::{Result, SolverError};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const TAU: f64 = 2.0 * PI;

/// Maximum polynomial degree per segment.
pub const MAX_DEGREE: usize = 3;

/// One polynomial piece, coefficients in the local coordinate s = x - lo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub coeffs: [f64; 4],
}

impl Segment {
    pub fn constant(lo: f64, hi: f64, value: f64) -> Self {
        Segment { lo, hi, coeffs: [value, 0.0, 0.0, 0.0] }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let s = x - self.lo;
        let c = &self.coeffs;
        c[0] + s * (c[1] + s * (c[2] + s * c[3]))
    }

    pub fn eval_deriv(&self, x: f64) -> f64 {
        let s = x - self.lo;
        let c = &self.coeffs;
        c[1] + s * (2.0 * c[2] + s * 3.0 * c[3])
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs[1] == 0.0 && self.coeffs[2] == 0.0 && self.coeffs[3] == 0.0
    }

    /// Exact integral over the full segment.
    pub fn integral(&self) -> f64 {
        let w = self.hi - self.lo;
        let c = &self.coeffs;
        w * (c[0] + w * (c[1] / 2.0 + w * (c[2] / 3.0 + w * c[3] / 4.0)))
    }

    /// Range of the polynomial over [lo, hi] (closed hull of the piece).
    fn range(&self) -> (f64, f64) {
        let w = self.hi - self.lo;
        let mut lo_v = self.eval(self.lo).min(self.eval(self.hi));
        let mut hi_v = self.eval(self.lo).max(self.eval(self.hi));
        // critical points of c1 + 2 c2 s + 3 c3 s^2
        let (a, b, c) = (3.0 * self.coeffs[3], 2.0 * self.coeffs[2], self.coeffs[1]);
        let mut consider = |s: f64| {
            if s > 0.0 && s < w {
                let v = self.eval(self.lo + s);
                lo_v = lo_v.min(v);
                hi_v = hi_v.max(v);
            }
        };
        if a.abs() > 0.0 {
            let disc = b * b - 4.0 * a * c;
            if disc >= 0.0 {
                let sq = disc.sqrt();
                consider((-b + sq) / (2.0 * a));
                consider((-b - sq) / (2.0 * a));
            }
        } else if b.abs() > 0.0 {
            consider(-c / b);
        }
        (lo_v, hi_v)
    }
}

/// A 2pi-periodic piecewise polynomial tiling [0, 2pi) exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePoly {
    segments: Vec<Segment>,
}

impl PiecewisePoly {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(SolverError::InvalidPiecewise("no segments".into()));
        }
        let eps = 1e-12;
        if segments[0].lo.abs() > eps {
            return Err(SolverError::InvalidPiecewise(format!(
                "first segment starts at {}, expected 0",
                segments[0].lo
            )));
        }
        if (segments.last().unwrap().hi - TAU).abs() > eps {
            return Err(SolverError::InvalidPiecewise(format!(
                "last segment ends at {}, expected 2*pi",
                segments.last().unwrap().hi
            )));
        }
        for pair in segments.windows(2) {
            if (pair[0].hi - pair[1].lo).abs() > eps {
                return Err(SolverError::InvalidPiecewise(format!(
                    "gap or overlap between {} and {}",
                    pair[0].hi, pair[1].lo
                )));
            }
        }
        for s in &segments {
            if s.hi - s.lo <= 0.0 {
                return Err(SolverError::InvalidPiecewise(format!(
                    "segment [{}, {}) has non-positive width",
                    s.lo, s.hi
                )));
            }
            if !s.coeffs.iter().all(|c| c.is_finite()) {
                return Err(SolverError::InvalidPiecewise("non-finite coefficient".into()));
            }
        }
        Ok(PiecewisePoly { segments })
    }

    pub fn constant(value: f64) -> Self {
        PiecewisePoly { segments: vec![Segment::constant(0.0, TAU, value)] }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Reduce x into [0, 2pi).
    pub fn wrap(x: f64) -> f64 {
        let mut y = x % TAU;
        if y < 0.0 {
            y += TAU;
        }
        // x = -1e-17 wraps to 2pi by rounding; fold back
        if y >= TAU {
            y -= TAU;
        }
        y
    }

    fn segment_index(&self, x: f64) -> usize {
        let y = Self::wrap(x);
        // binary search on lo
        let mut lo = 0usize;
        let mut hi = self.segments.len();
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.segments[mid].lo <= y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Evaluate at any real x (right limit at breakpoints).
    pub fn eval(&self, x: f64) -> f64 {
        let y = Self::wrap(x);
        self.segments[self.segment_index(y)].eval(y)
    }

    /// Derivative inside segments (right limit at breakpoints).
    pub fn eval_deriv(&self, x: f64) -> f64 {
        let y = Self::wrap(x);
        self.segments[self.segment_index(y)].eval_deriv(y)
    }

    /// Breakpoints in [0, 2pi): segment left endpoints.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.lo).collect()
    }

    /// Breakpoints where the function value actually jumps (left limit != right limit).
    pub fn jump_points(&self, tol: f64) -> Vec<f64> {
        let n = self.segments.len();
        let mut out = Vec::new();
        for i in 0..n {
            let prev = &self.segments[(i + n - 1) % n];
            let cur = &self.segments[i];
            let left = prev.eval(prev.hi);
            let right = cur.eval(cur.lo);
            if (left - right).abs() > tol {
                out.push(cur.lo);
            }
        }
        out
    }

    /// Exact integral over one period.
    pub fn integral(&self) -> f64 {
        self.segments.iter().map(|s| s.integral()).sum()
    }

    /// Mean over one period.
    pub fn mean(&self) -> f64 {
        self.integral() / TAU
    }

    /// Supremum over one period.
    pub fn max_value(&self) -> f64 {
        self.segments.iter().map(|s| s.range().1).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Infimum over one period.
    pub fn min_value(&self) -> f64 {
        self.segments.iter().map(|s| s.range().0).fold(f64::INFINITY, f64::min)
    }

    /// Pointwise shift by a constant.
    pub fn shifted(&self, c: f64) -> Self {
        let mut segs = self.segments.clone();
        for s in &mut segs {
            s.coeffs[0] += c;
        }
        PiecewisePoly { segments: segs }
    }

    /// L2 norm squared over one period (exact for polynomials).
    pub fn l2_norm_sq(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| {
                // integrate p(s)^2, degree <= 6
                let c = &s.coeffs;
                let mut sq = [0.0f64; 7];
                for i in 0..4 {
                    for j in 0..4 {
                        sq[i + j] += c[i] * c[j];
                    }
                }
                let w = s.hi - s.lo;
                let mut acc = 0.0;
                for (k, v) in sq.iter().enumerate() {
                    acc += v * w.powi(k as i32 + 1) / (k as f64 + 1.0);
                }
                acc
            })
            .sum()
    }
}

/// JSON-facing spec: either an inline segment list or a named builtin.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PiecewiseSpec {
    Builtin { builtin: String },
    Inline { segments: Vec<Segment> },
}

impl PiecewiseSpec {
    pub fn build(&self) -> Result<PiecewisePoly> {
        match self {
            PiecewiseSpec::Inline { segments } => PiecewisePoly::new(segments.clone()),
            PiecewiseSpec::Builtin { builtin } => match builtin.as_str() {
                "zero" => Ok(PiecewisePoly::zero()),
                "section5_potential" => Ok(section5_potential_pieces()),
                "section5_sawtooth" => Ok(section5_sawtooth_pieces()),
                other => Err(SolverError::InvalidPiecewise(format!("unknown builtin '{other}'"))),
            },
        }
    }
}

fn section5_potential_pieces() -> PiecewisePoly {
    PiecewisePoly::new(vec![
        Segment::constant(0.0, PI / 2.0, 0.0),
        Segment::constant(PI / 2.0, TAU, 9.0),
    ])
    .unwrap()
}

fn section5_sawtooth_pieces() -> PiecewisePoly {
    // -x/(2pi) on [0, pi), 1 - x/(2pi) on [pi, 2pi); local coordinate s = x - lo
    PiecewisePoly::new(vec![
        Segment { lo: 0.0, hi: PI, coeffs: [0.0, -1.0 / TAU, 0.0, 0.0] },
        Segment { lo: PI, hi: TAU, coeffs: [0.5, -1.0 / TAU, 0.0, 0.0] },
    ])
    .unwrap()
}

/// The potential V of the eigenvalue problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pieces: PiecewisePoly,
}

/// An initial datum f for the time evolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialDatum {
    pieces: PiecewisePoly,
}

macro_rules! delegate_piecewise {
    ($ty:ident) => {
        impl $ty {
            pub fn new(segments: Vec<Segment>) -> Result<Self> {
                Ok(Self { pieces: PiecewisePoly::new(segments)? })
            }
            pub fn from_pieces(pieces: PiecewisePoly) -> Self {
                Self { pieces }
            }
            pub fn from_spec(spec: &PiecewiseSpec) -> Result<Self> {
                Ok(Self { pieces: spec.build()? })
            }
            pub fn constant(value: f64) -> Self {
                Self { pieces: PiecewisePoly::constant(value) }
            }
            pub fn zero() -> Self {
                Self { pieces: PiecewisePoly::zero() }
            }
            pub fn pieces(&self) -> &PiecewisePoly {
                &self.pieces
            }
            pub fn segments(&self) -> &[Segment] {
                self.pieces.segments()
            }
            pub fn eval(&self, x: f64) -> f64 {
                self.pieces.eval(x)
            }
            pub fn eval_deriv(&self, x: f64) -> f64 {
                self.pieces.eval_deriv(x)
            }
            pub fn breakpoints(&self) -> Vec<f64> {
                self.pieces.breakpoints()
            }
            pub fn jump_points(&self, tol: f64) -> Vec<f64> {
                self.pieces.jump_points(tol)
            }
            pub fn integral(&self) -> f64 {
                self.pieces.integral()
            }
            pub fn mean(&self) -> f64 {
                self.pieces.mean()
            }
            pub fn max_value(&self) -> f64 {
                self.pieces.max_value()
            }
            pub fn min_value(&self) -> f64 {
                self.pieces.min_value()
            }
            pub fn shifted(&self, c: f64) -> Self {
                Self { pieces: self.pieces.shifted(c) }
            }
        }
    };
}

delegate_piecewise!(Potential);
delegate_piecewise!(InitialDatum);

impl Potential {
    /// The piecewise-constant potential of the paper's numerical experiment.
    pub fn section5() -> Self {
        Potential { pieces: section5_potential_pieces() }
    }

    /// Same potential with its mean removed.
    pub fn mean_removed(&self) -> (Self, f64) {
        let m = self.mean();
        (self.shifted(-m), m)
    }
}

impl InitialDatum {
    /// The sawtooth initial datum of the paper's numerical experiment.
    pub fn section5_sawtooth() -> Self {
        InitialDatum { pieces: section5_sawtooth_pieces() }
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.pieces.l2_norm_sq()
    }
}

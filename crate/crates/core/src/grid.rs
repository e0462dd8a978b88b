//! Spatial grid, rational times, wave fields and spectral coefficients.

use crate::error::{Result, SolverError};
use crate::piecewise::TAU;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Uniform grid x_j = j * dx, j = 0..n-1 on [0, 2pi).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n_points: usize,
    spacing: f64,
}

impl Grid {
    pub fn new(n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(SolverError::InvalidGrid(format!("n_points = {n_points} < 2")));
        }
        let spacing = TAU / n_points as f64;
        let g = Grid { n_points, spacing };
        debug_assert!((g.spacing * n_points as f64 - TAU).abs() / TAU < 1e-12);
        Ok(g)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.spacing
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|j| self.node(j))
    }

    pub fn node_vec(&self) -> Vec<f64> {
        self.nodes().collect()
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// A rational time t = 2pi q / r with gcd(q, r) = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalTime {
    q: u64,
    r: u64,
}

impl RationalTime {
    pub fn new(q: u64, r: u64) -> Result<Self> {
        if q == 0 || r == 0 || gcd(q, r) != 1 {
            return Err(SolverError::InvalidRationalTime { q, r });
        }
        Ok(RationalTime { q, r })
    }

    /// Build from q/r reducing the fraction first.
    pub fn reduced(q: u64, r: u64) -> Result<Self> {
        if q == 0 || r == 0 {
            return Err(SolverError::InvalidRationalTime { q, r });
        }
        let g = gcd(q, r);
        RationalTime::new(q / g, r / g)
    }

    /// Build from t = (num/den) * pi, i.e. q/r = num/(2 den) reduced.
    pub fn from_pi_multiple(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(SolverError::InvalidRationalTime { q: num, r: den });
        }
        Self::reduced(num, 2 * den)
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn value(&self) -> f64 {
        TAU * self.q as f64 / self.r as f64
    }
}

/// Complex-valued solution samples on a grid at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub grid: Grid,
    pub samples: Vec<Complex64>,
    pub time: f64,
}

impl WaveField {
    pub fn new(grid: Grid, samples: Vec<Complex64>, time: f64) -> Result<Self> {
        if samples.len() != grid.n_points() {
            return Err(SolverError::InvalidGrid(format!(
                "sample count {} != grid points {}",
                samples.len(),
                grid.n_points()
            )));
        }
        if let Some(s) = samples.iter().find(|s| !s.re.is_finite() || !s.im.is_finite()) {
            let _ = s;
            return Err(SolverError::NonFinite { x: f64::NAN });
        }
        Ok(WaveField { grid, samples, time })
    }

    /// Discrete L2 norm on the grid (trapezoidal on the periodic grid).
    pub fn l2_norm(&self) -> f64 {
        let dx = self.grid.spacing();
        (self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * dx).sqrt()
    }

    pub fn l2_distance(&self, other: &WaveField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(SolverError::GridMismatch);
        }
        let dx = self.grid.spacing();
        let sum: f64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((sum * dx).sqrt())
    }
}

/// Which basis a coefficient vector refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisTag {
    Eigenfunction,
    Fourier,
}

/// Expansion coefficients c_n with a basis tag.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoefficients {
    pub values: Vec<Complex64>,
    pub basis: BasisTag,
    /// L2 norm squared of the expanded function, for the Bessel bound.
    pub datum_norm_sq: f64,
}

impl SpectralCoefficients {
    pub fn sum_sq(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Bessel inequality residual: sum |c_n|^2 - ||f||^2 (should be <= tolerance).
    pub fn bessel_excess(&self) -> f64 {
        self.sum_sq() - self.datum_norm_sq
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_basics() {
        let g = Grid::new(4000).unwrap();
        assert!((g.spacing() - 0.0005 * std::f64::consts::PI).abs() < 1e-15);
        assert!(Grid::new(1).is_err());
    }

    #[test]
    fn rational_times() {
        assert!(RationalTime::new(2, 4).is_err());
        let t = RationalTime::reduced(2, 4).unwrap();
        assert_eq!((t.q(), t.r()), (1, 2));
        // t = pi/30  =>  q/r = 1/60
        let t = RationalTime::from_pi_multiple(1, 30).unwrap();
        assert_eq!((t.q(), t.r()), (1, 60));
        assert!((t.value() - std::f64::consts::PI / 30.0).abs() < 1e-15);
    }
}

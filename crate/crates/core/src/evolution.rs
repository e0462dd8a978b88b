//! Spectral expansion of initial data, diagonal time propagation, and the
//! gauge transform that reinstates the potential mean.

use crate::error::{Result, SolverError};
use crate::grid::{BasisTag, Grid, SpectralCoefficients, WaveField};
use crate::ode::fundamental_at;
use crate::piecewise::{InitialDatum, Potential, TAU};
use crate::quad::{oscillatory_panel, quadrature_nodes};
use crate::spectrum::Eigenpair;
use num_complex::Complex64;

/// Everything needed to propagate one initial datum.
#[derive(Debug, Clone)]
pub struct EvolutionSetup {
    pub potential: Potential,
    pub mean_removed: bool,
    pub eigenpairs: Vec<Eigenpair>,
    pub coefficients: SpectralCoefficients,
    pub grid: Grid,
}

impl EvolutionSetup {
    pub fn new(
        potential: Potential,
        mean_removed: bool,
        eigenpairs: Vec<Eigenpair>,
        coefficients: SpectralCoefficients,
        grid: Grid,
    ) -> Result<Self> {
        if coefficients.values.len() != eigenpairs.len() {
            return Err(SolverError::InvalidGrid(format!(
                "{} coefficients for {} eigenfunctions",
                coefficients.values.len(),
                eigenpairs.len()
            )));
        }
        let excess = coefficients.bessel_excess();
        if excess > 1e-8 {
            return Err(SolverError::GramCheckFailed { max_dev: excess });
        }
        Ok(EvolutionSetup { potential, mean_removed, eigenpairs, coefficients, grid })
    }
}

/// Maximum off-identity deviation of the Gram matrix of the first `limit`
/// eigenfunctions, by quadrature inner products (one trajectory per
/// eigenvalue, shared nodes).
pub fn gram_deviation(v: &Potential, eigs: &[Eigenpair], limit: usize) -> Result<f64> {
    let n = limit.min(eigs.len());
    if n == 0 {
        return Ok(0.0);
    }
    let max_rate = eigs[..n]
        .iter()
        .map(|e| 2.0 * e.lambda.max(1.0).sqrt())
        .fold(1.0, f64::max);
    let qnodes = quadrature_nodes(0.0, TAU, &v.breakpoints(), oscillatory_panel(max_rate));
    let xs: Vec<f64> = qnodes.iter().map(|(x, _)| *x).collect();
    let mut vals: Vec<Vec<f64>> = Vec::with_capacity(n);
    for ep in &eigs[..n] {
        let pairs = fundamental_at(v, ep.lambda, &xs)?;
        vals.push(
            pairs
                .iter()
                .map(|p| ep.coeffs.0 * p.phi1 + ep.coeffs.1 * p.phi2)
                .collect(),
        );
    }
    let mut max_dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let mut g = 0.0;
            for (k, (_, w)) in qnodes.iter().enumerate() {
                g += w * vals[i][k] * vals[j][k];
            }
            let target = if i == j { 1.0 } else { 0.0 };
            max_dev = max_dev.max((g - target).abs());
        }
    }
    Ok(max_dev)
}

/// Inner products <f, psi_n> for an arbitrary integrand, with forced nodes at
/// the breakpoints of V and f.
fn project(
    v: &Potential,
    f: &dyn Fn(f64) -> f64,
    f_breaks: &[f64],
    eigs: &[Eigenpair],
) -> Result<Vec<f64>> {
    let mut forced = v.breakpoints();
    forced.extend_from_slice(f_breaks);
    let mut out = Vec::with_capacity(eigs.len());
    for ep in eigs {
        let rate = 2.0 * ep.lambda.max(1.0).sqrt();
        let qnodes = quadrature_nodes(0.0, TAU, &forced, oscillatory_panel(rate));
        let xs: Vec<f64> = qnodes.iter().map(|(x, _)| *x).collect();
        let pairs = fundamental_at(v, ep.lambda, &xs)?;
        let mut c = 0.0;
        for ((x, w), p) in qnodes.iter().zip(&pairs) {
            c += w * f(*x) * (ep.coeffs.0 * p.phi1 + ep.coeffs.1 * p.phi2);
        }
        out.push(c);
    }
    Ok(out)
}

/// Expansion coefficients of a real function against the eigenbasis. The
/// first few eigenfunctions are Gram-checked before expanding.
pub fn expand_function(
    v: &Potential,
    f: &dyn Fn(f64) -> f64,
    f_breaks: &[f64],
    norm_sq: f64,
    eigs: &[Eigenpair],
) -> Result<SpectralCoefficients> {
    let dev = gram_deviation(v, eigs, 12)?;
    if dev > 1e-6 {
        return Err(SolverError::GramCheckFailed { max_dev: dev });
    }
    let re = project(v, f, f_breaks, eigs)?;
    Ok(SpectralCoefficients {
        values: re.into_iter().map(|c| Complex64::new(c, 0.0)).collect(),
        basis: BasisTag::Eigenfunction,
        datum_norm_sq: norm_sq,
    })
}

/// Expansion of a piecewise-polynomial initial datum.
pub fn expand_initial(
    v: &Potential,
    f: &InitialDatum,
    eigs: &[Eigenpair],
) -> Result<SpectralCoefficients> {
    expand_function(v, &|x| f.eval(x), &f.breakpoints(), f.l2_norm_sq(), eigs)
}

/// Complex datum: real and imaginary parts expanded separately against the
/// real eigenbasis.
pub fn expand_initial_complex(
    v: &Potential,
    f_re: &InitialDatum,
    f_im: &InitialDatum,
    eigs: &[Eigenpair],
) -> Result<SpectralCoefficients> {
    let re = expand_initial(v, f_re, eigs)?;
    let im = project(v, &|x| f_im.eval(x), &f_im.breakpoints(), eigs)?;
    Ok(SpectralCoefficients {
        values: re
            .values
            .iter()
            .zip(im)
            .map(|(c, i)| Complex64::new(c.re, i))
            .collect(),
        basis: BasisTag::Eigenfunction,
        datum_norm_sq: re.datum_norm_sq + f_im.l2_norm_sq(),
    })
}

/// Coefficients rotated by the diagonal propagator over time t.
pub fn phase_shifted(setup: &EvolutionSetup, t: f64) -> SpectralCoefficients {
    let values = setup
        .coefficients
        .values
        .iter()
        .zip(&setup.eigenpairs)
        .map(|(c, ep)| c * Complex64::from_polar(1.0, -ep.lambda * t))
        .collect();
    SpectralCoefficients { values, ..setup.coefficients.clone() }
}

/// u_N(t, x) = sum_n c_n e^{-i lambda_n t} psi_n(x) on the setup grid.
pub fn evolve(setup: &EvolutionSetup, t: f64) -> Result<WaveField> {
    let n_pts = setup.grid.n_points();
    let mut samples = vec![Complex64::new(0.0, 0.0); n_pts];
    for (c, ep) in setup.coefficients.values.iter().zip(&setup.eigenpairs) {
        let phase = c * Complex64::from_polar(1.0, -ep.lambda * t);
        debug_assert_eq!(ep.samples.len(), n_pts);
        for (s, psi) in samples.iter_mut().zip(&ep.samples) {
            *s += phase * psi;
        }
    }
    WaveField::new(setup.grid.clone(), samples, t)
}

/// u = e^{-i <V> t} u*, restoring the mean removed before the eigensolve.
pub fn gauge_transform(u_star: &WaveField, mean_v: f64, t: f64) -> WaveField {
    let phase = Complex64::from_polar(1.0, -mean_v * t);
    WaveField {
        grid: u_star.grid.clone(),
        samples: u_star.samples.iter().map(|s| s * phase).collect(),
        time: t,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{eigenfunctions, eigenvalues, BoundaryCondition};
    use std::f64::consts::PI;

    fn free_setup(n_eigs: usize, grid_pts: usize) -> (Potential, Vec<Eigenpair>, Grid) {
        let v = Potential::zero();
        let t = eigenvalues(&v, BoundaryCondition::Periodic, n_eigs).unwrap();
        let grid = Grid::new(grid_pts).unwrap();
        let eigs = eigenfunctions(&v, &t, &grid).unwrap();
        (v, eigs, grid)
    }

    #[test]
    fn sine_projects_onto_single_mode() {
        let (v, eigs, _) = free_setup(7, 128);
        let c = expand_function(&v, &|x: f64| x.sin(), &[], PI, &eigs).unwrap();
        // basis order: const, cos x, sin x, cos 2x, sin 2x, ...
        for (i, val) in c.values.iter().enumerate() {
            let expect = if i == 2 { PI.sqrt() } else { 0.0 };
            assert!((val.re - expect).abs() < 1e-10, "c_{i} = {val}");
        }
        assert!(c.bessel_excess() < 1e-8);
    }

    #[test]
    fn gram_deviation_small_free() {
        let (v, eigs, _) = free_setup(9, 64);
        let dev = gram_deviation(&v, &eigs, 9).unwrap();
        assert!(dev < 1e-9, "dev = {dev}");
    }

    #[test]
    fn reconstruction_at_t0() {
        let v = Potential::section5();
        let t = eigenvalues(&v, BoundaryCondition::Periodic, 41).unwrap();
        let grid = Grid::new(1024).unwrap();
        let eigs = eigenfunctions(&v, &t, &grid).unwrap();
        let f = InitialDatum::section5_sawtooth();
        let c = expand_initial(&v, &f, &eigs).unwrap();
        let setup = EvolutionSetup::new(v, false, eigs, c, grid.clone()).unwrap();
        let u0 = evolve(&setup, 0.0).unwrap();
        let dx = grid.spacing();
        let err_sq: f64 = (0..grid.n_points())
            .map(|j| {
                let x = grid.node(j);
                (u0.samples[j] - Complex64::new(f.eval(x), 0.0)).norm_sqr() * dx
            })
            .sum();
        // jump datum: truncation error ~ 1/sqrt(pi * m_max), here m_max = 20
        assert!(err_sq.sqrt() < 0.15, "L2 error {}", err_sq.sqrt());
        assert!(err_sq.sqrt() > 0.09, "L2 error {}", err_sq.sqrt());
    }

    #[test]
    fn single_complex_mode() {
        // f = e^{ix}: u(t) = e^{-it} e^{ix}
        let (v, eigs, grid) = free_setup(5, 64);
        let c_re = expand_function(&v, &|x: f64| x.cos(), &[], PI, &eigs).unwrap();
        let c_im = project(&v, &|x: f64| x.sin(), &[], &eigs).unwrap();
        let coeffs = SpectralCoefficients {
            values: c_re
                .values
                .iter()
                .zip(c_im)
                .map(|(a, b)| Complex64::new(a.re, b))
                .collect(),
            basis: BasisTag::Eigenfunction,
            datum_norm_sq: TAU,
        };
        let setup = EvolutionSetup::new(v, false, eigs, coeffs, grid.clone()).unwrap();
        let t = 0.7;
        let u = evolve(&setup, t).unwrap();
        for j in 0..grid.n_points() {
            let x = grid.node(j);
            let expect = Complex64::from_polar(1.0, x - t);
            assert!((u.samples[j] - expect).norm() < 1e-9, "x = {x}");
        }
    }

    #[test]
    fn unitarity_and_semigroup() {
        let v = Potential::section5();
        let t = eigenvalues(&v, BoundaryCondition::Periodic, 21).unwrap();
        // trapezoid norm needs a fine grid for the 1e-9 drift bound to be
        // about unitarity rather than quadrature error
        let grid = Grid::new(1024).unwrap();
        let eigs = eigenfunctions(&v, &t, &grid).unwrap();
        let f = InitialDatum::section5_sawtooth();
        let c = expand_initial(&v, &f, &eigs).unwrap();
        let setup = EvolutionSetup::new(v, false, eigs, c, grid).unwrap();
        let n0 = evolve(&setup, 0.0).unwrap().l2_norm();
        for t in [0.1, 1.0, PI] {
            let n = evolve(&setup, t).unwrap().l2_norm();
            assert!((n - n0).abs() < 1e-9, "t = {t}");
        }
        // semigroup: rotate by t1, then evolve t2
        let (t1, t2) = (0.3, 0.45);
        let direct = evolve(&setup, t1 + t2).unwrap();
        let mut mid = setup.clone();
        mid.coefficients = phase_shifted(&setup, t1);
        let composed = evolve(&mid, t2).unwrap();
        let dist = direct.l2_distance(&composed).unwrap();
        assert!(dist < 1e-10, "semigroup deviation {dist}");
    }

    #[test]
    fn gauge_equivalence() {
        let f = InitialDatum::section5_sawtooth();
        let grid = Grid::new(256).unwrap();
        let n_eigs = 21;

        let v_full = Potential::section5();
        let t_full = eigenvalues(&v_full, BoundaryCondition::Periodic, n_eigs).unwrap();
        let eig_full = eigenfunctions(&v_full, &t_full, &grid).unwrap();
        let c_full = expand_initial(&v_full, &f, &eig_full).unwrap();
        let setup_full =
            EvolutionSetup::new(v_full.clone(), false, eig_full, c_full, grid.clone()).unwrap();

        let (v_red, mean) = v_full.mean_removed();
        let t_red = eigenvalues(&v_red, BoundaryCondition::Periodic, n_eigs).unwrap();
        let eig_red = eigenfunctions(&v_red, &t_red, &grid).unwrap();
        let c_red = expand_initial(&v_red, &f, &eig_red).unwrap();
        let setup_red = EvolutionSetup::new(v_red, true, eig_red, c_red, grid).unwrap();

        let t = PI / 5.0;
        let direct = evolve(&setup_full, t).unwrap();
        let gauged = gauge_transform(&evolve(&setup_red, t).unwrap(), mean, t);
        let dist = direct.l2_distance(&gauged).unwrap();
        assert!(dist < 1e-6, "gauge deviation {dist}");
    }

    #[test]
    fn gauge_identities() {
        let grid = Grid::new(16).unwrap();
        let samples: Vec<Complex64> =
            (0..16).map(|j| Complex64::new(j as f64, -(j as f64))).collect();
        let u = WaveField::new(grid, samples, 1.0).unwrap();
        assert_eq!(gauge_transform(&u, 0.0, 5.0).samples, u.samples);
        assert_eq!(gauge_transform(&u, 3.0, 0.0).samples, u.samples);
    }
}

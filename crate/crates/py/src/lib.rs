//! Python bindings for the spectral solver and revival analyzer.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use revival_core::evolution::{evolve as evolve_setup, expand_initial, EvolutionSetup};
use revival_core::revival::{decompose_and_diagnose, revival_component};
use revival_core::spectrum::{discriminant as floquet_discriminant, eigenfunctions, eigenvalues};
use revival_core::{
    BoundaryCondition, Grid, InitialDatum, PiecewiseSpec, Potential, RationalTime,
};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// "zero" / "section5_potential" / "section5_sawtooth", or a JSON segment
/// list {"segments": [...]}
fn parse_spec(text: &str) -> PyResult<PiecewiseSpec> {
    if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(err)
    } else {
        Ok(PiecewiseSpec::Builtin { builtin: text.to_string() })
    }
}

fn parse_potential(text: &str) -> PyResult<Potential> {
    Potential::from_spec(&parse_spec(text)?).map_err(err)
}

fn parse_bc(bc: &str) -> PyResult<BoundaryCondition> {
    match bc {
        "periodic" => Ok(BoundaryCondition::Periodic),
        "semiperiodic" => Ok(BoundaryCondition::Semiperiodic),
        "dirichlet" => Ok(BoundaryCondition::Dirichlet),
        other => Err(PyValueError::new_err(format!(
            "unknown boundary condition '{other}' (periodic | semiperiodic | dirichlet)"
        ))),
    }
}

/// (index, eigenvalue, multiplicity) triples for the first n eigenvalues.
#[pyfunction]
fn spectrum(potential: &str, bc: &str, n: usize) -> PyResult<Vec<(usize, f64, u8)>> {
    let v = parse_potential(potential)?;
    let table = eigenvalues(&v, parse_bc(bc)?, n).map_err(err)?;
    Ok(table.entries.iter().map(|e| (e.n, e.lambda, e.multiplicity)).collect())
}

/// Floquet discriminant Delta(lambda).
#[pyfunction]
fn discriminant(potential: &str, lam: f64) -> PyResult<f64> {
    let v = parse_potential(potential)?;
    floquet_discriminant(&v, lam).map_err(err)
}

fn build_setup(
    potential: &str,
    datum: &str,
    n_eigs: usize,
    grid_points: usize,
    mean_removed: bool,
) -> PyResult<(EvolutionSetup, InitialDatum, Potential, f64)> {
    let v_full = parse_potential(potential)?;
    let f = InitialDatum::from_spec(&parse_spec(datum)?).map_err(err)?;
    let (v, mean) = if mean_removed { v_full.mean_removed() } else { (v_full.clone(), 0.0) };
    let grid = Grid::new(grid_points).map_err(err)?;
    let table = eigenvalues(&v, BoundaryCondition::Periodic, n_eigs).map_err(err)?;
    let eigs = eigenfunctions(&v, &table, &grid).map_err(err)?;
    let c = expand_initial(&v, &f, &eigs).map_err(err)?;
    let setup = EvolutionSetup::new(v, mean_removed, eigs, c, grid).map_err(err)?;
    Ok((setup, f, v_full, mean))
}

/// Solution samples u(t, x_j) on the uniform grid.
#[pyfunction]
fn evolve(
    potential: &str,
    datum: &str,
    n_eigs: usize,
    grid_points: usize,
    t: f64,
) -> PyResult<Vec<Complex64>> {
    let (setup, _, _, _) = build_setup(potential, datum, n_eigs, grid_points, false)?;
    Ok(evolve_setup(&setup, t).map_err(err)?.samples)
}

/// Revival diagnostics at t = 2 pi q / r: the jump ratio
/// max|jump(w)| / max|jump(u)| and the per-candidate table
/// (x, |jump u|, |jump psi_rev|, |jump w|).
#[pyfunction]
fn revival_ratio(
    potential: &str,
    datum: &str,
    n_eigs: usize,
    grid_points: usize,
    q: u64,
    r: u64,
) -> PyResult<(f64, Vec<(f64, f64, f64, f64)>)> {
    let (setup, f, v_full, mean) = build_setup(potential, datum, n_eigs, grid_points, true)?;
    let t = RationalTime::new(q, r).map_err(err)?;
    let u_star = evolve_setup(&setup, t.value()).map_err(err)?;
    let u = revival_core::evolution::gauge_transform(&u_star, mean, t.value());
    let psi = revival_component(&f, t, mean, &setup.grid).map_err(err)?;
    let mut seeds = f.jump_points(1e-12);
    seeds.extend(v_full.jump_points(1e-12));
    let dec = decompose_and_diagnose(&u, &psi, &seeds, t).map_err(err)?;
    let table = dec
        .jump_table
        .iter()
        .map(|row| (row.location, row.jump_u.norm(), row.jump_psi.norm(), row.jump_w.norm()))
        .collect();
    Ok((dec.ratio, table))
}

#[pymodule]
fn revival_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(discriminant, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(revival_ratio, m)?)?;
    Ok(())
}

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use revival_core::asymptotics::{asymptotic_residuals, fit_coefficients, CoefficientFit};
use revival_core::evolution::{
    evolve, expand_initial, gauge_transform, gram_deviation, EvolutionSetup,
};
use revival_core::ode::fundamental_matrix;
use revival_core::revival::{
    decompose_and_diagnose, revival_component, JumpRow, RevivalDecomposition,
};
use revival_core::spectrum::{count_roots, eigenfunctions, eigenvalues, verify_interlacing};
use revival_core::{BoundaryCondition, Grid, InitialDatum, Potential, RationalTime, WaveField};
use serde::Serialize;

use crate::artifacts::{potential_hash, svg_line_plot, write_csv, SvgSeries};
use crate::config::RunConfig;

pub struct CommandOutput {
    pub verdicts: BTreeMap<String, bool>,
    pub artifacts: Vec<PathBuf>,
}

impl CommandOutput {
    fn new() -> Self {
        CommandOutput { verdicts: BTreeMap::new(), artifacts: Vec::new() }
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.values().all(|v| *v)
    }
}

fn time_tag(t: RationalTime) -> String {
    format!("t_{}_{}", t.q(), t.r())
}

pub fn run_spectrum(cfg: &RunConfig, out_dir: &Path) -> Result<CommandOutput> {
    let v = cfg.potential()?;
    let grid = Grid::new(cfg.grid_points)?;
    let mut rows = Vec::new();
    for bc in [
        BoundaryCondition::Periodic,
        BoundaryCondition::Semiperiodic,
        BoundaryCondition::Dirichlet,
    ] {
        let table = eigenvalues(&v, bc, cfg.n_eigs)?;
        let eigs = eigenfunctions(&v, &table, &grid)?;
        for (entry, ep) in table.entries.iter().zip(&eigs) {
            let m = fundamental_matrix(&v, entry.lambda)?;
            let residual = match bc {
                BoundaryCondition::Periodic => (m[0] + m[3] - 2.0).abs(),
                BoundaryCondition::Semiperiodic => (m[0] + m[3] + 2.0).abs(),
                BoundaryCondition::Dirichlet => m[1].abs(),
            };
            let roots = count_roots(&v, ep)?;
            rows.push(vec![
                bc.label().to_string(),
                entry.n.to_string(),
                entry.lambda.to_string(),
                entry.multiplicity.to_string(),
                residual.to_string(),
                roots.to_string(),
            ]);
        }
    }
    let path = out_dir.join("spectrum.csv");
    write_csv(
        &path,
        Some(&format!("potential_hash={:016x}", potential_hash(&v))),
        &["bc", "n", "lambda", "multiplicity", "discriminant_residual", "root_count"],
        &rows,
    )?;
    let mut out = CommandOutput::new();
    out.artifacts.push(path);
    Ok(out)
}

fn evolution_setup(
    v: &Potential,
    f: &InitialDatum,
    n_eigs: usize,
    grid: &Grid,
    mean_removed: bool,
) -> Result<EvolutionSetup> {
    let table = eigenvalues(v, BoundaryCondition::Periodic, n_eigs)?;
    let eigs = eigenfunctions(v, &table, grid)?;
    let c = expand_initial(v, f, &eigs)?;
    Ok(EvolutionSetup::new(v.clone(), mean_removed, eigs, c, grid.clone())?)
}

fn wavefield_rows(u: &WaveField) -> Vec<Vec<String>> {
    u.grid
        .nodes()
        .zip(&u.samples)
        .map(|(x, s)| {
            vec![x.to_string(), s.re.to_string(), s.im.to_string(), s.norm().to_string()]
        })
        .collect()
}

pub fn run_evolve(cfg: &RunConfig, out_dir: &Path) -> Result<CommandOutput> {
    let v = cfg.potential()?;
    let f = cfg.datum()?;
    let grid = Grid::new(cfg.grid_points)?;
    let setup = evolution_setup(&v, &f, cfg.n_eigs, &grid, false)?;
    let hash = potential_hash(&v);
    let mut out = CommandOutput::new();
    for t in cfg.resolved_times()? {
        let u = evolve(&setup, t.value())?;
        let tag = time_tag(t);
        let path = out_dir.join(format!("wavefield_{tag}.csv"));
        write_csv(
            &path,
            Some(&format!(
                "t={} q={} r={} n_eigs={} potential_hash={hash:016x}",
                t.value(),
                t.q(),
                t.r(),
                cfg.n_eigs
            )),
            &["x", "re_u", "im_u", "abs_u"],
            &wavefield_rows(&u),
        )?;
        out.artifacts.push(path);

        let xs = grid.node_vec();
        let re: Vec<f64> = u.samples.iter().map(|s| s.re).collect();
        let im: Vec<f64> = u.samples.iter().map(|s| s.im).collect();
        let svg = out_dir.join(format!("wavefield_{tag}.svg"));
        svg_line_plot(
            &svg,
            &format!("u(t = 2pi {}/{})", t.q(), t.r()),
            &xs,
            &[
                SvgSeries { label: "re u", color: "#1f5fa8", ys: &re },
                SvgSeries { label: "im u", color: "#c44e52", ys: &im },
            ],
        )?;
        out.artifacts.push(svg);
    }
    Ok(out)
}

#[derive(Serialize)]
struct TimeDiagnostics {
    t: TimeJson,
    candidates: Vec<JumpRow>,
    ratio: f64,
    n_eigs: usize,
    delta: f64,
    window: f64,
}

#[derive(Serialize)]
struct TimeJson {
    q: u64,
    r: u64,
}

fn revival_decomposition(
    setup: &EvolutionSetup,
    f: &InitialDatum,
    v_full: &Potential,
    mean: f64,
    t: RationalTime,
) -> Result<RevivalDecomposition> {
    let grid = &setup.grid;
    let u_star = evolve(setup, t.value())?;
    let u = gauge_transform(&u_star, mean, t.value());
    let psi = revival_component(f, t, mean, grid)?;
    let mut seeds = f.jump_points(1e-12);
    seeds.extend(v_full.jump_points(1e-12));
    Ok(decompose_and_diagnose(&u, &psi, &seeds, t)?)
}

pub fn run_revival(cfg: &RunConfig, out_dir: &Path) -> Result<CommandOutput> {
    let v_full = cfg.potential()?;
    let (v_star, mean) = v_full.mean_removed();
    let f = cfg.datum()?;
    let grid = Grid::new(cfg.grid_points)?;
    let setup = evolution_setup(&v_star, &f, cfg.n_eigs, &grid, true)?;
    let hash = potential_hash(&v_full);
    let mut out = CommandOutput::new();
    let mut diagnostics = Vec::new();
    for t in cfg.resolved_times()? {
        let dec = revival_decomposition(&setup, &f, &v_full, mean, t)?;
        let tag = time_tag(t);
        let rows: Vec<Vec<String>> = grid
            .nodes()
            .zip(dec.u.samples.iter().zip(dec.psi_rev.samples.iter().zip(&dec.w.samples)))
            .map(|(x, (u, (p, w)))| {
                vec![
                    x.to_string(),
                    u.re.to_string(),
                    u.im.to_string(),
                    p.re.to_string(),
                    p.im.to_string(),
                    w.re.to_string(),
                    w.im.to_string(),
                ]
            })
            .collect();
        let path = out_dir.join(format!("decomposition_{tag}.csv"));
        write_csv(
            &path,
            Some(&format!(
                "t={} q={} r={} n_eigs={} potential_hash={hash:016x}",
                t.value(),
                t.q(),
                t.r(),
                cfg.n_eigs
            )),
            &["x", "re_u", "im_u", "re_psi", "im_psi", "re_w", "im_w"],
            &rows,
        )?;
        out.artifacts.push(path);

        let xs = grid.node_vec();
        let series: Vec<Vec<f64>> = vec![
            dec.u.samples.iter().map(|s| s.re).collect(),
            dec.u.samples.iter().map(|s| s.im).collect(),
            dec.w.samples.iter().map(|s| s.re).collect(),
            dec.w.samples.iter().map(|s| s.im).collect(),
        ];
        let svg = out_dir.join(format!("decomposition_{tag}.svg"));
        svg_line_plot(
            &svg,
            &format!("revival decomposition, t = 2pi {}/{}", t.q(), t.r()),
            &xs,
            &[
                SvgSeries { label: "re u", color: "#1f5fa8", ys: &series[0] },
                SvgSeries { label: "im u", color: "#7ba3d0", ys: &series[1] },
                SvgSeries { label: "re w", color: "#c44e52", ys: &series[2] },
                SvgSeries { label: "im w", color: "#d99a9d", ys: &series[3] },
            ],
        )?;
        out.artifacts.push(svg);

        out.verdicts.insert(
            format!("revival_ratio_{tag}"),
            dec.ratio <= cfg.tolerances.jump_ratio,
        );
        diagnostics.push(TimeDiagnostics {
            t: TimeJson { q: t.q(), r: t.r() },
            candidates: dec.jump_table,
            ratio: dec.ratio,
            n_eigs: cfg.n_eigs,
            delta: dec.delta,
            window: dec.window,
        });
    }
    let diag_path = out_dir.join("diagnostics.json");
    std::fs::write(&diag_path, serde_json::to_string_pretty(&diagnostics)?)
        .with_context(|| format!("cannot write {}", diag_path.display()))?;
    out.artifacts.push(diag_path);
    Ok(out)
}

pub fn run_asymptotics(cfg: &RunConfig, out_dir: &Path) -> Result<CommandOutput> {
    let v_full = cfg.potential()?;
    let (v_star, _) = v_full.mean_removed();
    let a1 = 0.5 * v_star.mean(); // zero after mean removal, recomputed anyway
    let table = eigenvalues(&v_star, BoundaryCondition::Periodic, cfg.n_eigs)?;
    let report = asymptotic_residuals(&table, a1)?;
    let grid = Grid::new(cfg.grid_points)?;
    let eigs = eigenfunctions(&v_star, &table, &grid)?;

    let mut rows = Vec::new();
    for r in &report.rows {
        let lo = &eigs[2 * r.m - 1];
        let hi = &eigs[2 * r.m];
        let fit: Option<CoefficientFit> = fit_coefficients(&v_star, lo, hi).ok();
        let (a, b, y) = match &fit {
            Some(f) => (f.alpha, f.beta, f.y_m),
            None => ([f64::NAN; 2], [f64::NAN; 2], f64::NAN),
        };
        rows.push(vec![
            r.m.to_string(),
            r.lambda_lo.to_string(),
            r.lambda_hi.to_string(),
            r.model.to_string(),
            r.resid_lo.to_string(),
            r.resid_hi.to_string(),
            r.scaled_lo.to_string(),
            r.scaled_hi.to_string(),
            a[0].to_string(),
            b[0].to_string(),
            a[1].to_string(),
            b[1].to_string(),
            y.to_string(),
        ]);
    }
    let path = out_dir.join("asymptotics.csv");
    write_csv(
        &path,
        Some(&format!("potential_hash={:016x} (mean removed)", potential_hash(&v_full))),
        &[
            "m", "lambda_lo", "lambda_hi", "model", "resid_lo", "resid_hi", "scaled_lo",
            "scaled_hi", "alpha1", "beta1", "alpha2", "beta2", "y_m",
        ],
        &rows,
    )?;
    let mut out = CommandOutput::new();
    out.artifacts.push(path);

    let m_hi = report.rows.last().map_or(0, |r| r.m).min(100);
    if m_hi >= 10 {
        let slope = report.log_log_slope(10, m_hi);
        let bounded = report.max_scaled(10, m_hi).is_finite();
        out.verdicts
            .insert("asymptotic_trend".into(), bounded && slope <= cfg.tolerances.asymptotic_slope);
    }
    Ok(out)
}

pub fn run_verify(cfg: &RunConfig, out_dir: &Path) -> Result<CommandOutput> {
    let v = cfg.potential()?;
    let f = cfg.datum()?;
    let grid = Grid::new(cfg.grid_points)?;
    let mut out = CommandOutput::new();

    // interlacing of the three spectra
    let n_check = cfg.n_eigs.min(20);
    let per = eigenvalues(&v, BoundaryCondition::Periodic, n_check)?;
    let semi = eigenvalues(&v, BoundaryCondition::Semiperiodic, n_check)?;
    let dir = eigenvalues(&v, BoundaryCondition::Dirichlet, n_check)?;
    let inter = verify_interlacing(&per, &semi, &dir, cfg.tolerances.interlacing);
    out.verdicts.insert("interlacing".into(), inter.all_pass);

    // root counts: psi_0 has none, the pair at frequency m has 2m, Dirichlet
    // Psi_n has n
    let eig_per = eigenfunctions(&v, &per, &grid)?;
    let eig_dir = eigenfunctions(&v, &dir, &grid)?;
    let mut roots_ok = true;
    for (i, ep) in eig_per.iter().enumerate().take(11) {
        let expect = if i == 0 { 0 } else { (i + 1) / 2 * 2 };
        roots_ok &= count_roots(&v, ep)? == expect;
    }
    for (i, ep) in eig_dir.iter().enumerate().take(11) {
        roots_ok &= count_roots(&v, ep)? == i;
    }
    out.verdicts.insert("root_counts".into(), roots_ok);

    // orthonormality
    let n_gram = cfg.n_eigs.min(30);
    let table_gram = eigenvalues(&v, BoundaryCondition::Periodic, n_gram)?;
    let eigs_gram = eigenfunctions(&v, &table_gram, &grid)?;
    let dev = gram_deviation(&v, &eigs_gram, n_gram)?;
    out.verdicts.insert("orthonormality".into(), dev <= cfg.tolerances.gram);

    // eigenvalue asymptotics of the mean-removed potential
    let asym = run_asymptotics(cfg, out_dir)?;
    out.verdicts.extend(asym.verdicts);
    out.artifacts.extend(asym.artifacts);

    // revival decomposition at the configured times
    let (v_star, mean) = v.mean_removed();
    let setup = evolution_setup(&v_star, &f, cfg.n_eigs, &grid, true)?;
    for t in cfg.resolved_times()? {
        let dec = revival_decomposition(&setup, &f, &v, mean, t)?;
        out.verdicts.insert(
            format!("revival_ratio_{}", time_tag(t)),
            dec.ratio <= cfg.tolerances.jump_ratio,
        );
    }
    Ok(out)
}

use std::path::PathBuf;

use anyhow::{Context, Result};
use revival_core::{InitialDatum, PiecewiseSpec, Potential, RationalTime};
use serde::{Deserialize, Serialize};

/// One entry of the `times` list: either the reduced fraction q/r of
/// t/(2pi), or t given as a multiple of pi (converted and reduced).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeSpec {
    Fraction { q: u64, r: u64 },
    PiMultiple { pi_num: u64, pi_den: u64 },
}

impl TimeSpec {
    pub fn resolve(&self) -> Result<RationalTime> {
        Ok(match self {
            TimeSpec::Fraction { q, r } => RationalTime::new(*q, *r)?,
            TimeSpec::PiMultiple { pi_num, pi_den } => {
                RationalTime::from_pi_multiple(*pi_num, *pi_den)?
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub interlacing: f64,
    pub gram: f64,
    pub eigenvalue_residual: f64,
    pub jump_ratio: f64,
    pub asymptotic_slope: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            interlacing: 1e-7,
            gram: 1e-6,
            eigenvalue_residual: 1e-7,
            jump_ratio: 0.05,
            asymptotic_slope: -2.7,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PiecewiseSpec,
    pub datum: PiecewiseSpec,
    pub n_eigs: usize,
    pub grid_points: usize,
    pub times: Vec<TimeSpec>,
    pub tolerances: Tolerances,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            potential: PiecewiseSpec::Builtin { builtin: "section5_potential".into() },
            datum: PiecewiseSpec::Builtin { builtin: "section5_sawtooth".into() },
            n_eigs: 200,
            grid_points: 4000,
            // t in {pi/30, pi/15, pi/10, pi/5}
            times: vec![
                TimeSpec::PiMultiple { pi_num: 1, pi_den: 30 },
                TimeSpec::PiMultiple { pi_num: 1, pi_den: 15 },
                TimeSpec::PiMultiple { pi_num: 1, pi_den: 10 },
                TimeSpec::PiMultiple { pi_num: 1, pi_den: 5 },
            ],
            tolerances: Tolerances::default(),
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("invalid config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        anyhow::ensure!(self.n_eigs >= 1, "field n_eigs: must be at least 1");
        anyhow::ensure!(self.grid_points >= 64, "field grid_points: must be at least 64");
        for (i, t) in self.times.iter().enumerate() {
            t.resolve().with_context(|| format!("field times[{i}]"))?;
        }
        self.potential().context("field potential")?;
        self.datum().context("field datum")?;
        Ok(())
    }

    pub fn potential(&self) -> Result<Potential> {
        Ok(Potential::from_spec(&self.potential)?)
    }

    pub fn datum(&self) -> Result<InitialDatum> {
        Ok(InitialDatum::from_spec(&self.datum)?)
    }

    pub fn resolved_times(&self) -> Result<Vec<RationalTime>> {
        self.times.iter().map(|t| t.resolve()).collect()
    }
}

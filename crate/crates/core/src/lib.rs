//! Spectral solver and revival analyzer for the 1D periodic Schrodinger
//! equation -u'' + V u on [0, 2pi] with piecewise-polynomial V.

pub mod asymptotics;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod ode;
pub mod piecewise;
pub mod quad;
pub mod revival;
pub mod spectrum;

pub use error::{Result, SolverError};
pub use grid::{BasisTag, Grid, RationalTime, SpectralCoefficients, WaveField};
pub use ode::{FundamentalPair, PruferState};
pub use piecewise::{InitialDatum, PiecewisePoly, PiecewiseSpec, Potential, Segment, TAU};
pub use spectrum::{BoundaryCondition, Eigenpair, SpectrumEntry, SpectrumTable};

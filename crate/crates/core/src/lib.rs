//! Numerical laboratory for the fast diffusion equation with strong absorption,
//! `∂t u = Δu^m − u^q`, `0 < m < q < 1`, in radially symmetric form.
//!
//! - [`exponents`]: admissible parameters and closed-form exponents.
//! - [`grid`]: radial grids, `L^r` norms, energy quadratures.
//! - [`solver`]: implicit time stepping and extinction-time estimation.
//! - [`diagnostics`]: barrier, bound, positivity and balance checks.
//! - [`rescale`], [`ratefit`]: self-similar variables and rate regression.
//! - [`io`]: CSV formats shared with the command-line runner.

pub mod diagnostics;
pub mod exponents;
pub mod grid;
pub mod io;
pub mod profiles;
pub mod ratefit;
pub mod rescale;
pub mod solver;
mod tridiag;

pub use diagnostics::{BarrierSpec, CheckReport};
pub use exponents::{DerivedExponents, NormOrder, ParamError, Params};
pub use grid::{lr_norm, RadialGrid, State};
pub use profiles::InitialDatum;
pub use ratefit::RateFitResult;
pub use rescale::RescaledFrame;
pub use solver::{Boundary, Record, SolverConfig, SolverError, Trajectory};

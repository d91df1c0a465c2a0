//! Self-similar blow-up profiles of the complex Ginzburg-Landau equation
//!
//! ```text
//! (1-iε)(Q'' + (d-1)/ξ Q') + iκξQ' + iκ/σ Q - ωQ + (1+iδ)|Q|^{2σ}Q = 0,
//! Q'(0) = 0,  Q(ξ) ~ ξ^{-1/σ - iω/κ} as ξ → ∞,
//! ```
//!
//! including the supercritical NLS limit `ε = δ = 0`.
//!
//! * [`special`]: Kummer functions, the far-field fundamental system and decay series.
//! * [`integrator`]: adaptive integration of the profile initial-value problem.
//! * [`shooting`]: boundary residual, Newton, winding-number root location, normalizations.
//! * [`continuation`]: pseudo-arclength branch tracing in `(μ, κ, ε)` and turning points.
//! * [`stability`]: discretized linearization, dense eigenvalues and the stability verdict.
//! * [`tables`]: reference values and end-to-end table reproduction.

pub mod continuation;
pub mod error;
pub mod integrator;
pub mod params;
pub mod shooting;
pub mod special;
pub mod stability;
pub mod tables;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use params::ProfileParams;

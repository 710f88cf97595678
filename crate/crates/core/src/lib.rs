//! Sharp bounds on `E(X₁X₂⋯X_d)` and on coskewness when the marginal laws of
//! the `Xᵢ` are fixed and their dependence is unknown.
//!
//! - [`marginals`]: quantile/CDF evaluation, standardization and the text
//!   format used on the command line.
//! - [`copulas`]: explicit dependence constructions (cross-product copulas,
//!   their shifted variants for uniforms with non-zero mean, and the
//!   comonotonic, antimonotonic and independent references).
//! - [`bounds`]: closed-form and quadrature bounds.
//! - [`bra`]: the block rearrangement algorithm for arbitrary marginals.
//! - [`stats`]: coskewness, standardized rank coskewness and Monte Carlo
//!   product moments.
//!
//! ```
//! use depbound::bounds::coskewness_bounds;
//! use depbound::marginals::Marginal;
//!
//! let ms = vec![
//!     Marginal::normal(0.0, 1.0)?,
//!     Marginal::normal(3.0, 2.0)?,
//!     Marginal::normal(-1.0, 5.0)?,
//! ];
//! let b = coskewness_bounds(&ms)?;
//! assert!((b.upper - 2.0 * (2.0 * std::f64::consts::PI).sqrt() / std::f64::consts::PI).abs() < 1e-9);
//! assert_eq!(b.lower, -b.upper);
//! # Ok::<(), depbound::Error>(())
//! ```

pub mod bounds;
pub mod bra;
pub mod copulas;
mod error;
mod integrals;
pub mod marginals;
pub mod quadrature;
mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use rng::Grid;

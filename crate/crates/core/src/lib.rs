//! Executable checks for generalized gamma convolutions (GGC).
//!
//! The crate evaluates the integral `J_k` in every representation reached by
//! the substitution chain `v -> x -> rho -> delta`, the exponential form `I_k`
//! behind the multi-gamma case, Laplace transforms of gamma mixtures and of
//! discrete-Thorin GGC laws, finite-difference screens for complete
//! monotonicity (CM) and hyperbolic monotonicity (HM_k), and seeded Monte
//! Carlo samplers used to cross-validate the transforms.
//!
//! Module map:
//!
//! * [`types`] and [`density`]: parameter records, spec types and the density catalog.
//! * [`quadrature`]: adaptive Gauss-Kronrod integration, finite and log-space semi-infinite.
//! * [`transforms`]: Laplace transforms and the test function `phi(st) phi(s/t)`.
//! * [`jk`]: `J_k` evaluators, `I_k`, and the `alpha -> a` inversion.
//! * [`monotonicity`]: CM, HM and GGC screens with per-order margins.
//! * [`montecarlo`]: samplers and empirical Laplace transforms.
//! * [`cli`]: the `ggc` command-line front end.

pub mod cli;
pub mod density;
pub mod error;
pub mod jk;
pub mod monotonicity;
pub mod montecarlo;
pub mod quadrature;
pub mod transforms;
pub mod types;

pub use error::{Error, Result};

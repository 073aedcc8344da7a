//! Differentially private density estimation in 1-Wasserstein distance.
//!
//! The crate covers two estimation pipelines and the machinery to judge
//! them instance by instance:
//!
//! - **On the line** ([`onedim`]): estimate the CDF privately with the
//!   binary-tree mechanism ([`dp`]), read off evenly spaced quantiles, and
//!   return the uniform mixture of the answers. A fixed-bucket baseline
//!   ([`onedim::psmm_baseline`]) shows what worst-case-optimal methods do
//!   on easy instances.
//! - **On finite metric spaces** ([`tree`]): embed the metric into a
//!   hierarchically separated tree ([`embed`], [`hst`]), truncate the
//!   empirical node masses, privately locate the heavy nodes, noise them,
//!   and project back to a distribution.
//!
//! Error is measured in 1-Wasserstein distance throughout, with three
//! cross-checking evaluators in [`wasserstein`]. Per-instance target rates
//! (what any private algorithm must pay on a given input) are computed by
//! [`onedim::target_rate_1d`] and [`tree::target_rate_tree`], and
//! [`adversarial`] generates the hard neighboring instances those rates
//! are built from.
//!
//! Everything randomized takes an explicit splittable [`rng::Rng`], so
//! runs are reproducible bit for bit from a single seed; `ε = ∞` disables
//! noise in every mechanism for deterministic testing.

pub mod adversarial;
pub mod dist;
pub mod dp;
pub mod embed;
pub mod error;
pub mod grid;
pub mod hst;
pub mod io;
pub mod metric;
pub mod onedim;
pub mod rng;
pub mod tree;
pub mod wasserstein;

pub use dist::{
    d_infinity, empirical_distribution, hellinger_sq, kl, tv, DiscreteDistribution, Domain,
};
pub use dp::{
    kappa, lambert_w, laplace_noise, private_cdf, private_quantiles, PrivacyLedger, PrivacyParams,
};
pub use error::{Error, Result};
pub use grid::{Dataset, GridDomain};
pub use hst::{active_nodes, Hst, NodeFunction};
pub use metric::FiniteMetric;
pub use rng::Rng;
pub use wasserstein::{w1_cdf, w1_exact, w1_tree};

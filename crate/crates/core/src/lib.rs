//! Synthetic sign dataset generation and cross-domain classifier comparison.
//!
//! The crate has two halves that meet in the middle:
//!
//! * **Generation** — a probabilistic augmentation pipeline ([`augment`]) turns
//!   canonical sign images into synthetic training datasets. Every step fires
//!   with a configured probability and draws its parameters from configured
//!   ranges; the whole run is reproducible from a single 64-bit seed.
//! * **Comparison** — classifiers trained on heterogeneous datasets are scored
//!   on class-intersection test sets ([`catalog`]), aggregated with
//!   geometric-mean precision, and ranked in a model-vs-model matrix
//!   ([`eval`]). False positives are exported as a gallery ([`report`]) to
//!   guide the next round of augmentation choices.
//!
//! Classifiers plug in through [`classifier`]: either prediction logs produced
//! by externally trained networks, or a built-in nearest-centroid reference
//! classifier for desk-scale end-to-end runs.

pub mod augment;
pub mod catalog;
pub mod classifier;
pub mod config;
pub mod eval;
pub mod raster;
pub mod report;
pub mod rng;

pub use raster::Raster;
pub use rng::RandomSource;

//! Cactus trees of pointed graphs and random planar maps.
//!
//! The crate builds the discrete cactus (the merge tree of root-distance
//! thresholds) of a pointed graph, samples Boltzmann-distributed rooted
//! pointed planar maps through the mobile/corner-chord construction with
//! numerically tuned critical weights, simulates Brownian labels on uniform
//! plane trees, and ships statistical experiments comparing the two worlds.
//!
//! Entry points:
//! - [`graph`]: pointed graphs, graph distance, the cactus construction.
//! - [`gh`]: exact Gromov-Hausdorff distance on tiny pointed metric spaces.
//! - [`map`]: rooted pointed planar maps as half-edge rotation systems.
//! - [`mobile`]: four-type labeled plane trees and label sampling.
//! - [`bdg`]: the mobile-to-map corner-chord construction.
//! - [`boltzmann`]: weight sequences, criticality tuning, Galton-Watson
//!   sampling of mobiles, and the full map sampling pipeline.
//! - [`brownian`]: uniform plane trees with Gaussian labels and the
//!   label-distance queries used as the continuum reference.
//! - [`experiments`]: reproducible Monte Carlo engines with CSV/JSON reports.
//! - [`cli`]: the command-line front end (see the `cactus` binary).

pub mod bdg;
pub mod boltzmann;
pub mod brownian;
pub mod cli;
pub mod experiments;
pub mod gh;
pub mod graph;
pub mod map;
pub mod mobile;
pub mod quad;
pub mod rng;
pub mod stats;

#[doc(hidden)]
pub mod testsupport;

//! Network centrality toolkit.
//!
//! * [`graph`]: compressed undirected graphs, edge-list loading, components.
//! * [`centrality`]: exact degree, betweenness, closeness and eigenvector.
//! * [`rank`]: tie-averaged ranks, normalization, Kendall τ-b, R².
//! * [`sample`]: source-sampling estimators for betweenness and closeness.
//! * [`bter`]: BTER synthetic networks and training corpora.
//! * [`nn`]: feedforward regression networks with Levenberg-Marquardt and
//!   first-order trainers.
//! * [`pipeline`]: datasets, model application and method comparison.
//!
//! With the default `parallel` feature the per-source shortest-path passes,
//! corpus and dataset construction, and Jacobian accumulation run on rayon.
//! Results are bit-identical with and without the feature.

pub mod bter;
pub mod centrality;
pub mod error;
pub mod graph;
pub mod nn;
pub mod par;
pub mod pipeline;
pub mod rank;
pub mod sample;
pub mod seed;

pub use error::{Error, Result};

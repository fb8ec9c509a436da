//! Consensus over undirected graphs when every agent's control input is
//! rotated by its own misalignment angle `θᵢ`:
//!
//! ```text
//! ṗᵢ = −D(θᵢ) Σⱼ aᵢⱼ (pᵢ − pⱼ),   i.e.   ṗ = −L_out p
//! ```
//!
//! The crate builds `L_out`, computes and classifies its spectrum, predicts
//! the consensus point from the conserved quantity `Σᵢ D(θᵢ)ᵀ pᵢ`, and
//! integrates trajectories.
//!
//! ```
//! use misalign_core::graph::Graph;
//! use misalign_core::rotation::AngleProfile;
//! use misalign_core::spectrum::{analyze, Stability};
//!
//! let g = Graph::path(2).unwrap();
//! let theta = AngleProfile::new(vec![std::f64::consts::FRAC_PI_4, -std::f64::consts::FRAC_PI_4]).unwrap();
//! let spectrum = analyze(&g, &theta).unwrap();
//! assert_eq!(spectrum.classification().stability, Stability::Consensus);
//! ```

pub mod graph;
pub mod laplacian;
pub mod predictor;
pub mod rotation;
pub mod scenarios;
pub mod simulator;
pub mod spectrum;
pub mod verify;

//! Spectral toolkit for finite quantum graphs with δ-type vertex couplings and
//! for the one-dimensional high-contrast periodic medium.
//!
//! The crate is organised around the objects a user manipulates:
//!
//! - [`graph`]: metric graphs (vertices with coupling constants, compact
//!   edges, semi-infinite leads), validation, contraction, spanning trees and
//!   the JSON file format.
//! - [`weyl`]: the Weyl M-matrix of the compact part, its lead-augmented
//!   version, Robin-to-Dirichlet maps and compact-graph spectra (two
//!   independent routes).
//! - [`scattering`]: the scattering matrix on the external vertices, its
//!   factorised form and a plane-wave lead-matching oracle.
//! - [`inverse`]: reconstruction of every coupling constant from scattering
//!   data via contraction along spanning-tree paths and a large-τ limit.
//! - [`highcontrast`]: Bloch spectra of the periodic high-contrast family and
//!   of its two limit models, plus ε-convergence studies.
//! - [`selfcheck`]: the invariant suite run by `qgs check`.

pub mod error;
pub mod graph;
pub mod highcontrast;
pub mod inverse;
pub mod linalg;
pub mod numeric;
pub mod scattering;
pub mod selfcheck;
pub mod testgraphs;
pub mod weyl;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Dense complex matrix used for every M-matrix and scattering object.
pub type CMatrix = nalgebra::DMatrix<Complex64>;

//! Hard-core particle dynamics on finite triangular grids with periodic
//! boundaries (the hard-hexagon model).
//!
//! The crate is organized around the pipeline used to study metastability of
//! the single-site-update Metropolis chain at inverse temperature β:
//!
//! - [`lattice`]: the 2K×3L triangular torus, its tripartition, stripes,
//!   faces, and axial automorphisms;
//! - [`config`]: hard-core configurations (independent sets) as bit vectors,
//!   energies, stripe energy differences, and bridge/cross detection;
//! - [`dynamics`]: the Metropolis kernel, exact transition probabilities,
//!   and seeded hitting-time sampling;
//! - [`landscape`]: exact state-space enumeration, communication heights,
//!   structural verification, spectral gap, and total-variation mixing time;
//! - [`reduction`]: constructive energy-reduction paths (by rows and by
//!   columns) and the reference path between maximum-occupancy states;
//! - [`symmetry`]: automorphism-induced state-space symmetries and the
//!   coupling identities they imply for tunneling times;
//! - [`experiments`]: β-sweep campaigns estimating the e^{βΓ} tunneling
//!   scale, exponentiality of rescaled hitting times, and report emission.

pub mod bits;
pub mod config;
pub mod dynamics;
pub mod experiments;
pub mod landscape;
pub mod lattice;
pub mod reduction;
pub mod stats;
pub mod symmetry;

/// Version string recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

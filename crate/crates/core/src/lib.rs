//! Parts entropy and motion-group volumes.
//!
//! Tools for quantifying how hard a physical assembly (or self-replication)
//! task is: entropy functionals on finite and continuous motion groups,
//! coset decompositions with their subadditivity bounds, convex-body
//! functionals feeding the principal kinematic and containment formulas,
//! Monte Carlo motion-volume estimates, and symmetry-based error correction
//! for parts copied generation after generation.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`groups`] | finite rotation groups, SE(2)/SE(3) elements, Haar measure and sampling |
//! | [`entropy`] | discrete, von Neumann, continuous, KL, conditional and partition entropies |
//! | [`coset`] | coset and double-coset partitions, marginals, subadditivity, symmetrization |
//! | [`geometry`] | convex bodies, their functionals, collision and containment predicates |
//! | [`kinematic`] | closed-form kinematic formulas, Monte Carlo motion volumes, obstacle parts entropy |
//! | [`replication`] | degree of self-replication, symmetrization of noisy shapes, generation simulation |
//!
//! All entropies are in nats.

pub mod coset;
pub mod entropy;
mod error;
pub mod geometry;
pub mod groups;
pub mod kinematic;
pub mod numeric;
pub mod replication;
pub mod rng;

pub use error::{Error, Result};

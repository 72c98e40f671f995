//! Convex coverings from shrunken Macbeath regions.
//!
//! The crate builds `(c, eps)`-coverings of well-centered convex bodies:
//! collections of centrally symmetric regions that cover a body `K` while
//! their `c`-expansions stay inside `(1+eps) K`. On top of the covering
//! machinery sit two applications: polytope approximation in the
//! Banach-Mazur sense (`approx`) and covering-boosted approximate closest
//! vector / integer programming in arbitrary norms (`lattice`).
//!
//! Module layout mirrors the pipeline:
//!
//! * [`bodies`] - convex body representations and the oracle surface
//!   (membership, gauge, support, polar, sampling, volume estimation).
//! * [`caps`] - caps, relative widths, ray distances, representative caps,
//!   shell and cap sampling.
//! * [`macbeath`] - Macbeath regions, disjointness/containment predicates,
//!   greedy MNets, covering assembly and verification.
//! * [`enumerate`] - the layered randomized covering enumerator and the
//!   eps-scaling experiment.
//! * [`approx`] - Banach-Mazur polytope approximation and its certificate.
//! * [`lattice`] - exact and covering-boosted CVP, approximate IP.
//! * [`lemmas`] - runnable property suites over the geometric toolkit.
//!
//! All randomness flows through explicitly seeded ChaCha streams; repeated
//! runs with the same seed produce byte-identical JSON artifacts.

pub mod approx;
pub mod bodies;
pub mod bodygen;
pub mod caps;
pub mod enumerate;
mod error;
pub mod exactvol;
pub mod hull;
pub mod lattice;
pub mod lemmas;
pub mod lp;
pub mod macbeath;
pub mod rng;
pub mod svg;

pub use error::{Error, Result};

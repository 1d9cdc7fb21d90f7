//! Computational toolkit for rotation sets of surface homeomorphisms in genus >= 2.
//!
//! The crate works in the Poincaré disk model of the hyperbolic plane. A
//! genus-g surface is presented by the regular 4g-gon with side pairings;
//! lifted dynamics are tracked as (deck word, local representative) pairs so
//! that orbits escaping to the boundary circle never lose precision to
//! floating point. On top of that sit the measurement layers: directional
//! rotation speeds via annulus reductions, homological vectors from
//! abelianized deck words, covering classification for pairs of closed
//! geodesics, and Markovian-rectangle horseshoe certificates with symbolic
//! entropy bounds.
//!
//! The crate is `no_std` (with `alloc`); everything that touches files,
//! JSON, or SVG lives in the companion CLI crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dynamics;
pub mod flt;
pub mod geodesic;
pub mod group;
pub mod horseshoe;
pub mod hyperbolic;
pub mod rotation;

pub use hyperbolic::{
    boundary_interleave, classify, hyp_distance, project_onto_geodesic, BoundaryPoint, DiskPoint,
    Geodesic, HypError, Interleaving, IsometryClass, MobiusTransform,
};

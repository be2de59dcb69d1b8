//! Pure symmetric outer automorphisms of a free product G = G_1 * ... * G_n.
//!
//! The crate builds the fundamental domain complex, checks presentations of the
//! pure symmetric outer automorphism group, measures domain heights in the
//! Bass–Serre tree, and factors automorphisms by peak reduction.

pub mod error;
pub mod factor_systems;
pub mod splittings;
pub mod whitehead_moves;
pub mod presentation;
pub mod fundamental_domain;
pub mod domains_geometry;
pub mod peak_reduction;
pub mod json;

pub use error::{Error, Result};

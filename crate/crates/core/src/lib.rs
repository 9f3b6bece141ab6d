//! Local dynamics of holomorphic germs of `(C^2, 0)` along formal invariant curves.
//!
//! The crate works with truncated jets: it resolves a formal invariant curve by
//! blow-ups, brings a parabolic pair to reduced form, classifies the attracting
//! directions as saddles or nodes, solves for parabolic curves by Picard
//! iteration of a contraction operator, and checks everything against orbits of
//! the exact polynomial map.

pub mod jets;
pub mod germ;
pub mod curve;
pub mod reduce;
pub mod stable;
pub mod orbit;
pub mod cli;

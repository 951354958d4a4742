//! Counting Campana and weak Campana points on norm-one tori style varieties
//! `N_{K/Q}(x) = z^m`, together with the group-theoretic and local-series
//! invariants that govern their asymptotics.

pub mod groups;
pub mod orbits;
pub mod arith;
pub mod fieldspec;
pub mod localseries;
pub mod points;
pub mod analysis;
pub mod selftest;

//! Discrete and semi-continuous Fréchet distance with shortcuts: decision
//! procedures, exact optimizers and brute-force oracles.
//!
//! All distances are squared. Indices are 0-based.

pub mod config;
pub mod error;
pub mod geom;
pub mod interval;
pub mod one_sided;
pub mod oracle;
pub mod semi;
pub mod two_sided;

mod parametric;
mod quadtree;

pub use config::{Backend, OptimizeConfig, SamplingConstants, Stats};
pub use error::{Error, GeomError, Result};
pub use geom::{CurvePoint, HalfOpenInterval, Point, PointSeq, PolyCurve};
pub use one_sided::{decide_one_sided, optimize_one_sided, Decision, Staircase};
pub use oracle::OracleVariant;
pub use semi::{decide_semi, optimize_semi, SemiPath};
pub use two_sided::{decide_two_sided, optimize_two_sided, BicliqueCover};

//! Numerical toolkit for quasiperiodically forced circle diffeomorphisms.
//!
//! * [`circle`]: points, arcs and Diophantine scans on ℝ/ℤ.
//! * [`maps`]: the skew products, their lifts, derivatives and inverses.
//! * [`rotation`]: fibred rotation numbers, τ-sweeps and plateau detection.
//! * [`lyapunov`]: vertical exponents, pullback graphs and attractor tests.
//! * [`multiscale`]: critical regions, recurrence conditions, boundary strips
//!   and the fast-return gap search.
//! * [`config`]: the JSON family description.

pub mod circle;
pub mod config;
pub mod error;
pub mod lyapunov;
pub mod maps;
pub mod multiscale;
pub mod rotation;

pub use circle::{circle_dist, interval_dist, wrap, CircleInterval, CirclePoint, DiophantineSpec};
pub use error::{Error, Result};
pub use maps::{FamilyConstants, Fibre, QpfFamily, QpfMap};

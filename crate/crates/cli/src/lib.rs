//! Configuration, run modes, artifact writing and plotting behind `qpf`.

pub mod config;
pub mod modes;
pub mod output;
pub mod plot;

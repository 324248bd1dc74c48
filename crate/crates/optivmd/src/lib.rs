//! File formats, corpus handling, external scorers, plots and the command
//! line around [`optivmd_core`].

pub mod cli;
pub mod config;
pub mod corpus;
pub mod external;
pub mod fmap;
pub mod manifest;
pub mod report;
pub mod runner;
pub mod svg;
pub mod synth;
pub mod wav;

pub use optivmd_core as core;

//! Command-line front end, file formats and a parallel ensemble runner for
//! [`tsaction_core`].
//!
//! A run is described by a [`config::ScenarioConfig`], turned into a model
//! and ensemble by [`scenario::Scenario`], executed on all cores by
//! [`runner`], and written out through [`io`] and [`figures`].

pub mod cli;
pub mod config;
mod error;
pub mod figures;
pub mod io;
pub mod runner;
pub mod scenario;

pub use error::{Error, Result};

//! Command-line harness around the `plcp-radar` engines: TOML scenario
//! configs, CSV/SVG outputs and run manifests.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod figures;
pub mod manifest;
pub mod svg;

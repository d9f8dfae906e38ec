//! Reusable pieces of the command-line front end: run configuration (flags
//! merged over an optional key=value config file), eta-quotient spec strings,
//! and hex-exact float formatting for reproducible outputs.

pub mod config;
pub mod hexfloat;

pub use config::{parse_config_file, parse_eta_spec, OutputFormat, RunConfig};
pub use hexfloat::{format_hex_f64, parse_hex_f64};

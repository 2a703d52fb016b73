//! Command-line front end for `chr-core`: scenario files, unit conversion,
//! study runners and CSV/SVG output.

pub mod config;
pub mod output;
pub mod studies;
pub mod units;

pub use config::{parse_config, parse_config_str, ConfigError, ConfigIssue, ScenarioConfig, Study};
pub use studies::{run_study, Format, RunOptions, RunReport, StudyError};
pub use units::{convert_units, Dimension, Unit, UnitContext, UnitError};

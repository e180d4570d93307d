//! Configuration, builtin source profiles, scenario runners and file output
//! for the `subdiff` command-line tool.

pub mod config;
pub mod error;
pub mod output;
pub mod profiles;
pub mod report;
pub mod scenario;

pub use config::{RunConfig, Tolerances};
pub use error::{WorkbenchError, WorkbenchResult};
pub use report::{Check, ScenarioReport, Table};

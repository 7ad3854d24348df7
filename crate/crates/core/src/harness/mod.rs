//! Monte-Carlo harness: configuration, campaign driver, result output and
//! the built-in check suites behind the `oracle` and `selftest` commands.

pub mod campaign;
pub mod config;
pub mod oracle;
pub mod output;
pub mod selftest;

pub use campaign::{run_campaign, run_drop, CampaignResult, CellResult, DropMetrics, TDD_LABEL};
pub use config::ScenarioConfig;
pub use output::{emit_results, Format};

//! Scenario files, canned reproductions and deterministic output.

pub mod canned;
pub mod output;
pub mod run;
pub mod scenario;
pub mod units;

pub use canned::{canned, names as canned_names};
pub use output::{csv_string, pgm_string, Image, Table};
pub use run::{emit_outputs, run_scenario, with_threads, Quantity, RunData, RunReport};
pub use scenario::{parse_scenario, serialize_scenario, Engine, Scenario};

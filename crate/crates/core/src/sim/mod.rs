//! Simulation harness: schedules, scenario runs, CSV output and reports.

pub mod report;
pub mod runner;
pub mod scenarios;
pub mod schedule;
pub mod verify;

pub use report::{continuity_report, ChannelContinuity, ContinuityReport};
pub use runner::{run, run_to_string, RunConfig, RunReport};
pub use scenarios::{planner_scenario, run_planner_scenario, PlannerScenario, ScenarioReport};
pub use schedule::{builtin, parse_schedule, Schedule};

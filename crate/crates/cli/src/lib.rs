//! Library side of the `meshroute` command-line tool: experiment plans, the
//! benchmark harness that produces the CSV bundle, and route reports.

pub mod bench;
pub mod output;
pub mod report;
pub mod settings;

pub use bench::{replay, run_plan, write_bundle, CellResult, ExperimentPlan};
pub use report::{trace_table, RouteReport, TraceRow};
pub use settings::{PenaltySettings, RouteSettings};

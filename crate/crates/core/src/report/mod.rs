//! Run configuration, the text report format, the curve corpus and the
//! command dispatcher.

mod config;
pub mod corpus;
mod run;
mod schema;
mod tree;

pub use config::{parse_param_value, CurveSource, RunConfig, Tolerances};
pub use run::{run, Command};
pub use schema::{emit_plot_data, fmt_f64, fmt_list, CheckRecord, Status, Table, VerificationReport, REPORT_VERSION};
pub use tree::{ReportTree, Section};

//! Scenario files, the event loop that drives a strategy over them, traces,
//! scoring and the interactive session.

pub mod engine;
pub mod repl;
pub mod scenario;
pub mod trace;

pub use engine::{make_strategy, run_scenario, RunError, Session, Strategy, StrategyKind};
pub use repl::repl;
pub use scenario::{parse_scenario, Event, Scenario, ScenarioError};
pub use trace::{compare, score_trace, Comparison, Metrics, MismatchedScenario, Trace, TraceEvent, TraceRecord};

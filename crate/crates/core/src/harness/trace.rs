use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::config::Config;
use crate::resolution::{Outcome, Resolution};
use crate::world::{CameraCommand, EntityId};

use super::engine::{run_scenario, RunError, StrategyKind};
use super::scenario::Scenario;

#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    /// Visible entities and saliences, in frame order.
    Frame(Vec<(EntityId, f64)>),
    Camera(CameraCommand),
    Utterance {
        text: String,
        gold: BTreeSet<EntityId>,
    },
}

impl TraceEvent {
    pub fn kind(&self) -> &'static str {
        match self {
            TraceEvent::Frame(_) => "FRAME",
            TraceEvent::Camera(_) => "CAMERA",
            TraceEvent::Utterance { .. } => "UTTER",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub tick: u64,
    pub event: TraceEvent,
    pub resolution: Option<Resolution>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub strategy: StrategyKind,
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn utterances(&self) -> impl Iterator<Item = &TraceRecord> {
        self.records
            .iter()
            .filter(|r| matches!(r.event, TraceEvent::Utterance { .. }))
    }

    /// Tab-separated `tick, kind, payload, outcome` lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let payload = match &r.event {
                TraceEvent::Frame(vis) if vis.is_empty() => "-".to_string(),
                TraceEvent::Frame(vis) => vis
                    .iter()
                    .map(|(id, s)| format!("{id}:{s}"))
                    .collect::<Vec<_>>()
                    .join(","),
                TraceEvent::Camera(cmd) => cmd.to_string(),
                TraceEvent::Utterance { text, gold } => {
                    let ids: Vec<&str> = gold.iter().map(EntityId::as_str).collect();
                    format!("\"{text}\" GOLD {}", ids.join(","))
                }
            };
            let outcome = r.resolution.as_ref().map_or("-".to_string(), ToString::to_string);
            let _ = writeln!(out, "{}\t{}\t{}\t{}", r.tick, r.event.kind(), payload, outcome);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Metrics {
    pub strategy: StrategyKind,
    pub correct: usize,
    pub wrong: usize,
    /// No referent, including expressions that failed to parse.
    pub abstain: usize,
    pub ambiguous: usize,
    pub unsupported: usize,
}

impl Metrics {
    pub fn new(strategy: StrategyKind) -> Self {
        Self {
            strategy,
            correct: 0,
            wrong: 0,
            abstain: 0,
            ambiguous: 0,
            unsupported: 0,
        }
    }

    pub fn total(&self) -> usize {
        self.correct + self.wrong + self.abstain + self.ambiguous + self.unsupported
    }

    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.correct as f64 / n as f64,
        }
    }

    pub fn record(&mut self, outcome: &Outcome, gold: &BTreeSet<EntityId>) {
        match outcome {
            Outcome::Referent(set) if set == gold => self.correct += 1,
            Outcome::Referent(_) => self.wrong += 1,
            Outcome::NoReferent | Outcome::ParseError(_) => self.abstain += 1,
            Outcome::Ambiguous { .. } => self.ambiguous += 1,
            Outcome::Unsupported(_) => self.unsupported += 1,
        }
    }
}

impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{}\t{:.4}",
            self.strategy,
            self.correct,
            self.wrong,
            self.abstain,
            self.ambiguous,
            self.unsupported,
            self.accuracy()
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("trace does not match scenario: {0}")]
pub struct MismatchedScenario(pub String);

/// Scores each utterance's outcome against its gold set (exact set match).
pub fn score_trace(trace: &Trace, scenario: &Scenario) -> Result<Metrics, MismatchedScenario> {
    let expected: Vec<_> = scenario.utterances().collect();
    let got: Vec<&TraceRecord> = trace.utterances().collect();
    if expected.len() != got.len() {
        return Err(MismatchedScenario(format!(
            "{} utterances in scenario, {} in trace",
            expected.len(),
            got.len()
        )));
    }
    let mut metrics = Metrics::new(trace.strategy);
    for ((tick, text, gold), rec) in expected.into_iter().zip(got) {
        let TraceEvent::Utterance { text: t, gold: g } = &rec.event else {
            unreachable!("filtered to utterances");
        };
        if rec.tick != tick || t != text || g != gold {
            return Err(MismatchedScenario(format!(
                "utterance at tick {tick} (`{text}`) differs"
            )));
        }
        let resolution = rec
            .resolution
            .as_ref()
            .ok_or_else(|| MismatchedScenario(format!("utterance at tick {tick} has no resolution")))?;
        metrics.record(&resolution.outcome, gold);
    }
    Ok(metrics)
}

/// One utterance with each strategy's outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub tick: u64,
    pub text: String,
    pub gold: BTreeSet<EntityId>,
    pub outcomes: Vec<Outcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub strategies: Vec<StrategyKind>,
    pub metrics: Vec<Metrics>,
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn outcome(&self, row: usize, kind: StrategyKind) -> Option<&Outcome> {
        let col = self.strategies.iter().position(|k| *k == kind)?;
        self.rows.get(row)?.outcomes.get(col)
    }

    pub fn metrics_for(&self, kind: StrategyKind) -> Option<&Metrics> {
        self.metrics.iter().find(|m| m.strategy == kind)
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "strategy\tcorrect\twrong\tabstain\tambiguous\tunsupported\taccuracy")?;
        for m in &self.metrics {
            writeln!(f, "{m}")?;
        }
        writeln!(f)?;
        let names: Vec<&str> = self.strategies.iter().map(|k| k.name()).collect();
        writeln!(f, "tick\tutterance\tgold\t{}", names.join("\t"))?;
        for row in &self.rows {
            let gold: Vec<&str> = row.gold.iter().map(EntityId::as_str).collect();
            let outcomes: Vec<String> = row.outcomes.iter().map(ToString::to_string).collect();
            writeln!(
                f,
                "{}\t{}\t{}\t{}",
                row.tick,
                row.text,
                gold.join(","),
                outcomes.join("\t")
            )?;
        }
        Ok(())
    }
}

/// Runs every strategy on the scenario, each on its own thread.
pub fn compare(scenario: &Scenario, config: &Config) -> Result<Comparison, RunError> {
    let traces: Vec<Result<Trace, RunError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = StrategyKind::ALL
            .into_iter()
            .map(|kind| scope.spawn(move || run_scenario(scenario, kind, config)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("strategy run panicked"))
            .collect()
    });
    let traces = traces.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut rows: Vec<ComparisonRow> = scenario
        .utterances()
        .map(|(tick, text, gold)| ComparisonRow {
            tick,
            text: text.to_string(),
            gold: gold.clone(),
            outcomes: Vec::new(),
        })
        .collect();
    let mut metrics = Vec::new();
    for trace in &traces {
        metrics.push(score_trace(trace, scenario).expect("trace produced from this scenario"));
        for (row, rec) in rows.iter_mut().zip(trace.utterances()) {
            let outcome = rec.resolution.as_ref().map(|r| r.outcome.clone());
            row.outcomes
                .push(outcome.expect("utterance records carry a resolution"));
        }
    }
    Ok(Comparison {
        strategies: StrategyKind::ALL.to_vec(),
        metrics,
        rows,
    })
}

use std::collections::BTreeSet;
use std::fmt;

use crate::world::EntityId;

/// What resolving one referring expression produced.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// Non-empty referent set.
    Referent(BTreeSet<EntityId>),
    NoReferent,
    /// Candidates that could not be told apart, and the score gap between the
    /// top two when the strategy has one.
    Ambiguous {
        candidates: Vec<EntityId>,
        margin: Option<f64>,
    },
    Unsupported(String),
    ParseError(String),
}

impl Outcome {
    pub fn referent(ids: impl IntoIterator<Item = EntityId>) -> Self {
        let set: BTreeSet<EntityId> = ids.into_iter().collect();
        assert!(!set.is_empty(), "referent set must be non-empty");
        Outcome::Referent(set)
    }

    pub fn referents(&self) -> Option<&BTreeSet<EntityId>> {
        match self {
            Outcome::Referent(set) => Some(set),
            _ => None,
        }
    }

    pub fn is_success(&self) -> bool {
        matches!(self, Outcome::Referent(_))
    }
}

fn join(f: &mut fmt::Formatter<'_>, ids: impl IntoIterator<Item = impl fmt::Display>) -> fmt::Result {
    for (i, id) in ids.into_iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{id}")?;
    }
    Ok(())
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Referent(ids) => {
                f.write_str("REFERENT ")?;
                join(f, ids)
            }
            Outcome::NoReferent => f.write_str("NO_REFERENT"),
            Outcome::Ambiguous { candidates, margin } => {
                f.write_str("AMBIGUOUS ")?;
                join(f, candidates)?;
                if let Some(m) = margin {
                    write!(f, " margin={m}")?;
                }
                Ok(())
            }
            Outcome::Unsupported(reason) => write!(f, "UNSUPPORTED {reason}"),
            Outcome::ParseError(msg) => write!(f, "PARSE_ERROR {msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resolution {
    pub outcome: Outcome,
    /// Strategy-specific note, e.g. the buffer and frame a referent came from.
    pub provenance: Option<String>,
}

impl Resolution {
    pub fn new(outcome: Outcome) -> Self {
        Self {
            outcome,
            provenance: None,
        }
    }

    pub fn with_provenance(mut self, note: impl Into<String>) -> Self {
        self.provenance = Some(note.into());
        self
    }
}

impl From<Outcome> for Resolution {
    fn from(outcome: Outcome) -> Self {
        Resolution::new(outcome)
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.outcome)?;
        if let Some(p) = &self.provenance {
            write!(f, " @{p}")?;
        }
        Ok(())
    }
}

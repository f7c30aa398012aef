//! Candidate executions: event graphs, exhaustive rf/co enumeration, final
//! states, and the sequential-consistency interleaving oracle.

mod enumerate;
mod events;
mod outcome;
mod sc;

pub use enumerate::{enumerate_candidates, Candidates, Execution, DEFAULT_CANDIDATE_CAP};
pub use events::{build_events, Annotations, Event, EventGraph, EventId, EventKind, FenceKind, ValueSource};
pub use outcome::{allowed_outcomes, allowed_outcomes_with_cap, final_state, Outcome, OutcomeSet};
pub use sc::{sc_oracle_outcomes, sc_oracle_outcomes_with_cap};

use crate::litmus::Dialect;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExecError {
    #[error("model `{model}` cannot run a {dialect} test")]
    DialectMismatch { model: &'static str, dialect: Dialect },
    #[error("test has {count} candidates, above the limit of {cap}")]
    CandidateLimit { count: u128, cap: usize },
    #[error("final condition names undefined observable `{0}`")]
    UndefinedObservable(String),
}

//! Refinement check: every outcome the compiled test allows under AArch64
//! must be an outcome the source test allows under C11.

use std::collections::BTreeSet;
use std::fmt;
use std::thread;

use serde::Serialize;

use crate::exec::{allowed_outcomes_with_cap, ExecError, Outcome, OutcomeSet, DEFAULT_CANDIDATE_CAP};
use crate::litmus::{Dialect, LitmusTest};
use crate::lowering::Mapping;
use crate::model::{AArch64Options, Model};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DiffError {
    #[error("compiled observable `{0}` is not in the mapping")]
    UnmappedObservable(String),
    #[error("source observable `{0}` has no compiled counterpart in the mapping")]
    MissingSourceObservable(String),
    #[error("mapping sends two source observables to `{0}`")]
    NotInjective(String),
    #[error("expected a {expected} test, got {found}")]
    Dialect { expected: Dialect, found: Dialect },
    #[error(transparent)]
    Exec(#[from] ExecError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Bug,
    Error,
}

impl Status {
    /// Process exit code: 0 pass, 1 bug, 2 error.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Bug => 1,
            Status::Error => 2,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Bug => "bug",
            Status::Error => "error",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub status: Status,
    /// Compiled-side outcomes (in source observables) the source forbids.
    pub witnesses: Vec<Outcome>,
    pub source_outcomes: usize,
    pub compiled_outcomes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub source: Option<OutcomeSet>,
    /// Compiled outcomes translated to source observables.
    #[serde(skip)]
    pub compiled: Option<OutcomeSet>,
}

impl Verdict {
    fn error(e: DiffError) -> Self {
        Verdict {
            status: Status::Error,
            witnesses: Vec::new(),
            source_outcomes: 0,
            compiled_outcomes: 0,
            error: Some(e.to_string()),
            source: None,
            compiled: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdicts serialize")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckConfig {
    pub candidate_cap: usize,
    pub aarch64: AArch64Options,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { candidate_cap: DEFAULT_CANDIDATE_CAP, aarch64: AArch64Options::default() }
    }
}

/// Relabels a compiled outcome with source observables.
pub fn translate_outcome(o: &Outcome, m: &Mapping) -> Result<Outcome, DiffError> {
    let inverse = m.inverse();
    o.0.iter()
        .map(|(obs, v)| {
            inverse.get(obs).map(|src| (src.clone(), *v)).ok_or_else(|| DiffError::UnmappedObservable(obs.to_string()))
        })
        .collect::<Result<_, _>>()
        .map(Outcome)
}

fn outcome_sets(
    source: &LitmusTest,
    compiled: &LitmusTest,
    m: &Mapping,
    cfg: &CheckConfig,
) -> Result<(OutcomeSet, OutcomeSet), DiffError> {
    if source.dialect() != Dialect::Source {
        return Err(DiffError::Dialect { expected: Dialect::Source, found: source.dialect() });
    }
    if compiled.dialect() != Dialect::Asm {
        return Err(DiffError::Dialect { expected: Dialect::Asm, found: compiled.dialect() });
    }
    if !m.is_injective() {
        let mut seen = BTreeSet::new();
        let dup = m.observables.values().find(|c| !seen.insert(*c)).unwrap();
        return Err(DiffError::NotInjective(dup.to_string()));
    }
    if let Some(missing) = source.final_condition.observables().into_iter().find(|o| !m.observables.contains_key(o)) {
        return Err(DiffError::MissingSourceObservable(missing.to_string()));
    }

    let (s, c) = thread::scope(|scope| {
        let s = scope.spawn(|| allowed_outcomes_with_cap(source, Model::C11, cfg.candidate_cap));
        let c = allowed_outcomes_with_cap(compiled, Model::AArch64(cfg.aarch64), cfg.candidate_cap);
        (s.join().expect("source enumeration panicked"), c)
    });
    let s = s?;
    let c = c?;
    let translated = c.outcomes.iter().map(|o| translate_outcome(o, m)).collect::<Result<BTreeSet<_>, _>>()?;
    Ok((s, OutcomeSet { outcomes: translated, ..c }))
}

/// Checks that `compiled` refines `source` under the observable mapping `m`.
pub fn check_refinement(source: &LitmusTest, compiled: &LitmusTest, m: &Mapping, cfg: &CheckConfig) -> Verdict {
    match outcome_sets(source, compiled, m, cfg) {
        Ok((s, c)) => {
            let witnesses: Vec<Outcome> = c.outcomes.difference(&s.outcomes).cloned().collect();
            Verdict {
                status: if witnesses.is_empty() { Status::Pass } else { Status::Bug },
                witnesses,
                source_outcomes: s.len(),
                compiled_outcomes: c.len(),
                error: None,
                source: Some(s),
                compiled: Some(c),
            }
        }
        Err(e) => Verdict::error(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden;
    use crate::litmus::{parse_asm_litmus, parse_source_litmus, Observable};

    fn canonical() -> (LitmusTest, LitmusTest, LitmusTest, Mapping) {
        (
            parse_source_litmus(golden::MP_XCHG_DISCARD).unwrap(),
            parse_asm_litmus(golden::MP_XCHG_DISCARD_COMPILED_WZR).unwrap(),
            parse_asm_litmus(golden::MP_XCHG_DISCARD_COMPILED_W15).unwrap(),
            Mapping::from_json(golden::MP_XCHG_DISCARD_MAPPING).unwrap(),
        )
    }

    #[test]
    fn translate_relabels() {
        let (.., m) = canonical();
        let o = Outcome::new([(Observable::register(1, "W4"), 0), (Observable::memory("y"), 2)]);
        let t = translate_outcome(&o, &m).unwrap();
        assert_eq!(t.to_string(), "P1:r0=0; y=2;");
        let unknown = Outcome::new([(Observable::register(1, "W9"), 0)]);
        assert_eq!(translate_outcome(&unknown, &m), Err(DiffError::UnmappedObservable("1:W9".into())));
    }

    #[test]
    fn translate_identity() {
        let (src, ..) = canonical();
        let id = Mapping::identity(&src);
        let o = Outcome::new([(Observable::register(1, "r0"), 1), (Observable::memory("y"), 1)]);
        assert_eq!(translate_outcome(&o, &id).unwrap(), o);
    }

    #[test]
    fn buggy_pair_reports_witness() {
        let (src, wzr, _, m) = canonical();
        let v = check_refinement(&src, &wzr, &m, &CheckConfig::default());
        assert_eq!(v.status, Status::Bug);
        assert_eq!(v.witnesses.iter().map(ToString::to_string).collect::<Vec<_>>(), vec!["P1:r0=0; y=2;"]);
        for w in &v.witnesses {
            assert!(v.compiled.as_ref().unwrap().contains(w));
            assert!(!v.source.as_ref().unwrap().contains(w));
        }
        let json = v.to_json();
        assert!(json.contains("\"status\": \"bug\""));
        assert!(json.contains("\"source_outcomes\": 3"));
    }

    #[test]
    fn fixed_pair_passes() {
        let (src, _, w15, m) = canonical();
        assert_eq!(check_refinement(&src, &w15, &m, &CheckConfig::default()).status, Status::Pass);
    }

    #[test]
    fn errors_become_error_status() {
        let (src, wzr, _, m) = canonical();
        let v = check_refinement(&wzr, &src, &m, &CheckConfig::default());
        assert_eq!(v.status, Status::Error);
        assert_eq!(v.status.exit_code(), 2);

        let mut partial = m.clone();
        partial.observables.remove(&Observable::register(1, "r0"));
        let v = check_refinement(&src, &wzr, &partial, &CheckConfig::default());
        assert_eq!(v.status, Status::Error);
        assert!(v.error.unwrap().contains("P1:r0"));

        let tight = CheckConfig { candidate_cap: 1, ..CheckConfig::default() };
        assert_eq!(check_refinement(&src, &wzr, &m, &tight).status, Status::Error);
    }
}

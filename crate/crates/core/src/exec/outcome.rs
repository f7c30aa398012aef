use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::enumerate::{enumerate_candidates, Execution, DEFAULT_CANDIDATE_CAP};
use super::events::build_events;
use super::ExecError;
use crate::litmus::{Dialect, FinalCondition, LitmusTest, Observable, Reg, Value};
use crate::model::Model;

/// Final values of a test's observables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Outcome(pub BTreeMap<Observable, Value>);

impl Outcome {
    pub fn new(values: impl IntoIterator<Item = (Observable, Value)>) -> Self {
        Outcome(values.into_iter().collect())
    }

    pub fn get(&self, obs: &Observable) -> Option<Value> {
        self.0.get(obs).copied()
    }

    pub fn satisfies(&self, cond: &FinalCondition) -> bool {
        cond.holds(&self.0)
    }

    /// String-keyed form used for JSON.
    pub fn to_json_map(&self) -> BTreeMap<String, Value> {
        self.0.iter().map(|(o, v)| (o.to_string(), *v)).collect()
    }
}

/// `P1:r0=0; y=2;`
impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (o, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{o}={v};")?;
        }
        Ok(())
    }
}

impl Serialize for Outcome {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json_map().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = BTreeMap::<String, Value>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, v)| k.parse::<Observable>().map(|o| (o, v)).map_err(serde::de::Error::custom))
            .collect::<Result<BTreeMap<_, _>, _>>()
            .map(Outcome)
    }
}

/// All outcomes a model allows for one test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeSet {
    pub test: String,
    pub model: String,
    pub outcomes: BTreeSet<Outcome>,
}

impl OutcomeSet {
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn contains(&self, o: &Outcome) -> bool {
        self.outcomes.contains(o)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("outcome sets serialize")
    }
}

/// Observable values at the end of execution `e`.
pub fn final_state(e: &Execution<'_>, cond: &FinalCondition) -> Outcome {
    let g = e.graph;
    Outcome::new(cond.observables().into_iter().map(|obs| {
        let v = match &obs {
            Observable::Memory(loc) => {
                let idx = g.locations.iter().position(|(l, _)| l == loc).expect("observables validated");
                e.values[e.final_write(idx)]
            }
            Observable::Register { thread, name } => {
                let key = register_key(g.dialect, name);
                e.eval(g.registers[*thread][&key])
            }
        };
        (obs, v)
    }))
}

pub(crate) fn register_key(dialect: Dialect, name: &str) -> String {
    match dialect {
        Dialect::Source => name.to_string(),
        Dialect::Asm => name.parse::<Reg>().map(Reg::key).unwrap_or_else(|_| name.to_string()),
    }
}

pub(crate) fn check_observables(test: &LitmusTest) -> Result<(), ExecError> {
    match test.final_condition.observables().into_iter().find(|o| !test.defines(o)) {
        Some(o) => Err(ExecError::UndefinedObservable(o.to_string())),
        None => Ok(()),
    }
}

/// Outcomes of every candidate execution of `test` that `model` accepts.
pub fn allowed_outcomes(test: &LitmusTest, model: Model) -> Result<OutcomeSet, ExecError> {
    allowed_outcomes_with_cap(test, model, DEFAULT_CANDIDATE_CAP)
}

pub fn allowed_outcomes_with_cap(test: &LitmusTest, model: Model, cap: usize) -> Result<OutcomeSet, ExecError> {
    if model.dialect() != test.dialect() {
        return Err(ExecError::DialectMismatch { model: model.id(), dialect: test.dialect() });
    }
    check_observables(test)?;
    let graph = build_events(test);
    let mut outcomes = BTreeSet::new();
    for e in enumerate_candidates(&graph, cap)? {
        if model.consistent(&e)? {
            outcomes.insert(final_state(&e, &test.final_condition));
        }
    }
    Ok(OutcomeSet { test: test.name.clone(), model: model.id().to_string(), outcomes })
}

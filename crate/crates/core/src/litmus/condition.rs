use std::collections::BTreeMap;
use std::fmt;

use super::{Observable, Value};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub observable: Observable,
    pub value: Value,
}

/// The predicate of an `exists (...)` clause.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FinalCondition {
    Atom(Atom),
    And(Vec<FinalCondition>),
    Or(Vec<FinalCondition>),
    Not(Box<FinalCondition>),
}

impl FinalCondition {
    pub fn atom(observable: Observable, value: Value) -> Self {
        FinalCondition::Atom(Atom { observable, value })
    }

    /// Conjunction of `(observable = value)` atoms.
    pub fn all(atoms: impl IntoIterator<Item = (Observable, Value)>) -> Self {
        let mut parts: Vec<_> = atoms.into_iter().map(|(o, v)| FinalCondition::atom(o, v)).collect();
        if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            FinalCondition::And(parts)
        }
    }

    /// Observables in order of first mention.
    pub fn observables(&self) -> Vec<Observable> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<Observable>) {
        match self {
            FinalCondition::Atom(a) => {
                if !out.contains(&a.observable) {
                    out.push(a.observable.clone());
                }
            }
            FinalCondition::And(cs) | FinalCondition::Or(cs) => cs.iter().for_each(|c| c.collect(out)),
            FinalCondition::Not(c) => c.collect(out),
        }
    }

    /// Evaluates against a final state; observables missing from `state` make
    /// their atoms false.
    pub fn holds(&self, state: &BTreeMap<Observable, Value>) -> bool {
        match self {
            FinalCondition::Atom(a) => state.get(&a.observable) == Some(&a.value),
            FinalCondition::And(cs) => cs.iter().all(|c| c.holds(state)),
            FinalCondition::Or(cs) => cs.iter().any(|c| c.holds(state)),
            FinalCondition::Not(c) => !c.holds(state),
        }
    }

    /// Rewrites every observable through `f`, failing on the first error.
    pub fn try_map_observables<E>(&self, f: &mut impl FnMut(&Observable) -> Result<Observable, E>) -> Result<Self, E> {
        Ok(match self {
            FinalCondition::Atom(a) => FinalCondition::atom(f(&a.observable)?, a.value),
            FinalCondition::And(cs) => {
                FinalCondition::And(cs.iter().map(|c| c.try_map_observables(f)).collect::<Result<_, _>>()?)
            }
            FinalCondition::Or(cs) => {
                FinalCondition::Or(cs.iter().map(|c| c.try_map_observables(f)).collect::<Result<_, _>>()?)
            }
            FinalCondition::Not(c) => FinalCondition::Not(Box::new(c.try_map_observables(f)?)),
        })
    }

    fn is_compound(&self) -> bool {
        !matches!(self, FinalCondition::Atom(_))
    }
}

/// Compound operands are always parenthesized so the printed form re-parses
/// to the same tree.
impl fmt::Display for FinalCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let operand = |f: &mut fmt::Formatter<'_>, c: &FinalCondition| {
            if c.is_compound() && !matches!(c, FinalCondition::Not(_)) {
                write!(f, "({c})")
            } else {
                write!(f, "{c}")
            }
        };
        match self {
            FinalCondition::Atom(a) => write!(f, "{} = {}", a.observable, a.value),
            FinalCondition::And(cs) | FinalCondition::Or(cs) => {
                let sep = if matches!(self, FinalCondition::And(_)) { " /\\ " } else { " \\/ " };
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    operand(f, c)?;
                }
                Ok(())
            }
            FinalCondition::Not(c) => {
                f.write_str("~")?;
                if c.is_compound() && !matches!(**c, FinalCondition::Not(_)) {
                    write!(f, "({c})")
                } else {
                    write!(f, "{c}")
                }
            }
        }
    }
}

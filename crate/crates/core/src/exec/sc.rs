//! Operational sequential-consistency oracle: run every interleaving of the
//! threads' statements against one shared memory.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::outcome::{check_observables, register_key, Outcome, OutcomeSet};
use super::{ExecError, DEFAULT_CANDIDATE_CAP};
use crate::litmus::{AsmInstr, LitmusTest, MovSource, Observable, Reg, SourceStmt, Threads, Value};

#[derive(Clone, PartialEq, Eq, Hash)]
struct State {
    pcs: Vec<usize>,
    memory: Vec<Value>,
    registers: Vec<BTreeMap<String, Value>>,
}

/// Outcomes reachable under sequential consistency.
pub fn sc_oracle_outcomes(test: &LitmusTest) -> Result<OutcomeSet, ExecError> {
    sc_oracle_outcomes_with_cap(test, DEFAULT_CANDIDATE_CAP)
}

pub fn sc_oracle_outcomes_with_cap(test: &LitmusTest, cap: usize) -> Result<OutcomeSet, ExecError> {
    check_observables(test)?;
    let lengths: Vec<usize> = match &test.threads {
        Threads::Source(ts) => ts.iter().map(|t| t.statements.len()).collect(),
        Threads::Asm(ts) => ts.iter().map(|t| t.instructions.len()).collect(),
    };
    let loc = |name: &str| test.location_index(name).expect("validated location");
    let start = State {
        pcs: vec![0; lengths.len()],
        memory: test.locations.iter().map(|(_, v)| *v).collect(),
        registers: vec![BTreeMap::new(); lengths.len()],
    };

    let mut seen = HashSet::new();
    let mut stack = vec![start];
    let mut outcomes = BTreeSet::new();
    while let Some(state) = stack.pop() {
        if !seen.insert(state.clone()) {
            continue;
        }
        if seen.len() > cap {
            return Err(ExecError::CandidateLimit { count: seen.len() as u128, cap });
        }
        let mut terminal = true;
        for tid in 0..lengths.len() {
            let pc = state.pcs[tid];
            if pc == lengths[tid] {
                continue;
            }
            terminal = false;
            let mut next = state.clone();
            next.pcs[tid] += 1;
            let regs = &mut next.registers[tid];
            let mem = &mut next.memory;
            match &test.threads {
                Threads::Source(ts) => match &ts[tid].statements[pc] {
                    SourceStmt::Load { dst, loc: l, .. } => {
                        regs.insert(dst.clone(), mem[loc(l)]);
                    }
                    SourceStmt::Store { loc: l, value, .. } => mem[loc(l)] = *value,
                    SourceStmt::Exchange { dst, loc: l, value, .. } => {
                        let old = std::mem::replace(&mut mem[loc(l)], *value);
                        if let Some(d) = dst {
                            regs.insert(d.clone(), old);
                        }
                    }
                    SourceStmt::Fence { .. } => {}
                },
                Threads::Asm(ts) => {
                    let read = |regs: &BTreeMap<String, Value>, r: Reg| {
                        if r.is_zero() {
                            0
                        } else {
                            regs.get(&r.key()).copied().unwrap_or(0)
                        }
                    };
                    let write = |regs: &mut BTreeMap<String, Value>, r: Reg, v: Value| {
                        if !r.is_zero() {
                            regs.insert(r.key(), v);
                        }
                    };
                    match &ts[tid].instructions[pc] {
                        AsmInstr::Mov { dst, src } => {
                            let v = match src {
                                MovSource::Imm(v) => *v,
                                MovSource::Reg(r) => read(regs, *r),
                            };
                            write(regs, *dst, v);
                        }
                        AsmInstr::Load { dst, addr, .. } => write(regs, *dst, mem[loc(&addr.location)]),
                        AsmInstr::Store { src, addr, .. } => mem[loc(&addr.location)] = read(regs, *src),
                        AsmInstr::Swap { src, dst, addr, .. } => {
                            let v = read(regs, *src);
                            let old = std::mem::replace(&mut mem[loc(&addr.location)], v);
                            write(regs, *dst, old);
                        }
                        AsmInstr::Dmb(_) => {}
                    }
                }
            }
            stack.push(next);
        }
        if terminal {
            outcomes.insert(observe(test, &state));
        }
    }
    Ok(OutcomeSet { test: test.name.clone(), model: "sc".to_string(), outcomes })
}

fn observe(test: &LitmusTest, state: &State) -> Outcome {
    Outcome::new(test.final_condition.observables().into_iter().map(|obs| {
        let v = match &obs {
            Observable::Memory(l) => state.memory[test.location_index(l).unwrap()],
            Observable::Register { thread, name } => state.registers[*thread][&register_key(test.dialect(), name)],
        };
        (obs, v)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::litmus::parse_source_litmus;

    #[test]
    fn racing_stores() {
        let t = parse_source_litmus(
            "C race\n{ x = 0; }\nP0 (atomic_int* x) { atomic_store_explicit(x, 1, memory_order_relaxed); }\nP1 (atomic_int* x) { atomic_store_explicit(x, 2, memory_order_relaxed); }\nexists (x = 1)",
        )
        .unwrap();
        let s = sc_oracle_outcomes(&t).unwrap();
        let xs: Vec<_> = s.outcomes.iter().map(|o| o.get(&Observable::memory("x")).unwrap()).collect();
        assert_eq!(xs, vec![1, 2]);
    }

    #[test]
    fn single_store() {
        let t = parse_source_litmus(
            "C s\n{ x = 0; }\nP0 (atomic_int* x) { atomic_store_explicit(x, 1, memory_order_relaxed); }\nexists (x = 1)",
        )
        .unwrap();
        let s = sc_oracle_outcomes(&t).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.outcomes.iter().next().unwrap().to_string(), "x=1;");
    }
}

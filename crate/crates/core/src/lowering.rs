//! Reference lowering from the C-style dialect to AArch64, and the
//! dead-register rewrite that turns unused swap destinations into the zero
//! register.
//!
//! | source                           | AArch64            |
//! |----------------------------------|--------------------|
//! | load relaxed                     | `LDR`              |
//! | load acquire / seq_cst           | `LDAR`             |
//! | store relaxed                    | `STR`              |
//! | store release / seq_cst          | `STLR`             |
//! | exchange relaxed                 | `SWP`              |
//! | exchange acquire                 | `SWPA`             |
//! | exchange release                 | `SWPL`             |
//! | exchange acq_rel / seq_cst       | `SWPAL`            |
//! | fence acquire                    | `DMB ISHLD`        |
//! | fence release / acq_rel / seq_cst| `DMB ISH`          |
//!
//! Constants are materialized with `MOV`. Address registers are `X1, X3, …`
//! in order of first use; data registers are `W2, W4, …`. A discarded
//! exchange result goes to the scratch register (`W15` by default).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::litmus::{
    Address, AsmInstr, AsmThread, BarrierDomain, LitmusTest, MemoryOrder, MovSource, Observable, Reg, SourceStmt,
    SourceThread, Threads,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LowerError {
    #[error("lowering expects a C-dialect test")]
    WrongDialect,
    #[error("ran out of registers in thread P{0}")]
    RegisterBudgetExhausted(usize),
    #[error("observable `{0}` has no compiled counterpart")]
    UnmappedObservable(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LoweringOptions {
    pub dead_register_pass: bool,
    /// Destination for discarded exchange results.
    pub scratch: Reg,
}

impl Default for LoweringOptions {
    fn default() -> Self {
        LoweringOptions { dead_register_pass: false, scratch: Reg::w(15) }
    }
}

/// Correspondence between source and compiled observables and locations.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Mapping {
    /// Source observable → compiled observable.
    pub observables: BTreeMap<Observable, Observable>,
    /// Source location → compiled location.
    pub locations: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct MappingJson {
    observables: BTreeMap<String, String>,
    locations: BTreeMap<String, String>,
}

#[derive(Debug, thiserror::Error)]
pub enum MappingFileError {
    #[error("malformed mapping JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Observable(#[from] crate::litmus::InvalidObservable),
    #[error("mapping is not injective: `{0}` is the image of two observables")]
    NotInjective(String),
}

impl Mapping {
    /// Maps every location and memory observable to itself.
    pub fn identity(test: &LitmusTest) -> Self {
        let mut m = Mapping::default();
        for (loc, _) in &test.locations {
            m.locations.insert(loc.clone(), loc.clone());
        }
        for obs in test.final_condition.observables() {
            m.observables.insert(obs.clone(), obs);
        }
        m
    }

    /// Compiled observable → source observable.
    pub fn inverse(&self) -> BTreeMap<Observable, Observable> {
        self.observables.iter().map(|(s, c)| (c.clone(), s.clone())).collect()
    }

    pub fn is_injective(&self) -> bool {
        self.observables.values().collect::<BTreeSet<_>>().len() == self.observables.len()
    }

    pub fn to_json(&self) -> String {
        let json = MappingJson {
            observables: self.observables.iter().map(|(s, c)| (s.to_string(), c.to_string())).collect(),
            locations: self.locations.clone(),
        };
        serde_json::to_string_pretty(&json).expect("mappings serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, MappingFileError> {
        let json: MappingJson = serde_json::from_str(text)?;
        let mut observables = BTreeMap::new();
        for (s, c) in json.observables {
            observables.insert(s.parse()?, c.parse()?);
        }
        let m = Mapping { observables, locations: json.locations };
        if !m.is_injective() {
            let mut seen = BTreeSet::new();
            let dup = m.observables.values().find(|c| !seen.insert(*c)).unwrap();
            return Err(MappingFileError::NotInjective(dup.to_string()));
        }
        Ok(m)
    }
}

struct Allocator {
    used: BTreeSet<u8>,
    thread: usize,
}

impl Allocator {
    fn new(thread: usize, scratch: Reg) -> Self {
        Allocator { used: scratch.number().into_iter().collect(), thread }
    }

    fn take(&mut self, mut candidates: impl Iterator<Item = u8>) -> Result<u8, LowerError> {
        let n = candidates.find(|n| !self.used.contains(n)).ok_or(LowerError::RegisterBudgetExhausted(self.thread))?;
        self.used.insert(n);
        Ok(n)
    }

    fn address(&mut self) -> Result<Reg, LowerError> {
        self.take((1..=29).step_by(2)).map(Reg::x)
    }

    fn data(&mut self) -> Result<Reg, LowerError> {
        self.take((2..=30).step_by(2).chain((1..=29).step_by(2))).map(Reg::w)
    }
}

fn lower_thread(
    thread: &SourceThread,
    opts: &LoweringOptions,
    registers: &mut BTreeMap<String, Reg>,
) -> Result<AsmThread, LowerError> {
    let mut alloc = Allocator::new(thread.id, opts.scratch);
    let mut bindings: Vec<(Reg, String)> = Vec::new();
    for loc in thread.statements.iter().filter_map(SourceStmt::location) {
        if !bindings.iter().any(|(_, l)| l == loc) {
            bindings.push((alloc.address()?, loc.to_string()));
        }
    }
    let addr = |loc: &str| {
        let reg = bindings.iter().find(|(_, l)| l == loc).map(|(r, _)| *r).unwrap();
        Address { reg, location: loc.to_string() }
    };

    let mut out = Vec::new();
    for stmt in &thread.statements {
        match stmt {
            SourceStmt::Load { dst, loc, order } => {
                let r = alloc.data()?;
                registers.insert(dst.clone(), r);
                out.push(AsmInstr::Load { acquire: *order != MemoryOrder::Relaxed, dst: r, addr: addr(loc) });
            }
            SourceStmt::Store { loc, value, order } => {
                let t = alloc.data()?;
                out.push(AsmInstr::Mov { dst: t, src: MovSource::Imm(*value) });
                out.push(AsmInstr::Store { release: *order != MemoryOrder::Relaxed, src: t, addr: addr(loc) });
            }
            SourceStmt::Exchange { dst, loc, value, order } => {
                let t = alloc.data()?;
                let d = match dst {
                    Some(name) => {
                        let r = alloc.data()?;
                        registers.insert(name.clone(), r);
                        r
                    }
                    None => opts.scratch,
                };
                out.push(AsmInstr::Mov { dst: t, src: MovSource::Imm(*value) });
                out.push(AsmInstr::Swap {
                    acquire: order.is_acquire(),
                    release: order.is_release(),
                    src: t,
                    dst: d,
                    addr: addr(loc),
                });
            }
            SourceStmt::Fence { order } => {
                let domain = if *order == MemoryOrder::Acquire { BarrierDomain::Ld } else { BarrierDomain::Sy };
                out.push(AsmInstr::Dmb(domain));
            }
        }
    }
    Ok(AsmThread { id: thread.id, bindings, instructions: out })
}

/// Compiles a C-dialect test to AArch64 and records the observable mapping.
pub fn lower_test(test: &LitmusTest, opts: &LoweringOptions) -> Result<(LitmusTest, Mapping), LowerError> {
    let Threads::Source(threads) = &test.threads else {
        return Err(LowerError::WrongDialect);
    };
    let mut mapping = Mapping::identity(test);
    let mut asm_threads = Vec::new();
    for t in threads {
        let mut regs = BTreeMap::new();
        asm_threads.push(lower_thread(t, opts, &mut regs)?);
        for (name, reg) in regs {
            let src = Observable::register(t.id, name);
            if mapping.observables.contains_key(&src) {
                mapping.observables.insert(src, Observable::register(t.id, reg.to_string()));
            }
        }
    }
    let final_condition = test.final_condition.try_map_observables(&mut |o| {
        mapping.observables.get(o).cloned().ok_or_else(|| LowerError::UnmappedObservable(o.to_string()))
    })?;
    let mut compiled = LitmusTest {
        name: format!("{}-compiled", test.name),
        locations: test.locations.clone(),
        threads: Threads::Asm(asm_threads),
        final_condition,
    };
    if opts.dead_register_pass {
        compiled = dead_register_pass(&compiled);
    }
    Ok((compiled, mapping))
}

/// Rewrites the destination of every `SWP`-family instruction to the zero
/// register when no later instruction in the thread reads it and the final
/// condition does not observe it. Other instructions are left untouched.
pub fn dead_register_pass(test: &LitmusTest) -> LitmusTest {
    let Threads::Asm(threads) = &test.threads else {
        return test.clone();
    };
    let observed: Vec<(usize, Reg)> = test
        .final_condition
        .observables()
        .into_iter()
        .filter_map(|o| match o {
            Observable::Register { thread, name } => name.parse::<Reg>().ok().map(|r| (thread, r)),
            Observable::Memory(_) => None,
        })
        .collect();

    let threads = threads
        .iter()
        .map(|t| {
            let mut instructions = t.instructions.clone();
            for (i, instr) in instructions.iter_mut().enumerate() {
                let AsmInstr::Swap { dst, .. } = instr else { continue };
                if dst.is_zero() {
                    continue;
                }
                let read_later = t.instructions[i + 1..]
                    .iter()
                    .any(|later| later.source_registers().iter().any(|r| r.aliases(*dst)));
                let is_observed = observed.iter().any(|(tid, r)| *tid == t.id && r.aliases(*dst));
                if !read_later && !is_observed {
                    *dst = if dst.is_wide() { Reg::XZR } else { Reg::WZR };
                }
            }
            AsmThread { instructions, ..t.clone() }
        })
        .collect();
    LitmusTest { threads: Threads::Asm(threads), ..test.clone() }
}

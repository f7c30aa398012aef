//! Shared helpers: a random source-test generator and a naive candidate
//! oracle that does not reuse the crate's enumerator.
#![allow(dead_code)]

use std::collections::BTreeSet;

use mbct::exec::{build_events, final_state, EventGraph, EventId, Execution, Outcome, ValueSource};
use mbct::litmus::{
    AsmInstr, BarrierDomain, FinalCondition, LitmusTest, MemoryOrder, Observable, SourceStmt, SourceThread, Threads,
    Value,
};
use mbct::model::Model;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub threads: usize,
    pub locations: usize,
    pub max_statements: usize,
}

impl Default for Shape {
    fn default() -> Self {
        Shape { threads: 2, locations: 2, max_statements: 3 }
    }
}

const LOCATIONS: [&str; 3] = ["x", "y", "z"];

fn pick_order(rng: &mut Rng8, valid: fn(MemoryOrder) -> bool) -> MemoryOrder {
    let legal: Vec<_> = MemoryOrder::ALL.into_iter().filter(|&o| valid(o)).collect();
    *legal.choose(rng).unwrap()
}

/// A random C test. Every register and location is observed.
pub fn random_source_test(rng: &mut Rng8, shape: Shape) -> LitmusTest {
    let locs: Vec<String> = LOCATIONS[..shape.locations].iter().map(|s| s.to_string()).collect();
    let mut threads = Vec::new();
    let mut observed = Vec::new();
    for tid in 0..shape.threads {
        let n = rng.gen_range(1..=shape.max_statements);
        let mut statements = Vec::new();
        let mut next_reg = 0;
        let mut fresh = |observed: &mut Vec<(Observable, Value)>| {
            let name = format!("r{next_reg}");
            next_reg += 1;
            observed.push((Observable::register(tid, name.clone()), 0));
            name
        };
        for _ in 0..n {
            let loc = locs.choose(rng).unwrap().clone();
            let value = rng.gen_range(1..=3);
            let stmt = match rng.gen_range(0..7) {
                0 | 1 => SourceStmt::Load {
                    dst: fresh(&mut observed),
                    loc,
                    order: pick_order(rng, MemoryOrder::valid_for_load),
                },
                2 | 3 => SourceStmt::Store { loc, value, order: pick_order(rng, MemoryOrder::valid_for_store) },
                4 => SourceStmt::Exchange {
                    dst: Some(fresh(&mut observed)),
                    loc,
                    value,
                    order: pick_order(rng, |_| true),
                },
                5 => SourceStmt::Exchange { dst: None, loc, value, order: pick_order(rng, |_| true) },
                _ => SourceStmt::Fence { order: pick_order(rng, MemoryOrder::valid_for_fence) },
            };
            statements.push(stmt);
        }
        threads.push(SourceThread { id: tid, statements });
    }
    observed.extend(locs.iter().map(|l| (Observable::memory(l.clone()), 0)));
    LitmusTest {
        name: "random".into(),
        locations: locs.into_iter().map(|l| (l, 0)).collect(),
        threads: Threads::Source(threads),
        final_condition: FinalCondition::all(observed),
    }
}

pub fn event_count(t: &LitmusTest) -> usize {
    build_events(t).len()
}

/// `a` is at least as strong as `b`.
pub fn at_least(a: MemoryOrder, b: MemoryOrder) -> bool {
    use MemoryOrder::*;
    match b {
        Relaxed => true,
        Acquire => matches!(a, Acquire | AcqRel | SeqCst),
        Release => matches!(a, Release | AcqRel | SeqCst),
        AcqRel => matches!(a, AcqRel | SeqCst),
        SeqCst => a == SeqCst,
    }
}

/// Strengthens one random statement's order, if any can be strengthened.
pub fn strengthen_one(rng: &mut Rng8, t: &LitmusTest) -> Option<LitmusTest> {
    let Threads::Source(threads) = &t.threads else { return None };
    let mut sites = Vec::new();
    for (ti, th) in threads.iter().enumerate() {
        for (si, s) in th.statements.iter().enumerate() {
            let valid: fn(MemoryOrder) -> bool = match s {
                SourceStmt::Load { .. } => MemoryOrder::valid_for_load,
                SourceStmt::Store { .. } => MemoryOrder::valid_for_store,
                SourceStmt::Exchange { .. } => |_| true,
                SourceStmt::Fence { .. } => MemoryOrder::valid_for_fence,
            };
            for o in MemoryOrder::ALL {
                if o != s.order() && valid(o) && at_least(o, s.order()) {
                    sites.push((ti, si, o));
                }
            }
        }
    }
    let &(ti, si, o) = sites.choose(rng)?;
    let mut out = t.clone();
    if let Threads::Source(ts) = &mut out.threads {
        ts[ti].statements[si].set_order(o);
    }
    Some(out)
}

/// Puts `DMB SY` between consecutive memory instructions of every thread.
pub fn insert_full_barriers(t: &LitmusTest) -> LitmusTest {
    let mut out = t.clone();
    if let Threads::Asm(threads) = &mut out.threads {
        for th in threads {
            let mut instrs = Vec::new();
            let mut seen_access = false;
            for i in th.instructions.drain(..) {
                if i.address().is_some() {
                    if seen_access {
                        instrs.push(AsmInstr::Dmb(BarrierDomain::Sy));
                    }
                    seen_access = true;
                }
                instrs.push(i);
            }
            th.instructions = instrs;
        }
    }
    out
}

/// One naive candidate: rf per event, co per location (init first), values.
pub type RawCandidate = (Vec<Option<EventId>>, Vec<Vec<EventId>>, Vec<Value>);

fn permutations(items: &[EventId]) -> Vec<Vec<EventId>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

fn cartesian<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut acc = vec![vec![]];
    for options in choices {
        let mut next = Vec::new();
        for prefix in &acc {
            for o in options {
                let mut p = prefix.clone();
                p.push(o.clone());
                next.push(p);
            }
        }
        acc = next;
    }
    acc
}

/// Values by fixpoint iteration; `None` if some value never resolves.
fn naive_values(g: &EventGraph, rf: &[Option<EventId>]) -> Option<Vec<Value>> {
    let mut values: Vec<Option<Value>> = vec![None; g.events.len()];
    for _ in 0..=g.events.len() {
        for e in &g.events {
            values[e.id] = if e.is_read() {
                values[rf[e.id].unwrap()]
            } else {
                match e.write_value {
                    Some(ValueSource::Const(v)) => Some(v),
                    Some(ValueSource::Read(r)) => values[r],
                    None => Some(0),
                }
            };
        }
    }
    values.into_iter().collect()
}

/// Every rf function and every co permutation, filtered for RMW adjacency
/// and resolvable values.
pub fn naive_candidates(g: &EventGraph) -> Vec<RawCandidate> {
    let n_locs = g.locations.len();
    let writes_to = |loc: usize| -> Vec<EventId> {
        g.events.iter().filter(|e| e.is_write() && e.location == Some(loc)).map(|e| e.id).collect()
    };
    let reads: Vec<EventId> = g.events.iter().filter(|e| e.is_read()).map(|e| e.id).collect();
    let rf_options: Vec<Vec<EventId>> = reads.iter().map(|&r| writes_to(g.events[r].location.unwrap())).collect();
    let co_options: Vec<Vec<Vec<EventId>>> = (0..n_locs)
        .map(|loc| {
            let ws = writes_to(loc);
            let (init, rest): (Vec<_>, Vec<_>) = ws.into_iter().partition(|&w| g.events[w].is_init());
            permutations(&rest).into_iter().map(|p| init.iter().copied().chain(p).collect()).collect()
        })
        .collect();

    let mut out = Vec::new();
    for co in cartesian(&co_options) {
        'rf: for choice in cartesian(&rf_options) {
            let mut rf = vec![None; g.events.len()];
            for (&r, &w) in reads.iter().zip(&choice) {
                rf[r] = Some(w);
            }
            for &r in &reads {
                if let Some(w) = g.events[r].rmw_partner {
                    let order = &co[g.events[w].location.unwrap()];
                    let pos = order.iter().position(|&x| x == w).unwrap();
                    if pos == 0 || rf[r] != Some(order[pos - 1]) {
                        continue 'rf;
                    }
                }
            }
            if let Some(values) = naive_values(g, &rf) {
                out.push((rf, co.clone(), values));
            }
        }
    }
    out
}

/// Outcomes of `model` over the naive candidates.
pub fn naive_outcomes(t: &LitmusTest, model: Model) -> BTreeSet<Outcome> {
    let g = build_events(t);
    naive_candidates(&g)
        .into_iter()
        .filter_map(|(rf, co, values)| {
            let e = Execution { graph: &g, rf, co, values };
            model.consistent(&e).unwrap().then(|| final_state(&e, &t.final_condition))
        })
        .collect()
}

pub fn outcome(pairs: &[(&str, Value)]) -> Outcome {
    Outcome::new(pairs.iter().map(|(o, v)| (o.parse::<Observable>().unwrap(), *v)))
}

use itertools::Itertools;

use super::events::{EventGraph, EventId, ValueSource};
use super::ExecError;
use crate::litmus::Value;
use crate::relation::Relation;

/// Default bound on the number of candidates one test may generate.
pub const DEFAULT_CANDIDATE_CAP: usize = 1_000_000;

/// A candidate execution: reads-from and coherence choices over an event graph.
#[derive(Clone, Debug)]
pub struct Execution<'g> {
    pub graph: &'g EventGraph,
    /// Indexed by event id; `Some(w)` for reads.
    pub rf: Vec<Option<EventId>>,
    /// Per location, writes in coherence order (init write first).
    pub co: Vec<Vec<EventId>>,
    /// Per event: value read (reads) or written (writes); 0 for fences.
    pub values: Vec<Value>,
}

impl<'g> Execution<'g> {
    pub fn rf_relation(&self) -> Relation {
        Relation::from_pairs(self.graph.len(), self.rf.iter().enumerate().filter_map(|(r, w)| w.map(|w| (w, r))))
    }

    /// Coherence as a strict (transitive) order.
    pub fn co_relation(&self) -> Relation {
        let mut co = Relation::empty(self.graph.len());
        for order in &self.co {
            for (i, &a) in order.iter().enumerate() {
                for &b in &order[i + 1..] {
                    co.insert(a, b);
                }
            }
        }
        co
    }

    /// From-reads: `rf⁻¹ ; co`.
    pub fn fr_relation(&self) -> Relation {
        self.rf_relation().inverse().compose(&self.co_relation())
    }

    /// The co-maximal write to `loc`.
    pub fn final_write(&self, loc: usize) -> EventId {
        *self.co[loc].last().expect("every location has an init write")
    }

    /// Value a register-dataflow source evaluates to in this execution.
    pub fn eval(&self, src: ValueSource) -> Value {
        match src {
            ValueSource::Const(v) => v,
            ValueSource::Read(r) => self.values[r],
        }
    }

    /// Checks the structural invariants every candidate must satisfy.
    pub fn check_well_formed(&self) -> Result<(), String> {
        let g = self.graph;
        for e in &g.events {
            match (e.is_read(), self.rf[e.id]) {
                (true, Some(w)) => {
                    let src = &g.events[w];
                    if !src.is_write() || src.location != e.location {
                        return Err(format!("rf of {} is not a same-location write", e.id));
                    }
                    if self.values[e.id] != self.values[w] {
                        return Err(format!("value disagreement on read {}", e.id));
                    }
                }
                (true, None) => return Err(format!("read {} has no rf", e.id)),
                (false, Some(_)) => return Err(format!("non-read {} has rf", e.id)),
                (false, None) => {}
            }
            if e.is_write() && self.values[e.id] != self.eval(e.write_value.expect("writes carry a value")) {
                return Err(format!("write {} value mismatch", e.id));
            }
        }
        for (loc, order) in self.co.iter().enumerate() {
            let mut expected = g.writes_to(loc);
            let mut got = order.clone();
            if got.first() != Some(&loc) {
                return Err(format!("co of location {loc} does not start with its init write"));
            }
            expected.sort_unstable();
            got.sort_unstable();
            if expected != got {
                return Err(format!("co of location {loc} is not a permutation of its writes"));
            }
        }
        for e in g.events.iter().filter(|e| e.is_read()) {
            if let Some(w) = e.rmw_partner {
                let order = &self.co[e.location.unwrap()];
                let pos = order.iter().position(|&x| x == w).unwrap();
                if self.rf[e.id] != Some(order[pos - 1]) {
                    return Err(format!("rmw read {} does not read its write's co-predecessor", e.id));
                }
            }
        }
        Ok(())
    }
}

/// All candidate executions of a graph, produced lazily.
pub struct Candidates<'g> {
    graph: &'g EventGraph,
    /// Coherence orders of non-init writes, per location.
    co_choices: Vec<Vec<Vec<EventId>>>,
    /// Plain (non-RMW) reads and the writes each may read from.
    rf_choices: Vec<(EventId, Vec<EventId>)>,
    /// Odometer: co digits then rf digits.
    digits: Vec<usize>,
    radix: Vec<usize>,
    done: bool,
    total: u128,
}

impl<'g> Candidates<'g> {
    /// Number of rf/co combinations visited, including any skipped for
    /// cyclic value dependencies.
    pub fn total(&self) -> u128 {
        self.total
    }

    fn advance(&mut self) {
        for i in (0..self.digits.len()).rev() {
            self.digits[i] += 1;
            if self.digits[i] < self.radix[i] {
                return;
            }
            self.digits[i] = 0;
        }
        self.done = true;
    }

    fn current(&self) -> Option<Execution<'g>> {
        let g = self.graph;
        let n_locs = g.locations.len();
        let co: Vec<Vec<EventId>> = (0..n_locs)
            .map(|loc| {
                let mut order = vec![loc];
                order.extend_from_slice(&self.co_choices[loc][self.digits[loc]]);
                order
            })
            .collect();

        let mut rf = vec![None; g.len()];
        for (k, (r, ws)) in self.rf_choices.iter().enumerate() {
            rf[*r] = Some(ws[self.digits[n_locs + k]]);
        }
        for e in g.events.iter().filter(|e| e.is_read()) {
            if let Some(w) = e.rmw_partner {
                let order = &co[e.location.unwrap()];
                let pos = order.iter().position(|&x| x == w).unwrap();
                rf[e.id] = Some(order[pos - 1]);
            }
        }

        let values = resolve_values(g, &rf)?;
        Some(Execution { graph: g, rf, co, values })
    }
}

impl<'g> Iterator for Candidates<'g> {
    type Item = Execution<'g>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            let candidate = self.current();
            self.advance();
            if let Some(c) = candidate {
                debug_assert_eq!(c.check_well_formed(), Ok(()));
                return Some(c);
            }
        }
        None
    }
}

/// Computes read and write values by following rf through the register
/// dataflow. Returns `None` when values depend on themselves.
fn resolve_values(g: &EventGraph, rf: &[Option<EventId>]) -> Option<Vec<Value>> {
    #[derive(Clone, Copy)]
    enum State {
        Todo,
        Active,
        Done(Value),
    }
    fn visit(g: &EventGraph, rf: &[Option<EventId>], state: &mut [State], e: EventId) -> Option<Value> {
        match state[e] {
            State::Done(v) => return Some(v),
            State::Active => return None,
            State::Todo => {}
        }
        state[e] = State::Active;
        let ev = &g.events[e];
        let v = if ev.is_read() {
            visit(g, rf, state, rf[e]?)?
        } else if let Some(src) = ev.write_value {
            match src {
                ValueSource::Const(v) => v,
                ValueSource::Read(r) => visit(g, rf, state, r)?,
            }
        } else {
            0
        };
        state[e] = State::Done(v);
        Some(v)
    }
    let mut state = vec![State::Todo; g.len()];
    (0..g.len()).map(|e| visit(g, rf, &mut state, e)).collect()
}

/// Enumerates every candidate execution of `graph`.
///
/// Read-modify-write reads are fixed to the coherence predecessor of their
/// write; every other read ranges over all same-location writes. Candidates
/// whose values would depend on themselves are skipped.
pub fn enumerate_candidates(graph: &EventGraph, cap: usize) -> Result<Candidates<'_>, ExecError> {
    let n_locs = graph.locations.len();
    let writes: Vec<Vec<EventId>> = (0..n_locs).map(|l| graph.writes_to(l)).collect();

    let mut total: u128 = 1;
    for ws in &writes {
        for k in 1..ws.len() {
            total = total.saturating_mul(k as u128);
        }
    }
    let rf_choices: Vec<(EventId, Vec<EventId>)> = graph
        .events
        .iter()
        .filter(|e| e.is_read() && e.rmw_partner.is_none())
        .map(|e| (e.id, writes[e.location.unwrap()].clone()))
        .collect();
    for (_, ws) in &rf_choices {
        total = total.saturating_mul(ws.len() as u128);
    }
    if total > cap as u128 {
        return Err(ExecError::CandidateLimit { count: total, cap });
    }

    let co_choices: Vec<Vec<Vec<EventId>>> =
        writes.iter().map(|ws| ws[1..].iter().copied().permutations(ws.len() - 1).collect()).collect();
    let radix: Vec<usize> = co_choices.iter().map(Vec::len).chain(rf_choices.iter().map(|(_, ws)| ws.len())).collect();
    let done = radix.contains(&0);
    Ok(Candidates { graph, co_choices, rf_choices, digits: vec![0; radix.len()], radix, done, total })
}

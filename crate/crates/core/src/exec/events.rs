use std::collections::BTreeMap;

use crate::litmus::{
    AsmInstr, AsmThread, BarrierDomain, Dialect, LitmusTest, MemoryOrder, MovSource, Reg, SourceStmt, SourceThread,
    Threads, Value,
};
use crate::relation::{EventSet, Relation};

pub type EventId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventKind {
    Read,
    Write,
    Fence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FenceKind {
    /// `atomic_thread_fence(order)`.
    Order(MemoryOrder),
    /// `DMB` with the given domain.
    Barrier(BarrierDomain),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Annotations {
    pub acquire: bool,
    pub release: bool,
    pub seq_cst: bool,
}

impl Annotations {
    fn from_order(order: MemoryOrder) -> Self {
        Annotations { acquire: order.is_acquire(), release: order.is_release(), seq_cst: order.is_seq_cst() }
    }
}

/// Where a written value (or a register's final value) comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ValueSource {
    Const(Value),
    /// Whatever the given read event returns.
    Read(EventId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub id: EventId,
    /// `None` for the initial writes.
    pub thread: Option<usize>,
    pub po_index: usize,
    pub kind: EventKind,
    /// Location index into [`EventGraph::locations`].
    pub location: Option<usize>,
    /// Value written, for writes.
    pub write_value: Option<ValueSource>,
    pub annotations: Annotations,
    /// The other half of a read-modify-write.
    pub rmw_partner: Option<EventId>,
    /// Read half of a swap whose destination is the zero register.
    pub zero_register: bool,
    pub fence: Option<FenceKind>,
}

impl Event {
    pub fn is_read(&self) -> bool {
        self.kind == EventKind::Read
    }

    pub fn is_write(&self) -> bool {
        self.kind == EventKind::Write
    }

    pub fn is_fence(&self) -> bool {
        self.kind == EventKind::Fence
    }

    pub fn is_init(&self) -> bool {
        self.thread.is_none()
    }
}

/// Events of a test with program order and the register dataflow that
/// determines written values.
#[derive(Clone, Debug)]
pub struct EventGraph {
    pub dialect: Dialect,
    pub locations: Vec<(String, Value)>,
    /// Init writes first (one per location, same order as `locations`), then
    /// thread events in thread and program order.
    pub events: Vec<Event>,
    pub threads: Vec<Vec<EventId>>,
    /// Final register contents per thread, keyed by source name or [`Reg::key`].
    pub registers: Vec<BTreeMap<String, ValueSource>>,
}

impl EventGraph {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn thread_event_count(&self) -> usize {
        self.events.len() - self.locations.len()
    }

    pub fn set(&self, mut pred: impl FnMut(&Event) -> bool) -> EventSet {
        EventSet::from_fn(self.len(), |i| pred(&self.events[i]))
    }

    pub fn reads(&self) -> EventSet {
        self.set(Event::is_read)
    }

    pub fn writes(&self) -> EventSet {
        self.set(Event::is_write)
    }

    pub fn fences(&self) -> EventSet {
        self.set(Event::is_fence)
    }

    pub fn memory_events(&self) -> EventSet {
        self.set(|e| !e.is_fence())
    }

    pub fn init_writes(&self) -> EventSet {
        self.set(Event::is_init)
    }

    /// Writes to location `loc`, init write first.
    pub fn writes_to(&self, loc: usize) -> Vec<EventId> {
        self.events.iter().filter(|e| e.is_write() && e.location == Some(loc)).map(|e| e.id).collect()
    }

    /// Program order within threads, without the init writes.
    pub fn thread_po(&self) -> Relation {
        let mut po = Relation::empty(self.len());
        for evs in &self.threads {
            for (i, &a) in evs.iter().enumerate() {
                for &b in &evs[i + 1..] {
                    po.insert(a, b);
                }
            }
        }
        po
    }

    /// Program order with the init writes ordered before every thread event.
    pub fn po(&self) -> Relation {
        let mut po = self.thread_po();
        for init in self.init_writes().iter() {
            for evs in &self.threads {
                for &e in evs {
                    po.insert(init, e);
                }
            }
        }
        po
    }

    /// Pairs of events accessing the same location.
    pub fn same_location(&self) -> Relation {
        let mut r = Relation::empty(self.len());
        for a in &self.events {
            for b in &self.events {
                if a.location.is_some() && a.location == b.location {
                    r.insert(a.id, b.id);
                }
            }
        }
        r
    }

    /// Read-to-write pairs of read-modify-writes.
    pub fn rmw(&self) -> Relation {
        Relation::from_pairs(
            self.len(),
            self.events.iter().filter(|e| e.is_read()).filter_map(|e| e.rmw_partner.map(|w| (e.id, w))),
        )
    }

    /// Data dependencies: read → write whose value is that read's result.
    pub fn data(&self) -> Relation {
        Relation::from_pairs(
            self.len(),
            self.events.iter().filter_map(|e| match e.write_value {
                Some(ValueSource::Read(r)) => Some((r, e.id)),
                _ => None,
            }),
        )
    }

    pub fn different_threads(&self) -> Relation {
        let mut r = Relation::empty(self.len());
        for a in &self.events {
            for b in &self.events {
                if a.thread != b.thread || (a.is_init() && b.is_init() && a.id != b.id) {
                    r.insert(a.id, b.id);
                }
            }
        }
        r
    }
}

struct Builder {
    events: Vec<Event>,
    thread_events: Vec<EventId>,
    registers: BTreeMap<String, ValueSource>,
    thread: usize,
}

impl Builder {
    fn push(&mut self, kind: EventKind, location: Option<usize>) -> EventId {
        let id = self.events.len();
        self.events.push(Event {
            id,
            thread: Some(self.thread),
            po_index: self.thread_events.len(),
            kind,
            location,
            write_value: None,
            annotations: Annotations::default(),
            rmw_partner: None,
            zero_register: false,
            fence: None,
        });
        self.thread_events.push(id);
        id
    }

    fn rmw(&mut self, location: usize, written: ValueSource) -> (EventId, EventId) {
        let r = self.push(EventKind::Read, Some(location));
        let w = self.push(EventKind::Write, Some(location));
        self.events[r].rmw_partner = Some(w);
        self.events[w].rmw_partner = Some(r);
        self.events[w].write_value = Some(written);
        (r, w)
    }

    fn reg_value(&self, reg: Reg) -> ValueSource {
        if reg.is_zero() {
            return ValueSource::Const(0);
        }
        // Parse-time checks guarantee the register is defined.
        self.registers.get(&reg.key()).copied().unwrap_or(ValueSource::Const(0))
    }

    fn set_reg(&mut self, reg: Reg, v: ValueSource) {
        if !reg.is_zero() {
            self.registers.insert(reg.key(), v);
        }
    }
}

/// Builds the event graph of `test`.
pub fn build_events(test: &LitmusTest) -> EventGraph {
    let loc_index = |l: &str| test.location_index(l).expect("locations validated at parse time");
    let mut events: Vec<Event> = test
        .locations
        .iter()
        .enumerate()
        .map(|(i, (_, v))| Event {
            id: i,
            thread: None,
            po_index: 0,
            kind: EventKind::Write,
            location: Some(i),
            write_value: Some(ValueSource::Const(*v)),
            annotations: Annotations::default(),
            rmw_partner: None,
            zero_register: false,
            fence: None,
        })
        .collect();
    let mut threads = Vec::new();
    let mut registers = Vec::new();

    let mut run = |tid: usize, events: &mut Vec<Event>, body: &mut dyn FnMut(&mut Builder)| {
        let mut b = Builder {
            events: std::mem::take(events),
            thread_events: Vec::new(),
            registers: BTreeMap::new(),
            thread: tid,
        };
        body(&mut b);
        *events = b.events;
        threads.push(b.thread_events);
        registers.push(b.registers);
    };

    match &test.threads {
        Threads::Source(ts) => {
            for SourceThread { id, statements } in ts {
                run(*id, &mut events, &mut |b| {
                    for s in statements {
                        source_events(b, s, &loc_index);
                    }
                });
            }
        }
        Threads::Asm(ts) => {
            for AsmThread { id, instructions, .. } in ts {
                run(*id, &mut events, &mut |b| {
                    for i in instructions {
                        asm_events(b, i, &loc_index);
                    }
                });
            }
        }
    }

    EventGraph { dialect: test.dialect(), locations: test.locations.clone(), events, threads, registers }
}

fn source_events(b: &mut Builder, s: &SourceStmt, loc_index: &dyn Fn(&str) -> usize) {
    match s {
        SourceStmt::Load { dst, loc, order } => {
            let r = b.push(EventKind::Read, Some(loc_index(loc)));
            b.events[r].annotations = Annotations::from_order(*order);
            b.registers.insert(dst.clone(), ValueSource::Read(r));
        }
        SourceStmt::Store { loc, value, order } => {
            let w = b.push(EventKind::Write, Some(loc_index(loc)));
            b.events[w].write_value = Some(ValueSource::Const(*value));
            b.events[w].annotations = Annotations::from_order(*order);
        }
        SourceStmt::Exchange { dst, loc, value, order } => {
            let (r, w) = b.rmw(loc_index(loc), ValueSource::Const(*value));
            b.events[r].annotations =
                Annotations { acquire: order.is_acquire(), release: false, seq_cst: order.is_seq_cst() };
            b.events[w].annotations =
                Annotations { acquire: false, release: order.is_release(), seq_cst: order.is_seq_cst() };
            if let Some(dst) = dst {
                b.registers.insert(dst.clone(), ValueSource::Read(r));
            }
        }
        SourceStmt::Fence { order } => {
            let f = b.push(EventKind::Fence, None);
            b.events[f].annotations = Annotations::from_order(*order);
            b.events[f].fence = Some(FenceKind::Order(*order));
        }
    }
}

fn asm_events(b: &mut Builder, i: &AsmInstr, loc_index: &dyn Fn(&str) -> usize) {
    match i {
        AsmInstr::Mov { dst, src } => {
            let v = match src {
                MovSource::Imm(v) => ValueSource::Const(*v),
                MovSource::Reg(r) => b.reg_value(*r),
            };
            b.set_reg(*dst, v);
        }
        AsmInstr::Load { acquire, dst, addr } => {
            let r = b.push(EventKind::Read, Some(loc_index(&addr.location)));
            b.events[r].annotations.acquire = *acquire;
            b.set_reg(*dst, ValueSource::Read(r));
        }
        AsmInstr::Store { release, src, addr } => {
            let v = b.reg_value(*src);
            let w = b.push(EventKind::Write, Some(loc_index(&addr.location)));
            b.events[w].write_value = Some(v);
            b.events[w].annotations.release = *release;
        }
        AsmInstr::Swap { acquire, release, src, dst, addr } => {
            let v = b.reg_value(*src);
            let (r, w) = b.rmw(loc_index(&addr.location), v);
            b.events[r].annotations.acquire = *acquire;
            b.events[r].zero_register = dst.is_zero();
            b.events[w].annotations.release = *release;
            b.set_reg(*dst, ValueSource::Read(r));
        }
        AsmInstr::Dmb(domain) => {
            let f = b.push(EventKind::Fence, None);
            b.events[f].fence = Some(FenceKind::Barrier(*domain));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::litmus::{parse_asm_litmus, parse_source_litmus};

    #[test]
    fn single_store() {
        let t = parse_source_litmus("C s\n{ x = 0; }\nP0 (atomic_int* x) { atomic_store_explicit(x, 1, memory_order_relaxed); }\nexists (x = 1)").unwrap();
        let g = build_events(&t);
        assert_eq!(g.len(), 2);
        assert!(g.events[0].is_init());
        assert!(g.events[1].is_write());
        assert_eq!(g.events[1].write_value, Some(ValueSource::Const(1)));
        assert!(g.po().contains(0, 1));
        assert!(!g.thread_po().contains(0, 1));
    }

    #[test]
    fn acquire_fence() {
        let t = parse_source_litmus(
            "C f\n{ x = 0; }\nP0 (atomic_int* x) { atomic_thread_fence(memory_order_acquire); }\nexists (x = 0)",
        )
        .unwrap();
        let g = build_events(&t);
        let f = &g.events[1];
        assert!(f.is_fence());
        assert!(f.annotations.acquire && !f.annotations.release);
        assert_eq!(f.fence, Some(FenceKind::Order(MemoryOrder::Acquire)));
    }

    #[test]
    fn swap_dataflow() {
        let t = parse_asm_litmus(
            "AArch64 d\n{ 0:X1 = x; 0:X3 = y; }\n P0 ;\n MOV W2, #3 ;\n SWPA W2, W4, [X1] ;\n MOV W5, W4 ;\n STR W5, [X3] ;\nexists (0:W4 = 0)",
        )
        .unwrap();
        let g = build_events(&t);
        // init x, init y, R x, W x, W y
        assert_eq!(g.len(), 5);
        assert_eq!(g.events[2].rmw_partner, Some(3));
        assert!(g.events[2].annotations.acquire);
        assert_eq!(g.events[3].write_value, Some(ValueSource::Const(3)));
        assert_eq!(g.events[4].write_value, Some(ValueSource::Read(2)));
        assert!(g.data().contains(2, 4));
        assert_eq!(g.registers[0]["W4"], ValueSource::Read(2));
        assert!(g.rmw().contains(2, 3));
    }
}

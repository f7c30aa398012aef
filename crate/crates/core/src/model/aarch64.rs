//! An AArch64 consistency predicate in the ordered-before style, for the
//! supported fragment: plain and acquire/release loads and stores, the `SWP`
//! family, and `DMB` barriers.
//!
//! A swap whose destination is the zero register is not regarded as doing a
//! read for ordering purposes: its read event leaves the effective read set
//! used by `DMB LD` and the acquire set, while still taking part in
//! reads-from, from-reads and atomicity.

use super::require_dialect;
use crate::exec::{EventGraph, ExecError, Execution, FenceKind};
use crate::litmus::{BarrierDomain, Dialect};
use crate::relation::{EventSet, Relation};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct AArch64Options {
    /// Treat zero-register swaps as ordinary reads, as older tooling did.
    pub legacy_zero_register: bool,
}

/// Event classes the barrier-ordering rules range over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EffectiveSets {
    /// Reads that count as reads for ordering (`R*`).
    pub reads: EventSet,
    /// Acquire reads among `reads` (`A`).
    pub acquires: EventSet,
    /// Release writes (`L`).
    pub releases: EventSet,
}

impl EffectiveSets {
    pub fn of(g: &EventGraph, opts: AArch64Options) -> Self {
        let counts_as_read = |zero: bool| opts.legacy_zero_register || !zero;
        EffectiveSets {
            reads: g.set(|e| e.is_read() && counts_as_read(e.zero_register)),
            acquires: g.set(|e| e.is_read() && e.annotations.acquire && counts_as_read(e.zero_register)),
            releases: g.set(|e| e.is_write() && e.annotations.release),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ObRelations {
    pub po: Relation,
    pub po_loc: Relation,
    pub rf: Relation,
    pub co: Relation,
    pub fr: Relation,
    pub rmw: Relation,
    pub rfe: Relation,
    pub coe: Relation,
    pub fre: Relation,
    /// `rfe ∪ coe ∪ fre`
    pub obs: Relation,
    /// Barrier and acquire/release ordering.
    pub bob: Relation,
    /// Data dependencies from a read to a write of the value it returned.
    pub dob: Relation,
    /// `(obs ∪ dob ∪ bob)+`
    pub ob: Relation,
    pub sets: EffectiveSets,
}

pub fn derive_ob(e: &Execution<'_>, opts: AArch64Options) -> Result<ObRelations, ExecError> {
    require_dialect(e, "aarch64", Dialect::Asm)?;
    let g = e.graph;
    let sets = EffectiveSets::of(g, opts);
    let memory = g.memory_events();
    let writes = g.writes();
    let barrier = |d: BarrierDomain| g.set(|ev| ev.fence == Some(FenceKind::Barrier(d)));

    let po = g.thread_po();
    let po_loc = po.intersection(&g.same_location());
    let rf = e.rf_relation();
    let co = e.co_relation();
    let fr = e.fr_relation();
    let external = g.different_threads();
    let rfe = rf.intersection(&external);
    let coe = co.intersection(&external);
    let fre = fr.intersection(&external);
    let obs = rfe.union(&coe).union(&fre);

    let through =
        |from: EventSet, fence: EventSet, to: EventSet| po.restrict(from, fence).compose(&po.restrict(fence, to));
    let bob = through(memory, barrier(BarrierDomain::Sy), memory)
        .union(&through(sets.reads, barrier(BarrierDomain::Ld), memory))
        .union(&through(writes, barrier(BarrierDomain::St), writes))
        .union(&po.restrict(sets.acquires, memory))
        .union(&po.restrict(memory, sets.releases))
        .union(&po.restrict(sets.releases, sets.acquires));
    let dob = g.data();
    let ob = obs.union(&dob).union(&bob).transitive_closure();

    Ok(ObRelations { po, po_loc, rf, co, fr, rmw: g.rmw(), rfe, coe, fre, obs, bob, dob, ob, sets })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AArch64Axioms {
    pub internal: bool,
    pub atomicity: bool,
    pub external: bool,
}

impl AArch64Axioms {
    pub fn all(self) -> bool {
        self.internal && self.atomicity && self.external
    }
}

pub fn check_axioms(r: &ObRelations) -> AArch64Axioms {
    AArch64Axioms {
        internal: r.po_loc.union(&r.rf).union(&r.co).union(&r.fr).is_acyclic(),
        atomicity: r.rmw.intersection(&r.fre.compose(&r.coe)).is_empty(),
        external: r.ob.is_irreflexive(),
    }
}

pub fn aarch64_consistent(e: &Execution<'_>, opts: AArch64Options) -> Result<bool, ExecError> {
    Ok(check_axioms(&derive_ob(e, opts)?).all())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::{build_events, enumerate_candidates, DEFAULT_CANDIDATE_CAP};
    use crate::golden;
    use crate::litmus::parse_asm_litmus;

    // Event ids: init x, init y, P0 {W x, W y}, P1 {R y, W y, DMB, R x}.
    const W_X: usize = 2;
    const W_Y: usize = 3;
    const SWP_R: usize = 4;
    const DMB: usize = 6;
    const R_X: usize = 7;

    fn ob_of(text: &str, opts: AArch64Options) -> Vec<ObRelations> {
        let g = build_events(&parse_asm_litmus(text).unwrap());
        enumerate_candidates(&g, DEFAULT_CANDIDATE_CAP).unwrap().map(|e| derive_ob(&e, opts).unwrap()).collect()
    }

    #[test]
    fn zero_register_swap_drops_barrier_edge() {
        let modern = AArch64Options::default();
        let legacy = AArch64Options { legacy_zero_register: true };
        for r in ob_of(golden::MP_XCHG_DISCARD_COMPILED_W15, modern) {
            assert!(r.bob.contains(SWP_R, R_X));
            assert!(r.po.contains(SWP_R, DMB) && r.po.contains(DMB, R_X));
        }
        for r in ob_of(golden::MP_XCHG_DISCARD_COMPILED_WZR, modern) {
            assert!(!r.bob.contains(SWP_R, R_X));
            assert!(!r.sets.reads.contains(SWP_R));
        }
        for r in ob_of(golden::MP_XCHG_DISCARD_COMPILED_WZR, legacy) {
            assert!(r.bob.contains(SWP_R, R_X));
        }
    }

    #[test]
    fn store_release_orders_prior_store() {
        for r in ob_of(golden::MP_XCHG_DISCARD_COMPILED_WZR, AArch64Options::default()) {
            assert!(r.bob.contains(W_X, W_Y));
            assert!(!r.bob.contains(W_Y, W_X));
        }
    }

    #[test]
    fn buggy_candidate_is_consistent() {
        let g = build_events(&parse_asm_litmus(golden::MP_XCHG_DISCARD_COMPILED_WZR).unwrap());
        let weak: Vec<_> = enumerate_candidates(&g, DEFAULT_CANDIDATE_CAP)
            .unwrap()
            .filter(|e| e.rf[SWP_R] == Some(W_Y) && e.rf[R_X] == Some(0))
            .collect();
        assert_eq!(weak.len(), 1);
        assert!(aarch64_consistent(&weak[0], AArch64Options::default()).unwrap());
        let legacy = AArch64Options { legacy_zero_register: true };
        let r = derive_ob(&weak[0], legacy).unwrap();
        assert!(!check_axioms(&r).external);
    }
}

//! A C/C++11 consistency predicate in the RC11 style, restricted to
//! atomics-only straight-line programs.
//!
//! Release sequences are the head write followed by read-modify-writes that
//! read from it (C++20). The seq-cst axiom asks for acyclicity of
//! `hb ∪ mo ∪ fr` restricted to seq-cst events rather than the full
//! partial-SC construction.

use super::require_dialect;
use crate::exec::{ExecError, Execution};
use crate::litmus::Dialect;
use crate::relation::{EventSet, Relation};

/// Derived relations of one source-dialect execution.
#[derive(Clone, Debug)]
pub struct RelationSet {
    pub sb: Relation,
    pub rf: Relation,
    pub mo: Relation,
    pub fr: Relation,
    pub rmw: Relation,
    pub sw: Relation,
    pub hb: Relation,
    pub eco: Relation,
    pub seq_cst: EventSet,
}

pub fn derive_hb(e: &Execution<'_>) -> Result<RelationSet, ExecError> {
    require_dialect(e, "c11", Dialect::Source)?;
    let g = e.graph;
    let n = g.len();
    let reads = g.reads();
    let writes = g.writes();
    let fences = g.fences();
    let releases = g.set(|ev| ev.annotations.release);
    let acquires = g.set(|ev| ev.annotations.acquire);

    let sb = g.po();
    let rf = e.rf_relation();
    let mo = e.co_relation();
    let fr = e.fr_relation();
    let rmw = g.rmw();

    // rs = [W]; (rf; rmw)*
    let rs = Relation::identity_on(n, writes).compose(&rf.compose(&rmw).reflexive_transitive_closure());
    // [REL]; ([F]; sb)? ending at the head write
    let before = Relation::identity_on(n, releases.intersection(writes))
        .union(&sb.restrict(releases.intersection(fences), writes));
    // [R]; (sb; [F])? ending at the acquire event
    let after = Relation::identity_on(n, reads.intersection(acquires))
        .union(&sb.restrict(reads, fences.intersection(acquires)));
    let sw = before.compose(&rs).compose(&rf).compose(&after);
    let hb = sb.union(&sw).transitive_closure();
    let eco = rf.union(&mo).union(&fr).transitive_closure();
    let seq_cst = g.set(|ev| ev.annotations.seq_cst);
    Ok(RelationSet { sb, rf, mo, fr, rmw, sw, hb, eco, seq_cst })
}

/// Which axioms an execution satisfies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct C11Axioms {
    pub coherence: bool,
    pub atomicity: bool,
    pub no_thin_air: bool,
    pub seq_cst: bool,
}

impl C11Axioms {
    pub fn all(self) -> bool {
        self.coherence && self.atomicity && self.no_thin_air && self.seq_cst
    }
}

pub fn check_axioms(r: &RelationSet) -> C11Axioms {
    let coherence = r.hb.compose(&r.eco.optional()).is_irreflexive();
    let atomicity = r.rmw.intersection(&r.fr.compose(&r.mo)).is_empty();
    let no_thin_air = r.sb.union(&r.rf).is_acyclic();
    let seq_cst = r.hb.union(&r.mo).union(&r.fr).restrict(r.seq_cst, r.seq_cst).is_acyclic();
    C11Axioms { coherence, atomicity, no_thin_air, seq_cst }
}

pub fn c11_consistent(e: &Execution<'_>) -> Result<bool, ExecError> {
    Ok(check_axioms(&derive_hb(e)?).all())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::{build_events, enumerate_candidates, DEFAULT_CANDIDATE_CAP};
    use crate::golden;
    use crate::litmus::parse_source_litmus;

    // Canonical event ids: init x, init y, P0 {W x, W y}, P1 {R y, W y, F, R x}.
    const W_Y: usize = 3;
    const XCHG_R: usize = 4;
    const XCHG_W: usize = 5;
    const FENCE: usize = 6;
    const R_X: usize = 7;

    #[test]
    fn forbidden_candidate_breaks_coherence() {
        let t = parse_source_litmus(golden::MP_XCHG_DISCARD).unwrap();
        let g = build_events(&t);
        let mut seen = 0;
        for e in enumerate_candidates(&g, DEFAULT_CANDIDATE_CAP).unwrap() {
            let r = derive_hb(&e).unwrap();
            let ax = check_axioms(&r);
            assert!(ax.atomicity && ax.no_thin_air && ax.seq_cst);
            let weak = e.rf[XCHG_R] == Some(W_Y) && e.rf[R_X] == Some(0);
            if weak {
                seen += 1;
                assert!(r.sw.contains(W_Y, FENCE));
                assert!(r.hb.contains(0, R_X) && r.hb.contains(2, R_X));
                assert!(!ax.coherence);
                assert!(!c11_consistent(&e).unwrap());
            } else {
                assert!(ax.coherence, "{:?}", e.rf);
            }
        }
        assert_eq!(seen, 1);
    }

    #[test]
    fn relaxed_flag_store_has_no_sw() {
        let text = golden::MP_XCHG_DISCARD.replacen("y, 1, memory_order_release", "y, 1, memory_order_relaxed", 1);
        let t = parse_source_litmus(&text).unwrap();
        let g = build_events(&t);
        for e in enumerate_candidates(&g, DEFAULT_CANDIDATE_CAP).unwrap() {
            let r = derive_hb(&e).unwrap();
            assert!(r.sw.is_empty());
            assert!(r.rmw.contains(XCHG_R, XCHG_W));
            assert!(check_axioms(&r).all());
        }
    }
}

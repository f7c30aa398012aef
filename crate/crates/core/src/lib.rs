//! Model-based compiler testing for weak-memory litmus tests.
//!
//! A source test (C-style atomics) and its compiled counterpart (AArch64) are
//! each run through an axiomatic memory model by exhaustive enumeration of
//! candidate executions. The compiled test is correct when every outcome it
//! allows is also allowed for the source test; any extra outcome is a
//! compiler bug.

pub mod cli;
pub mod difftest;
pub mod exec;
pub mod litmus;
pub mod lowering;
pub mod model;
pub mod relation;
pub mod testgen;

/// Canonical message-passing tests shipped with the crate.
pub mod golden {
    /// Source test: the flag exchange's result is discarded.
    pub const MP_XCHG_DISCARD: &str = include_str!("../golden/mp-xchg-discard.litmus");
    /// Its compilation after the dead-register rewrite (`SWPL W2, WZR, [X1]`).
    pub const MP_XCHG_DISCARD_COMPILED_WZR: &str = include_str!("../golden/mp-xchg-discard-compiled-wzr.litmus");
    /// Its compilation with the scratch destination kept (`SWPL W2, W15, [X1]`).
    pub const MP_XCHG_DISCARD_COMPILED_W15: &str = include_str!("../golden/mp-xchg-discard-compiled-w15.litmus");
    /// Observable mapping between the source and both compiled tests.
    pub const MP_XCHG_DISCARD_MAPPING: &str = include_str!("../golden/mp-xchg-discard.mapping.json");
}

//! Message-passing test family.
//!
//! P0 stores `x = 1` then flags `y = 1`. P1 accesses the flag, optionally
//! fences, then loads `x` into `r0`. Variants differ in what P1 does with the
//! flag:
//!
//! | variant  | P1 flag access              | exists                          |
//! |----------|-----------------------------|---------------------------------|
//! | historic | `r1 = exchange(y, 2)`/`load`| `r1 = 1 /\ r0 = 0 [/\ y = 2]`   |
//! | discard  | `exchange(y, 2)`            | `r0 = 0 /\ y = 2`               |
//! | observe  | `r1 = exchange(y, 2)`       | `r0 = 0 /\ y = 2 /\ r1 = 1`     |

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::litmus::{FinalCondition, LitmusTest, MemoryOrder, Observable, SourceStmt, SourceThread, Threads, Value};

/// Value P0 writes to the flag.
pub const FLAG_VALUE: Value = 1;
/// Value P1's exchange writes to the flag.
pub const EXCHANGE_VALUE: Value = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Historic,
    Discard,
    Observe,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Historic, Variant::Discard, Variant::Observe];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Historic => "historic",
            Variant::Discard => "discard",
            Variant::Observe => "observe",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How P1 accesses the flag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlagMechanism {
    /// `atomic_load_explicit`; historic variant only.
    Load,
    Exchange,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VariantTag {
    pub variant: Variant,
    pub mechanism: FlagMechanism,
    pub data_store: MemoryOrder,
    pub flag_store: MemoryOrder,
    pub flag_op: MemoryOrder,
    pub fence: Option<MemoryOrder>,
    pub data_load: MemoryOrder,
}

impl VariantTag {
    /// File stem, e.g. `mp-discard-rlx-rel-xchgrel-fenceacq-rlx`.
    pub fn stem(&self) -> String {
        let op = match self.mechanism {
            FlagMechanism::Load => "ld",
            FlagMechanism::Exchange => "xchg",
        };
        let fence = self.fence.map_or_else(|| "nofence".to_string(), |o| format!("fence{}", o.short_name()));
        format!(
            "mp-{}-{}-{}-{op}{}-{fence}-{}",
            self.variant,
            self.data_store.short_name(),
            self.flag_store.short_name(),
            self.flag_op.short_name(),
            self.data_load.short_name()
        )
    }

    pub fn build(&self) -> LitmusTest {
        let st = |loc: &str, value, order| SourceStmt::Store { loc: loc.into(), value, order };
        let p0 = vec![st("x", 1, self.data_store), st("y", FLAG_VALUE, self.flag_store)];

        let keeps_flag = self.variant != Variant::Discard;
        let flag_dst = keeps_flag.then(|| "r1".to_string());
        let mut p1 = vec![match self.mechanism {
            FlagMechanism::Exchange => {
                SourceStmt::Exchange { dst: flag_dst, loc: "y".into(), value: EXCHANGE_VALUE, order: self.flag_op }
            }
            FlagMechanism::Load => SourceStmt::Load { dst: "r1".into(), loc: "y".into(), order: self.flag_op },
        }];
        if let Some(order) = self.fence {
            p1.push(SourceStmt::Fence { order });
        }
        p1.push(SourceStmt::Load { dst: "r0".into(), loc: "x".into(), order: self.data_load });

        let r0 = (Observable::register(1, "r0"), 0);
        let r1 = (Observable::register(1, "r1"), FLAG_VALUE);
        let y = (Observable::memory("y"), EXCHANGE_VALUE);
        let atoms = match (self.variant, self.mechanism) {
            (Variant::Historic, FlagMechanism::Load) => vec![r1, r0],
            (Variant::Historic, FlagMechanism::Exchange) => vec![r1, r0, y],
            (Variant::Discard, _) => vec![r0, y],
            (Variant::Observe, _) => vec![r0, y, r1],
        };

        LitmusTest {
            name: self.stem(),
            locations: vec![("x".into(), 0), ("y".into(), 0)],
            threads: Threads::Source(vec![
                SourceThread { id: 0, statements: p0 },
                SourceThread { id: 1, statements: p1 },
            ]),
            final_condition: FinalCondition::all(atoms),
        }
    }
}

/// Deterministic subset selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sampling {
    pub seed: u64,
    pub limit: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenParams {
    pub variants: Vec<Variant>,
    pub mechanism: FlagMechanism,
    pub data_store: Vec<MemoryOrder>,
    pub flag_store: Vec<MemoryOrder>,
    pub flag_op: Vec<MemoryOrder>,
    /// Ignored by the historic variant, which never fences.
    pub fence: Vec<Option<MemoryOrder>>,
    pub data_load: Vec<MemoryOrder>,
    pub sampling: Option<Sampling>,
}

impl Default for GenParams {
    /// Every variant over every legal order.
    fn default() -> Self {
        let stores = legal(MemoryOrder::valid_for_store);
        GenParams {
            variants: Variant::ALL.to_vec(),
            mechanism: FlagMechanism::Exchange,
            data_store: stores.clone(),
            flag_store: stores,
            flag_op: MemoryOrder::ALL.to_vec(),
            fence: std::iter::once(None).chain(legal(MemoryOrder::valid_for_fence).into_iter().map(Some)).collect(),
            data_load: legal(MemoryOrder::valid_for_load),
            sampling: None,
        }
    }
}

fn legal(pred: fn(MemoryOrder) -> bool) -> Vec<MemoryOrder> {
    MemoryOrder::ALL.into_iter().filter(|&o| pred(o)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("no variants requested")]
    EmptyVariantSet,
    #[error("no {0} orders requested")]
    EmptyChoice(&'static str),
    #[error("{0} variant needs the exchange flag mechanism")]
    NeedsExchange(Variant),
    #[error("{order} is not a valid {what} order")]
    InvalidOrder { order: &'static str, what: &'static str },
    #[error("duplicate {0} choice")]
    Duplicate(&'static str),
}

impl GenParams {
    pub fn validate(&self) -> Result<(), GenError> {
        if self.variants.is_empty() {
            return Err(GenError::EmptyVariantSet);
        }
        if let Some(&v) = self.variants.iter().find(|&&v| v != Variant::Historic) {
            if self.mechanism != FlagMechanism::Exchange {
                return Err(GenError::NeedsExchange(v));
            }
        }
        let op_valid = match self.mechanism {
            FlagMechanism::Exchange => |_| true,
            FlagMechanism::Load => MemoryOrder::valid_for_load,
        };
        check(&self.data_store, "data store", MemoryOrder::valid_for_store)?;
        check(&self.flag_store, "flag store", MemoryOrder::valid_for_store)?;
        check(&self.flag_op, "flag access", op_valid)?;
        check(&self.data_load, "data load", MemoryOrder::valid_for_load)?;
        if self.fence.is_empty() {
            return Err(GenError::EmptyChoice("fence"));
        }
        if let Some(o) = self.fence.iter().flatten().find(|o| !o.valid_for_fence()) {
            return Err(GenError::InvalidOrder { order: o.c_name(), what: "fence" });
        }
        if has_duplicates(&self.fence) {
            return Err(GenError::Duplicate("fence"));
        }
        if has_duplicates(&self.variants) {
            return Err(GenError::Duplicate("variant"));
        }
        Ok(())
    }

    /// Number of tests before sampling.
    pub fn combinations(&self) -> usize {
        let base = self.data_store.len() * self.flag_store.len() * self.flag_op.len() * self.data_load.len();
        self.variants.iter().map(|&v| if v == Variant::Historic { base } else { base * self.fence.len() }).sum()
    }
}

fn check(orders: &[MemoryOrder], what: &'static str, valid: fn(MemoryOrder) -> bool) -> Result<(), GenError> {
    if orders.is_empty() {
        return Err(GenError::EmptyChoice(what));
    }
    if let Some(o) = orders.iter().find(|&&o| !valid(o)) {
        return Err(GenError::InvalidOrder { order: o.c_name(), what });
    }
    if has_duplicates(orders) {
        return Err(GenError::Duplicate(what));
    }
    Ok(())
}

fn has_duplicates<T: PartialEq>(xs: &[T]) -> bool {
    xs.iter().enumerate().any(|(i, x)| xs[..i].contains(x))
}

/// All tags `p` describes, in generation order.
pub fn family_tags(p: &GenParams) -> Result<Vec<VariantTag>, GenError> {
    p.validate()?;
    let mut tags = Vec::with_capacity(p.combinations());
    for &variant in &p.variants {
        let fences: &[Option<MemoryOrder>] = if variant == Variant::Historic { &[None] } else { &p.fence };
        for &data_store in &p.data_store {
            for &flag_store in &p.flag_store {
                for &flag_op in &p.flag_op {
                    for &fence in fences {
                        for &data_load in &p.data_load {
                            tags.push(VariantTag {
                                variant,
                                mechanism: p.mechanism,
                                data_store,
                                flag_store,
                                flag_op,
                                fence,
                                data_load,
                            });
                        }
                    }
                }
            }
        }
    }
    if let Some(s) = p.sampling {
        if s.limit < tags.len() {
            let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
            let mut keep = rand::seq::index::sample(&mut rng, tags.len(), s.limit).into_vec();
            keep.sort_unstable();
            tags = keep.into_iter().map(|i| tags[i]).collect();
        }
    }
    Ok(tags)
}

pub fn generate_mp_family(p: &GenParams) -> Result<Vec<(LitmusTest, VariantTag)>, GenError> {
    Ok(family_tags(p)?.into_iter().map(|t| (t.build(), t)).collect())
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::golden;
    use crate::litmus::{parse_source_litmus, render_litmus};

    fn canonical_tag(variant: Variant) -> VariantTag {
        VariantTag {
            variant,
            mechanism: FlagMechanism::Exchange,
            data_store: MemoryOrder::Relaxed,
            flag_store: MemoryOrder::Release,
            flag_op: MemoryOrder::Release,
            fence: Some(MemoryOrder::Acquire),
            data_load: MemoryOrder::Relaxed,
        }
    }

    #[test]
    fn canonical_matches_golden() {
        let mut t = canonical_tag(Variant::Discard).build();
        let g = parse_source_litmus(golden::MP_XCHG_DISCARD).unwrap();
        assert_eq!(t.name, "mp-discard-rlx-rel-xchgrel-fenceacq-rlx");
        t.name = g.name.clone();
        assert_eq!(t, g);
        assert_eq!(render_litmus(&t), golden::MP_XCHG_DISCARD);
    }

    #[test]
    fn observe_differs_only_in_r1() {
        let d = canonical_tag(Variant::Discard).build();
        let o = canonical_tag(Variant::Observe).build();
        let Threads::Source(dt) = &d.threads else { unreachable!() };
        let Threads::Source(ot) = &o.threads else { unreachable!() };
        assert_eq!(dt[0], ot[0]);
        assert_eq!(dt[1].statements[1..], ot[1].statements[1..]);
        assert_eq!(ot[1].statements[0].destination(), Some("r1"));
        assert_eq!(dt[1].statements[0].destination(), None);
        assert_eq!(render_litmus(&o).lines().last(), Some("exists (P1:r0 = 0 /\\ y = 2 /\\ P1:r1 = 1)"));
    }

    #[test]
    fn historic_plain_load() {
        let p = GenParams {
            variants: vec![Variant::Historic],
            mechanism: FlagMechanism::Load,
            flag_op: vec![MemoryOrder::Acquire],
            ..GenParams::default()
        };
        let tests = generate_mp_family(&p).unwrap();
        assert_eq!(tests.len(), 27);
        assert!(tests[0].0.final_condition.to_string().contains("P1:r1 = 1"));
        assert_eq!(tests[0].1.stem(), "mp-historic-rlx-rlx-ldacq-nofence-rlx");
    }

    #[test]
    fn counts_and_uniqueness() {
        let p = GenParams::default();
        let tests = generate_mp_family(&p).unwrap();
        assert_eq!(tests.len(), p.combinations());
        assert_eq!(tests.len(), 3 * 3 * 5 * 3 * (1 + 5 + 5));
        let stems: BTreeSet<_> = tests.iter().map(|(_, t)| t.stem()).collect();
        assert_eq!(stems.len(), tests.len());
        for (t, _) in &tests {
            assert_eq!(&parse_source_litmus(&render_litmus(t)).unwrap(), t);
        }
    }

    #[test]
    fn deterministic_sampling() {
        let p = GenParams { sampling: Some(Sampling { seed: 7, limit: 20 }), ..GenParams::default() };
        let a = family_tags(&p).unwrap();
        assert_eq!(a.len(), 20);
        assert_eq!(a, family_tags(&p).unwrap());
        let other = family_tags(&GenParams { sampling: Some(Sampling { seed: 8, limit: 20 }), ..p }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn rejects_bad_params() {
        let empty = GenParams { variants: vec![], ..GenParams::default() };
        assert_eq!(family_tags(&empty), Err(GenError::EmptyVariantSet));
        let plain = GenParams { mechanism: FlagMechanism::Load, ..GenParams::default() };
        assert_eq!(family_tags(&plain), Err(GenError::NeedsExchange(Variant::Discard)));
        let bad = GenParams { data_load: vec![MemoryOrder::Release], ..GenParams::default() };
        assert!(matches!(family_tags(&bad), Err(GenError::InvalidOrder { .. })));
    }
}

//! Axiomatic consistency predicates over candidate executions.

pub mod aarch64;
pub mod c11;

use std::fmt;
use std::str::FromStr;

use crate::exec::{ExecError, Execution};
use crate::litmus::Dialect;

pub use aarch64::{aarch64_consistent, derive_ob, AArch64Options, EffectiveSets, ObRelations};
pub use c11::{c11_consistent, derive_hb, RelationSet};

/// A memory model selectable by id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Model {
    C11,
    AArch64(AArch64Options),
}

impl Model {
    pub const AARCH64: Model = Model::AArch64(AArch64Options { legacy_zero_register: false });

    pub fn id(self) -> &'static str {
        match self {
            Model::C11 => "c11",
            Model::AArch64(_) => "aarch64",
        }
    }

    /// The test dialect this model interprets.
    pub fn dialect(self) -> Dialect {
        match self {
            Model::C11 => Dialect::Source,
            Model::AArch64(_) => Dialect::Asm,
        }
    }

    /// Model appropriate for a dialect.
    pub fn for_dialect(dialect: Dialect, opts: AArch64Options) -> Model {
        match dialect {
            Dialect::Source => Model::C11,
            Dialect::Asm => Model::AArch64(opts),
        }
    }

    pub fn consistent(self, e: &Execution<'_>) -> Result<bool, ExecError> {
        match self {
            Model::C11 => c11_consistent(e),
            Model::AArch64(opts) => aarch64_consistent(e, opts),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown model `{0}` (expected `c11` or `aarch64`)")]
pub struct UnknownModel(pub String);

impl FromStr for Model {
    type Err = UnknownModel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "c11" => Ok(Model::C11),
            "aarch64" => Ok(Model::AARCH64),
            _ => Err(UnknownModel(s.to_string())),
        }
    }
}

pub(crate) fn require_dialect(e: &Execution<'_>, model: &'static str, dialect: Dialect) -> Result<(), ExecError> {
    if e.graph.dialect == dialect {
        Ok(())
    } else {
        Err(ExecError::DialectMismatch { model, dialect: e.graph.dialect })
    }
}

//! Litmus tests in two dialects: C-style atomics (`C`) and a fragment of
//! AArch64 assembly (`AArch64`).
//!
//! Both dialects share the initial-state block and the `exists` clause. A
//! parsed [`LitmusTest`] holds threads of exactly one dialect.

mod asm;
mod condition;
mod lexer;
pub(crate) mod render;
mod source;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

pub use asm::parse_asm_litmus;
pub use condition::{Atom, FinalCondition};
pub use render::render_litmus;
pub use source::parse_source_litmus;

/// Values stored in memory and registers.
/// Parses a test in either dialect, chosen by the `C`/`AArch64` header.
pub fn parse_litmus(text: &str) -> Result<LitmusTest, ParseError> {
    let (arch, ..) = lexer::split_header(text)?;
    match arch {
        "C" => parse_source_litmus(text),
        "AArch64" => parse_asm_litmus(text),
        other => {
            Err(ParseError { line: 1, column: 1, kind: ParseErrorKind::Unsupported(format!("architecture `{other}`")) })
        }
    }
}

pub type Value = u32;

/// Largest value a test may mention.
pub const MAX_VALUE: Value = 7;
pub const MAX_THREADS: usize = 4;
pub const MAX_LOCATIONS: usize = 4;
/// Per-thread statement bound for source tests and memory-instruction bound
/// for assembly tests.
pub const MAX_STATEMENTS: usize = 8;
/// Per-thread instruction bound for assembly tests (memory instructions plus
/// the `MOV`s materializing their operands).
pub const MAX_ASM_INSTRUCTIONS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dialect {
    Source,
    Asm,
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dialect::Source => "C",
            Dialect::Asm => "AArch64",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryOrder {
    Relaxed,
    Acquire,
    Release,
    AcqRel,
    SeqCst,
}

impl MemoryOrder {
    pub const ALL: [MemoryOrder; 5] =
        [MemoryOrder::Relaxed, MemoryOrder::Acquire, MemoryOrder::Release, MemoryOrder::AcqRel, MemoryOrder::SeqCst];

    pub fn is_acquire(self) -> bool {
        matches!(self, MemoryOrder::Acquire | MemoryOrder::AcqRel | MemoryOrder::SeqCst)
    }

    pub fn is_release(self) -> bool {
        matches!(self, MemoryOrder::Release | MemoryOrder::AcqRel | MemoryOrder::SeqCst)
    }

    pub fn is_seq_cst(self) -> bool {
        self == MemoryOrder::SeqCst
    }

    pub fn valid_for_load(self) -> bool {
        !matches!(self, MemoryOrder::Release | MemoryOrder::AcqRel)
    }

    pub fn valid_for_store(self) -> bool {
        !matches!(self, MemoryOrder::Acquire | MemoryOrder::AcqRel)
    }

    pub fn valid_for_fence(self) -> bool {
        self != MemoryOrder::Relaxed
    }

    /// The C spelling, e.g. `memory_order_acq_rel`.
    pub fn c_name(self) -> &'static str {
        match self {
            MemoryOrder::Relaxed => "memory_order_relaxed",
            MemoryOrder::Acquire => "memory_order_acquire",
            MemoryOrder::Release => "memory_order_release",
            MemoryOrder::AcqRel => "memory_order_acq_rel",
            MemoryOrder::SeqCst => "memory_order_seq_cst",
        }
    }

    /// Short tag used in generated file names.
    pub fn short_name(self) -> &'static str {
        match self {
            MemoryOrder::Relaxed => "rlx",
            MemoryOrder::Acquire => "acq",
            MemoryOrder::Release => "rel",
            MemoryOrder::AcqRel => "acqrel",
            MemoryOrder::SeqCst => "sc",
        }
    }

    pub fn from_c_name(name: &str) -> Option<MemoryOrder> {
        MemoryOrder::ALL.into_iter().find(|o| o.c_name() == name)
    }
}

/// A statement of the C-style dialect. All accesses are atomic.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SourceStmt {
    Load {
        dst: String,
        loc: String,
        order: MemoryOrder,
    },
    Store {
        loc: String,
        value: Value,
        order: MemoryOrder,
    },
    /// `dst == None` models an exchange whose result is discarded.
    Exchange {
        dst: Option<String>,
        loc: String,
        value: Value,
        order: MemoryOrder,
    },
    Fence {
        order: MemoryOrder,
    },
}

impl SourceStmt {
    pub fn location(&self) -> Option<&str> {
        match self {
            SourceStmt::Load { loc, .. } | SourceStmt::Store { loc, .. } | SourceStmt::Exchange { loc, .. } => {
                Some(loc)
            }
            SourceStmt::Fence { .. } => None,
        }
    }

    pub fn destination(&self) -> Option<&str> {
        match self {
            SourceStmt::Load { dst, .. } => Some(dst),
            SourceStmt::Exchange { dst, .. } => dst.as_deref(),
            _ => None,
        }
    }

    pub fn order(&self) -> MemoryOrder {
        match self {
            SourceStmt::Load { order, .. }
            | SourceStmt::Store { order, .. }
            | SourceStmt::Exchange { order, .. }
            | SourceStmt::Fence { order } => *order,
        }
    }

    pub fn set_order(&mut self, new: MemoryOrder) {
        match self {
            SourceStmt::Load { order, .. }
            | SourceStmt::Store { order, .. }
            | SourceStmt::Exchange { order, .. }
            | SourceStmt::Fence { order } => *order = new,
        }
    }
}

/// An AArch64 general-purpose register as written: `W3`, `X1`, `WZR`, `XZR`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Reg {
    /// `None` is the zero register.
    number: Option<u8>,
    wide: bool,
}

impl Reg {
    pub const WZR: Reg = Reg { number: None, wide: false };
    pub const XZR: Reg = Reg { number: None, wide: true };

    pub fn w(number: u8) -> Reg {
        assert!(number <= 30);
        Reg { number: Some(number), wide: false }
    }

    pub fn x(number: u8) -> Reg {
        assert!(number <= 30);
        Reg { number: Some(number), wide: true }
    }

    pub fn number(self) -> Option<u8> {
        self.number
    }

    pub fn is_zero(self) -> bool {
        self.number.is_none()
    }

    pub fn is_wide(self) -> bool {
        self.wide
    }

    /// True when both names denote the same architectural register.
    pub fn aliases(self, other: Reg) -> bool {
        self.number.is_some() && self.number == other.number
    }

    /// Width-independent key (`W`-form), used for register bookkeeping.
    pub fn key(self) -> String {
        match self.number {
            Some(n) => format!("W{n}"),
            None => "WZR".to_string(),
        }
    }
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = if self.wide { 'X' } else { 'W' };
        match self.number {
            Some(n) => write!(f, "{prefix}{n}"),
            None => write!(f, "{prefix}ZR"),
        }
    }
}

impl FromStr for Reg {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (wide, rest) = match s.as_bytes().first() {
            Some(b'W') => (false, &s[1..]),
            Some(b'X') => (true, &s[1..]),
            _ => return Err(()),
        };
        if rest == "ZR" {
            return Ok(Reg { number: None, wide });
        }
        if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) || (rest.len() > 1 && rest.starts_with('0')) {
            return Err(());
        }
        match rest.parse::<u8>() {
            Ok(n) if n <= 30 => Ok(Reg { number: Some(n), wide }),
            _ => Err(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BarrierDomain {
    /// `DMB ISHLD`: orders earlier loads against later accesses.
    Ld,
    /// `DMB ISHST`: orders earlier stores against later stores.
    St,
    /// `DMB ISH`: full barrier.
    Sy,
}

impl BarrierDomain {
    pub fn option_name(self) -> &'static str {
        match self {
            BarrierDomain::Ld => "ISHLD",
            BarrierDomain::St => "ISHST",
            BarrierDomain::Sy => "ISH",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mnemonic {
    Mov,
    Ldr,
    Ldar,
    Str,
    Stlr,
    Swp,
    Swpa,
    Swpl,
    Swpal,
    Dmb,
}

impl Mnemonic {
    pub fn as_str(self) -> &'static str {
        match self {
            Mnemonic::Mov => "MOV",
            Mnemonic::Ldr => "LDR",
            Mnemonic::Ldar => "LDAR",
            Mnemonic::Str => "STR",
            Mnemonic::Stlr => "STLR",
            Mnemonic::Swp => "SWP",
            Mnemonic::Swpa => "SWPA",
            Mnemonic::Swpl => "SWPL",
            Mnemonic::Swpal => "SWPAL",
            Mnemonic::Dmb => "DMB",
        }
    }
}

/// A `[Xn]` operand together with the location `Xn` is bound to.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Address {
    pub reg: Reg,
    pub location: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MovSource {
    Imm(Value),
    Reg(Reg),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AsmInstr {
    Mov {
        dst: Reg,
        src: MovSource,
    },
    /// `LDR` or, with `acquire`, `LDAR`.
    Load {
        acquire: bool,
        dst: Reg,
        addr: Address,
    },
    /// `STR` or, with `release`, `STLR`.
    Store {
        release: bool,
        src: Reg,
        addr: Address,
    },
    /// The `SWP` family: `SWP{A}{L} Ws, Wt, [Xn]` stores `Ws` and loads into `Wt`.
    Swap {
        acquire: bool,
        release: bool,
        src: Reg,
        dst: Reg,
        addr: Address,
    },
    Dmb(BarrierDomain),
}

impl AsmInstr {
    pub fn mnemonic(&self) -> Mnemonic {
        match self {
            AsmInstr::Mov { .. } => Mnemonic::Mov,
            AsmInstr::Load { acquire: false, .. } => Mnemonic::Ldr,
            AsmInstr::Load { acquire: true, .. } => Mnemonic::Ldar,
            AsmInstr::Store { release: false, .. } => Mnemonic::Str,
            AsmInstr::Store { release: true, .. } => Mnemonic::Stlr,
            AsmInstr::Swap { acquire, release, .. } => match (acquire, release) {
                (false, false) => Mnemonic::Swp,
                (true, false) => Mnemonic::Swpa,
                (false, true) => Mnemonic::Swpl,
                (true, true) => Mnemonic::Swpal,
            },
            AsmInstr::Dmb(_) => Mnemonic::Dmb,
        }
    }

    /// Registers whose values this instruction reads (excluding address bases).
    pub fn source_registers(&self) -> Vec<Reg> {
        match self {
            AsmInstr::Mov { src: MovSource::Reg(r), .. } => vec![*r],
            AsmInstr::Store { src, .. } | AsmInstr::Swap { src, .. } => vec![*src],
            _ => Vec::new(),
        }
    }

    /// The register this instruction writes, if any (the zero register counts).
    pub fn destination(&self) -> Option<Reg> {
        match self {
            AsmInstr::Mov { dst, .. } | AsmInstr::Load { dst, .. } | AsmInstr::Swap { dst, .. } => Some(*dst),
            _ => None,
        }
    }

    pub fn address(&self) -> Option<&Address> {
        match self {
            AsmInstr::Load { addr, .. } | AsmInstr::Store { addr, .. } | AsmInstr::Swap { addr, .. } => Some(addr),
            _ => None,
        }
    }

    pub fn is_memory_access(&self) -> bool {
        self.address().is_some() || matches!(self, AsmInstr::Dmb(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SourceThread {
    pub id: usize,
    pub statements: Vec<SourceStmt>,
}

impl SourceThread {
    pub fn registers(&self) -> BTreeSet<String> {
        self.statements.iter().filter_map(|s| s.destination().map(str::to_string)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AsmThread {
    pub id: usize,
    /// Address registers and the locations they hold, from the init block.
    pub bindings: Vec<(Reg, String)>,
    pub instructions: Vec<AsmInstr>,
}

impl AsmThread {
    /// Register keys (see [`Reg::key`]) written by this thread, zero register excluded.
    pub fn registers(&self) -> BTreeSet<String> {
        self.instructions.iter().filter_map(AsmInstr::destination).filter(|r| !r.is_zero()).map(Reg::key).collect()
    }

    pub fn binding(&self, reg: Reg) -> Option<&str> {
        self.bindings.iter().find(|(r, _)| r.aliases(reg)).map(|(_, l)| l.as_str())
    }
}

/// Thread bodies; a test is in exactly one dialect.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Threads {
    Source(Vec<SourceThread>),
    Asm(Vec<AsmThread>),
}

impl Threads {
    pub fn len(&self) -> usize {
        match self {
            Threads::Source(t) => t.len(),
            Threads::Asm(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LitmusTest {
    pub name: String,
    /// Declared locations with their initial values, in declaration order.
    pub locations: Vec<(String, Value)>,
    pub threads: Threads,
    pub final_condition: FinalCondition,
}

impl LitmusTest {
    pub fn dialect(&self) -> Dialect {
        match self.threads {
            Threads::Source(_) => Dialect::Source,
            Threads::Asm(_) => Dialect::Asm,
        }
    }

    pub fn location_index(&self, loc: &str) -> Option<usize> {
        self.locations.iter().position(|(l, _)| l == loc)
    }

    pub fn thread_count(&self) -> usize {
        self.threads.len()
    }

    /// Register names written by thread `tid` (keys for assembly registers).
    pub fn thread_registers(&self, tid: usize) -> BTreeSet<String> {
        match &self.threads {
            Threads::Source(ts) => ts.get(tid).map(SourceThread::registers).unwrap_or_default(),
            Threads::Asm(ts) => ts.get(tid).map(AsmThread::registers).unwrap_or_default(),
        }
    }

    /// Whether `obs` names something this test defines.
    pub fn defines(&self, obs: &Observable) -> bool {
        match obs {
            Observable::Memory(loc) => self.location_index(loc).is_some(),
            Observable::Register { thread, name } => {
                let key = match self.dialect() {
                    Dialect::Source => name.clone(),
                    Dialect::Asm => match name.parse::<Reg>() {
                        Ok(r) if !r.is_zero() => r.key(),
                        _ => return false,
                    },
                };
                self.thread_registers(*thread).contains(&key)
            }
        }
    }
}

/// Something whose final value a test can inspect.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Observable {
    Register { thread: usize, name: String },
    Memory(String),
}

impl Observable {
    pub fn register(thread: usize, name: impl Into<String>) -> Self {
        Observable::Register { thread, name: name.into() }
    }

    pub fn memory(loc: impl Into<String>) -> Self {
        Observable::Memory(loc.into())
    }

    fn is_asm_register_name(name: &str) -> bool {
        name.parse::<Reg>().is_ok()
    }
}

/// Source registers print as `P1:r0`, assembly registers as `1:W4`.
impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Memory(loc) => f.write_str(loc),
            Observable::Register { thread, name } if Observable::is_asm_register_name(name) => {
                write!(f, "{thread}:{name}")
            }
            Observable::Register { thread, name } => write!(f, "P{thread}:{name}"),
        }
    }
}

/// Observables order by their printed form.
impl Ord for Observable {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.to_string().cmp(&other.to_string()).then_with(|| match (self, other) {
            (Observable::Register { thread: a, name: x }, Observable::Register { thread: b, name: y }) => {
                a.cmp(b).then_with(|| x.cmp(y))
            }
            (Observable::Memory(a), Observable::Memory(b)) => a.cmp(b),
            (Observable::Register { .. }, Observable::Memory(_)) => std::cmp::Ordering::Less,
            (Observable::Memory(_), Observable::Register { .. }) => std::cmp::Ordering::Greater,
        })
    }
}

impl PartialOrd for Observable {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid observable `{0}`")]
pub struct InvalidObservable(pub String);

/// Accepts `P1:r0`, `1:r0`, `1:W4` and bare location names.
impl FromStr for Observable {
    type Err = InvalidObservable;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || InvalidObservable(s.to_string());
        let is_ident = |t: &str| {
            let mut chars = t.chars();
            matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
                && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        };
        match s.split_once(':') {
            Some((thread, name)) => {
                let digits = thread.strip_prefix('P').unwrap_or(thread);
                let thread = digits.parse::<usize>().map_err(|_| bad())?;
                if !is_ident(name) {
                    return Err(bad());
                }
                Ok(Observable::register(thread, name))
            }
            None if is_ident(s) => Ok(Observable::memory(s)),
            None => Err(bad()),
        }
    }
}

/// A parse failure with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("undeclared location `{0}`")]
    UndeclaredLocation(String),
    #[error("register `{0}` used before definition")]
    RegisterUsedBeforeDefinition(String),
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("unknown mnemonic `{0}`")]
    UnknownMnemonic(String),
    #[error("address register `{0}` is not bound to a location")]
    UnboundAddressRegister(String),
    #[error("MOV to the zero register")]
    MovToZeroRegister,
    #[error("invalid memory order `{order}` for {operation}")]
    InvalidOrder { order: String, operation: &'static str },
    #[error("bound exceeded: {0}")]
    BoundExceeded(String),
    #[error("final condition names undefined observable `{0}`")]
    UndefinedObservable(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reg_parsing() {
        assert_eq!("WZR".parse::<Reg>(), Ok(Reg::WZR));
        assert_eq!("X1".parse::<Reg>(), Ok(Reg::x(1)));
        assert_eq!("W15".parse::<Reg>(), Ok(Reg::w(15)));
        assert!("W31".parse::<Reg>().is_err());
        assert!("W01".parse::<Reg>().is_err());
        assert!("r0".parse::<Reg>().is_err());
        assert!(Reg::w(3).aliases(Reg::x(3)));
        assert!(!Reg::WZR.aliases(Reg::XZR));
    }

    #[test]
    fn observable_display_and_order() {
        let r = Observable::register(1, "r0");
        let w = Observable::register(1, "W4");
        let y = Observable::memory("y");
        assert_eq!(r.to_string(), "P1:r0");
        assert_eq!(w.to_string(), "1:W4");
        assert!(r < y);
        assert!(w < y);
        assert_eq!("P1:r0".parse::<Observable>(), Ok(r.clone()));
        assert_eq!("1:r0".parse::<Observable>(), Ok(r));
        assert_eq!("1:W4".parse::<Observable>(), Ok(w));
        assert_eq!("y".parse::<Observable>(), Ok(y));
        assert!("1:".parse::<Observable>().is_err());
    }

    #[test]
    fn memory_order_validity() {
        assert!(!MemoryOrder::Acquire.valid_for_store());
        assert!(!MemoryOrder::Release.valid_for_load());
        assert!(!MemoryOrder::Relaxed.valid_for_fence());
        assert_eq!(MemoryOrder::from_c_name("memory_order_acq_rel"), Some(MemoryOrder::AcqRel));
        assert_eq!(MemoryOrder::from_c_name("memory_order_consume"), None);
    }

    #[test]
    fn mnemonics() {
        let addr = Address { reg: Reg::x(1), location: "y".into() };
        let swpl = AsmInstr::Swap { acquire: false, release: true, src: Reg::w(2), dst: Reg::WZR, addr };
        assert_eq!(swpl.mnemonic(), Mnemonic::Swpl);
        assert_eq!(swpl.source_registers(), vec![Reg::w(2)]);
        assert_eq!(swpl.destination(), Some(Reg::WZR));
    }
}

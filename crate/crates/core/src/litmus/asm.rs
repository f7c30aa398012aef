//! Parser for the AArch64 dialect (herd-style column layout).

use super::lexer::{err, split_header, tokenize, Cursor, Tok};
use super::source::{check_condition, parse_init_entries};
use super::{
    Address, AsmInstr, AsmThread, BarrierDomain, LitmusTest, MovSource, ParseError, ParseErrorKind, Reg, Threads,
    Value, MAX_ASM_INSTRUCTIONS, MAX_LOCATIONS, MAX_STATEMENTS, MAX_THREADS,
};

const BRANCH_MNEMONICS: [&str; 8] = ["B", "BL", "BR", "CBZ", "CBNZ", "TBZ", "TBNZ", "RET"];

/// Parses an `AArch64` litmus test.
pub fn parse_asm_litmus(text: &str) -> Result<LitmusTest, ParseError> {
    let (arch, name, rest, first_line) = split_header(text)?;
    if arch != "AArch64" {
        return Err(err(
            first_line - 1,
            1,
            ParseErrorKind::Syntax(format!("expected `AArch64` header, found `{arch}`")),
        ));
    }
    let mut cur = Cursor::new(tokenize(rest, first_line)?);

    let mut locations: Vec<(String, Value)> = Vec::new();
    let mut explicit: Vec<String> = Vec::new();
    let mut bindings: Vec<(usize, Reg, String, (usize, usize))> = Vec::new();
    parse_init_entries(&mut cur, |cur| {
        let pos = cur.position();
        match cur.peek() {
            Some(Tok::Num(_)) => {
                let tid = match cur.bump().map(|t| t.tok) {
                    Some(Tok::Num(n)) => n as usize,
                    _ => unreachable!(),
                };
                cur.expect_sym(":")?;
                let reg_pos = cur.position();
                let reg_name = cur.expect_ident()?;
                let reg = reg_name.parse::<Reg>().map_err(|_| {
                    err(reg_pos.0, reg_pos.1, ParseErrorKind::Syntax(format!("bad register `{reg_name}`")))
                })?;
                cur.expect_sym("=")?;
                if matches!(cur.peek(), Some(Tok::Num(_))) {
                    return Err(cur.error(ParseErrorKind::Unsupported("initial register values".into())));
                }
                let loc = cur.expect_ident()?;
                if reg.is_zero() {
                    return Err(err(
                        reg_pos.0,
                        reg_pos.1,
                        ParseErrorKind::Syntax("cannot bind the zero register".into()),
                    ));
                }
                if bindings.iter().any(|(t, r, _, _)| *t == tid && r.aliases(reg)) {
                    return Err(err(
                        reg_pos.0,
                        reg_pos.1,
                        ParseErrorKind::Syntax(format!("`{tid}:{reg}` bound twice")),
                    ));
                }
                if !locations.iter().any(|(l, _)| *l == loc) {
                    declare(&mut locations, loc.clone(), 0, pos)?;
                }
                bindings.push((tid, reg, loc, pos));
            }
            _ => {
                let loc = cur.expect_ident()?;
                cur.expect_sym("=")?;
                let v = cur.expect_value()?;
                if explicit.contains(&loc) {
                    return Err(err(pos.0, pos.1, ParseErrorKind::Syntax(format!("location `{loc}` declared twice"))));
                }
                explicit.push(loc.clone());
                match locations.iter_mut().find(|(l, _)| *l == loc) {
                    Some(entry) => entry.1 = v,
                    None => declare(&mut locations, loc, v, pos)?,
                }
            }
        }
        Ok(())
    })?;

    let thread_count = parse_thread_header(&mut cur)?;
    let mut threads: Vec<AsmThread> =
        (0..thread_count).map(|id| AsmThread { id, bindings: Vec::new(), instructions: Vec::new() }).collect();
    for (tid, reg, loc, pos) in bindings {
        let Some(t) = threads.get_mut(tid) else {
            return Err(err(pos.0, pos.1, ParseErrorKind::Syntax(format!("binding for undeclared thread {tid}"))));
        };
        t.bindings.push((reg, loc));
    }

    let mut defined: Vec<Vec<Reg>> = vec![Vec::new(); thread_count];
    while !cur.at_end() && !cur.is_ident("exists") && !cur.is_ident("forall") && !cur.is_sym("~") {
        for (tid, thread) in threads.iter_mut().enumerate() {
            if !cur.is_sym("|") && !cur.is_sym(";") {
                let pos = cur.position();
                let instr = parse_instruction(&mut cur, thread)?;
                check_registers(&instr, thread, &mut defined[tid], pos)?;
                thread.instructions.push(instr);
                let memory = thread.instructions.iter().filter(|i| i.is_memory_access()).count();
                if memory > MAX_STATEMENTS || thread.instructions.len() > MAX_ASM_INSTRUCTIONS {
                    return Err(err(
                        pos.0,
                        pos.1,
                        ParseErrorKind::BoundExceeded(format!("too many instructions in P{tid}")),
                    ));
                }
            }
            let last = tid + 1 == thread_count;
            cur.expect_sym(if last { ";" } else { "|" })?;
        }
    }

    let (final_condition, pos) = cur.exists_clause()?;
    let test = LitmusTest { name, locations, threads: Threads::Asm(threads), final_condition };
    check_condition(&test, pos)?;
    Ok(test)
}

fn declare(locations: &mut Vec<(String, Value)>, loc: String, v: Value, pos: (usize, usize)) -> Result<(), ParseError> {
    if locations.len() == MAX_LOCATIONS {
        return Err(err(pos.0, pos.1, ParseErrorKind::BoundExceeded(format!("more than {MAX_LOCATIONS} locations"))));
    }
    locations.push((loc, v));
    Ok(())
}

fn parse_thread_header(cur: &mut Cursor) -> Result<usize, ParseError> {
    let mut n = 0;
    loop {
        let pos = cur.position();
        let label = cur.expect_ident()?;
        if label != format!("P{n}") {
            return Err(err(pos.0, pos.1, ParseErrorKind::Syntax(format!("expected thread `P{n}`, found `{label}`"))));
        }
        n += 1;
        if n > MAX_THREADS {
            return Err(err(pos.0, pos.1, ParseErrorKind::BoundExceeded(format!("more than {MAX_THREADS} threads"))));
        }
        if cur.eat_sym(";") {
            return Ok(n);
        }
        cur.expect_sym("|")?;
    }
}

fn register(cur: &mut Cursor) -> Result<Reg, ParseError> {
    let pos = cur.position();
    let name = cur.expect_ident()?;
    name.parse::<Reg>()
        .map_err(|_| err(pos.0, pos.1, ParseErrorKind::Syntax(format!("expected register, found `{name}`"))))
}

fn address(cur: &mut Cursor, thread: &AsmThread) -> Result<Address, ParseError> {
    cur.expect_sym("[")?;
    let pos = cur.position();
    let reg = register(cur)?;
    if cur.is_sym(",") {
        return Err(cur.error(ParseErrorKind::Unsupported("address offsets".into())));
    }
    cur.expect_sym("]")?;
    let location = thread
        .binding(reg)
        .ok_or_else(|| err(pos.0, pos.1, ParseErrorKind::UnboundAddressRegister(format!("{}:{reg}", thread.id))))?;
    Ok(Address { reg, location: location.to_string() })
}

fn parse_instruction(cur: &mut Cursor, thread: &AsmThread) -> Result<AsmInstr, ParseError> {
    let pos = cur.position();
    let word = cur.expect_ident()?;
    let mnemonic = word.to_ascii_uppercase();
    let swap = |acquire, release| (acquire, release);
    let instr = match mnemonic.as_str() {
        "MOV" => {
            let dst = register(cur)?;
            cur.expect_sym(",")?;
            let src =
                if cur.eat_sym("#") { MovSource::Imm(cur.expect_value()?) } else { MovSource::Reg(register(cur)?) };
            if dst.is_zero() {
                return Err(err(pos.0, pos.1, ParseErrorKind::MovToZeroRegister));
            }
            AsmInstr::Mov { dst, src }
        }
        "LDR" | "LDAR" => {
            let dst = register(cur)?;
            cur.expect_sym(",")?;
            let addr = address(cur, thread)?;
            AsmInstr::Load { acquire: mnemonic == "LDAR", dst, addr }
        }
        "STR" | "STLR" => {
            let src = register(cur)?;
            cur.expect_sym(",")?;
            let addr = address(cur, thread)?;
            AsmInstr::Store { release: mnemonic == "STLR", src, addr }
        }
        "SWP" | "SWPA" | "SWPL" | "SWPAL" => {
            let (acquire, release) = match mnemonic.as_str() {
                "SWP" => swap(false, false),
                "SWPA" => swap(true, false),
                "SWPL" => swap(false, true),
                _ => swap(true, true),
            };
            let src = register(cur)?;
            cur.expect_sym(",")?;
            let dst = register(cur)?;
            cur.expect_sym(",")?;
            let addr = address(cur, thread)?;
            AsmInstr::Swap { acquire, release, src, dst, addr }
        }
        "DMB" => {
            let opt_pos = cur.position();
            let opt = cur.expect_ident()?.to_ascii_uppercase();
            let domain = match opt.as_str() {
                "ISH" | "SY" => BarrierDomain::Sy,
                "ISHLD" | "LD" => BarrierDomain::Ld,
                "ISHST" | "ST" => BarrierDomain::St,
                other => {
                    return Err(err(
                        opt_pos.0,
                        opt_pos.1,
                        ParseErrorKind::Syntax(format!("unknown barrier option `{other}`")),
                    ))
                }
            };
            AsmInstr::Dmb(domain)
        }
        other if BRANCH_MNEMONICS.contains(&other) || other.starts_with("B.") => {
            return Err(err(pos.0, pos.1, ParseErrorKind::Unsupported(format!("branch `{word}`"))));
        }
        _ => return Err(err(pos.0, pos.1, ParseErrorKind::UnknownMnemonic(word))),
    };
    Ok(instr)
}

fn check_registers(
    instr: &AsmInstr,
    thread: &AsmThread,
    defined: &mut Vec<Reg>,
    pos: (usize, usize),
) -> Result<(), ParseError> {
    for src in instr.source_registers() {
        if src.is_zero() || defined.iter().any(|d| d.aliases(src)) {
            continue;
        }
        if thread.binding(src).is_some() {
            return Err(err(
                pos.0,
                pos.1,
                ParseErrorKind::Unsupported(format!("address register `{src}` used as data")),
            ));
        }
        return Err(err(pos.0, pos.1, ParseErrorKind::RegisterUsedBeforeDefinition(format!("{}:{src}", thread.id))));
    }
    if let Some(dst) = instr.destination() {
        if thread.binding(dst).is_some() {
            return Err(err(
                pos.0,
                pos.1,
                ParseErrorKind::Unsupported(format!("overwriting address register `{dst}`")),
            ));
        }
        if !dst.is_zero() {
            defined.push(dst);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::litmus::{Mnemonic, Observable};

    fn wrap(p1: &str) -> String {
        format!(
            "AArch64 t\n{{\n  x = 0; y = 0;\n  1:X1 = y; 1:X3 = x;\n}}\n P0 | P1 ;\n    | MOV W2, #2 ;\n    | {p1} ;\nexists (y = 2)\n"
        )
    }

    fn swap_of(text: &str) -> AsmInstr {
        let t = parse_asm_litmus(text).unwrap();
        let Threads::Asm(ts) = &t.threads else { panic!() };
        ts[1].instructions[1].clone()
    }

    #[test]
    fn swpl_zero_destination() {
        let i = swap_of(&wrap("SWPL W2, WZR, [X1]"));
        assert_eq!(i.mnemonic(), Mnemonic::Swpl);
        assert_eq!(
            i,
            AsmInstr::Swap {
                acquire: false,
                release: true,
                src: Reg::w(2),
                dst: Reg::WZR,
                addr: Address { reg: Reg::x(1), location: "y".into() },
            }
        );
    }

    #[test]
    fn swpl_named_destination() {
        let i = swap_of(&wrap("SWPL W2, W15, [X1]"));
        assert_eq!(i.destination(), Some(Reg::w(15)));
    }

    #[test]
    fn dmb_spellings() {
        assert_eq!(swap_of(&wrap("DMB ISHLD")), AsmInstr::Dmb(BarrierDomain::Ld));
        assert_eq!(swap_of(&wrap("DMB ISH")), AsmInstr::Dmb(BarrierDomain::Sy));
        assert_eq!(swap_of(&wrap("DMB ISHST")), AsmInstr::Dmb(BarrierDomain::St));
    }

    fn kind(text: &str) -> ParseErrorKind {
        parse_asm_litmus(text).unwrap_err().kind
    }

    #[test]
    fn errors() {
        assert_eq!(kind(&wrap("FOO W2, [X1]")), ParseErrorKind::UnknownMnemonic("FOO".into()));
        assert_eq!(kind(&wrap("STR W2, [X5]")), ParseErrorKind::UnboundAddressRegister("1:X5".into()));
        assert_eq!(kind(&wrap("MOV WZR, #1")), ParseErrorKind::MovToZeroRegister);
        assert_eq!(kind(&wrap("STR W7, [X1]")), ParseErrorKind::RegisterUsedBeforeDefinition("1:W7".into()));
        assert!(matches!(kind(&wrap("CBNZ W2, L0")), ParseErrorKind::Unsupported(_)));
        assert!(matches!(kind(&wrap("MOV X1, #1")), ParseErrorKind::Unsupported(_)));
        assert!(matches!(kind(&wrap("DMB OSH")), ParseErrorKind::Syntax(_)));
        let undefined_obs = wrap("LDR W4, [X3]").replace("exists (y = 2)", "exists (1:W5 = 0)");
        assert_eq!(kind(&undefined_obs), ParseErrorKind::UndefinedObservable("1:W5".into()));
    }

    #[test]
    fn register_dataflow_and_observables() {
        let text = wrap("LDR W4, [X3]").replace("exists (y = 2)", "exists (1:W4 = 0 /\\ 1:X2 = 2)");
        let t = parse_asm_litmus(&text).unwrap();
        assert!(t.defines(&Observable::register(1, "X4")));
        assert_eq!(t.final_condition.observables().len(), 2);
    }

    #[test]
    fn binding_declares_location() {
        let text = "AArch64 t\n{ 0:X1 = z; }\n P0 ;\n MOV W0, #1 ;\n STR W0, [X1] ;\nexists (z = 1)\n";
        let t = parse_asm_litmus(text).unwrap();
        assert_eq!(t.locations, vec![("z".to_string(), 0)]);
    }
}

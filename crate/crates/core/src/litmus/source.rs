//! Parser for the C-style dialect.

use std::collections::BTreeSet;

use super::lexer::{err, split_header, tokenize, Cursor, Tok};
use super::{
    LitmusTest, MemoryOrder, Observable, ParseError, ParseErrorKind, Reg, SourceStmt, SourceThread, Threads, Value,
    MAX_LOCATIONS, MAX_STATEMENTS, MAX_THREADS,
};

const CONTROL_KEYWORDS: [&str; 8] = ["if", "else", "while", "for", "do", "goto", "switch", "return"];

/// Parses a `C` litmus test.
pub fn parse_source_litmus(text: &str) -> Result<LitmusTest, ParseError> {
    let (arch, name, rest, first_line) = split_header(text)?;
    if arch != "C" {
        return Err(err(first_line - 1, 1, ParseErrorKind::Syntax(format!("expected `C` header, found `{arch}`"))));
    }
    let mut cur = Cursor::new(tokenize(rest, first_line)?);
    let locations = parse_init(&mut cur)?;
    let declared: BTreeSet<&str> = locations.iter().map(|(l, _)| l.as_str()).collect();

    let mut threads = Vec::new();
    while matches!(cur.peek(), Some(Tok::Ident(s)) if s.starts_with('P') && s[1..].parse::<usize>().is_ok()) {
        if threads.len() == MAX_THREADS {
            return Err(cur.error(ParseErrorKind::BoundExceeded(format!("more than {MAX_THREADS} threads"))));
        }
        threads.push(parse_thread(&mut cur, threads.len(), &declared)?);
    }
    if threads.is_empty() {
        return Err(cur.syntax("thread `P0`"));
    }

    let (final_condition, pos) = cur.exists_clause()?;
    let test = LitmusTest { name, locations, threads: Threads::Source(threads), final_condition };
    check_condition(&test, pos)?;
    Ok(test)
}

pub(super) fn parse_init_entries(
    cur: &mut Cursor,
    mut entry: impl FnMut(&mut Cursor) -> Result<(), ParseError>,
) -> Result<(), ParseError> {
    cur.expect_sym("{")?;
    while !cur.eat_sym("}") {
        entry(cur)?;
        if !cur.eat_sym(";") && !cur.is_sym("}") {
            return Err(cur.syntax("`;` or `}`"));
        }
    }
    Ok(())
}

fn parse_init(cur: &mut Cursor) -> Result<Vec<(String, Value)>, ParseError> {
    let mut locations: Vec<(String, Value)> = Vec::new();
    parse_init_entries(cur, |cur| {
        let pos = cur.position();
        let loc = cur.expect_ident()?;
        if locations.iter().any(|(l, _)| *l == loc) {
            return Err(err(pos.0, pos.1, ParseErrorKind::Syntax(format!("location `{loc}` declared twice"))));
        }
        if locations.len() == MAX_LOCATIONS {
            return Err(err(
                pos.0,
                pos.1,
                ParseErrorKind::BoundExceeded(format!("more than {MAX_LOCATIONS} locations")),
            ));
        }
        cur.expect_sym("=")?;
        let v = cur.expect_value()?;
        locations.push((loc, v));
        Ok(())
    })?;
    Ok(locations)
}

fn parse_thread(cur: &mut Cursor, expected_id: usize, declared: &BTreeSet<&str>) -> Result<SourceThread, ParseError> {
    let pos = cur.position();
    let label = cur.expect_ident()?;
    if label != format!("P{expected_id}") {
        return Err(err(
            pos.0,
            pos.1,
            ParseErrorKind::Syntax(format!("expected thread `P{expected_id}`, found `{label}`")),
        ));
    }
    cur.expect_sym("(")?;
    if !cur.is_sym(")") {
        loop {
            let ty_pos = cur.position();
            let ty = cur.expect_ident()?;
            if ty != "atomic_int" {
                return Err(err(ty_pos.0, ty_pos.1, ParseErrorKind::Unsupported(format!("parameter type `{ty}`"))));
            }
            cur.expect_sym("*")?;
            let p_pos = cur.position();
            let p = cur.expect_ident()?;
            if !declared.contains(p.as_str()) {
                return Err(err(p_pos.0, p_pos.1, ParseErrorKind::UndeclaredLocation(p)));
            }
            if !cur.eat_sym(",") {
                break;
            }
        }
    }
    cur.expect_sym(")")?;
    cur.expect_sym("{")?;

    let mut statements = Vec::new();
    let mut registers: BTreeSet<String> = BTreeSet::new();
    while !cur.eat_sym("}") {
        if statements.len() == MAX_STATEMENTS {
            return Err(cur.error(ParseErrorKind::BoundExceeded(format!(
                "more than {MAX_STATEMENTS} statements in P{expected_id}"
            ))));
        }
        statements.push(parse_statement(cur, declared, &mut registers)?);
    }
    Ok(SourceThread { id: expected_id, statements })
}

fn parse_statement(
    cur: &mut Cursor,
    declared: &BTreeSet<&str>,
    registers: &mut BTreeSet<String>,
) -> Result<SourceStmt, ParseError> {
    if let Some(Tok::Ident(word)) = cur.peek() {
        if CONTROL_KEYWORDS.contains(&word.as_str()) {
            return Err(cur.error(ParseErrorKind::Unsupported(format!("control flow (`{word}`)"))));
        }
    }
    if cur.is_sym("{") {
        return Err(cur.error(ParseErrorKind::Unsupported("nested block".into())));
    }

    let mut dst = None;
    if cur.is_ident("int") {
        cur.bump();
        let pos = cur.position();
        let reg = cur.expect_ident()?;
        if reg.parse::<Reg>().is_ok() {
            return Err(err(pos.0, pos.1, ParseErrorKind::Syntax(format!("register name `{reg}` is reserved"))));
        }
        if declared.contains(reg.as_str()) {
            return Err(err(pos.0, pos.1, ParseErrorKind::Syntax(format!("register `{reg}` shadows a location"))));
        }
        if registers.contains(&reg) {
            return Err(err(pos.0, pos.1, ParseErrorKind::Syntax(format!("register `{reg}` declared twice"))));
        }
        cur.expect_sym("=")?;
        dst = Some((reg, pos));
    }

    let fn_pos = cur.position();
    let func = cur.expect_ident()?;
    cur.expect_sym("(")?;
    let stmt = match func.as_str() {
        "atomic_load_explicit" => {
            let loc = location(cur, declared)?;
            cur.expect_sym(",")?;
            let order = order(cur, "load", MemoryOrder::valid_for_load)?;
            let Some((dst, _)) = dst.take() else {
                return Err(err(
                    fn_pos.0,
                    fn_pos.1,
                    ParseErrorKind::Syntax("load result must be assigned to a register".into()),
                ));
            };
            SourceStmt::Load { dst, loc, order }
        }
        "atomic_store_explicit" => {
            if let Some((_, pos)) = &dst {
                return Err(err(pos.0, pos.1, ParseErrorKind::Syntax("store has no result".into())));
            }
            let loc = location(cur, declared)?;
            cur.expect_sym(",")?;
            let value = value_operand(cur, registers)?;
            cur.expect_sym(",")?;
            let order = order(cur, "store", MemoryOrder::valid_for_store)?;
            SourceStmt::Store { loc, value, order }
        }
        "atomic_exchange_explicit" => {
            let loc = location(cur, declared)?;
            cur.expect_sym(",")?;
            let value = value_operand(cur, registers)?;
            cur.expect_sym(",")?;
            let order = order(cur, "exchange", |_| true)?;
            SourceStmt::Exchange { dst: dst.take().map(|(r, _)| r), loc, value, order }
        }
        "atomic_thread_fence" => {
            if let Some((_, pos)) = &dst {
                return Err(err(pos.0, pos.1, ParseErrorKind::Syntax("fence has no result".into())));
            }
            let order = order(cur, "fence", MemoryOrder::valid_for_fence)?;
            SourceStmt::Fence { order }
        }
        other => {
            return Err(err(fn_pos.0, fn_pos.1, ParseErrorKind::Unsupported(format!("`{other}`"))));
        }
    };
    cur.expect_sym(")")?;
    cur.expect_sym(";")?;
    if let Some(r) = stmt.destination() {
        registers.insert(r.to_string());
    }
    Ok(stmt)
}

fn location(cur: &mut Cursor, declared: &BTreeSet<&str>) -> Result<String, ParseError> {
    let pos = cur.position();
    cur.eat_sym("&");
    let loc = cur.expect_ident()?;
    if !declared.contains(loc.as_str()) {
        return Err(err(pos.0, pos.1, ParseErrorKind::UndeclaredLocation(loc)));
    }
    Ok(loc)
}

fn value_operand(cur: &mut Cursor, registers: &BTreeSet<String>) -> Result<Value, ParseError> {
    if let Some(Tok::Ident(name)) = cur.peek() {
        let kind = if registers.contains(name) {
            ParseErrorKind::Unsupported(format!("register operand `{name}` (values must be constants)"))
        } else {
            ParseErrorKind::RegisterUsedBeforeDefinition(name.clone())
        };
        return Err(cur.error(kind));
    }
    cur.expect_value()
}

fn order(cur: &mut Cursor, operation: &'static str, valid: fn(MemoryOrder) -> bool) -> Result<MemoryOrder, ParseError> {
    let pos = cur.position();
    let name = cur.expect_ident()?;
    if name == "memory_order_consume" {
        return Err(err(pos.0, pos.1, ParseErrorKind::Unsupported("memory_order_consume".into())));
    }
    let Some(order) = MemoryOrder::from_c_name(&name) else {
        return Err(err(pos.0, pos.1, ParseErrorKind::Syntax(format!("unknown memory order `{name}`"))));
    };
    if !valid(order) {
        return Err(err(pos.0, pos.1, ParseErrorKind::InvalidOrder { order: name, operation }));
    }
    Ok(order)
}

/// Checks that every observable in the final condition is defined by `test`.
pub(super) fn check_condition(test: &LitmusTest, pos: (usize, usize)) -> Result<(), ParseError> {
    for obs in test.final_condition.observables() {
        if !test.defines(&obs) {
            let kind = match &obs {
                Observable::Memory(loc) => ParseErrorKind::UndeclaredLocation(loc.clone()),
                Observable::Register { .. } => ParseErrorKind::UndefinedObservable(obs.to_string()),
            };
            return Err(err(pos.0, pos.1, kind));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::litmus::FinalCondition;

    const MINIMAL: &str = "C minimal\n{ x = 0; }\nP0 (atomic_int* x) {\n  atomic_store_explicit(x, 1, memory_order_relaxed);\n}\nexists (x = 1)\n";

    #[test]
    fn minimal_store() {
        let t = parse_source_litmus(MINIMAL).unwrap();
        assert_eq!(t.name, "minimal");
        let Threads::Source(ts) = &t.threads else { panic!() };
        assert_eq!(ts.len(), 1);
        assert_eq!(
            ts[0].statements,
            vec![SourceStmt::Store { loc: "x".into(), value: 1, order: MemoryOrder::Relaxed }]
        );
        assert_eq!(t.final_condition, FinalCondition::atom(Observable::memory("x"), 1));
    }

    fn kind(text: &str) -> ParseErrorKind {
        parse_source_litmus(text).unwrap_err().kind
    }

    #[test]
    fn consume_rejected() {
        let text = MINIMAL.replace(
            "atomic_store_explicit(x, 1, memory_order_relaxed);",
            "int r0 = atomic_load_explicit(x, memory_order_consume);",
        );
        assert_eq!(kind(&text), ParseErrorKind::Unsupported("memory_order_consume".into()));
    }

    #[test]
    fn error_cases() {
        let undeclared = MINIMAL.replace("atomic_store_explicit(x,", "atomic_store_explicit(z,");
        assert_eq!(kind(&undeclared), ParseErrorKind::UndeclaredLocation("z".into()));

        let branch = MINIMAL.replace("atomic_store_explicit", "if (1) atomic_store_explicit");
        assert!(matches!(kind(&branch), ParseErrorKind::Unsupported(_)));

        let reg_operand = MINIMAL.replace("(x, 1,", "(x, r3,");
        assert_eq!(kind(&reg_operand), ParseErrorKind::RegisterUsedBeforeDefinition("r3".into()));

        let acquire_store = MINIMAL.replace("memory_order_relaxed", "memory_order_acquire");
        assert!(matches!(kind(&acquire_store), ParseErrorKind::InvalidOrder { .. }));

        let relaxed_fence = MINIMAL.replace(
            "atomic_store_explicit(x, 1, memory_order_relaxed);",
            "atomic_thread_fence(memory_order_relaxed);",
        );
        assert!(matches!(kind(&relaxed_fence), ParseErrorKind::InvalidOrder { .. }));

        let big = MINIMAL.replace("(x, 1,", "(x, 9,");
        assert!(matches!(kind(&big), ParseErrorKind::BoundExceeded(_)));

        let bad_obs = MINIMAL.replace("exists (x = 1)", "exists (P0:r0 = 1)");
        assert_eq!(kind(&bad_obs), ParseErrorKind::UndefinedObservable("P0:r0".into()));

        let gap = MINIMAL.replace("P0 (", "P1 (");
        assert!(matches!(kind(&gap), ParseErrorKind::Syntax(_)));

        let loose_call = MINIMAL.replace("atomic_store_explicit(x, 1, memory_order_relaxed)", "atomic_store(x, 1)");
        assert!(matches!(kind(&loose_call), ParseErrorKind::Unsupported(_)));

        let trailing = format!("{MINIMAL} junk");
        assert!(matches!(kind(&trailing), ParseErrorKind::Syntax(_)));
    }

    #[test]
    fn error_position() {
        let text = MINIMAL.replace("atomic_store_explicit(x,", "atomic_store_explicit(z,");
        let e = parse_source_litmus(&text).unwrap_err();
        assert_eq!((e.line, e.column), (4, 25));
    }

    #[test]
    fn discarded_exchange() {
        let text = "C t\n{ y = 0; }\nP0 (atomic_int* y) {\n  atomic_exchange_explicit(y, 2, memory_order_release);\n  int r1 = atomic_exchange_explicit(y, 3, memory_order_acq_rel);\n}\nexists (P0:r1 = 2)\n";
        let t = parse_source_litmus(text).unwrap();
        let Threads::Source(ts) = &t.threads else { panic!() };
        assert_eq!(ts[0].statements[0].destination(), None);
        assert_eq!(ts[0].statements[1].destination(), Some("r1"));
        assert_eq!(ts[0].registers().into_iter().collect::<Vec<_>>(), vec!["r1".to_string()]);
    }

    #[test]
    fn thread_bound() {
        let mut text = String::from("C t\n{ x = 0; }\n");
        for i in 0..5 {
            text.push_str(&format!("P{i} (atomic_int* x) {{ }}\n"));
        }
        text.push_str("exists (x = 0)\n");
        assert!(matches!(kind(&text), ParseErrorKind::BoundExceeded(_)));
    }
}
